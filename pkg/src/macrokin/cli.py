"""``macrokin`` command line: simulate, meanfield, equilibrium, verify.

Settings resolve as flags > ``--config`` JSON file > defaults.  Outputs
are written atomically into ``--output`` (a directory) and carry a
provenance header with the tool version and a hash of the resolved
configuration.  Exit status: 0 success, 1 parse/config error or failed
verification, 2 every replica truncated by ``--max-events``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .equilibrium import (StateSpaceOverflow, check_detailed_balance, entropy_project,
                          exact_chain, solve_unitarity)
from .io import atomic_write, csv_text, json_text, plain, provenance, public_config, trajectory_rows
from .meanfield import MeanFieldBlowup, OdeConfig, integrate, lv_first_integral
from .models import MODELS, get_model
from .network import NetworkError, conservation_laws, invariant_values, load_network
from .ssa import IntensityConvention, SimConfig, ensemble, terminal_counts
from .stats import l2_concentration

DEFAULTS: dict[str, Any] = {
    "network": None, "model": None, "params": {}, "N": None, "n0": None,
    "horizon": 1.0, "sample_dt": None, "replicas": 1, "seed": 0,
    "output": "macrokin-out", "format": "csv", "max_events": 10**9, "max_states": 200_000,
    "intensity_convention": "kurtz", "threads": None,
    "c0": None, "T": 10.0, "step": 1e-3, "record_every": 1, "sigma": 0.01,
}


class ConfigError(Exception):
    pass


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--params entry {item!r} is not key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


def _vector(text, name: str, kind=float):
    if text is None or isinstance(text, list):
        return text
    try:
        return [kind(x) for x in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"--{name} must be a comma-separated list of numbers") from None


def _resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            file_cfg = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path}: {exc}") from None
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"config file {path}: unknown keys {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if key == "params":
            cfg["params"] = {**(cfg.get("params") or {}), **_parse_params(val)}
        elif val is not None:
            cfg[key] = val
    cfg["n0"] = _vector(cfg["n0"], "n0", int)
    cfg["c0"] = _vector(cfg["c0"], "c0", float)
    try:
        cfg["intensity_convention"] = IntensityConvention.parse(cfg["intensity_convention"]).value
    except ValueError:
        raise ConfigError(f"unknown intensity convention {cfg['intensity_convention']!r}") from None
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError("--format must be csv or json")
    return cfg


def _source(cfg: dict):
    """``(network, n0, N, basis, model_name)`` from ``--network`` or ``--model``."""
    if bool(cfg["network"]) == bool(cfg["model"]):
        raise ConfigError("give exactly one of --network or --model")
    basis = None
    name = None
    if cfg["network"]:
        path = Path(cfg["network"])
        if not path.is_file():
            raise ConfigError(f"network file not found: {path}")
        net = load_network(path)
        if cfg["n0"] is None:
            raise ConfigError("--n0 is required with --network")
        N = cfg["N"] or max(1, sum(cfg["n0"]))
        n0 = tuple(cfg["n0"])
    else:
        name = cfg["model"]
        entry = get_model(name)
        params = dict(cfg["params"])
        if cfg["N"] is not None and "N" in entry.defaults:
            params.setdefault("N", cfg["N"])
        built = entry.build(params)
        net, n0, N, basis = built.network, built.n0, built.N, built.basis
        if cfg["n0"] is not None:
            n0 = tuple(cfg["n0"])
    if len(n0) != net.n_species:
        raise ConfigError(f"n0 has {len(n0)} entries, network has {net.n_species} species")
    return net, n0, int(N), basis, name


def _write_tables(out: Path, fmt: str, prov: dict, tables: dict, summary: dict) -> list[Path]:
    written = []
    if fmt == "csv":
        for name, (header, rows) in tables.items():
            written.append(atomic_write(out / f"{name}.csv", csv_text(header, rows, prov)))
        written.append(atomic_write(out / "summary.json", json_text(summary, prov)))
    else:
        body = {**summary, "tables": {k: {"header": h, "rows": r} for k, (h, r) in tables.items()}}
        written.append(atomic_write(out / "result.json", json_text(body, prov)))
    return written


def _concentration_summary(net, n0, N, basis, finals, sigma):
    res = solve_unitarity(net)
    if not res.feasible:
        return {"c_star": None, "reason": "no positive balanced point"}
    basis = basis or conservation_laws(net)
    b = np.array(invariant_values(basis, n0), dtype=float) / N
    proj = entropy_project(res.xi, basis, b)
    if not proj.ok:
        return {"c_star": None, "reason": f"projection {proj.status}"}
    rep = l2_concentration(finals, N, proj.c_star, sigma)
    return {"c_star": proj.c_star, **rep.to_dict()}


def cmd_simulate(cfg: dict) -> int:
    out = Path(cfg["output"])
    prov = provenance(cfg)
    if cfg["model"] and cfg["network"] is None and get_model(cfg["model"]).kind == "bespoke":
        entry = get_model(cfg["model"])
        result = entry.run(cfg["params"], int(cfg["seed"]), int(cfg["replicas"]))
        summary = {"config": public_config(cfg), "model": entry.name,
                   "params": entry.resolve(cfg["params"]), **result.summary}
        _write_tables(out, cfg["format"], prov, result.tables, summary)
        print(json.dumps(_summary_line(summary), default=str))
        return 0

    net, n0, N, basis, _ = _source(cfg)
    sim = SimConfig(seed=int(cfg["seed"]), horizon=float(cfg["horizon"]),
                    sample_dt=cfg["sample_dt"], max_events=int(cfg["max_events"]),
                    intensity_convention=cfg["intensity_convention"])
    trajs = ensemble(net, n0, N, sim, int(cfg["replicas"]), cfg["threads"])
    finals = terminal_counts(trajs)
    header = ["t", *net.species]
    replicas = [{"replica": r, "seed": tr.seed, "terminal": tr.counts[-1], "jump_count": tr.jump_count,
                 "truncated": tr.truncated, "absorbed": tr.absorbed, "final_time": tr.final_time}
                for r, tr in enumerate(trajs)]
    summary = {"config": public_config(cfg), "species": net.species, "N": N, "n0": n0,
               "intensity_convention": cfg["intensity_convention"],
               "truncated": int(sum(tr.truncated for tr in trajs)),
               "absorbed": int(sum(tr.absorbed for tr in trajs)),
               "mean_terminal": finals.mean(axis=0) / N, "replicas": replicas}
    if len(trajs) > 1:
        summary["concentration"] = _concentration_summary(net, n0, N, basis, finals, cfg["sigma"])
    tables = {}
    if len(trajs) == 1:
        tables["trajectory"] = (header, trajectory_rows(trajs[0].times, trajs[0].counts))
    else:
        tables["terminal"] = (["replica", "seed", "jump_count", "truncated", *net.species],
                              [[r["replica"], r["seed"], r["jump_count"], int(r["truncated"]),
                                *r["terminal"].tolist()] for r in replicas])
    _write_tables(out, cfg["format"], prov, tables, summary)
    print(json.dumps(_summary_line(summary), default=str))
    if all(tr.truncated for tr in trajs):
        print("error: every replica hit --max-events", file=sys.stderr)
        return 2
    return 0


def _summary_line(summary: dict) -> dict:
    """Compact echo for the terminal (no per-replica lists)."""
    return plain({k: v for k, v in summary.items() if k != "replicas"})


def cmd_meanfield(cfg: dict) -> int:
    net, n0, N, _, name = _source(cfg)
    c0 = cfg["c0"] if cfg["c0"] is not None else [x / N for x in n0]
    if len(c0) != net.n_species:
        raise ConfigError(f"c0 has {len(c0)} entries, network has {net.n_species} species")
    try:
        ode = OdeConfig(step_dt=float(cfg["step"]), record_every=int(cfg["record_every"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    try:
        traj = integrate(net, c0, float(cfg["T"]), ode)
    except MeanFieldBlowup as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    prov = provenance(cfg)
    summary = {"config": public_config(cfg), "species": net.species, "c0": c0, "final": traj.final,
               "clamp_count": traj.clamp_count}
    if name == "lotka_volterra":
        p = get_model(name).resolve(cfg["params"])
        vals = [lv_first_integral(c, p["mu3"], p["mu6"], p["K"]) for c in traj.values]
        h0 = vals[0]
        summary["first_integral"] = {"initial": h0,
                                     "max_relative_drift": max(abs(v - h0) for v in vals) / abs(h0)}
    tables = {"meanfield": (["t", *net.species], trajectory_rows(traj.times, traj.values))}
    _write_tables(Path(cfg["output"]), cfg["format"], prov, tables, summary)
    print(json.dumps(_summary_line(summary), default=str))
    return 0


def cmd_equilibrium(cfg: dict) -> int:
    net, n0, N, basis, _ = _source(cfg)
    basis = basis or conservation_laws(net)
    res = solve_unitarity(net)
    report: dict[str, Any] = {"config": public_config(cfg), "species": net.species,
                              "xi": res.xi, "residual": res.residual, "feasible": res.feasible}
    tables = {}
    if not res.feasible:
        report["reason"] = res.reason
        print(f"UNITARITY INFEASIBLE: {res.reason}", file=sys.stderr)
    else:
        db = check_detailed_balance(net, res.xi)
        b = np.array(invariant_values(basis, n0), dtype=float) / N
        proj = entropy_project(res.xi, basis, b)
        report.update({"detailed_balance": db.balanced, "c_star": proj.c_star,
                       "multipliers": proj.multipliers, "kl_value": proj.kl_value,
                       "projection_status": proj.status})
        tables["c_star"] = (["species", "c_star"],
                            [[s, float(c)] for s, c in zip(net.species, proj.c_star)])
    try:
        chain = exact_chain(net, n0, N, int(cfg["max_states"]), cfg["intensity_convention"])
        report["exact_chain"] = {"states": chain.n_states, "irreducible": chain.irreducible}
        tables["stationary"] = ([*net.species, "prob"],
                                [[*s.tolist(), float(p)] for s, p in zip(chain.states, chain.stationary)])
    except StateSpaceOverflow as exc:
        report["exact_chain"] = {"skipped": str(exc)}
    prov = provenance(cfg)
    out = Path(cfg["output"])
    if cfg["format"] == "csv":
        for name, (header, rows) in tables.items():
            atomic_write(out / f"{name}.csv", csv_text(header, rows, prov))
        atomic_write(out / "equilibrium.json", json_text(report, prov))
    else:
        body = {**report, "tables": {k: {"header": h, "rows": r} for k, (h, r) in tables.items()}}
        atomic_write(out / "equilibrium.json", json_text(body, prov))
    print(json.dumps(_summary_line(report), default=str))
    return 0


def cmd_verify(suite: str, cfg: dict) -> int:
    from .verify import SUITES, run_suite, table
    if suite not in SUITES:
        print(f"error: unknown suite {suite!r}; valid suites: {', '.join(SUITES)}", file=sys.stderr)
        return 1
    checks = run_suite(suite, seed=int(cfg["seed"]))
    body = {"suite": suite, "passed": all(c.passed for c in checks),
            "checks": [c.to_dict() for c in checks]}
    if cfg["format"] == "json":
        print(json_text(body), end="")
    else:
        print(table(checks))
    if cfg.get("_output_given"):
        atomic_write(Path(cfg["output"]) / f"verify_{suite}.json", json_text(body, provenance(cfg)))
    return 0 if body["passed"] else 1


def _common(p: argparse.ArgumentParser, source: bool = True):
    if source:
        p.add_argument("--network", help="reaction file")
        p.add_argument("--model", help=f"model name ({', '.join(MODELS)})")
        p.add_argument("--params", nargs="*", metavar="K=V", help="model parameters")
        p.add_argument("--N", type=int, help="population scale")
        p.add_argument("--n0", help="initial counts, comma separated")
        p.add_argument("--intensity-convention", dest="intensity_convention",
                       help="kurtz or paper-literal")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="output directory")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--config", help="JSON file of settings (flags take precedence)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="macrokin", description=__doc__.splitlines()[0].replace("``", ""))
    parser.add_argument("--version", action="version", version=f"macrokin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="exact stochastic simulation")
    _common(p)
    p.add_argument("--horizon", type=float)
    p.add_argument("--sample-dt", dest="sample_dt", type=float)
    p.add_argument("--replicas", type=int)
    p.add_argument("--max-events", dest="max_events", type=int)
    p.add_argument("--threads", type=int, help="worker threads (capped by MACROKIN_THREADS)")
    p.add_argument("--sigma", type=float, help="concentration test level")

    p = sub.add_parser("meanfield", help="mass-action ODE trajectory")
    _common(p)
    p.add_argument("--c0", help="initial concentrations, comma separated")
    p.add_argument("--T", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--record-every", dest="record_every", type=int)

    p = sub.add_parser("equilibrium", help="unitarity point, entropy projection, exact chain")
    _common(p)
    p.add_argument("--max-states", dest="max_states", type=int)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite")
    _common(p, source=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for truncated runs
        return 1 if exc.code == 2 else int(exc.code or 0)
    try:
        cfg = _resolve(args)
        cfg["command"] = args.command
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "meanfield":
            return cmd_meanfield(cfg)
        if args.command == "equilibrium":
            return cmd_equilibrium(cfg)
        cfg["_output_given"] = args.output is not None
        return cmd_verify(args.suite, cfg)
    except (ConfigError, NetworkError, KeyError, ValueError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
