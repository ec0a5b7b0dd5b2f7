"""Reaction networks: data model, text format and exact conservation laws.

A network is an ordered species table plus a list of reactions
``alpha -> beta @ K``.  The reaction file grammar is line oriented::

    # comment
    species: A B C          (optional, must precede the reactions)
    A + 2 B -> C @ 0.5
    C -> 0 @ 1e-3

``0`` denotes the empty complex.  Species are indexed in declaration
order, or in order of first appearance when no ``species:`` line is given.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Sequence

import numpy as np

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_RATE_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_COEF_RE = re.compile(r"\d+")


class NetworkError(ValueError):
    """Invalid network structure."""


class NetworkParseError(NetworkError):
    """Syntax or semantic error in a reaction file, with 1-based position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Reaction:
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    rate: float

    def __post_init__(self):
        if len(self.alpha) != len(self.beta):
            raise NetworkError("alpha and beta have different lengths")
        if any(a < 0 for a in self.alpha) or any(b < 0 for b in self.beta):
            raise NetworkError("stoichiometric coefficients must be nonnegative")
        if self.alpha == self.beta:
            raise NetworkError("no-op reaction (alpha == beta)")
        if not (self.rate > 0 and np.isfinite(self.rate)):
            raise NetworkError(f"rate constant must be positive and finite, got {self.rate}")
        object.__setattr__(self, "alpha", tuple(int(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(int(b) for b in self.beta))
        object.__setattr__(self, "rate", float(self.rate))

    @property
    def order(self) -> int:
        """Molecularity, the total number of consumed molecules."""
        return sum(self.alpha)


@dataclass(frozen=True)
class ReactionNetwork:
    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        if not self.species:
            raise NetworkError("network has no species")
        for name in self.species:
            if not IDENT_RE.fullmatch(name):
                raise NetworkError(f"invalid species name {name!r}")
        if len(set(self.species)) != len(self.species):
            raise NetworkError("species names must be unique")
        if not self.reactions:
            raise NetworkError("network needs at least one reaction")
        m = len(self.species)
        for r in self.reactions:
            if len(r.alpha) != m:
                raise NetworkError(
                    f"reaction vector length {len(r.alpha)} != species count {m}")

    @classmethod
    def from_arrays(cls, species: Sequence[str], alpha, beta, rates) -> "ReactionNetwork":
        alpha = np.asarray(alpha, dtype=np.int64)
        beta = np.asarray(beta, dtype=np.int64)
        reactions = [Reaction(tuple(a), tuple(b), float(k))
                     for a, b, k in zip(alpha, beta, np.atleast_1d(rates))]
        return cls(tuple(species), tuple(reactions))

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    @cached_property
    def alpha(self) -> np.ndarray:
        """Reactant matrix, shape (reactions, species)."""
        a = np.array([r.alpha for r in self.reactions], dtype=np.int64)
        a.setflags(write=False)
        return a

    @cached_property
    def beta(self) -> np.ndarray:
        """Product matrix, shape (reactions, species)."""
        b = np.array([r.beta for r in self.reactions], dtype=np.int64)
        b.setflags(write=False)
        return b

    @cached_property
    def stoichiometry(self) -> np.ndarray:
        """Net change ``beta - alpha`` per reaction, shape (reactions, species)."""
        d = self.beta - self.alpha
        d.setflags(write=False)
        return d

    @cached_property
    def rates(self) -> np.ndarray:
        k = np.array([r.rate for r in self.reactions], dtype=float)
        k.setflags(write=False)
        return k

    def index(self, name: str) -> int:
        return self.species.index(name)


@dataclass(frozen=True)
class ConservationBasis:
    """Integer vectors ``mu`` with ``<mu, beta - alpha> = 0`` for every reaction."""

    vectors: tuple[tuple[int, ...], ...]
    n_species: int

    def __post_init__(self):
        vecs = tuple(tuple(int(x) for x in v) for v in self.vectors)
        object.__setattr__(self, "vectors", vecs)
        for v in vecs:
            if len(v) != self.n_species:
                raise NetworkError("conservation vector has wrong length")
            if not any(v):
                raise NetworkError("zero conservation vector")
        if vecs and _rational_rank([list(v) for v in vecs]) != len(vecs):
            raise NetworkError("conservation vectors are linearly dependent")

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    @property
    def matrix(self) -> np.ndarray:
        """Basis as an integer array of shape (k, species)."""
        if not self.vectors:
            return np.zeros((0, self.n_species), dtype=np.int64)
        return np.array(self.vectors, dtype=np.int64)

    def contains_ones(self) -> bool:
        """True if the all-ones vector lies in the span of the basis."""
        if not self.vectors:
            return False
        rows = [list(v) for v in self.vectors]
        return _rational_rank(rows + [[1] * self.n_species]) == len(rows)

    def annihilates(self, net: ReactionNetwork) -> bool:
        return all(sum(m * d for m, d in zip(mu, row)) == 0
                   for mu in self.vectors for row in net.stoichiometry.tolist())


# --------------------------------------------------------------------------
# parsing / formatting


def _parse_side(text: str, line_no: int, col0: int, species: list[str],
                declared: bool) -> dict[int, int]:
    """Parse ``0`` or ``term (+ term)*``; returns species index -> coefficient."""
    stripped = text.strip()
    lead = len(text) - len(text.lstrip())
    if stripped == "":
        raise NetworkParseError("empty reaction side (use 0 for the empty complex)",
                                line_no, col0 + 1)
    if stripped == "0":
        return {}
    out: dict[int, int] = {}
    pos = 0
    parts = stripped.split("+")
    for part in parts:
        col = col0 + lead + pos + 1
        pos += len(part) + 1
        term = part.strip()
        col += len(part) - len(part.lstrip())
        if not term:
            raise NetworkParseError("missing term around '+'", line_no, col)
        coef = 1
        m = _COEF_RE.match(term)
        if m:
            coef = int(m.group())
            if coef <= 0:
                raise NetworkParseError("coefficient must be a positive integer", line_no, col)
            rest = term[m.end():].lstrip()
            col += len(term) - len(rest)
        else:
            rest = term
        if not IDENT_RE.fullmatch(rest):
            raise NetworkParseError(f"invalid species term {term!r}", line_no, col)
        if rest not in species:
            if declared:
                raise NetworkParseError(f"unknown species {rest!r}", line_no, col)
            species.append(rest)
        idx = species.index(rest)
        out[idx] = out.get(idx, 0) + coef
    return out


def parse_network(text: str) -> ReactionNetwork:
    """Parse the reaction file format into a :class:`ReactionNetwork`.

    Raises:
        NetworkParseError: on syntax errors (with line and column), unknown
            species when a ``species:`` line is present, nonpositive rates
            and no-op reactions.
    """
    species: list[str] = []
    declared = False
    raw: list[tuple[dict[int, int], dict[int, int], float, int]] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.strip()
        if not body or body.startswith("#"):
            continue
        indent = len(line) - len(line.lstrip())
        if body.startswith("species:") or body.startswith("species :"):
            if declared or raw or species:
                raise NetworkParseError("species line must come first and only once",
                                        line_no, indent + 1)
            names = body.split(":", 1)[1].split()
            if not names:
                raise NetworkParseError("empty species declaration", line_no, indent + 1)
            for name in names:
                if not IDENT_RE.fullmatch(name):
                    raise NetworkParseError(f"invalid species name {name!r}", line_no,
                                            line.index(name) + 1)
                if name in species:
                    raise NetworkParseError(f"duplicate species {name!r}", line_no,
                                            line.index(name) + 1)
                species.append(name)
            declared = True
            continue
        arrow = line.find("->")
        if arrow < 0:
            raise NetworkParseError("expected '->'", line_no, indent + 1)
        at = line.find("@", arrow)
        if at < 0:
            raise NetworkParseError("expected '@ rate'", line_no, len(line.rstrip()) + 1)
        if "->" in line[arrow + 2:]:
            raise NetworkParseError("more than one '->'", line_no,
                                    line.index("->", arrow + 2) + 1)
        rate_text = line[at + 1:].strip()
        rate_col = at + 2 + (len(line[at + 1:]) - len(line[at + 1:].lstrip()))
        if not _RATE_RE.fullmatch(rate_text):
            raise NetworkParseError(f"invalid rate {rate_text!r}", line_no, rate_col)
        rate = float(rate_text)
        if not rate > 0:
            raise NetworkParseError("rate must be positive", line_no, rate_col)
        lhs = _parse_side(line[:arrow], line_no, 0, species, declared)
        rhs = _parse_side(line[arrow + 2:at], line_no, arrow + 2, species, declared)
        if lhs == rhs:
            raise NetworkParseError("no-op reaction (both sides equal)", line_no, indent + 1)
        raw.append((lhs, rhs, rate, line_no))
    if not raw:
        raise NetworkParseError("no reactions found", max(1, len(text.splitlines())), 1)
    m = len(species)
    reactions = []
    for lhs, rhs, rate, _ in raw:
        alpha = tuple(lhs.get(i, 0) for i in range(m))
        beta = tuple(rhs.get(i, 0) for i in range(m))
        reactions.append(Reaction(alpha, beta, rate))
    return ReactionNetwork(tuple(species), tuple(reactions))


def _format_side(vec: Sequence[int], species: Sequence[str]) -> str:
    terms = []
    for name, c in zip(species, vec):
        if c == 1:
            terms.append(name)
        elif c > 1:
            terms.append(f"{c} {name}")
    return " + ".join(terms) if terms else "0"


def _format_rate(k: float) -> str:
    s = repr(float(k))
    return s[:-2] if s.endswith(".0") else s


def format_network(net: ReactionNetwork) -> str:
    """Render the canonical reaction-file text for ``net``.

    A ``species:`` line is emitted only when first-appearance order would
    not reproduce the species table.
    """
    lines = [f"{_format_side(r.alpha, net.species)} -> "
             f"{_format_side(r.beta, net.species)} @ {_format_rate(r.rate)}"
             for r in net.reactions]
    seen: list[int] = []
    for r in net.reactions:
        for vec in (r.alpha, r.beta):
            for i, c in enumerate(vec):
                if c and i not in seen:
                    seen.append(i)
    if seen != list(range(net.n_species)):
        lines.insert(0, "species: " + " ".join(net.species))
    return "\n".join(lines)


def load_network(path) -> ReactionNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


# --------------------------------------------------------------------------
# exact linear algebra


def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    rows = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _rational_rank(rows: Iterable[Sequence[int]]) -> int:
    rows = [[Fraction(x) for x in row] for row in rows]
    if not rows:
        return 0
    return len(_rref(rows, len(rows[0]))[1])


def _primitive(vec: list[Fraction]) -> tuple[int, ...]:
    den = 1
    for x in vec:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x != 0)
    if lead < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def conservation_laws(net: ReactionNetwork) -> ConservationBasis:
    """Integer basis of the left null space of the stoichiometric matrix.

    Exact rational Gauss-Jordan elimination of the rows ``beta - alpha``;
    one basis vector per free column, cleared to primitive integers with a
    positive leading entry.
    """
    m = net.n_species
    rows = [[Fraction(int(x)) for x in row] for row in net.stoichiometry.tolist()]
    reduced, pivots = _rref(rows, m)
    free = [c for c in range(m) if c not in pivots]
    vectors = []
    for f in free:
        v = [Fraction(0)] * m
        v[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            v[p] = -row[f]
        vectors.append(_primitive(v))
    return ConservationBasis(tuple(vectors), m)


def invariant_values(basis: ConservationBasis, n0: Sequence[int]) -> tuple[int, ...]:
    """Exact right-hand sides ``<mu_k, n0>``."""
    n0 = [int(x) for x in n0]
    if len(n0) != basis.n_species:
        raise ValueError(f"state has {len(n0)} entries, basis expects {basis.n_species}")
    return tuple(sum(a * b for a, b in zip(mu, n0)) for mu in basis.vectors)
