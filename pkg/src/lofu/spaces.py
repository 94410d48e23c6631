"""Finite simplicial models of the base space and their star covers.

``BaseSpace`` bundles a complex with its star cover ``U`` and the product
covers ``U^n`` of ``M^n``.  Products form a simplicial space with face maps
``π_i`` omitting factor ``i``; the simplicial differential is

    ∂f = sum_{j=1}^{n+1} (-1)^j π_j^* f.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import yaml

from .nerve import Cochain, CoverMorphism, CoverSystem, combine, pullback


class ComplexError(ValueError):
    pass


@dataclass(frozen=True)
class SimplicialComplex:
    vertex_count: int
    maximal: tuple[tuple[int, ...], ...]
    name: str = ""

    @cached_property
    def simplices(self) -> frozenset[frozenset[int]]:
        out = set()
        for s in self.maximal:
            for r in range(1, len(s) + 1):
                for face in itertools.combinations(s, r):
                    out.add(frozenset(face))
        return frozenset(out)

    def spans(self, vertices) -> bool:
        return frozenset(vertices) in self.simplices

    @cached_property
    def adjacency(self) -> list[list[int]]:
        """Vertices w with {v, w} a simplex (v itself included)."""
        return [
            [w for w in range(self.vertex_count) if self.spans((v, w))]
            for v in range(self.vertex_count)
        ]

    def simplex_count(self) -> int:
        return len(self.simplices)

    def to_document(self) -> dict:
        return {"vertices": self.vertex_count, "simplices": [list(s) for s in self.maximal]}


def load_complex(document, name: str = "") -> SimplicialComplex:
    """Build a complex from ``{"vertices": n, "simplices": [[...], ...]}``."""
    try:
        n = int(document["vertices"])
        simplices = [tuple(sorted(int(v) for v in s)) for s in document["simplices"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ComplexError(f"malformed complex document: {exc}") from None
    if n <= 0:
        raise ComplexError("empty complex")
    for s in simplices:
        if not s:
            raise ComplexError("empty simplex")
        for v in s:
            if not 0 <= v < n:
                raise ComplexError(f"vertex {v} out of range 0..{n - 1}")
        if len(set(s)) != len(s):
            raise ComplexError(f"repeated vertex in simplex {list(s)}")
    seen = {v for s in simplices for v in s}
    extra = tuple((v,) for v in range(n) if v not in seen)
    # keep only maximal simplices
    sets = sorted({frozenset(s) for s in simplices}, key=lambda s: (-len(s), sorted(s)))
    maximal = []
    for s in sets:
        if not any(s < t for t in maximal):
            maximal.append(s)
    maximal = tuple(sorted(tuple(sorted(s)) for s in maximal)) + extra
    return SimplicialComplex(n, maximal, name)


def load_complex_file(path) -> SimplicialComplex:
    path = Path(path)
    text = path.read_text()
    doc = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    return load_complex(doc, name=path.stem)


def _torus9():
    idx = lambda i, j: 3 * (i % 3) + (j % 3)
    tris = []
    for i in range(3):
        for j in range(3):
            tris.append([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)])
            tris.append([idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)])
    return {"vertices": 9, "simplices": tris}


FIXTURES = {
    "point": {"vertices": 1, "simplices": [[0]]},
    "interval": {"vertices": 2, "simplices": [[0, 1]]},
    "circle": {"vertices": 3, "simplices": [[0, 1], [1, 2], [2, 0]]},
    "sphere2": {"vertices": 4, "simplices": [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]]},
    "torus9": _torus9(),
}


def fixture(name: str) -> SimplicialComplex:
    try:
        return load_complex(FIXTURES[name], name=name)
    except KeyError:
        raise ComplexError(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}") from None


def resolve_complex(ref: str) -> SimplicialComplex:
    """A fixture name or a path to a complex document."""
    if ref in FIXTURES:
        return fixture(ref)
    path = Path(ref)
    if not path.exists():
        raise ComplexError(f"no fixture or file named {ref!r}")
    return load_complex_file(path)


# ---------------------------------------------------------------------------
# covers


class StarCover(CoverSystem):
    """Open vertex stars; a tuple overlaps iff its vertex set spans a simplex."""

    name = "U"

    def __init__(self, complex: SimplicialComplex, **kw):
        super().__init__(range(complex.vertex_count), **kw)
        self.complex = complex

    def witness(self, tup):
        s = frozenset(tup)
        return tuple(sorted(s)) if s in self.complex.simplices else None

    def _enumerate(self, n, prev):
        adj = [set(a) for a in self.complex.adjacency]
        out = []
        for t in prev.tolist():
            cand = set.intersection(*(adj[v] for v in t))
            base = set(t)
            for c in sorted(cand):
                if self.complex.spans(base | {c}):
                    out.append(tuple(t) + (c,))
            self._check_cap(len(out))
        return np.array(out, dtype=np.int64).reshape(-1, n)


class ProductCover(CoverSystem):
    """Cover ``U^n`` of ``M^n`` by products of stars (indices are vertex n-tuples)."""

    def __init__(self, factor: StarCover, n: int, **kw):
        keys = list(itertools.product(range(len(factor)), repeat=n))
        super().__init__(keys, **kw)
        self.factor = factor
        self.n = n
        self.name = f"U^{n}"

    def witness(self, tup):
        parts = []
        for c in range(self.n):
            w = self.factor.witness(tuple(self.indices[i][c] for i in tup))
            if w is None:
                return None
            parts.append(w)
        return tuple(parts)

    def _enumerate(self, m, prev):
        # (U^n)^(m) is the n-fold product of U^(m)
        ft = self.factor.nerve.tuples(m)
        nf = len(self.factor)
        combos = np.array(list(itertools.product(range(len(ft)), repeat=self.n)), dtype=np.int64)
        self._check_cap(len(combos))
        ids = np.zeros((len(combos), m), dtype=np.int64)
        for c in range(self.n):
            ids = ids * nf + ft[combos[:, c]]
        return ids


class BaseSpace:
    """A complex together with its star cover and product covers."""

    def __init__(self, complex: SimplicialComplex, basepoint: int = 0):
        if not 0 <= basepoint < complex.vertex_count:
            raise ComplexError(f"basepoint {basepoint} is not a vertex")
        self.complex = complex
        self.basepoint = basepoint
        self.star = StarCover(complex)
        self._powers: dict[int, CoverSystem] = {1: self.star}
        self._proj: dict[tuple[int, int], CoverMorphism] = {}
        self._incl: dict[tuple[int, int], CoverMorphism] = {}

    def power(self, n: int) -> CoverSystem:
        if n < 1:
            raise ValueError("n must be at least 1")
        if n not in self._powers:
            self._powers[n] = ProductCover(self.star, n)
        return self._powers[n]

    def vertex_tuple(self, n: int, i: int) -> tuple[int, ...]:
        key = self.power(n).indices[i]
        return (key,) if n == 1 else key

    def index_id(self, verts: tuple[int, ...]) -> int:
        n = len(verts)
        return self.power(n).id_of[verts[0] if n == 1 else tuple(verts)]

    def projection(self, n: int, i: int) -> CoverMorphism:
        """π_i : U^n → U^(n-1), omitting factor ``i`` (1-based)."""
        if not (n >= 2 and 1 <= i <= n):
            raise ValueError("projection needs n >= 2 and 1 <= i <= n")
        if (n, i) not in self._proj:
            src, tgt = self.power(n), self.power(n - 1)
            imap = [
                self.index_id(self.vertex_tuple(n, a)[: i - 1] + self.vertex_tuple(n, a)[i:])
                for a in range(len(src))
            ]
            self._proj[(n, i)] = CoverMorphism(src, tgt, imap, name=f"π_{i}")
        return self._proj[(n, i)]

    def inclusion(self, n: int, basepoint: int | None = None) -> CoverMorphism:
        """i_n : U^n → U^(n+1), prepending the basepoint."""
        b = self.basepoint if basepoint is None else basepoint
        if (n, b) not in self._incl:
            src, tgt = self.power(n), self.power(n + 1)
            imap = [self.index_id((b,) + self.vertex_tuple(n, a)) for a in range(len(src))]
            self._incl[(n, b)] = CoverMorphism(src, tgt, imap, name=f"i_{n}")
        return self._incl[(n, b)]

    def power_of(self, cover: CoverSystem) -> int:
        for n, c in self._powers.items():
            if c is cover:
                return n
        raise ValueError("cochain does not live on a product cover of this base")


def star_cover(complex: SimplicialComplex) -> StarCover:
    return StarCover(complex)


def product_cover(complex_or_base, n: int):
    """``U^n`` together with its projections ``[π_1, ..., π_n]``."""
    base = complex_or_base if isinstance(complex_or_base, BaseSpace) else BaseSpace(complex_or_base)
    cover = base.power(n)
    projections = [base.projection(n, i) for i in range(1, n + 1)] if n >= 2 else []
    return cover, projections


def simplicial_partial(base: BaseSpace, f: Cochain) -> Cochain:
    """∂f on ``M^(n+1)`` for ``f`` on ``M^n``."""
    n = base.power_of(f.cover)
    terms = [(pullback(base.projection(n + 1, j), f), (-1) ** j) for j in range(1, n + 2)]
    return combine(terms)


class NotPartialClosed(ValueError):
    pass


def partial_contract(base: BaseSpace, f: Cochain, basepoint: int | None = None) -> Cochain:
    """g = i_(n-1)^*(-f) on ``M^(n-1)``; satisfies ∂g = f whenever ∂f = 0."""
    n = base.power_of(f.cover)
    if n < 2:
        raise ValueError("partial_contract needs a cochain on M^n with n >= 2")
    bad = simplicial_partial(base, f).nonzero_witness()
    if bad is not None:
        raise NotPartialClosed(f"∂f ≠ 0 at {bad}")
    return pullback(base.inclusion(n - 1, basepoint), -f)
