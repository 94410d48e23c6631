"""Discrete path space, tube covers, fiber powers and the C₀ solver.

A discrete path is a vertex sequence ``(v_0, ..., v_L)`` with every
consecutive pair spanning a simplex (lazy steps allowed).  Paths of different
lengths lie in different components.  The tube around ``γ`` collects the
continuous paths that stay in ``star(γ_i)`` around step ``i``; a tuple of
same-length tubes has nonempty common intersection iff, at every step, the
vertex set ``S_i = {γ_i : γ in tuple}`` spans a simplex and so does
``S_i ∪ S_(i+1)``.  The witness is that sequence of simplices.

Fiber powers ``Γ^[l]`` consist of ``l``-tuples of paths with the same
endpoints; ``Λ = Γ^[2]`` is the loop cover.  Join pairs ``(p, q)`` with
``p`` ending where ``q`` starts cover the figure-of-eight configurations.
"""

from __future__ import annotations

import itertools
from functools import cached_property

import numpy as np

from .nerve import (
    Cochain,
    CoverMorphism,
    CoverSystem,
    NotACocycle,
    cech_delta,
    solve_pinned,
)
from .spaces import BaseSpace, SimplicialComplex


class TruncationError(RuntimeError):
    """A solve or search failed at the current path-length budget."""

    def __init__(self, stage: str, message: str, witness=None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.witness = witness


class PreconditionError(ValueError):
    pass


class JoinError(ValueError):
    pass


Path = tuple[int, ...]


def path_length(p: Path) -> int:
    return len(p) - 1


def enumerate_paths(complex: SimplicialComplex, L_max: int, cap: int = 1_000_000) -> list[Path]:
    """All discrete paths with 1..L_max steps, ordered by length then lexicographically."""
    if L_max < 1:
        raise ValueError("L_max must be at least 1")
    adj = complex.adjacency
    out: list[Path] = []
    layer: list[Path] = [(v,) for v in range(complex.vertex_count)]
    for _ in range(L_max):
        layer = [p + (w,) for p in layer for w in adj[p[-1]]]
        out.extend(layer)
        if len(out) > cap:
            from .nerve import EnumerationOverflow

            raise EnumerationOverflow(f"more than {cap} paths at L_max={L_max}")
    return out


def join(p: Path, q: Path, L_max: int | None = None) -> Path:
    """Concatenate ``p`` and ``q``; the shared endpoint appears once."""
    if p[-1] != q[0]:
        raise JoinError(f"{p} ends at {p[-1]} but {q} starts at {q[0]}")
    out = tuple(p) + tuple(q[1:])
    if L_max is not None and path_length(out) > L_max:
        raise JoinError(f"joined length {path_length(out)} exceeds L_max={L_max}")
    return out


def tube_witness(complex: SimplicialComplex, paths) -> tuple | None:
    """Per-step simplices certifying a common point of the tubes, or None."""
    L = len(paths[0])
    if any(len(p) != L for p in paths):
        return None
    steps = []
    for i in range(L):
        s = frozenset(p[i] for p in paths)
        if s not in complex.simplices:
            return None
        if steps and (s | steps[-1]) not in complex.simplices:
            return None
        steps.append(s)
    return tuple(tuple(sorted(s)) for s in steps)


class PathTubeCover(CoverSystem):
    name = "Γ"

    def __init__(self, complex: SimplicialComplex, L_max: int, **kw):
        super().__init__(enumerate_paths(complex, L_max), **kw)
        self.complex = complex
        self.L_max = L_max
        self._by_length: dict[int, list[int]] = {}
        for i, p in enumerate(self.indices):
            self._by_length.setdefault(path_length(p), []).append(i)

    def witness(self, tup):
        return tube_witness(self.complex, [self.indices[i] for i in tup])

    def _enumerate(self, n, prev):
        if n != 2:
            return super()._enumerate(n, prev)
        out = []
        for ids in self._by_length.values():
            for a in ids:
                for b in ids:
                    if self.witness((a, b)) is not None:
                        out.append((a, b))
            self._check_cap(len(out))
        return np.array(out, dtype=np.int64).reshape(-1, 2)

    @cached_property
    def constant_ids(self) -> np.ndarray:
        return np.array([i for i, p in enumerate(self.indices) if len(set(p)) == 1], dtype=np.int64)


class JoinPairCover(CoverSystem):
    """Pairs ``(p, q)`` of paths with ``p`` ending where ``q`` starts, joinable within L_max."""

    name = "Γ8"

    def __init__(self, tubes: PathTubeCover, **kw):
        paths = tubes.indices
        by_start: dict[int, list[int]] = {}
        for i, p in enumerate(paths):
            by_start.setdefault(p[0], []).append(i)
        keys = []
        for a, p in enumerate(paths):
            for b in by_start.get(p[-1], []):
                if path_length(p) + path_length(paths[b]) <= tubes.L_max:
                    keys.append((a, b))
        super().__init__(keys, **kw)
        self.tubes = tubes

    def describe(self, i):
        a, b = self.indices[i]
        return [self.tubes.describe(a), self.tubes.describe(b)]

    def witness(self, tup):
        w1 = self.tubes.witness(tuple(self.indices[i][0] for i in tup))
        if w1 is None:
            return None
        w2 = self.tubes.witness(tuple(self.indices[i][1] for i in tup))
        if w2 is None:
            return None
        return (w1, w2)

    def _enumerate(self, n, prev):
        t = self.tubes.nerve.tuples(n)
        paths = self.tubes.indices
        npaths = len(paths)
        start = np.array([p[0] for p in paths], dtype=np.int64)
        end = np.array([p[-1] for p in paths], dtype=np.int64)
        length = np.array([path_length(p) for p in paths], dtype=np.int64)
        heads: dict[tuple, list[int]] = {}
        tails: dict[tuple, list[int]] = {}
        lens = length[t[:, 0]].tolist()
        for r, row in enumerate(start[t].tolist()):
            heads.setdefault((lens[r],) + tuple(row), []).append(r)
        for r, row in enumerate(end[t].tolist()):
            tails.setdefault((lens[r],) + tuple(row), []).append(r)
        keys = np.array(self.indices, dtype=np.int64).reshape(-1, 2)
        keys = keys[:, 0] * npaths + keys[:, 1]
        chunks = []
        total = 0
        for key, left in tails.items():
            la, verts = key[0], key[1:]
            for lb in range(1, self.tubes.L_max - la + 1):
                right = heads.get((lb,) + verts)
                if not right:
                    continue
                a = np.repeat(np.array(left, dtype=np.int64), len(right))
                b = np.tile(np.array(right, dtype=np.int64), len(left))
                total += len(a)
                self._check_cap(total)
                chunks.append(np.searchsorted(keys, t[a] * npaths + t[b]))
        if not chunks:
            return np.zeros((0, n), dtype=np.int64)
        return np.concatenate(chunks)


class FiberPowerCover(CoverSystem):
    """``l``-fold fiber power of an element cover over its anchor cover."""

    def __init__(self, family: "FiberPowerFamily", l: int, **kw):
        elem = family.element
        groups: dict[int, list[int]] = {}
        for i in range(len(elem)):
            groups.setdefault(int(family.anchor.index_map[i]), []).append(i)
        keys = []
        for g in sorted(groups):
            keys.extend(itertools.product(groups[g], repeat=l))
        keys.sort()
        super().__init__(keys, **kw)
        self.family = family
        self.l = l
        self.name = f"{elem.name}^[{l}]"

    def describe(self, i):
        return [self.family.element.describe(c) for c in self.indices[i]]

    def witness(self, tup):
        parts = []
        for c in range(self.l):
            w = self.family.element.witness(tuple(self.indices[i][c] for i in tup))
            if w is None:
                return None
            parts.append(w)
        return tuple(parts)

    def _enumerate(self, n, prev):
        elem = self.family.element
        t = elem.nerve.tuples(n)
        img = self.family.anchor.index_map[t]
        groups: dict[tuple, list[int]] = {}
        for r, row in enumerate(img.tolist()):
            groups.setdefault(tuple(row), []).append(r)
        ne = len(elem)
        keys = np.zeros(len(self.indices), dtype=np.int64)
        idx = np.array(self.indices, dtype=np.int64).reshape(-1, self.l)
        for c in range(self.l):
            keys = keys * ne + idx[:, c]
        chunks = []
        total = 0
        for rows in groups.values():
            rows = np.array(rows, dtype=np.int64)
            combos = np.array(list(itertools.product(range(len(rows)), repeat=self.l)), dtype=np.int64)
            total += len(combos)
            self._check_cap(total)
            sel = rows[combos]  # (m, l) rows of t
            ids = np.zeros((len(combos), n), dtype=np.int64)
            for a in range(n):
                key = np.zeros(len(combos), dtype=np.int64)
                for c in range(self.l):
                    key = key * ne + t[sel[:, c], a]
                ids[:, a] = np.searchsorted(keys, key)
            chunks.append(ids)
        if not chunks:
            return np.zeros((0, n), dtype=np.int64)
        return np.concatenate(chunks)


class FiberPowerFamily:
    """The simplicial system ``{E^[l]}`` with face maps ϱ_j omitting entry ``j``."""

    def __init__(self, element: CoverSystem, anchor: CoverMorphism):
        self.element = element
        self.anchor = anchor
        self._levels: dict[int, CoverSystem] = {1: element}
        self._faces: dict[tuple[int, int], CoverMorphism] = {}
        self._lifts: dict[tuple, CoverMorphism] = {}

    def level(self, l: int) -> CoverSystem:
        if l < 1:
            raise ValueError("fiber power level must be at least 1")
        if l not in self._levels:
            self._levels[l] = FiberPowerCover(self, l)
        return self._levels[l]

    def components(self, l: int, i: int) -> tuple[int, ...]:
        key = self.level(l).indices[i]
        return (i,) if l == 1 else key

    def key_of(self, comps: tuple[int, ...]):
        return self.element.indices[comps[0]] if len(comps) == 1 else tuple(comps)

    def face(self, l: int, j: int) -> CoverMorphism:
        """ϱ_j : E^[l] → E^[l-1], omitting entry ``j`` (1-based)."""
        if not (l >= 2 and 1 <= j <= l):
            raise ValueError("face needs l >= 2 and 1 <= j <= l")
        if (l, j) not in self._faces:
            src, tgt = self.level(l), self.level(l - 1)
            imap = []
            for i in range(len(src)):
                c = self.components(l, i)
                imap.append(tgt.id_of[self.key_of(c[: j - 1] + c[j:])])
            self._faces[(l, j)] = CoverMorphism(src, tgt, imap, name=f"ϱ_{j}")
        return self._faces[(l, j)]

    def lift(self, m: CoverMorphism, target: "FiberPowerFamily", l: int, name: str = "") -> CoverMorphism:
        """Apply an element-level morphism componentwise at level ``l``."""
        key = (id(m), id(target), l)
        if key not in self._lifts:
            src, tgt = self.level(l), target.level(l)
            imap = [
                tgt.id_of[target.key_of(tuple(m(c) for c in self.components(l, i)))]
                for i in range(len(src))
            ]
            self._lifts[key] = CoverMorphism(src, tgt, imap, name=name or m.name)
        return self._lifts[key]


class PathSpace:
    """Everything built from one complex and one path-length budget."""

    def __init__(self, base: BaseSpace, L_max: int):
        if L_max < 1:
            raise ValueError("L_max must be at least 1")
        self.base = base
        self.complex = base.complex
        self.L_max = L_max
        self.tubes = PathTubeCover(self.complex, L_max)
        paths = self.tubes.indices
        u2, u3 = base.power(2), base.power(3)
        self.epsilon = CoverMorphism(
            self.tubes, u2, [u2.id_of[(p[0], p[-1])] for p in paths], name="ε"
        )
        self.paths = FiberPowerFamily(self.tubes, self.epsilon)
        self.pairs = JoinPairCover(self.tubes)
        pk = self.pairs.indices
        self.pair_anchor = CoverMorphism(
            self.pairs, u3,
            [u3.id_of[(paths[a][0], paths[a][-1], paths[b][-1])] for a, b in pk],
            name="ε8",
        )
        self.eights = FiberPowerFamily(self.pairs, self.pair_anchor)
        pid = self.tubes.id_of
        self.first = CoverMorphism(self.pairs, self.tubes, [a for a, _ in pk], name="π3")
        self.second = CoverMorphism(self.pairs, self.tubes, [b for _, b in pk], name="π1")
        self.join_map = CoverMorphism(
            self.pairs, self.tubes, [pid[join(paths[a], paths[b])] for a, b in pk], name="j"
        )
        self._const: dict[int, CoverMorphism] = {}

    @property
    def loops(self) -> CoverSystem:
        return self.paths.level(2)

    def constant_morphism(self, L: int) -> CoverMorphism:
        """star(v) ↦ tube of the constant path at ``v`` with ``L`` steps."""
        if not 1 <= L <= self.L_max:
            raise ValueError(f"constant path length {L} outside 1..{self.L_max}")
        if L not in self._const:
            self._const[L] = CoverMorphism(
                self.base.star, self.tubes,
                [self.tubes.id_of[(v,) * (L + 1)] for v in range(self.complex.vertex_count)],
                name=f"c_{L}",
            )
        return self._const[L]

    def eight_maps(self, l: int):
        """(first, second, join) morphisms from the eight cover at level ``l`` to ``Γ^[l]``."""
        return (
            self.eights.lift(self.first, self.paths, l, "π3"),
            self.eights.lift(self.second, self.paths, l, "π1"),
            self.eights.lift(self.join_map, self.paths, l, "j"),
        )

    # -- C0 subcomplex --------------------------------------------------

    def constant_rows(self, cover: CoverSystem, n: int) -> np.ndarray:
        """Boolean mask of ``n``-tuples made only of constant paths."""
        if cover is self.tubes:
            is_const = np.zeros(len(cover), dtype=bool)
            is_const[self.tubes.constant_ids] = True
        elif cover is self.pairs:
            base = np.zeros(len(self.tubes), dtype=bool)
            base[self.tubes.constant_ids] = True
            is_const = np.array([base[a] and base[b] for a, b in cover.indices], dtype=bool)
        else:
            raise ValueError(f"no constant paths defined on {cover.name}")
        if n <= 0:
            return np.zeros(0, dtype=bool)
        return is_const[cover.nerve.tuples(n)].all(axis=1)

    def in_C0(self, f: Cochain) -> bool:
        return not f.values[self.constant_rows(f.cover, f.degree + 1)].any()


def solve_in_C0(space: PathSpace, target: Cochain, rng: np.random.Generator | None = None) -> Cochain | None:
    """β vanishing on constant tuples with δβ = target, or None if unsolvable.

    Constant-tuple values of β are pinned to zero by removing those unknowns;
    everything else is one sparse exact solve.  ``rng`` shuffles the order
    of the unknowns, which can change the representative returned.
    """
    if target.degree < 1:
        raise PreconditionError("target must have degree at least 1")
    if not cech_delta(target).is_zero():
        raise NotACocycle(f"target is not δ-closed at {cech_delta(target).nonzero_witness()}")
    if not space.in_C0(target):
        raise PreconditionError("target does not vanish on constant paths")
    return _solve_pinned(space, target, rng)


def _solve_pinned(space: PathSpace, target: Cochain, rng=None) -> Cochain | None:
    return solve_pinned(target, space.constant_rows(target.cover, target.degree), rng)
