"""Nerves of finite covers, Čech cochains and the Čech differential.

A cover is a finite list of indices together with an overlap test on ordered
tuples of indices (repetition allowed).  Its nerve lists, for each length
``n``, every ordered ``n``-tuple with nonempty common intersection in
lexicographic order.  A degree-``k`` cochain assigns a group element to each
``(k+1)``-tuple.

Sign conventions (additive notation throughout):

    (δf)(w) = sum_{j=1}^{k+2} (-1)^j f(ι_j w),   ι_j omits position j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Sequence

import numpy as np
import scipy.sparse as sp

from .algebra import (
    AbelianGroup,
    GroupElement,
    _inverse_unimodular,
    _snf_dense,
    factorint,
    solve_system,
)

DEFAULT_TUPLE_CAP = 5_000_000


class EnumerationOverflow(RuntimeError):
    """Raised when a nerve would exceed its tuple budget."""


class NerveDepthError(ValueError):
    pass


class MorphismError(ValueError):
    """A cover morphism sent a nonempty tuple outside the target nerve."""


class NotACocycle(ValueError):
    pass


# ---------------------------------------------------------------------------
# covers and nerves


class CoverSystem:
    """Finite cover given by an index list and a witness-producing overlap test.

    Subclasses override :meth:`witness`, and may override
    :meth:`_enumerate` when the nerve has a faster direct description.
    """

    name = "cover"

    def __init__(self, indices: Sequence[Hashable], cap: int = DEFAULT_TUPLE_CAP):
        self.indices = list(indices)
        self.id_of = {key: i for i, key in enumerate(self.indices)}
        self.cap = cap

    def __len__(self):
        return len(self.indices)

    def witness(self, tup: tuple[int, ...]):
        raise NotImplementedError

    def describe(self, i: int):
        """JSON-friendly form of index ``i``."""
        return _plain(self.indices[i])

    def lookup(self, desc) -> int:
        """Inverse of :meth:`describe`."""
        if "_lookup" not in self.__dict__:
            self._lookup = {_frozen(self.describe(i)): i for i in range(len(self))}
        try:
            return self._lookup[_frozen(desc)]
        except KeyError:
            raise KeyError(f"{desc!r} is not an index of {self.name}") from None

    def overlaps(self, tup: tuple[int, ...]) -> bool:
        return self.witness(tuple(tup)) is not None

    @cached_property
    def neighbors(self) -> list[np.ndarray]:
        pairs = self.nerve.tuples(2)
        out = [[] for _ in self.indices]
        for a, b in pairs.tolist():
            out[a].append(b)
        return [np.array(x, dtype=np.int64) for x in out]

    @cached_property
    def nerve(self) -> "Nerve":
        return Nerve(self)

    def _enumerate(self, n: int, prev: np.ndarray) -> np.ndarray:
        if n == 2:
            out = []
            m = len(self.indices)
            for a in range(m):
                for b in range(m):
                    if self.witness((a, b)) is not None:
                        out.append((a, b))
                self._check_cap(len(out))
            return np.array(out, dtype=np.int64).reshape(-1, 2)
        nb = [set(x.tolist()) for x in self.neighbors]
        out = []
        for t in prev.tolist():
            cand = set.intersection(*(nb[a] for a in set(t)))
            for c in sorted(cand):
                tt = tuple(t) + (c,)
                if self.witness(tt) is not None:
                    out.append(tt)
            self._check_cap(len(out))
        return np.array(out, dtype=np.int64).reshape(-1, n)

    def _check_cap(self, count: int):
        if count > self.cap:
            raise EnumerationOverflow(
                f"{self.name}: nerve enumeration exceeded {self.cap} tuples"
            )


def _encode(arr: np.ndarray, base: int) -> np.ndarray | None:
    n = arr.shape[1]
    if n and base ** n >= 2**62:
        return None
    key = np.zeros(arr.shape[0], dtype=np.int64)
    for a in range(n):
        key = key * base + arr[:, a]
    return key


class Nerve:
    """Lazily enumerated nerve; ``tuples(n)`` is the sorted ``n``-tuple list."""

    def __init__(self, cover: CoverSystem, k_max: int | None = None):
        self.cover = cover
        self._tuples: dict[int, np.ndarray] = {}
        self._keys: dict[int, np.ndarray | None] = {}
        self._dicts: dict[int, dict] = {}
        self._faces: dict[tuple[int, int], np.ndarray] = {}
        self._delta: dict[int, sp.csr_matrix] = {}
        if k_max is not None:
            for n in range(1, k_max + 3):
                self.tuples(n)

    @property
    def base(self) -> int:
        return max(len(self.cover), 1)

    def tuples(self, n: int) -> np.ndarray:
        if n <= 0:
            return np.zeros((1 if n == 0 else 0, 0), dtype=np.int64)
        if n not in self._tuples:
            if n == 1:
                arr = np.arange(len(self.cover), dtype=np.int64).reshape(-1, 1)
            else:
                arr = self.cover._enumerate(n, self.tuples(n - 1))
                arr = np.asarray(arr, dtype=np.int64).reshape(-1, n)
                if len(arr):
                    order = np.lexsort(arr.T[::-1])
                    arr = arr[order]
            self.cover._check_cap(len(arr))
            arr.setflags(write=False)
            self._tuples[n] = arr
        return self._tuples[n]

    def size(self, n: int) -> int:
        return len(self.tuples(n))

    def cochain_size(self, k: int) -> int:
        return 0 if k < 0 else self.size(k + 1)

    def locate(self, n: int, arr: np.ndarray) -> np.ndarray:
        """Row numbers of the given ``n``-tuples; -1 where absent."""
        arr = np.asarray(arr, dtype=np.int64).reshape(-1, n)
        table = self.tuples(n)
        if n not in self._keys:
            self._keys[n] = _encode(table, self.base)
        keys = self._keys[n]
        if keys is not None:
            probe = _encode(arr, self.base)
            pos = np.searchsorted(keys, probe)
            pos = np.minimum(pos, max(len(keys) - 1, 0))
            ok = (len(keys) > 0) & (keys[pos] == probe) if len(keys) else np.zeros(len(arr), bool)
            return np.where(ok, pos, -1)
        if n not in self._dicts:
            self._dicts[n] = {tuple(t): i for i, t in enumerate(table.tolist())}
        d = self._dicts[n]
        return np.array([d.get(tuple(t), -1) for t in arr.tolist()], dtype=np.int64)

    def index(self, tup: Sequence[int]) -> int:
        row = int(self.locate(len(tup), np.array([tup]))[0])
        if row < 0:
            raise KeyError(f"tuple {tuple(tup)} not in nerve")
        return row

    def face(self, n: int, j: int) -> np.ndarray:
        """Rows in ``tuples(n-1)`` of ι_j applied to every ``n``-tuple (j from 1)."""
        if (n, j) not in self._faces:
            arr = np.delete(self.tuples(n), j - 1, axis=1)
            rows = self.locate(n - 1, arr)
            if (rows < 0).any():
                raise NerveDepthError("nerve is not closed under faces")
            self._faces[(n, j)] = rows
        return self._faces[(n, j)]

    def delta_matrix(self, k: int) -> sp.csr_matrix:
        """Matrix of δ from degree ``k`` to degree ``k+1``."""
        if k not in self._delta:
            nrow = self.cochain_size(k + 1)
            ncol = self.cochain_size(k)
            if k < 0:
                mat = sp.csr_matrix((nrow, 0), dtype=np.int64)
            else:
                n = k + 2
                r, c, v = [], [], []
                for j in range(1, n + 1):
                    r.append(np.arange(nrow))
                    c.append(self.face(n, j))
                    v.append(np.full(nrow, (-1) ** j, dtype=np.int64))
                mat = sp.csr_matrix(
                    (np.concatenate(v), (np.concatenate(r), np.concatenate(c))),
                    shape=(nrow, ncol),
                    dtype=np.int64,
                )
                mat.sum_duplicates()
                mat.eliminate_zeros()
            self._delta[k] = mat
        return self._delta[k]


def build_nerve(cover: CoverSystem, k_max: int) -> Nerve:
    """Enumerate the nerve of ``cover`` through tuples of length ``k_max + 2``."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    nerve = cover.nerve
    for n in range(1, k_max + 3):
        nerve.tuples(n)
    return nerve


# ---------------------------------------------------------------------------
# cochains


@dataclass(frozen=True, eq=False)
class Cochain:
    nerve: Nerve
    degree: int
    group: AbelianGroup
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = self.group.reduce(np.asarray(self.values, dtype=np.int64))
        vals = vals.reshape(self.nerve.cochain_size(self.degree), self.group.ncoords)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls, nerve: Nerve, degree: int, group: AbelianGroup) -> "Cochain":
        return cls(nerve, degree, group, np.zeros((nerve.cochain_size(degree), group.ncoords)))

    @classmethod
    def random(cls, nerve, degree, group, rng: np.random.Generator, bound: int = 5):
        shape = (nerve.cochain_size(degree), group.ncoords)
        return cls(nerve, degree, group, rng.integers(-bound, bound + 1, size=shape))

    @classmethod
    def from_function(cls, nerve, degree, group, fn: Callable[[tuple], Sequence[int] | int]):
        rows = []
        for t in nerve.tuples(degree + 1).tolist():
            val = fn(tuple(t))
            rows.append([val] if np.isscalar(val) else list(val))
        return cls(nerve, degree, group, np.array(rows, dtype=np.int64).reshape(-1, group.ncoords))

    @property
    def cover(self) -> CoverSystem:
        return self.nerve.cover

    def __len__(self):
        return len(self.values)

    def at(self, tup: Sequence[int]) -> GroupElement:
        return self.group.element(self.values[self.nerve.index(tup)])

    def is_zero(self) -> bool:
        return not self.values.any()

    def _same(self, other: "Cochain"):
        if other.nerve is not self.nerve or other.degree != self.degree or other.group != self.group:
            raise ValueError("cochains live on different nerves, degrees or groups")

    def __add__(self, other):
        self._same(other)
        return Cochain(self.nerve, self.degree, self.group, self.values + other.values)

    def __sub__(self, other):
        self._same(other)
        return Cochain(self.nerve, self.degree, self.group, self.values - other.values)

    def __neg__(self):
        return Cochain(self.nerve, self.degree, self.group, -self.values)

    def __rmul__(self, n: int):
        return Cochain(self.nerve, self.degree, self.group, int(n) * self.values)

    def equals(self, other: "Cochain") -> bool:
        self._same(other)
        return bool(np.array_equal(self.values, other.values))

    def first_difference(self, other: "Cochain"):
        """First tuple where two cochains disagree, or None."""
        self._same(other)
        bad = np.nonzero((self.values != other.values).any(axis=1))[0]
        if not len(bad):
            return None
        return tuple(self.nerve.tuples(self.degree + 1)[bad[0]].tolist())

    def nonzero_witness(self):
        bad = np.nonzero(self.values.any(axis=1))[0]
        if not len(bad):
            return None
        return tuple(self.nerve.tuples(self.degree + 1)[bad[0]].tolist())

    def to_records(self, nonzero_only: bool = False) -> list:
        """[index descriptions, coordinates] pairs in lexicographic tuple order."""
        cover = self.cover
        desc = {}
        out = []
        for t, v in zip(self.nerve.tuples(self.degree + 1).tolist(), self.values.tolist()):
            if nonzero_only and not any(v):
                continue
            for i in t:
                if i not in desc:
                    desc[i] = cover.describe(i)
            out.append([[desc[i] for i in t], v])
        return out

    @classmethod
    def from_records(cls, nerve: Nerve, degree: int, group: AbelianGroup, records) -> "Cochain":
        """Inverse of :meth:`to_records`; tuples not listed are zero."""
        vals = np.zeros((nerve.cochain_size(degree), group.ncoords), dtype=np.int64)
        for tup, v in records:
            if len(tup) != degree + 1:
                raise ValueError(f"tuple {tup} has the wrong length for degree {degree}")
            ids = [nerve.cover.lookup(d) for d in tup]
            row = nerve.index(ids)
            coords = [v] if np.isscalar(v) else list(v)
            if len(coords) != group.ncoords:
                raise ValueError(f"value {v} does not match group {group}")
            vals[row] = coords
        return cls(nerve, degree, group, vals)


def _plain(key):
    if isinstance(key, tuple):
        return [_plain(k) for k in key]
    if isinstance(key, (np.integer,)):
        return int(key)
    return key


def _frozen(desc):
    return tuple(_frozen(d) for d in desc) if isinstance(desc, (list, tuple)) else desc


def apply_operator(mat: sp.csr_matrix, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    if mat.shape[1] == 0 or values.shape[0] == 0:
        return np.zeros((mat.shape[0], values.shape[1] if values.ndim == 2 else 0), dtype=np.int64)
    return np.asarray(mat @ values, dtype=np.int64)


def cech_delta(f: Cochain) -> Cochain:
    """Čech differential of ``f``."""
    mat = f.nerve.delta_matrix(f.degree)
    return Cochain(f.nerve, f.degree + 1, f.group, apply_operator(mat, f.values))


def combine(terms: Sequence[tuple[Cochain, int]]) -> Cochain:
    """Pointwise integer combination ``sum n_i f_i``."""
    if not terms:
        raise ValueError("nothing to combine")
    first = terms[0][0]
    acc = np.zeros_like(first.values)
    for f, n in terms:
        first._same(f)
        acc = acc + int(n) * f.values
    return Cochain(first.nerve, first.degree, first.group, acc)


# ---------------------------------------------------------------------------
# cover morphisms


class CoverMorphism:
    """Index-level map between covers, applied entrywise to nerve tuples."""

    def __init__(self, source: CoverSystem, target: CoverSystem, index_map, name: str = ""):
        self.source = source
        self.target = target
        self.name = name
        if callable(index_map):
            index_map = [target.id_of[index_map(key)] for key in source.indices]
        self.index_map = np.asarray(index_map, dtype=np.int64).reshape(len(source))
        self._rows: dict[int, np.ndarray] = {}

    def __call__(self, i: int) -> int:
        return int(self.index_map[i])

    def apply_key(self, key):
        return self.target.indices[self(self.source.id_of[key])]

    def rows(self, n: int) -> np.ndarray:
        """Target-nerve rows of the images of all source ``n``-tuples."""
        if n not in self._rows:
            src = self.source.nerve.tuples(n)
            img = self.index_map[src] if src.size else src.reshape(-1, n)
            rows = self.target.nerve.locate(n, img)
            if (rows < 0).any():
                bad = src[np.nonzero(rows < 0)[0][0]].tolist()
                raise MorphismError(
                    f"{self.name or 'morphism'}: image of {bad} is empty in {self.target.name}"
                )
            self._rows[n] = rows
        return self._rows[n]

    def matrix(self, k: int) -> sp.csr_matrix:
        nrow = self.source.nerve.cochain_size(k)
        ncol = self.target.nerve.cochain_size(k)
        if k < 0:
            return sp.csr_matrix((nrow, ncol), dtype=np.int64)
        rows = self.rows(k + 1)
        return sp.csr_matrix(
            (np.ones(nrow, dtype=np.int64), (np.arange(nrow), rows)), shape=(nrow, ncol)
        )

    def compose(self, other: "CoverMorphism") -> "CoverMorphism":
        """``self`` after ``other``."""
        if other.target is not self.source:
            raise ValueError("morphisms do not compose")
        return CoverMorphism(other.source, self.target, self.index_map[other.index_map],
                             name=f"{self.name}∘{other.name}")


def pullback(m: CoverMorphism, f: Cochain) -> Cochain:
    if f.nerve is not m.target.nerve:
        raise ValueError("cochain does not live on the morphism's target")
    nerve = m.source.nerve
    if f.degree < 0:
        return Cochain.zero(nerve, f.degree, f.group)
    return Cochain(nerve, f.degree, f.group, f.values[m.rows(f.degree + 1)])


# ---------------------------------------------------------------------------
# cohomology


def csr_rows(mat: sp.spmatrix) -> list[dict[int, int]]:
    mat = sp.csr_matrix(mat)
    mat.sum_duplicates()
    out = []
    ip, ix, dv = mat.indptr, mat.indices, mat.data
    for i in range(mat.shape[0]):
        out.append({int(c): int(v) for c, v in zip(ix[ip[i]:ip[i + 1]], dv[ip[i]:ip[i + 1]]) if v})
    return out


@dataclass
class CohomologyResult:
    group: AbelianGroup
    generators: list[Cochain]
    degree: int

    def __str__(self):
        return str(self.group)


def _cyclic_cohomology(d_k: list[list[int]], d_km1: list[list[int]], n: int, q: int):
    """H^k of a free cochain complex with coefficients in Z/q (q = 0: Z).

    Returns a list of (order, representative integer vector); order 0 is free.
    """
    if n == 0:
        return []
    # kernel lattice {x : d_k x = 0 mod q}
    if d_k:
        u, s, v = _snf_dense(d_k)
        diag = [s[i][i] if i < len(s) and i < n else 0 for i in range(n)]
    else:
        v = [[int(i == j) for j in range(n)] for i in range(n)]
        diag = [0] * n
    basis_cols = []
    for i in range(n):
        si = diag[i]
        if si == 0:
            f = 1
        elif q == 0:
            continue
        else:
            f = q // np.gcd(si, q)
        basis_cols.append((i, int(f)))
    if not basis_cols:
        return []
    vinv = _inverse_unimodular(v)
    g = len(basis_cols)
    # image lattice generators: columns of d_{k-1} plus q e_i
    gens = []
    m_prev = len(d_km1[0]) if d_km1 else 0
    for j in range(m_prev):
        gens.append([d_km1[i][j] for i in range(n)])
    if q:
        for i in range(n):
            e = [0] * n
            e[i] = q
            gens.append(e)
    rel = [[0] * len(gens) for _ in range(g)]
    for c, b in enumerate(gens):
        y = [sum(vinv[i][k] * b[k] for k in range(n) if b[k]) for i in range(n)]
        keep = {i for i, _ in basis_cols}
        for i in range(n):
            if i not in keep and y[i]:
                raise ArithmeticError("image not inside kernel")
        for r, (i, f) in enumerate(basis_cols):
            if y[i] % f:
                raise ArithmeticError("image not inside kernel lattice")
            rel[r][c] = y[i] // f
    kmat = [[v[row][i] * f for (i, f) in basis_cols] for row in range(n)]
    if gens:
        u2, s2, _ = _snf_dense(rel)
        u2inv = _inverse_unimodular(u2)
        orders = [s2[i][i] if i < len(gens) else 0 for i in range(g)]
    else:
        u2inv = [[int(i == j) for j in range(g)] for i in range(g)]
        orders = [0] * g
    out = []
    for i in range(g):
        o = abs(orders[i])
        if o == 1:
            continue
        vec = [sum(kmat[row][t] * u2inv[t][i] for t in range(g)) for row in range(n)]
        out.append((o, vec))
    return out


def _canonical(cyclics: list[tuple[int, np.ndarray]], ncoords: int):
    """Merge cyclic summands into invariant-factor form with generators."""
    free = [vec for o, vec in cyclics if o == 0]
    parts: dict[int, list[tuple[int, np.ndarray]]] = {}
    for o, vec in cyclics:
        if o == 0:
            continue
        for p, e in factorint(o).items():
            parts.setdefault(p, []).append((p**e, (o // p**e) * vec))
    length = max((len(v) for v in parts.values()), default=0)
    factors = [1] * length
    gens = [np.zeros_like(cyclics[0][1]) if cyclics else None for _ in range(length)]
    for p in sorted(parts):
        items = sorted(parts[p], key=lambda t: t[0])
        for i, (pe, vec) in enumerate(items):
            slot = length - len(items) + i
            factors[slot] *= pe
            gens[slot] = gens[slot] + vec
    return len(free), tuple(factors), free + gens


def cohomology(nerve: Nerve, group: AbelianGroup, k: int) -> CohomologyResult:
    """``ker δ_k / im δ_{k-1}`` over ``group`` with representative cocycles."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    n = nerve.cochain_size(k)
    d_k = nerve.delta_matrix(k).toarray().tolist()
    d_km1 = nerve.delta_matrix(k - 1).toarray().tolist() if k > 0 else [[] for _ in range(n)]
    if k == 0:
        d_km1 = []
    cyclics = []
    for coord, q in enumerate(group.moduli):
        for o, vec in _cyclic_cohomology(d_k, d_km1, n, q):
            vals = np.zeros((n, group.ncoords), dtype=object)
            vals[:, coord] = vec
            cyclics.append((o, vals))
    rank, torsion, gens = _canonical(cyclics, group.ncoords)
    cochains = [Cochain(nerve, k, group, np.asarray(g, dtype=np.int64)) for g in gens]
    return CohomologyResult(AbelianGroup(rank, torsion), cochains, k)


def coboundary_witness(f: Cochain, col_order=None) -> Cochain | None:
    """Some β with δβ = f, or None when ``f`` is a nontrivial class."""
    if not cech_delta(f).is_zero():
        raise NotACocycle(f"not a cocycle; δf ≠ 0 at {cech_delta(f).nonzero_witness()}")
    if f.degree == 0:
        return Cochain.zero(f.nerve, -1, f.group) if f.is_zero() else None
    mat = f.nerve.delta_matrix(f.degree - 1)
    x = solve_system(csr_rows(mat), f.values, mat.shape[1], f.group, col_order=col_order)
    if x is None:
        return None
    return Cochain(f.nerve, f.degree - 1, f.group, x)


def solve_pinned(target: Cochain, pinned: np.ndarray, rng: np.random.Generator | None = None) -> Cochain | None:
    """β with δβ = target and β = 0 wherever ``pinned`` is set, or None."""
    nerve = target.nerve
    k = target.degree
    free = np.nonzero(~np.asarray(pinned, dtype=bool))[0]
    mat = nerve.delta_matrix(k - 1)[:, free]
    order = rng.permutation(len(free)).tolist() if rng is not None else None
    x = solve_system(csr_rows(mat), target.values, len(free), target.group, col_order=order)
    if x is None:
        return None
    vals = np.zeros((nerve.cochain_size(k - 1), target.group.ncoords), dtype=np.int64)
    vals[free] = x
    return Cochain(nerve, k - 1, target.group, vals)


def class_equal(f: Cochain, g: Cochain) -> Cochain | None:
    """Witness β with δβ = g − f, or None."""
    return coboundary_witness(g - f)
