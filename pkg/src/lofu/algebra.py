"""Finitely generated abelian groups and exact integer linear algebra.

Coefficient groups are stored in invariant-factor form ``Z^r + Z/d_1 + ... +
Z/d_t`` with ``d_1 | d_2 | ... | d_t``.  Elements are integer coordinate
vectors whose torsion coordinates are kept as canonical residues.

Linear systems ``m x = b`` over such a group split into one integer system per
coordinate, solved modulo the coordinate's order (0 meaning a free summand).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

import numpy as np


class GroupSpecError(ValueError):
    pass


@dataclass(frozen=True)
class AbelianGroup:
    rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be non-negative")
        for d in self.torsion:
            if d < 2:
                raise ValueError(f"torsion coefficient {d} < 2")
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValueError(f"torsion {self.torsion} violates divisibility")

    @property
    def ncoords(self) -> int:
        return self.rank + len(self.torsion)

    @property
    def moduli(self) -> tuple[int, ...]:
        """Order of each coordinate, 0 for free coordinates."""
        return (0,) * self.rank + tuple(self.torsion)

    def is_finite(self) -> bool:
        return self.rank == 0

    def order(self) -> int | None:
        if self.rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def is_trivial(self) -> bool:
        return self.rank == 0 and not self.torsion

    def reduce(self, values: np.ndarray) -> np.ndarray:
        """Reduce an array whose last axis runs over coordinates."""
        values = np.asarray(values, dtype=np.int64)
        if not self.torsion:
            return values
        out = values.copy()
        mods = np.array(self.torsion, dtype=np.int64)
        out[..., self.rank:] = np.mod(out[..., self.rank:], mods)
        return out

    def element(self, coords: Iterable[int]) -> "GroupElement":
        return GroupElement(self, tuple(int(c) for c in coords))

    def zero(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.ncoords)

    def generators(self) -> list["GroupElement"]:
        gens = []
        for i in range(self.ncoords):
            c = [0] * self.ncoords
            c[i] = 1
            gens.append(self.element(c))
        return gens

    def elements(self):
        """Iterate over all elements of a finite group."""
        if self.rank:
            raise ValueError("group is infinite")
        for coords in np.ndindex(*self.torsion) if self.torsion else [()]:
            yield self.element(coords)

    def __str__(self):
        return render_group(self)


@dataclass(frozen=True)
class GroupElement:
    group: AbelianGroup
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != self.group.ncoords:
            raise ValueError("coordinate vector has wrong length")
        reduced = tuple(int(c) for c in self.group.reduce(np.array(self.coords, dtype=np.int64)))
        object.__setattr__(self, "coords", reduced)

    def _check(self, other):
        if not isinstance(other, GroupElement) or other.group != self.group:
            raise ValueError("elements of different groups")

    def __add__(self, other):
        self._check(other)
        return GroupElement(self.group, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return GroupElement(self.group, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, n: int):
        return GroupElement(self.group, tuple(n * a for a in self.coords))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)


_TERM = re.compile(r"^Z(?:\^(\d+))?$|^Z/(\d+)$")


def parse_group_spec(text: str) -> AbelianGroup:
    """Parse ``Z``, ``Z^3``, ``Z/4+Z/6`` and similar into canonical form."""
    text = text.replace(" ", "")
    if not text:
        raise GroupSpecError("empty group spec")
    rank = 0
    cyclic = []
    for term in text.split("+"):
        m = _TERM.match(term)
        if m is None:
            raise GroupSpecError(f"cannot parse group term {term!r}")
        if m.group(2) is not None:
            d = int(m.group(2))
            if d < 2:
                raise GroupSpecError(f"cyclic order {d} < 2")
            cyclic.append(d)
        else:
            rank += int(m.group(1)) if m.group(1) is not None else 1
    return AbelianGroup(rank, invariant_factors(cyclic))


def render_group(group: AbelianGroup) -> str:
    parts = []
    if group.rank == 1:
        parts.append("Z")
    elif group.rank > 1:
        parts.append(f"Z^{group.rank}")
    parts.extend(f"Z/{d}" for d in group.torsion)
    return "+".join(parts) if parts else "0"


def factorint(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def invariant_factors(orders: Sequence[int]) -> tuple[int, ...]:
    """Invariant factors of a direct sum of cyclic groups of the given orders."""
    by_prime: dict[int, list[int]] = {}
    for d in orders:
        if d == 1:
            continue
        for p, e in factorint(d).items():
            by_prime.setdefault(p, []).append(p**e)
    if not by_prime:
        return ()
    length = max(len(v) for v in by_prime.values())
    out = [1] * length
    for powers in by_prime.values():
        powers.sort()
        for i, q in enumerate(powers):
            out[length - len(powers) + i] *= q
    return tuple(out)


# ---------------------------------------------------------------------------
# Integer matrices and Smith normal form


class IntMatrix:
    """Sparse integer matrix stored as one ``{col: value}`` dict per row."""

    def __init__(self, rows: int, cols: int, data: dict[int, dict[int, int]] | None = None):
        self.rows = rows
        self.cols = cols
        self.data: dict[int, dict[int, int]] = {}
        for i, row in (data or {}).items():
            if not 0 <= i < rows:
                raise IndexError(f"row {i} out of range")
            clean = {}
            for j, v in row.items():
                if not 0 <= j < cols:
                    raise IndexError(f"column {j} out of range")
                if v:
                    clean[j] = int(v)
            if clean:
                self.data[i] = clean

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        return cls(nrows, ncols, {i: dict(enumerate(r)) for i, r in enumerate(rows)})

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, {i: {i: 1} for i in range(n)})

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for i, row in self.data.items():
            for j, v in row.items():
                out[i][j] = v
        return out

    def row(self, i: int) -> dict[int, int]:
        return self.data.get(i, {})

    def __eq__(self, other):
        return (
            isinstance(other, IntMatrix)
            and (self.rows, self.cols) == (other.rows, other.cols)
            and self.data == other.data
        )

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        out: dict[int, dict[int, int]] = {}
        for i, row in self.data.items():
            acc: dict[int, int] = {}
            for k, a in row.items():
                for j, b in other.row(k).items():
                    acc[j] = acc.get(j, 0) + a * b
            out[i] = acc
        return IntMatrix(self.rows, other.cols, out)

    def __repr__(self):
        return f"IntMatrix({self.to_dense()})"


def _snf_dense(a: list[list[int]], track: bool = True):
    """Smith normal form of a dense integer matrix, in place on a copy.

    Pivot rule: smallest nonzero magnitude in the active block, ties broken by
    lowest row then lowest column.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    a = [list(r) for r in a]
    u = [[int(i == j) for j in range(m)] for i in range(m)] if track else None
    v = [[int(i == j) for j in range(n)] for i in range(n)] if track else None

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        if track:
            u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        if track:
            for r in v:
                r[i], r[j] = r[j], r[i]

    def add_row(src, dst, q):  # row dst += q * row src
        if q == 0:
            return
        rs, rd = a[src], a[dst]
        for k in range(n):
            if rs[k]:
                rd[k] += q * rs[k]
        if track:
            us, ud = u[src], u[dst]
            for k in range(m):
                if us[k]:
                    ud[k] += q * us[k]

    def add_col(src, dst, q):  # col dst += q * col src
        if q == 0:
            return
        for r in a:
            if r[src]:
                r[dst] += q * r[src]
        if track:
            for r in v:
                if r[src]:
                    r[dst] += q * r[src]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                row = a[i]
                for j in range(t, n):
                    x = row[j]
                    if x and (best is None or abs(x) < best[0]):
                        best = (abs(x), i, j)
            if best is None:
                return (u, a, v)
            _, i, j = best
            swap_rows(t, i)
            swap_cols(t, j)
            p = a[t][t]
            dirty = False
            for i in range(t + 1, m):
                if a[i][t]:
                    q = a[i][t] // p
                    add_row(t, i, -q)
                    if a[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                if a[t][j]:
                    q = a[t][j] // p
                    add_col(t, j, -q)
                    if a[t][j]:
                        dirty = True
            if dirty:
                continue
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if a[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is not None:
                add_row(bad, t, 1)
                continue
            if p < 0:
                a[t] = [-x for x in a[t]]
                if track:
                    u[t] = [-x for x in u[t]]
            break
    return (u, a, v)


def smith_normal_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(U, D, V)`` with ``U @ m @ V == D`` and D in Smith form."""
    if m.rows == 0 or m.cols == 0:
        return IntMatrix.identity(m.rows), IntMatrix(m.rows, m.cols), IntMatrix.identity(m.cols)
    u, d, v = _snf_dense(m.to_dense())
    return IntMatrix.from_dense(u), IntMatrix.from_dense(d), IntMatrix.from_dense(v)


def _inverse_unimodular(u: list[list[int]]) -> list[list[int]]:
    """Inverse of a unimodular integer matrix via its Smith form."""
    n = len(u)
    if n == 0:
        return []
    # U u V = I  =>  u^{-1} = V U
    uu, d, vv = _snf_dense(u)
    if any(d[i][i] != 1 for i in range(n)):
        raise ValueError("matrix is not unimodular")
    return [[sum(vv[i][k] * uu[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


# ---------------------------------------------------------------------------
# Linear solving


def _is_unit(x: int, q: int) -> bool:
    return abs(x) == 1 if q == 0 else gcd(x, q) == 1


class _Echelon:
    """Fully reduced unit-pivot rows: no pivot row mentions another pivot column."""

    def __init__(self, q: int):
        self.q = q
        self.rows: dict[int, dict[int, int]] = {}
        self.rhs: dict[int, int] = {}
        self.occ: dict[int, set[int]] = {}  # non-pivot column -> pivots whose row has it

    def _axpy(self, row: dict[int, int], coef: int, src: dict[int, int], skip: int | None = None):
        """row -= coef * src; returns (added, removed) column lists."""
        q = self.q
        added, removed = [], []
        for j, a in src.items():
            if j == skip:
                continue
            old = row.get(j, 0)
            x = old - coef * a
            if q:
                x %= q
            if x:
                row[j] = x
                if not old:
                    added.append(j)
            elif old:
                del row[j]
                removed.append(j)
        return added, removed

    def reduce(self, row: dict[int, int], b: int):
        q = self.q
        for c in [c for c in row if c in self.rows]:
            coef = row.pop(c)
            self._axpy(row, coef, self.rows[c], skip=c)
            b -= coef * self.rhs[c]
            if q:
                b %= q
        return row, b

    def add(self, c: int, row: dict[int, int], b: int):
        q = self.q
        a = row[c]
        inv = a if q == 0 else pow(a, -1, q)
        if inv != 1:
            row = {j: (x * inv % q if q else x * inv) for j, x in row.items()}
            b = b * inv % q if q else b * inv
        del row[c]
        for p in self.occ.pop(c, ()):
            prow = self.rows[p]
            coef = prow.pop(c)
            added, removed = self._axpy(prow, coef, row)
            for j in added:
                self.occ.setdefault(j, set()).add(p)
            for j in removed:
                self.occ[j].discard(p)
            self.rhs[p] = (self.rhs[p] - coef * b) % q if q else self.rhs[p] - coef * b
        for j in row:
            self.occ.setdefault(j, set()).add(c)
        self.rows[c] = row
        self.rhs[c] = b


def _solve_residual(rows, rhs, q) -> dict[int, int] | None:
    """Dense Smith-form solve for the rows left without unit pivots."""
    cols = sorted({c for r in rows for c in r})
    if not cols:
        return {} if all((b % q if q else b) == 0 for b in rhs) else None
    index = {c: k for k, c in enumerate(cols)}
    nvar = len(cols)
    extra = len(rows) if q else 0
    dense = []
    for r_i, r in enumerate(rows):
        line = [0] * (nvar + extra)
        for c, a in r.items():
            line[index[c]] = a
        if q:
            line[nvar + r_i] = q
        dense.append(line)
    u, d, v = _snf_dense(dense)
    c = [sum(u[i][k] * rhs[k] for k in range(len(rows))) for i in range(len(rows))]
    y = [0] * (nvar + extra)
    for i in range(len(rows)):
        di = d[i][i] if i < nvar + extra else 0
        if di == 0:
            if c[i] != 0:
                return None
        else:
            if c[i] % di:
                return None
            y[i] = c[i] // di
    x = [sum(v[i][k] * y[k] for k in range(nvar + extra)) for i in range(nvar)]
    return {col: (x[index[col]] % q if q else x[index[col]]) for col in cols}


def solve_mod(
    rows: Sequence[dict[int, int]],
    rhs: Sequence[int],
    ncols: int,
    q: int,
) -> list[int] | None:
    """Solve a sparse integer system modulo ``q`` (``q == 0`` means over Z).

    Unit entries are eliminated first in a single sparse pass; whatever is left
    has no unit entries and goes through a dense Smith-form solve.  Free
    variables are set to zero, so the representative is deterministic.
    """
    ech = _Echelon(q)
    residual: list[tuple[dict[int, int], int]] = []

    def admit(row, b):
        row, b = ech.reduce(row, b)
        if not row:
            return (b % q if q else b) == 0
        units = [c for c, a in row.items() if _is_unit(a, q)]
        if not units:
            residual.append((row, b))
            return True
        ech.add(min(units), row, b)
        return True

    for r, b in zip(rows, rhs):
        row = {c: (a % q if q else a) for c, a in r.items() if (a % q if q else a)}
        if not admit(row, (b % q) if q else b):
            return None
    while residual:
        # later pivots may have created unit entries in earlier leftovers
        pending, residual[:] = list(residual), []
        before = len(ech.rows)
        for row, b in pending:
            if not admit(dict(row), b):
                return None
        if len(ech.rows) == before:
            break
    x = [0] * ncols
    if residual:
        sol = _solve_residual([r for r, _ in residual], [b for _, b in residual], q)
        if sol is None:
            return None
        for c, val in sol.items():
            x[c] = val
    for c, row in ech.rows.items():
        val = ech.rhs[c]
        for j, a in row.items():
            val -= a * x[j]
        x[c] = val % q if q else val
    return x


def solve_system(
    rows: Sequence[dict[int, int]],
    rhs: np.ndarray,
    ncols: int,
    group: AbelianGroup,
    col_order: Sequence[int] | None = None,
) -> np.ndarray | None:
    """Solve ``m x = b`` where ``b`` has shape ``(len(rows), group.ncoords)``.

    ``col_order`` relabels the unknowns before elimination; it changes which
    representative is returned, never whether one exists.
    """
    rhs = np.asarray(rhs, dtype=np.int64).reshape(len(rows), group.ncoords)
    if col_order is not None:
        perm = list(col_order)
        if sorted(perm) != list(range(ncols)):
            raise ValueError("col_order must be a permutation")
        where = {old: new for new, old in enumerate(perm)}
        rows = [{where[c]: a for c, a in r.items()} for r in rows]
    out = np.zeros((ncols, group.ncoords), dtype=np.int64)
    for k, q in enumerate(group.moduli):
        sol = solve_mod(rows, [int(b) for b in rhs[:, k]], ncols, q)
        if sol is None:
            return None
        out[:, k] = sol
    if col_order is not None:
        out = out[[where[c] for c in range(ncols)]]
    return group.reduce(out)


def solve_linear(m: IntMatrix, b: Sequence[GroupElement]) -> list[GroupElement] | None:
    """Solve ``m x = b`` over the group of ``b``; ``None`` when unsolvable."""
    if len(b) != m.rows:
        raise ValueError(f"right-hand side has {len(b)} entries, matrix has {m.rows} rows")
    if not b:
        return None if m.rows else []
    group = b[0].group
    if any(e.group != group for e in b):
        raise ValueError("right-hand side mixes groups")
    rhs = np.array([e.coords for e in b], dtype=np.int64).reshape(m.rows, group.ncoords)
    x = solve_system([m.row(i) for i in range(m.rows)], rhs, m.cols, group)
    if x is None:
        return None
    return [group.element(row) for row in x]


def apply_matrix(rows: Sequence[dict[int, int]], x: np.ndarray, group: AbelianGroup) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    out = np.zeros((len(rows), group.ncoords), dtype=np.int64)
    for i, r in enumerate(rows):
        for c, a in r.items():
            out[i] += a * x[c]
    return group.reduce(out)
