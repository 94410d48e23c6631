"""Block linear systems whose unknowns are several cochains at once."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .algebra import AbelianGroup, solve_system
from .nerve import csr_rows


class BlockSystem:
    def __init__(self, group: AbelianGroup):
        self.group = group
        self._sizes: dict[str, int] = {}
        self._eqs: list[tuple[dict[str, sp.spmatrix], np.ndarray]] = []

    def unknown(self, name: str, size: int) -> str:
        self._sizes[name] = size
        return name

    def equation(self, terms: dict[str, sp.spmatrix], rhs: np.ndarray | None = None):
        nrows = next(iter(terms.values())).shape[0]
        if rhs is None:
            rhs = np.zeros((nrows, self.group.ncoords), dtype=np.int64)
        for name, mat in terms.items():
            if mat.shape != (nrows, self._sizes[name]):
                raise ValueError(f"block {name} has shape {mat.shape}, expected ({nrows}, {self._sizes[name]})")
        self._eqs.append((terms, np.asarray(rhs, dtype=np.int64).reshape(nrows, self.group.ncoords)))

    def solve(self, rng: np.random.Generator | None = None) -> dict[str, np.ndarray] | None:
        names = list(self._sizes)
        offsets = np.cumsum([0] + [self._sizes[n] for n in names])
        ncols = int(offsets[-1])
        blocks, rhs = [], []
        for terms, b in self._eqs:
            row = [terms.get(n, sp.csr_matrix((b.shape[0], self._sizes[n]), dtype=np.int64)) for n in names]
            blocks.append(row)
            rhs.append(b)
        if not blocks:
            return {n: np.zeros((self._sizes[n], self.group.ncoords), dtype=np.int64) for n in names}
        mat = sp.bmat(blocks, format="csr", dtype=np.int64) if ncols else None
        rhs = np.concatenate(rhs)
        if mat is None:
            if self.group.reduce(rhs).any():
                return None
            return {n: np.zeros((0, self.group.ncoords), dtype=np.int64) for n in names}
        order = rng.permutation(ncols).tolist() if rng is not None else None
        x = solve_system(csr_rows(mat), rhs, ncols, self.group, col_order=order)
        if x is None:
            return None
        return {n: x[offsets[i]:offsets[i + 1]] for i, n in enumerate(names)}
