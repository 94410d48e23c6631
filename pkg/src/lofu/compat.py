"""Ordinary transgression through the cylinder over loop space, and its
comparison with the enhanced transgression.

A loop ``λ = (γ₁, γ₂)`` is traversed on the grid ``s = -len(γ₂) .. len(γ₁)``
with ``ev(s, λ) = γ₁[s]`` for ``s >= 0`` and ``γ₂[-s]`` otherwise.  Cylinder
indices are pairs ``(λ, s)``; a tuple overlaps when its loops overlap in Λ
and its grid values lie in a closed window of width one.  The parameterized
path cover is built the same way from ``(γ, s)`` with ``s = 0 .. len(γ)``.

With ``α' = -ev₀*α + ev*α`` on the cylinder, a solution of ``δσ = α'``
vanishing on the slice ``s = 0`` restricts to a cocycle
``σ|_{end} − σ|_{start}`` on Λ, the ordinary transgression of α.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .nerve import (
    Cochain,
    CoverMorphism,
    CoverSystem,
    NotACocycle,
    cech_delta,
    class_equal,
    pullback,
    solve_pinned,
)
from .lf import fusion_d
from .paths import PathSpace, TruncationError, path_length
from .spaces import simplicial_partial
from .transgression import transgress


class SlicedCover(CoverSystem):
    """Indices ``(b, s)`` for ``b`` in a base cover and ``lo[b] <= s <= hi[b]``."""

    def __init__(self, base: CoverSystem, lo, hi, name: str, **kw):
        self.base = base
        self.lo = np.asarray(lo, dtype=np.int64)
        self.hi = np.asarray(hi, dtype=np.int64)
        keys = [(b, s) for b in range(len(base)) for s in range(int(self.lo[b]), int(self.hi[b]) + 1)]
        super().__init__(keys, **kw)
        self.offset = np.concatenate([[0], np.cumsum(self.hi - self.lo + 1)[:-1]]).astype(np.int64)
        arr = np.array(keys, dtype=np.int64).reshape(-1, 2)
        self.base_of = arr[:, 0]
        self.slice_of = arr[:, 1]
        self.name = name

    def id_array(self, b: np.ndarray, s: np.ndarray) -> np.ndarray:
        return self.offset[b] + s - self.lo[b]

    def describe(self, i):
        return [self.base.describe(int(self.base_of[i])), int(self.slice_of[i])]

    def witness(self, tup):
        b = tuple(int(self.base_of[i]) for i in tup)
        s = [int(self.slice_of[i]) for i in tup]
        if max(s) - min(s) > 1:
            return None
        w = self.base.witness(b)
        return None if w is None else (w, (min(s), max(s)))

    def _enumerate(self, n, prev):
        t = self.base.nerve.tuples(n)
        bounds = np.concatenate([self.lo[t], self.hi[t]], axis=1)
        # each window tuple is written once as s0 + pattern with some zero entry
        pats = np.array(np.meshgrid(*[[0, 1]] * n, indexing="ij")).reshape(n, -1).T
        pats = pats[(pats == 0).any(axis=1)]
        groups, inverse = np.unique(bounds, axis=0, return_inverse=True)
        chunks = []
        total = 0
        for g, (lo, hi) in enumerate(zip(groups[:, :n], groups[:, n:])):
            base_rows = t[inverse.reshape(-1) == g]
            for s0 in range(int(lo.min()), int(hi.max()) + 1):
                s = s0 + pats
                use = s[((s >= lo) & (s <= hi)).all(axis=1)]
                if not len(use):
                    continue
                total += len(base_rows) * len(use)
                self._check_cap(total)
                b = np.repeat(base_rows, len(use), axis=0)
                chunks.append(self.id_array(b, np.tile(use, (len(base_rows), 1))))
        if not chunks:
            return np.zeros((0, n), dtype=np.int64)
        return np.concatenate(chunks)


class Cylinder:
    """The cylinder cover over Λ and the parameterized path cover, with their maps."""

    def __init__(self, space: PathSpace):
        self.space = space
        paths = space.tubes.indices
        lengths = np.array([path_length(p) for p in paths], dtype=np.int64)
        loops = space.loops
        lk = np.array(loops.indices, dtype=np.int64).reshape(-1, 2)
        self.params = SlicedCover(space.tubes, np.zeros(len(paths)), lengths, "Γ̃")
        self.cover = SlicedCover(loops, -lengths[lk[:, 1]], lengths[lk[:, 0]], "S")
        self._lk = lk

    def _ev_vertex(self, ids: np.ndarray) -> np.ndarray:
        paths = self.space.tubes.indices
        lk = self._lk
        out = []
        for i in ids.tolist():
            b, s = self.cover.indices[i]
            a, c = lk[b]
            out.append(paths[a][s] if s >= 0 else paths[c][-s])
        return np.array(out, dtype=np.int64)

    @cached_property
    def ev(self) -> CoverMorphism:
        return CoverMorphism(self.cover, self.space.base.star,
                             self._ev_vertex(np.arange(len(self.cover))), name="ev")

    @cached_property
    def ev0(self) -> CoverMorphism:
        paths = self.space.tubes.indices
        starts = [paths[self._lk[b][0]][0] for b, _ in self.cover.indices]
        return CoverMorphism(self.cover, self.space.base.star, starts, name="ev₀")

    @cached_property
    def eps(self) -> CoverMorphism:
        """ε̃(γ, s) = (γ[0], γ[s]) in ``U²``."""
        u2 = self.space.base.power(2)
        paths = self.space.tubes.indices
        return CoverMorphism(self.params, u2, [u2.id_of[(paths[g][0], paths[g][s])]
                                               for g, s in self.params.indices], name="ε̃")

    def _varsigma(self, part: int) -> CoverMorphism:
        b = self.cover.base_of
        s = self.cover.slice_of
        g = self._lk[b, part]
        t = np.maximum(0, s) if part == 0 else np.maximum(0, -s)
        return CoverMorphism(self.cover, self.params, self.params.id_array(g, t), name=f"ς{part + 1}")

    @cached_property
    def varsigma1(self) -> CoverMorphism:
        return self._varsigma(0)

    @cached_property
    def varsigma2(self) -> CoverMorphism:
        return self._varsigma(1)

    @cached_property
    def end_slice(self) -> CoverMorphism:
        hi = self.cover.hi
        return CoverMorphism(self.space.loops, self.cover,
                             self.cover.id_array(np.arange(len(hi)), hi), name="end")

    @cached_property
    def start_slice(self) -> CoverMorphism:
        lo = self.cover.lo
        return CoverMorphism(self.space.loops, self.cover,
                             self.cover.id_array(np.arange(len(lo)), lo), name="start")

    @cached_property
    def path_end(self) -> CoverMorphism:
        hi = self.params.hi
        return CoverMorphism(self.space.tubes, self.params,
                             self.params.id_array(np.arange(len(hi)), hi), name="end")

    def zero_slice(self, cover: SlicedCover, n: int) -> np.ndarray:
        """Mask of ``n``-tuples lying entirely in the slice ``s = 0``."""
        if n <= 0:
            return np.zeros(0, dtype=bool)
        return (cover.slice_of[cover.nerve.tuples(n)] == 0).all(axis=1)

    def modified_pullback(self, alpha: Cochain) -> Cochain:
        """α' = −ev₀*α + ev*α."""
        return pullback(self.ev, alpha) - pullback(self.ev0, alpha)


def _check_cocycle(alpha: Cochain):
    bad = cech_delta(alpha).nonzero_witness()
    if bad is not None:
        raise NotACocycle(f"δα ≠ 0 at {bad}")


def standard_transgression(
    space: PathSpace, alpha: Cochain, rng=None, cylinder: Cylinder | None = None
) -> Cochain:
    """σ|_end − σ|_start for a solution of δσ = α' vanishing on the zero slice."""
    _check_cocycle(alpha)
    cyl = cylinder or Cylinder(space)
    target = cyl.modified_pullback(alpha)
    sigma = solve_pinned(target, cyl.zero_slice(cyl.cover, alpha.degree), rng)
    if sigma is None:
        raise TruncationError("σ", "α' = δσ has no solution vanishing on the zero slice",
                              target.nonzero_witness())
    return pullback(cyl.end_slice, sigma) - pullback(cyl.start_slice, sigma)


@dataclass
class VarsigmaConstruction:
    beta_tilde: Cochain
    sigma: Cochain
    end_difference: Cochain
    beta: Cochain


def varsigma_sigma(space: PathSpace, alpha: Cochain, rng=None, cylinder: Cylinder | None = None):
    """σ = −(ς₁*β̃ + ς₂*β̃) from the parameterized solve ε̃*∂α = δβ̃."""
    _check_cocycle(alpha)
    cyl = cylinder or Cylinder(space)
    target = pullback(cyl.eps, simplicial_partial(space.base, alpha))
    bt = solve_pinned(target, cyl.zero_slice(cyl.params, alpha.degree), rng)
    if bt is None:
        raise TruncationError("β̃", "ε̃*∂α = δβ̃ has no solution vanishing on the zero slice",
                              target.nonzero_witness())
    sigma = -(pullback(cyl.varsigma1, bt) + pullback(cyl.varsigma2, bt))
    diff = pullback(cyl.end_slice, sigma) - pullback(cyl.start_slice, sigma)
    return VarsigmaConstruction(bt, sigma, diff, pullback(cyl.path_end, bt))


@dataclass
class DiagramReport:
    omega: Cochain
    standard: Cochain
    coboundary: Cochain | None
    varsigma: VarsigmaConstruction | None
    checks: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def diagram_check(space: PathSpace, alpha: Cochain, rng=None, use_varsigma: bool = True) -> DiagramReport:
    """Compare the ordinary transgression with the image of 𝔗(α) = −[ω]."""
    cyl = Cylinder(space)
    cert = transgress(space, alpha, rng)
    standard = standard_transgression(space, alpha, rng, cyl)
    checks = {"δ(standard) = 0": cech_delta(standard).is_zero()}
    nu = class_equal(cert.representative, standard)
    checks["standard ~ −ω"] = nu is not None
    vs = None
    if use_varsigma:
        vs = varsigma_sigma(space, alpha, rng, cyl)
        checks["δσ = α'"] = cech_delta(vs.sigma).equals(cyl.modified_pullback(alpha))
        checks["end difference = −dβ"] = vs.end_difference.equals(-fusion_d(space, vs.beta))
        if vs.beta.equals(cert.beta):
            checks["end difference = −ω"] = vs.end_difference.equals(-cert.omega)
    return DiagramReport(cert.omega, standard, nu, vs, checks)

