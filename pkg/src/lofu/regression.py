"""Regression: a loop-fusion cocycle ω on Λ back to a Čech cocycle α on M.

A reference assignment picks, for every tuple ``u`` of the ``U²`` nerve, a
tuple ``γ_u`` of the path nerve lying over it.  With any frame ``γ_w`` over a
longer tuple ``w``,

    κ(w) = sum_j (-1)^j ω(ι_j γ_w, γ_{ι_j w})

is a cocycle on ``M²`` independent of the frame.  Then ``∂κ = δτ`` on ``M³``
and ``κ = ∂α + δμ`` with ``δα = 0``.  The class assigned to [ω] is −[α].

The figure-eight strategy for τ uses reference eight frames ``E_y`` over the
``U³`` nerve:

    τ(y) = ω(j E_y, γ_{π2 y}) − ω(π3 E_y, γ_{π3 y}) − ω(π1 E_y, γ_{π1 y})
           + sum_i (-1)^i g(E_{ι_i y}, ι_i E_y).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import BlockSystem
from .lf import LfCertificate, lf_certificate
from .nerve import Cochain, CoverMorphism, MorphismError, Nerve, cech_delta, pullback
from .paths import PathSpace, TruncationError
from .spaces import simplicial_partial
from .transgression import VerificationError

TIE_BREAKS = ("first", "last", "random")


def _pick_over(src: Nerve, anchor: CoverMorphism, tgt: Nerve, n: int, tie_break: str, rng=None):
    """For each ``n``-tuple of ``tgt``, one ``n``-tuple of ``src`` mapping onto it (row ids, -1 if none)."""
    t = src.tuples(n)
    img = tgt.locate(n, anchor.index_map[t]) if len(t) else np.zeros(0, dtype=np.int64)
    order = np.arange(len(t))
    if tie_break == "last":
        order = order[::-1]
    elif tie_break == "random":
        if rng is None:
            raise ValueError("random tie-break needs an rng")
        order = rng.permutation(len(t))
    elif tie_break != "first":
        raise ValueError(f"tie_break must be one of {TIE_BREAKS}")
    out = np.full(tgt.size(n), -1, dtype=np.int64)
    keys, first = np.unique(img[order], return_index=True)
    keep = keys >= 0
    out[keys[keep]] = order[first[keep]]
    return out


def _require(picks: np.ndarray, tgt: Nerve, n: int, stage: str, L_max: int):
    missing = np.nonzero(picks < 0)[0]
    if len(missing):
        w = tuple(tgt.tuples(n)[missing[0]].tolist())
        raise TruncationError(stage, f"no frame over {len(missing)} tuples at L_max={L_max}", w)


@dataclass
class ReferencePaths:
    """Path-nerve rows chosen over each ``U²`` tuple of length ``n``."""

    n: int
    rows: np.ndarray
    tie_break: str

    def tuples(self, space: PathSpace) -> np.ndarray:
        return space.tubes.nerve.tuples(self.n)[self.rows]


def reference_paths(space: PathSpace, n: int, tie_break: str = "first", rng=None) -> ReferencePaths:
    """Reference ``γ_u`` for each ``n``-tuple ``u`` of the ``U²`` nerve."""
    u2 = space.base.power(2).nerve
    picks = _pick_over(space.tubes.nerve, space.epsilon, u2, n, tie_break, rng)
    _require(picks, u2, n, "reference paths", space.L_max)
    return ReferencePaths(n, picks, tie_break)


def _loop_rows(space: PathSpace, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rows of the Λ nerve for the tuples whose entries pair ``a[:, i]`` with ``b[:, i]``."""
    loops = space.loops
    npaths = len(space.tubes)
    keys = np.array(loops.indices, dtype=np.int64).reshape(-1, 2)
    code = keys[:, 0] * npaths + keys[:, 1]
    want = a * npaths + b
    ids = np.searchsorted(code, want)
    ids = np.minimum(ids, len(code) - 1)
    if (code[ids] != want).any():
        raise MorphismError("paired paths do not share endpoints")
    rows = loops.nerve.locate(a.shape[1], ids)
    if (rows < 0).any():
        raise MorphismError("paired path tuples do not overlap in Λ")
    return rows


def _compare(space: PathSpace, omega: Cochain, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """ω evaluated on the Λ tuples pairing path tuples ``a`` and ``b`` row by row."""
    if a.shape[1] == 0:
        return np.repeat(omega.values, len(a), axis=0)
    return omega.values[_loop_rows(space, a, b)]


def descent_kappa(
    space: PathSpace, omega: Cochain, refs: ReferencePaths, frame_tie_break: str = "first", rng=None
) -> Cochain:
    k = omega.degree + 1
    if refs.n != k:
        raise ValueError(f"references must be {k}-tuples for ω of degree {k - 1}")
    u2 = space.base.power(2).nerve
    tubes = space.tubes.nerve
    frames = _pick_over(tubes, space.epsilon, u2, k + 1, frame_tie_break, rng)
    _require(frames, u2, k + 1, "κ frames", space.L_max)
    frame_t = tubes.tuples(k + 1)[frames]
    ref_t = refs.tuples(space)
    vals = np.zeros((u2.size(k + 1), omega.group.ncoords), dtype=np.int64)
    for j in range(1, k + 2):
        a = np.delete(frame_t, j - 1, axis=1)
        b = ref_t[u2.face(k + 1, j)]
        vals += (-1) ** j * _compare(space, omega, a, b)
    kappa = Cochain(u2, k, omega.group, vals)
    bad = cech_delta(kappa).nonzero_witness()
    if bad is not None:
        raise VerificationError("δκ = 0", bad)
    return kappa


def descent_tau(
    space: PathSpace,
    kappa: Cochain,
    strategy: str = "solve",
    omega: Cochain | None = None,
    g: Cochain | None = None,
    refs: ReferencePaths | None = None,
    rng=None,
) -> Cochain:
    """τ on ``M³`` with ``∂κ = δτ``."""
    u3 = space.base.power(3).nerve
    k = kappa.degree
    target = simplicial_partial(space.base, kappa)
    if strategy == "solve":
        system = BlockSystem(kappa.group)
        system.unknown("tau", u3.cochain_size(k - 1))
        system.equation({"tau": u3.delta_matrix(k - 1)}, target.values)
        x = system.solve(rng)
        if x is None:
            raise TruncationError("τ", "∂κ = δτ has no solution", target.nonzero_witness())
        tau = Cochain(u3, k - 1, kappa.group, x["tau"])
    elif strategy == "eight":
        tau = _tau_from_eights(space, kappa, omega, g, refs)
    else:
        raise ValueError("strategy must be 'solve' or 'eight'")
    bad = cech_delta(tau).first_difference(target)
    if bad is not None:
        raise VerificationError("∂κ = δτ", bad)
    return tau


def _tau_from_eights(space, kappa, omega, g, refs) -> Cochain:
    if omega is None or refs is None:
        raise ValueError("the figure-eight strategy needs ω and the reference paths")
    k = kappa.degree
    if k >= 2 and g is None:
        raise ValueError("the figure-eight strategy needs g when k >= 2")
    base = space.base
    u3 = base.power(3).nerve
    pairs = space.pairs.nerve

    def eight_frames(n):
        picks = _pick_over(pairs, space.pair_anchor, u3, n, "first")
        _require(picks, u3, n, "τ eight frames", space.L_max)
        return pairs.tuples(n)[picks]

    E = eight_frames(k)
    ref_t = refs.tuples(space)
    vals = np.zeros((u3.size(k), kappa.group.ncoords), dtype=np.int64)
    for i, sign, m in ((2, 1, space.join_map), (3, -1, space.first), (1, -1, space.second)):
        proj = base.projection(3, i)
        vals += sign * _compare(space, omega, m.index_map[E], ref_t[proj.rows(k)])
    if k >= 2:
        eight2 = space.eights.level(2)
        npairs = len(space.pairs)
        E_short = eight_frames(k - 1)
        keys = np.array(eight2.indices, dtype=np.int64).reshape(-1, 2)
        code = keys[:, 0] * npairs + keys[:, 1]
        for i in range(1, k + 1):
            a = E_short[u3.face(k, i)]
            b = np.delete(E, i - 1, axis=1)
            ids = np.searchsorted(code, a * npairs + b)
            rows = eight2.nerve.locate(k - 1, ids)
            if (rows < 0).any():
                raise TruncationError("τ eight frames", "frame pair outside the eight nerve")
            vals += (-1) ** i * g.values[rows]
    return Cochain(u3, k - 1, kappa.group, vals)


@dataclass
class RegressionCertificate:
    omega: Cochain
    lf: LfCertificate
    refs: ReferencePaths
    kappa: Cochain
    tau: Cochain
    alpha: Cochain
    mu: Cochain

    @property
    def k(self) -> int:
        return self.alpha.degree

    @property
    def representative(self) -> Cochain:
        """Cochain representing R[ω] = −[α]."""
        return -self.alpha

    def identities(self, space: PathSpace) -> list[tuple[str, tuple | None]]:
        base = space.base
        return [
            ("δκ = 0", cech_delta(self.kappa).nonzero_witness()),
            ("∂κ = δτ", cech_delta(self.tau).first_difference(simplicial_partial(base, self.kappa))),
            ("κ = ∂α + δμ", self.kappa.first_difference(
                simplicial_partial(base, self.alpha) + cech_delta(self.mu))),
            ("δα = 0", cech_delta(self.alpha).nonzero_witness()),
        ]


def _alpha_solve(space: PathSpace, kappa: Cochain, rng=None):
    base = space.base
    k = kappa.degree
    m1, m2 = base.star.nerve, base.power(2).nerve
    partial = sum(
        (-1) ** j * base.projection(2, j).matrix(k) for j in (1, 2)
    )
    system = BlockSystem(kappa.group)
    system.unknown("alpha", m1.cochain_size(k))
    system.unknown("mu", m2.cochain_size(k - 1))
    system.equation({"alpha": partial.tocsr(), "mu": m2.delta_matrix(k - 1)}, kappa.values)
    system.equation({"alpha": m1.delta_matrix(k)})
    x = system.solve(rng)
    if x is None:
        raise TruncationError("α", "κ = ∂α + δμ has no solution with δα = 0", kappa.nonzero_witness())
    return Cochain(m1, k, kappa.group, x["alpha"]), Cochain(m2, k - 1, kappa.group, x["mu"])


def regress(
    space: PathSpace,
    omega: Cochain,
    method: str = "solve",
    tau_strategy: str = "solve",
    tie_break: str = "first",
    rng: np.random.Generator | None = None,
) -> RegressionCertificate:
    """Run the regression pipeline.

    ``method="contract"`` uses the basepoint homotopy α = −i₁*κ, μ = −i₂*τ
    instead of the block solve; both are verified the same way.
    """
    if omega.cover is not space.loops:
        raise ValueError("ω must live on the loop cover")
    lf = lf_certificate(space, omega, rng)
    if not lf:
        raise VerificationError(lf.failure.condition, lf.failure.witness)
    k = omega.degree + 1
    refs = reference_paths(space, k, tie_break, rng)
    kappa = descent_kappa(space, omega, refs)
    tau = descent_tau(space, kappa, tau_strategy, omega, lf.g, refs, rng)
    base = space.base
    if method == "solve":
        alpha, mu = _alpha_solve(space, kappa, rng)
    elif method == "contract":
        alpha = pullback(base.inclusion(1), -kappa)
        mu = pullback(base.inclusion(2), -tau)
    else:
        raise ValueError("method must be 'solve' or 'contract'")
    cert = RegressionCertificate(omega, lf, refs, kappa, tau, alpha, mu)
    for name, bad in cert.identities(space):
        if bad is not None:
            raise VerificationError(name, bad)
    return cert
