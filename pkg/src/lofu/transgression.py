"""Enhanced transgression: a Čech cocycle α on M to a loop-fusion cocycle on Λ.

    ε*∂α = δβ  (β in C₀),   ω = dβ,   ∂̄β = δη  (η in C₀, k ≥ 2),   g = dη.

The class assigned to [α] is −[ω].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lf import LfCertificate, eight_partial, fusion_d, lf_certificate
from .nerve import Cochain, NotACocycle, cech_delta, pullback
from .paths import PathSpace, TruncationError, _solve_pinned
from .spaces import simplicial_partial


class VerificationError(RuntimeError):
    """An identity that must hold by construction failed."""

    def __init__(self, identity: str, witness=None):
        super().__init__(f"{identity} failed at {witness}")
        self.identity = identity
        self.witness = witness


@dataclass
class TransgressionCertificate:
    alpha: Cochain
    beta: Cochain
    omega: Cochain
    eta: Cochain | None
    lf: LfCertificate

    @property
    def k(self) -> int:
        return self.alpha.degree

    @property
    def representative(self) -> Cochain:
        """Cochain representing 𝔗[α] = −[ω]."""
        return -self.omega

    def identities(self, space: PathSpace) -> list[tuple[str, tuple | None]]:
        """Re-evaluate every stored identity; (name, witness or None)."""
        out = [
            ("δα = 0", cech_delta(self.alpha).nonzero_witness()),
            ("δβ = ε*∂α", cech_delta(self.beta).first_difference(
                pullback(space.epsilon, simplicial_partial(space.base, self.alpha)))),
            ("β ∈ C₀", None if space.in_C0(self.beta) else ("β",)),
            ("ω = dβ", self.omega.first_difference(fusion_d(space, self.beta))),
            ("δω = 0", cech_delta(self.omega).nonzero_witness()),
            ("dω = 0", fusion_d(space, self.omega).nonzero_witness()),
        ]
        bar = eight_partial(space, self.beta)
        if self.eta is None:
            out.append(("∂̄β = 0", bar.nonzero_witness()))
        else:
            out.append(("∂̄β = δη", cech_delta(self.eta).first_difference(bar)))
            out.append(("η ∈ C₀", None if space.in_C0(self.eta) else ("η",)))
        if self.lf.g is not None:
            out.append(("∂̄ω = δg", cech_delta(self.lf.g).first_difference(eight_partial(space, self.omega))))
            out.append(("dg = 0", fusion_d(space, self.lf.g).nonzero_witness()))
        return out


def transgress(
    space: PathSpace, alpha: Cochain, rng: np.random.Generator | None = None
) -> TransgressionCertificate:
    """Run the transgression pipeline; raises TruncationError if a C₀ solve fails."""
    k = alpha.degree
    if alpha.cover is not space.base.star:
        raise ValueError("α must live on the star cover of the base")
    if k < 1:
        raise ValueError("transgression needs degree k >= 1")
    bad = cech_delta(alpha).nonzero_witness()
    if bad is not None:
        raise NotACocycle(f"δα ≠ 0 at {bad}")
    target = pullback(space.epsilon, simplicial_partial(space.base, alpha))
    beta = _solve_pinned(space, target, rng)
    if beta is None:
        raise TruncationError("β", f"ε*∂α = δβ has no C₀ solution at L_max={space.L_max}",
                              target.nonzero_witness())
    omega = fusion_d(space, beta)
    bar = eight_partial(space, beta)
    eta = None
    if k == 1:
        w = bar.nonzero_witness()
        if w is not None:
            raise TruncationError("η", "∂̄β ≠ 0 in degree 0", w)
    else:
        eta = _solve_pinned(space, bar, rng)
        if eta is None:
            raise TruncationError("η", f"∂̄β = δη has no C₀ solution at L_max={space.L_max}",
                                  bar.nonzero_witness())
    lf = lf_certificate(space, omega, rng)
    if not lf:
        raise VerificationError(lf.failure.condition, lf.failure.witness)
    if eta is not None:
        # g = dη is a valid witness by construction; keep it for reproducibility
        g = fusion_d(space, eta)
        if not cech_delta(g).equals(eight_partial(space, omega)):
            raise VerificationError("∂̄ω = δ(dη)", cech_delta(g).first_difference(eight_partial(space, omega)))
        lf.g = g
    return TransgressionCertificate(alpha, beta, omega, eta, lf)
