"""Loop-fusion cochains: the fusion differential, the figure-eight operator
and certificates for lf-cocycles and lf-class equality.

On ``Γ^[l]`` the fusion differential is ``d = sum_j (-1)^j ϱ_j^*``.  On the
loop cover ``Λ = Γ^[2]`` the figure-eight operator is

    ∂̄f = j^* f − π3^* f − π1^* f

with ``π3`` keeping the first half of a figure-eight pair and ``π1`` the
second.  An lf-cocycle is a Čech cocycle ``ω`` on ``Λ`` with ``dω = 0`` and
``∂̄ω = δg`` for some ``g`` on the eight cover with ``dg = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .blocks import BlockSystem
from .nerve import Cochain, CoverSystem, apply_operator, cech_delta
from .paths import FiberPowerFamily, PathSpace


@dataclass(frozen=True)
class Failure:
    condition: str
    witness: tuple | None = None

    def __str__(self):
        return f"{self.condition} (witness {self.witness})" if self.witness is not None else self.condition


def level_of(space: PathSpace, cover: CoverSystem) -> tuple[FiberPowerFamily, int]:
    for family in (space.paths, space.eights):
        for l, c in family._levels.items():
            if c is cover:
                return family, l
    raise ValueError(f"{cover.name} is not a fiber power of paths or figure-eight pairs")


def fusion_matrix(family: FiberPowerFamily, l: int, k: int) -> sp.csr_matrix:
    """Matrix of d from degree-``k`` cochains on level ``l`` to level ``l+1``."""
    src, tgt = family.level(l), family.level(l + 1)
    out = sp.csr_matrix((tgt.nerve.cochain_size(k), src.nerve.cochain_size(k)), dtype=np.int64)
    for j in range(1, l + 2):
        out = out + (-1) ** j * family.face(l + 1, j).matrix(k)
    return sp.csr_matrix(out)


def fusion_d(space: PathSpace, f: Cochain) -> Cochain:
    family, l = level_of(space, f.cover)
    tgt = family.level(l + 1).nerve
    if f.degree < 0:
        return Cochain.zero(tgt, f.degree, f.group)
    vals = apply_operator(fusion_matrix(family, l, f.degree), f.values)
    return Cochain(tgt, f.degree, f.group, vals)


def eight_matrix(space: PathSpace, l: int, k: int) -> sp.csr_matrix:
    first, second, joined = space.eight_maps(l)
    return sp.csr_matrix(joined.matrix(k) - first.matrix(k) - second.matrix(k))


def eight_partial(space: PathSpace, f: Cochain) -> Cochain:
    """∂̄f on the figure-eight cover for ``f`` on ``Γ^[l]``."""
    family, l = level_of(space, f.cover)
    if family is not space.paths:
        raise ValueError("the figure-eight operator acts on path fiber powers")
    tgt = space.eights.level(l).nerve
    if f.degree < 0:
        return Cochain.zero(tgt, f.degree, f.group)
    return Cochain(tgt, f.degree, f.group, apply_operator(eight_matrix(space, l, f.degree), f.values))


@dataclass
class LfCertificate:
    omega: Cochain
    g: Cochain | None = None
    checks: dict[str, bool] = field(default_factory=dict)
    failure: Failure | None = None
    sizes: dict[str, int] = field(default_factory=dict)

    def __bool__(self):
        return self.failure is None


def _check_zero(checks, name, f: Cochain) -> Failure | None:
    w = f.nonzero_witness()
    checks[name] = w is None
    return None if w is None else Failure(name, w)


def lf_certificate(space: PathSpace, omega: Cochain, rng: np.random.Generator | None = None) -> LfCertificate:
    """Verify ``ω`` is an lf-cocycle; a falsy certificate names the failing condition."""
    if omega.cover is not space.loops:
        raise ValueError("ω must live on the loop cover")
    cert = LfCertificate(omega)
    q = omega.degree
    eight2 = space.eights.level(2)
    cert.sizes = {
        "loops": len(space.loops),
        "loop_tuples": space.loops.nerve.size(q + 1),
        "eight_pairs": len(eight2),
    }
    for name, f in (("δω = 0", cech_delta(omega)), ("dω = 0", fusion_d(space, omega))):
        cert.failure = _check_zero(cert.checks, name, f)
        if cert.failure:
            return cert
    bar = eight_partial(space, omega)
    if q == 0:
        cert.failure = _check_zero(cert.checks, "∂̄ω = 0", bar)
        return cert
    system = BlockSystem(omega.group)
    system.unknown("g", eight2.nerve.cochain_size(q - 1))
    system.equation({"g": eight2.nerve.delta_matrix(q - 1)}, bar.values)
    system.equation({"g": fusion_matrix(space.eights, 2, q - 1)})
    x = system.solve(rng)
    cert.checks["∂̄ω = δg, dg = 0"] = x is not None
    if x is None:
        cert.failure = Failure("∂̄ω = δg, dg = 0", bar.nonzero_witness())
        return cert
    cert.g = Cochain(eight2.nerve, q - 1, omega.group, x["g"])
    cert.sizes["eight_tuples"] = eight2.nerve.size(q)
    return cert


@dataclass
class LfClassWitness:
    mu: Cochain | None
    g_mu: Cochain | None


def lf_class_equal(
    space: PathSpace, omega: Cochain, other: Cochain, rng: np.random.Generator | None = None
) -> LfClassWitness | None:
    """(μ, g_μ) with δμ = ω' − ω, dμ = 0, ∂̄μ = δg_μ, dg_μ = 0; None if none exists."""
    for f in (omega, other):
        cert = lf_certificate(space, f)
        if not cert:
            raise ValueError(f"not an lf-cocycle: {cert.failure}")
    diff = other - omega
    q = omega.degree
    if q == 0:
        return LfClassWitness(None, None) if diff.is_zero() else None
    loops = space.loops.nerve
    eight2 = space.eights.level(2).nerve
    system = BlockSystem(omega.group)
    system.unknown("mu", loops.cochain_size(q - 1))
    system.equation({"mu": loops.delta_matrix(q - 1)}, diff.values)
    system.equation({"mu": fusion_matrix(space.paths, 2, q - 1)})
    if q >= 2:
        system.unknown("g", eight2.cochain_size(q - 2))
        system.equation({"mu": eight_matrix(space, 2, q - 1), "g": -eight2.delta_matrix(q - 2)})
        system.equation({"g": fusion_matrix(space.eights, 2, q - 2)})
    else:
        system.equation({"mu": eight_matrix(space, 2, q - 1)})
    x = system.solve(rng)
    if x is None:
        return None
    mu = Cochain(loops, q - 1, omega.group, x["mu"])
    g = Cochain(eight2, q - 2, omega.group, x["g"]) if q >= 2 else None
    return LfClassWitness(mu, g)
