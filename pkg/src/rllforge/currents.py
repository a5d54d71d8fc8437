"""Scalar structure functions of the Drinfeld currents.

``psi_e`` is the exchange coefficient in ``E(u) E(v) = psi_e(u - v) E(v) E(u)``
(non-graded, non-dynamical case), ``psi_f`` its counterpart for ``F``, and
``phi = t / b`` the function whose jump across ``u = 0`` multiplies the delta
term of the E-F exchange relation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .report import DEFAULT_POLE_GUARD, DEFAULT_TOL, CheckReport, ResidualLog, Sampler
from .rmatrix import PoleError, StructuredR

# Delta normalisation convention: N = residue of phi at 0; any 2*pi*i-type
# constant is absorbed into delta(u).
N_CONVENTION = "residue: N = lim_{u->0} u * phi(u)"
RICHARDSON_STEPS = (1e-3, 1e-4, 1e-5)


class NonSimplePoleError(ValueError):
    pass


def _guard_origin(u: complex, guard: float) -> None:
    if abs(u) < guard:
        raise PoleError("b", u, abs(u), guard)


def psi_e(R: StructuredR, u: complex, guard: float = DEFAULT_POLE_GUARD) -> complex:
    """``b(-u) d(u) / (a(-u) b(u))``."""
    _guard_origin(u, guard)
    return R.b(-u) * R.d(u) / (R.a(-u) * R.b(u))


def psi_f(R: StructuredR, u: complex, guard: float = DEFAULT_POLE_GUARD) -> complex:
    """``a(-u) b(u) / (b(-u) d(u))``, the reciprocal of :func:`psi_e`."""
    _guard_origin(u, guard)
    return R.a(-u) * R.b(u) / (R.b(-u) * R.d(u))


def phi(R: StructuredR, u: complex, guard: float = DEFAULT_POLE_GUARD) -> complex:
    _guard_origin(u, guard)
    return R.t(u) / R.b(u)


def _neville_at_zero(hs: tuple[float, ...], ys: list[complex]) -> complex:
    p = list(ys)
    n = len(hs)
    for level in range(1, n):
        for i in range(n - level):
            h_i, h_j = hs[i], hs[i + level]
            p[i] = (h_i * p[i + 1] - h_j * p[i]) / (h_i - h_j)
    return p[0]


def delta_normalization(R: StructuredR, steps: tuple[float, ...] = RICHARDSON_STEPS, rtol: float = 1e-6) -> complex:
    """Residue of ``phi`` at the origin by polynomial extrapolation of ``h * phi(h)``.

    Raises :class:`NonSimplePoleError` when the extrapolants disagree, which
    is what a higher-order pole (or an essential singularity) produces.
    """
    ys = [h * R.t(h) / R.b(h) for h in steps]
    full = _neville_at_zero(steps, ys)
    coarse = _neville_at_zero(steps[:-1], ys[:-1])
    if abs(full - coarse) > rtol * max(1.0, abs(full)):
        raise NonSimplePoleError(f"u*phi(u) does not converge at 0 (extrapolants {coarse} vs {full})")
    return full


@dataclass(frozen=True)
class StructureFunctionSet:
    R: StructuredR
    psi_e: Callable[[complex], complex]
    psi_f: Callable[[complex], complex]
    phi: Callable[[complex], complex]
    N: complex
    convention: str = N_CONVENTION


def structure_functions(R: StructuredR) -> StructureFunctionSet:
    return StructureFunctionSet(
        R,
        lambda u: psi_e(R, u),
        lambda u: psi_f(R, u),
        lambda u: phi(R, u),
        delta_normalization(R),
    )


def check_psi_compatibility(R: StructuredR, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckReport:
    """``psi_e(u) psi_e(-u) = 1`` and ``psi_f = 1 / psi_e`` at sampled points."""
    sampler = sampler or Sampler()

    def avoid(u: complex) -> bool:
        return abs(u) < 1e-3 or R.near_pole(u) or R.near_pole(-u)

    log = ResidualLog("psi_compatibility", tol, sampler.seed, R.params.as_dict())
    for idx, u in enumerate(sampler.points(avoid=avoid, stream=3)):
        pe, pe_neg, pf = psi_e(R, u), psi_e(R, -u), psi_f(R, u)
        inversion = abs(pe * pe_neg - 1) / max(1.0, abs(pe) * abs(pe_neg))
        reciprocal = abs(pf * pe - 1) / max(1.0, abs(pf) * abs(pe))
        log.add(max(inversion, reciprocal), sample=idx, u=u)
    return log.report(convention=N_CONVENTION)
