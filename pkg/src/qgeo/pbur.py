"""Parameter-based uncertainty relation <Delta A> * Delta lambda >= h/4."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import DEFAULT_TOL, ParameterRangeError, ToleranceConfig, Units
from .evolution import EvolutionPath
from .geometry import endpoint_angle, fs_quadrature

#: Endpoints closer than this (in Bargmann angle) are treated as the same ray.
SAME_RAY_GUARD = 1e-8


@dataclass(frozen=True)
class PburReport:
    avg_uncertainty: float
    delta_lambda: float
    product: float
    bound: float
    ratio: float
    saturated: bool
    S: float
    S0: float
    quadrature_error: float
    tolerance: float
    method: str
    violation: bool = False
    diagnostics: tuple = field(default=())


def averaged_uncertainty(path: EvolutionPath, A=None) -> float:
    """Parameter average of Delta A over the path's grid."""
    return _average(path, A)[0]


def _average(path: EvolutionPath, A=None):
    q = fs_quadrature(path, A)
    span = path.grid.span
    if not span > 0:
        raise ParameterRangeError("degenerate parameter grid")
    factor = path.hbar / (2.0 * span)
    return q.value * factor, q.error * factor, q


def parameter_uncertainty(S0: float, lam1: float, lam2: float, guard: float = SAME_RAY_GUARD) -> float:
    """Scaled displacement (pi / S0) * (lam2 - lam1)."""
    if not lam2 > lam1:
        raise ParameterRangeError(f"need lam2 > lam1, got {lam1}, {lam2}")
    if not S0 > guard:
        raise ParameterRangeError(
            f"endpoints lie on the same ray (S0 = {S0:.3g} <= {guard:g}); Delta lambda is undefined"
        )
    return math.pi / S0 * (lam2 - lam1)


def evaluate_pbur(path: EvolutionPath, A=None, tol: ToleranceConfig = DEFAULT_TOL) -> PburReport:
    """Evaluate the uncertainty product along ``path`` against h/4.

    ``ratio`` equals S/S0. Saturation is judged with ``tol.saturation_rel``
    on spectral paths and ``tol.saturation_rel_ode`` on integrated ones. A
    ratio below 1 beyond tolerance cannot be physical; it is flagged as a
    violation with diagnostics instead of raising.
    """
    avg, _, s_q = _average(path, A)
    S0 = endpoint_angle(path)
    dlam = parameter_uncertainty(S0, path.grid.start, path.grid.end)
    bound = Units(path.hbar).bound
    product = avg * dlam
    ratio = product / bound
    rel = tol.saturation_rel if path.method == "spectral" else tol.saturation_rel_ode
    diagnostics = []
    violation = ratio < 1.0 - rel
    if violation:
        diagnostics.append(
            f"product below h/4 by {1.0 - ratio:.3g} (relative); quadrature error estimate "
            f"{s_q.error:.3g} on S = {s_q.value:.6g}; refine the grid"
        )
    if path.max_norm_drift > 0:
        diagnostics.append(f"max ODE step norm drift {path.max_norm_drift:.3g}")
    return PburReport(
        avg_uncertainty=avg,
        delta_lambda=dlam,
        product=product,
        bound=bound,
        ratio=ratio,
        saturated=abs(ratio - 1.0) < rel,
        S=s_q.value,
        S0=S0,
        quadrature_error=s_q.error,
        tolerance=rel,
        method=path.method,
        violation=violation,
        diagnostics=tuple(diagnostics),
    )
