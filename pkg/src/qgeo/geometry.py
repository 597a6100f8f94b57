"""Fubini-Study geometry of sampled evolution paths.

Lengths follow the convention in which orthogonal rays are a distance pi
apart: ``S = (2/hbar) * integral of Delta A``. The length of the
parallel-transported lift, ``l = integral of ||d psi_bar / d lambda||``, is
half of that and is reported separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson, trapezoid

from .core import (
    DEFAULT_TOL,
    DimensionError,
    HermitianGenerator,
    ParameterRangeError,
    StateLike,
    ToleranceConfig,
    as_vector,
    batch_moments,
)
from .evolution import EvolutionPath, generator_at


class Quadrature(NamedTuple):
    value: float
    error: float


@dataclass(frozen=True)
class GeometryReport:
    S: float
    S0: float
    l_transported: float
    residual_max: float
    gram_rank: int
    quadrature_error: float
    residual_truncation: float

    @property
    def excess(self) -> float:
        return self.S - self.S0


def _rule(values: np.ndarray, step: float) -> float:
    if values.size % 2:
        return float(simpson(values, dx=step))
    return float(trapezoid(values, dx=step))


def integrate_uniform(values, step: float) -> Quadrature:
    """Composite Simpson (trapezoid for an even sample count) with an error estimate.

    The estimate compares the largest odd-length prefix against itself at
    double spacing: Simpson at both levels when both counts allow it,
    otherwise the trapezoid rule, whose error bounds Simpson's. It is scaled
    to the full interval.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 3:
        raise ParameterRangeError(f"quadrature needs at least 3 samples, got {n}")
    value = _rule(values, step)
    m = n if n % 2 else n - 1
    if m < 5:
        return Quadrature(value, abs(value - float(trapezoid(values, dx=step))))
    fine, coarse = values[:m], values[:m:2]
    if m % 4 == 1:
        diff = float(simpson(fine, dx=step)) - float(simpson(coarse, dx=2 * step))
        err = abs(diff) / 15.0
    else:
        diff = float(trapezoid(fine, dx=step)) - float(trapezoid(coarse, dx=2 * step))
        err = abs(diff) / 3.0
    return Quadrature(value, err * (n - 1) / (m - 1))


def bargmann_angle(psi1: StateLike, psi2: StateLike, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Geodesic distance S0 in [0, pi] between the rays of two states.

    Equal to ``2 arccos |<psi1|psi2>|``; evaluated through half-chord lengths
    after aligning phases, which stays accurate for nearly coincident rays.
    """
    a = as_vector(psi1, tol.norm)
    b = as_vector(psi2, tol.norm)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return ray_angle(a, b)


def ray_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Bargmann angle of two unit vectors, without validation."""
    overlap = np.vdot(a, b)
    mag = abs(overlap)
    if mag > 0:
        b = b * (overlap.conjugate() / mag)
    return 4.0 * math.atan2(np.linalg.norm(b - a), np.linalg.norm(b + a))


def _moment_profiles(path: EvolutionPath, A=None):
    """Mean and spread of the generator at every sample of ``path``."""
    if A is None:
        A = path.generator
    if isinstance(A, HermitianGenerator):
        return batch_moments(A.matrix, path.states)
    means = np.empty(path.grid.n_samples)
    spreads = np.empty(path.grid.n_samples)
    for k, lam in enumerate(path.parameters):
        m, d = batch_moments(generator_at(A, lam).matrix, path.states[k : k + 1])
        means[k], spreads[k] = m[0], d[0]
    return means, spreads


def fs_quadrature(path: EvolutionPath, A=None) -> Quadrature:
    """(2/hbar) * integral of Delta A over the path, with its error estimate."""
    q = integrate_uniform(_moment_profiles(path, A)[1], path.grid.step)
    scale = 2.0 / path.hbar
    return Quadrature(scale * q.value, scale * q.error)


def fubini_study_length(path: EvolutionPath, A=None) -> float:
    """Fubini-Study length S of ``path``; ``A`` defaults to the path's generator."""
    return fs_quadrature(path, A).value


def parallel_transport(path: EvolutionPath, A=None) -> EvolutionPath:
    """Remove the dynamical phase so that <psi_bar | d psi_bar> = 0.

    Each sample is multiplied by ``exp((i/hbar) * integral <A>)``, the
    integral accumulated from the first grid point by the trapezoid rule.
    """
    means = _moment_profiles(path, A)[0]
    phase = cumulative_trapezoid(means, dx=path.grid.step, initial=0.0) / path.hbar
    states = path.states * np.exp(1j * phase)[:, None]
    return path.with_states(states, transported=True)


def transport_defect(path_bar: EvolutionPath) -> np.ndarray:
    """|<psi_bar | d psi_bar/d lambda>| at interior nodes (central differences)."""
    s = path_bar.states
    deriv = (s[2:] - s[:-2]) / (2 * path_bar.grid.step)
    return np.abs(np.einsum("ki,ki->k", s[1:-1].conj(), deriv))


def _speeds(states: np.ndarray, step: float) -> np.ndarray:
    deriv = np.empty_like(states)
    deriv[1:-1] = (states[2:] - states[:-2]) / (2 * step)
    deriv[0] = (-3 * states[0] + 4 * states[1] - states[2]) / (2 * step)
    deriv[-1] = (3 * states[-1] - 4 * states[-2] + states[-3]) / (2 * step)
    return np.linalg.norm(deriv, axis=1)


def transported_quadrature(path_bar: EvolutionPath) -> Quadrature:
    """Length of the transported curve and a Richardson estimate of its error.

    The derivative stencils are second order, so the estimate recomputes the
    length of the largest odd-length prefix at double spacing and applies the
    h^2 extrapolation formula.
    """
    states, step = path_bar.states, path_bar.grid.step
    n = states.shape[0]
    if n < 3:
        raise ParameterRangeError(f"need at least 3 samples, got {n}")
    value = integrate_uniform(_speeds(states, step), step).value
    m = n if n % 2 else n - 1
    if m < 7:
        return Quadrature(value, math.inf)
    fine = integrate_uniform(_speeds(states[:m], step), step).value
    coarse = integrate_uniform(_speeds(states[:m:2], 2 * step), 2 * step).value
    return Quadrature(value, abs(fine - coarse) / 3.0 * (n - 1) / (m - 1))


def transported_length(path_bar: EvolutionPath) -> float:
    return transported_quadrature(path_bar).value


def geodesic_curve(psi_bar0: StateLike, dpsi_bar0, v: float, lam, tol: ToleranceConfig = DEFAULT_TOL):
    """Point(s) cos(v lam) psi_bar0 + sin(v lam)/v * dpsi_bar0 on a geodesic.

    ``dpsi_bar0`` is the initial velocity: it must have norm ``v`` and be
    orthogonal to ``psi_bar0``. ``lam`` may be a scalar (returns a vector)
    or an array (returns one row per value).
    """
    x = as_vector(psi_bar0, tol.norm)
    d = np.asarray(dpsi_bar0, dtype=complex)
    if d.shape != x.shape:
        raise DimensionError(f"velocity shape {d.shape} does not match state {x.shape}")
    if not v > 0:
        raise ValueError(f"speed must be positive, got {v}")
    scale = tol.norm * max(1.0, v)
    if abs(np.linalg.norm(d) - v) > scale:
        raise ValueError(f"velocity norm {np.linalg.norm(d)!r} differs from speed {v!r}")
    if abs(np.vdot(x, d)) > scale:
        raise ValueError("velocity is not orthogonal to the initial state")
    lam_arr = np.asarray(lam, dtype=float)
    out = np.cos(v * lam_arr)[..., None] * x + (np.sin(v * lam_arr) / v)[..., None] * d
    return out


def geodesic_residual(path_bar: EvolutionPath, v: float) -> float:
    """max_k ||second difference of psi_bar + v^2 psi_bar|| over interior nodes.

    The stencil is second order: an exact geodesic leaves a residual of about
    ``v**4 * h**2 / 12`` (see :func:`residual_truncation`).
    """
    s = path_bar.states
    if s.shape[0] < 5:
        raise ParameterRangeError(f"geodesic residual needs at least 5 samples, got {s.shape[0]}")
    h = path_bar.grid.step
    second = (s[2:] - 2 * s[1:-1] + s[:-2]) / h**2
    return float(np.max(np.linalg.norm(second + v**2 * s[1:-1], axis=1)))


def residual_truncation(v: float, step: float) -> float:
    return v**4 * step**2 / 12.0


def subspace_rank(path_bar: EvolutionPath, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Numerical rank of the Gram matrix of the sampled states.

    Gram eigenvalues are the squared singular values of the stacked states;
    those above ``tol.rank_cutoff`` times the largest are counted.
    """
    if path_bar.states.shape[0] < 3:
        raise ParameterRangeError("subspace rank needs at least 3 samples")
    sv = np.linalg.svd(path_bar.states, compute_uv=False)
    gram = sv**2
    return int(np.count_nonzero(gram > tol.rank_cutoff * gram[0]))


def endpoint_angle(path: EvolutionPath) -> float:
    return ray_angle(path.states[0], path.states[-1])


def analyze_path(
    path: EvolutionPath,
    A=None,
    v: Optional[float] = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> GeometryReport:
    """Full geometric summary of ``path``.

    ``v`` defaults to the parameter average of Delta A / hbar.
    """
    s_q = fs_quadrature(path, A)
    bar = path if path.transported else parallel_transport(path, A)
    l_q = transported_quadrature(bar)
    if v is None:
        v = s_q.value / (2.0 * path.grid.span)
    return GeometryReport(
        S=s_q.value,
        S0=endpoint_angle(path),
        l_transported=l_q.value,
        residual_max=geodesic_residual(bar, v) if path.grid.n_samples >= 5 else math.nan,
        gram_rank=subspace_rank(bar, tol),
        quadrature_error=s_q.error + 2.0 * l_q.error,
        residual_truncation=residual_truncation(v, path.grid.step),
    )


__all__ = [
    "GeometryReport",
    "Quadrature",
    "analyze_path",
    "bargmann_angle",
    "endpoint_angle",
    "fs_quadrature",
    "fubini_study_length",
    "geodesic_curve",
    "geodesic_residual",
    "integrate_uniform",
    "parallel_transport",
    "ray_angle",
    "residual_truncation",
    "subspace_rank",
    "transport_defect",
    "transported_length",
    "transported_quadrature",
]
