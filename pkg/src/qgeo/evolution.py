"""Propagation of states along a real parameter lambda.

``i hbar d|psi>/dlambda = A(lambda)|psi>`` is solved spectrally when ``A`` is
constant and with fixed-step RK4 otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .core import (
    DEFAULT_TOL,
    DimensionError,
    HermitianGenerator,
    ParameterRangeError,
    QGeoError,
    QuantumState,
    StateLike,
    ToleranceConfig,
    as_vector,
    eigendecompose,
)

GeneratorLike = Union[HermitianGenerator, Callable[[float], HermitianGenerator]]

#: Largest tolerated norm drift of a single RK4 step before renormalization.
MAX_STEP_DRIFT = 1e-6


class StepSizeError(QGeoError, ValueError):
    """Raised when the ODE grid is too coarse; carries a suggested sample count."""

    def __init__(self, message: str, required_samples: int):
        super().__init__(message)
        self.required_samples = required_samples


@dataclass(frozen=True)
class ParameterGrid:
    start: float
    end: float
    n_samples: int

    def __post_init__(self):
        if not self.end > self.start:
            raise ParameterRangeError(f"grid end {self.end} must exceed start {self.start}")
        if self.n_samples < 3:
            raise ParameterRangeError(f"need at least 3 samples, got {self.n_samples}")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.end, self.n_samples)

    @property
    def step(self) -> float:
        return (self.end - self.start) / (self.n_samples - 1)

    @property
    def span(self) -> float:
        return self.end - self.start


@dataclass(frozen=True, eq=False)
class EvolutionPath:
    """Sampled curve lambda_k -> |psi(lambda_k)>; ``states`` has one row per sample."""

    grid: ParameterGrid
    states: np.ndarray
    generator: GeneratorLike
    method: str
    hbar: float = 1.0
    max_norm_drift: float = 0.0
    transported: bool = False

    def __post_init__(self):
        if self.states.ndim != 2 or self.states.shape[0] != self.grid.n_samples:
            raise DimensionError(
                f"expected {self.grid.n_samples} state rows, got shape {self.states.shape}"
            )
        if self.method not in ("spectral", "ode"):
            raise ValueError(f"unknown method tag {self.method!r}")

    @property
    def parameters(self) -> np.ndarray:
        return self.grid.values

    def generator_at(self, lam: float) -> HermitianGenerator:
        return generator_at(self.generator, lam)

    def with_states(self, states: np.ndarray, **changes) -> "EvolutionPath":
        fields = dict(
            grid=self.grid,
            states=states,
            generator=self.generator,
            method=self.method,
            hbar=self.hbar,
            max_norm_drift=self.max_norm_drift,
            transported=self.transported,
        )
        fields.update(changes)
        return EvolutionPath(**fields)


def generator_at(A: GeneratorLike, lam: float) -> HermitianGenerator:
    if isinstance(A, HermitianGenerator):
        return A
    out = A(lam)
    return out if isinstance(out, HermitianGenerator) else HermitianGenerator(out)


def _propagate(A: HermitianGenerator, psi0: np.ndarray, lams: np.ndarray, hbar: float) -> np.ndarray:
    spec = eigendecompose(A)
    if psi0.size != A.dimension:
        raise DimensionError(f"state of dimension {psi0.size} for generator of dimension {A.dimension}")
    coeffs = spec.vectors.conj().T @ psi0
    phases = np.exp(-1j * np.outer(lams, spec.values) / hbar)
    return (phases * coeffs) @ spec.vectors.T


def evolve_exact(
    A: HermitianGenerator,
    psi0: StateLike,
    lam: float,
    *,
    hbar: float = 1.0,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> QuantumState:
    """Apply exp(-i A lam / hbar) through the eigendecomposition of ``A``."""
    v = as_vector(psi0, tol.norm)
    if lam == 0:
        return QuantumState(v)
    out = _propagate(A, v, np.array([lam], dtype=float), hbar)[0]
    return QuantumState(out, tol=tol.norm)


def sample_path(
    A: HermitianGenerator,
    psi0: StateLike,
    grid: ParameterGrid,
    *,
    hbar: float = 1.0,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> EvolutionPath:
    """Exact evolution of ``psi0``, taken at ``grid.start``, sampled on ``grid``."""
    v = as_vector(psi0, tol.norm)
    states = _propagate(A, v, grid.values - grid.start, hbar)
    drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)))
    if drift > tol.norm * 10:
        raise QGeoError(f"spectral propagation lost normalization ({drift:.3g})")
    return EvolutionPath(grid, states, A, "spectral", hbar=hbar)


def evolve_ode(
    A: GeneratorLike,
    psi0: StateLike,
    grid: ParameterGrid,
    *,
    hbar: float = 1.0,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> EvolutionPath:
    """Classic RK4 on the uniform grid, renormalizing after each step.

    The initial state is taken at ``grid.start``. The largest per-step norm
    drift (before renormalization) is recorded on the returned path; a drift
    above ``MAX_STEP_DRIFT`` raises :class:`StepSizeError`.
    """
    psi = as_vector(psi0, tol.norm).copy()
    lams = grid.values
    h = grid.step
    states = np.empty((grid.n_samples, psi.size), dtype=complex)
    states[0] = psi
    k = -1j / hbar

    def rhs(lam, y):
        m = generator_at(A, lam).matrix
        if m.shape[0] != y.size:
            raise DimensionError(f"generator dimension {m.shape[0]} != state dimension {y.size}")
        return k * (m @ y)

    max_drift = 0.0
    for n in range(1, grid.n_samples):
        lam = lams[n - 1]
        k1 = rhs(lam, psi)
        k2 = rhs(lam + h / 2, psi + h / 2 * k1)
        k3 = rhs(lam + h / 2, psi + h / 2 * k2)
        k4 = rhs(lam + h, psi + h * k3)
        psi = psi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        norm = np.linalg.norm(psi)
        drift = abs(norm - 1.0)
        max_drift = max(max_drift, drift)
        if drift > MAX_STEP_DRIFT:
            # RK4 norm error per step is about (omega h)^6 / 72 for frequency omega
            factor = (drift / MAX_STEP_DRIFT) ** (1 / 6)
            by_drift = math.ceil((grid.n_samples - 1) * factor * 1.1) + 1
            omega = float(np.linalg.norm(generator_at(A, lam).matrix, 2)) / hbar
            h_max = (36.0 * MAX_STEP_DRIFT) ** (1 / 6) / omega
            required = max(by_drift, math.ceil(grid.span / h_max) + 1)
            raise StepSizeError(
                f"norm drift {drift:.3g} at step {n} exceeds {MAX_STEP_DRIFT:g}; "
                f"use at least {required} samples",
                required,
            )
        psi = psi / norm
        states[n] = psi
    return EvolutionPath(grid, states, A, "ode", hbar=hbar, max_norm_drift=max_drift)
