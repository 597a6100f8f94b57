"""State-vector and Hermitian-operator algebra.

States are plain complex numpy vectors wrapped by :class:`QuantumState` when
validation is wanted; every public function accepts either form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

import numpy as np


class QGeoError(Exception):
    """Base class for all errors raised by qgeo."""


class DimensionError(QGeoError, ValueError):
    pass


class NormalizationError(QGeoError, ValueError):
    pass


class HermiticityError(QGeoError, ValueError):
    pass


class DegenerateSpectrumError(QGeoError, ValueError):
    pass


class ParameterRangeError(QGeoError, ValueError):
    pass


class NumericalInconsistencyError(QGeoError, ArithmeticError):
    pass


@dataclass(frozen=True)
class Units:
    """Unit convention: only the reduced Planck constant is free."""

    hbar: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @property
    def h(self) -> float:
        return 2.0 * math.pi * self.hbar

    @property
    def bound(self) -> float:
        """Lower bound h/4 of the parameter-based uncertainty product."""
        return math.pi * self.hbar / 2.0


@dataclass(frozen=True)
class ToleranceConfig:
    norm: float = 1e-12
    herm: float = 1e-12
    saturation_rel: float = 1e-9
    saturation_rel_ode: float = 1e-6
    residual_abs: float = 1e-6
    rank_cutoff: float = 1e-8

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"tolerance {name} must be positive, got {value}")


DEFAULT_TOL = ToleranceConfig()

StateLike = Union["QuantumState", np.ndarray, list, tuple]


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Unit-norm complex amplitude vector of length N >= 2."""

    amplitudes: np.ndarray
    tol: float = field(default=DEFAULT_TOL.norm, repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 2:
            raise DimensionError(f"state must be a vector with N >= 2, got shape {amps.shape}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > self.tol:
            raise NormalizationError(f"state norm^2 = {norm2!r} deviates from 1")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, vector) -> "QuantumState":
        v = np.asarray(vector, dtype=complex)
        n = np.linalg.norm(v)
        if n == 0:
            raise NormalizationError("cannot normalize the zero vector")
        return cls(v / n)

    @classmethod
    def basis(cls, dimension: int, index: int) -> "QuantumState":
        v = np.zeros(dimension, dtype=complex)
        v[index] = 1.0
        return cls(v)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)

    def __len__(self):
        return self.amplitudes.size


def as_vector(psi: StateLike, tol: float = DEFAULT_TOL.norm) -> np.ndarray:
    """Return ``psi`` as a 1-D complex array, checking normalization."""
    if isinstance(psi, QuantumState):
        return psi.amplitudes
    return QuantumState(psi, tol=tol).amplitudes


@dataclass(frozen=True, eq=False)
class SplitParts:
    """Decomposition A = A0 + A1 of a generator.

    ``A0`` acts as ``a0`` times the identity on span{|psi_i>, |psi_j>} and
    ``A1`` couples the two levels with real amplitude ``a1``.
    """

    A0: np.ndarray
    A1: np.ndarray
    a0: float
    a1: float
    i: int
    j: int
    basis: np.ndarray


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray
    vectors: np.ndarray
    nondegenerate: bool
    min_gap: float


@dataclass(frozen=True, eq=False)
class HermitianGenerator:
    """N x N Hermitian matrix generating evolution in a parameter."""

    matrix: np.ndarray
    split: Optional[SplitParts] = None
    tol: float = field(default=DEFAULT_TOL.herm, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise DimensionError(f"generator must be square with N >= 2, got {m.shape}")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.conj().T)) > self.tol * scale:
            raise HermiticityError("generator is not Hermitian within tolerance")
        m = 0.5 * (m + m.conj().T)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        if self.split is not None:
            self._check_split(self.split, scale)

    def _check_split(self, sp: SplitParts, scale: float) -> None:
        tol = self.tol * scale
        if np.max(np.abs(self.matrix - sp.A0 - sp.A1)) > tol:
            raise HermiticityError("split parts do not sum to the generator")
        bi, bj = sp.basis[:, sp.i], sp.basis[:, sp.j]
        for b in (bi, bj):
            if np.linalg.norm(sp.A0 @ b - sp.a0 * b) > tol:
                raise ValueError("A0 is not a0 * identity on the designated block")
        block = np.array([[np.vdot(x, sp.A1 @ y) for y in (bi, bj)] for x in (bi, bj)])
        if np.max(np.abs(block - np.array([[0, sp.a1], [sp.a1, 0]]))) > tol:
            raise ValueError("A1 block does not have zero diagonal and coupling a1")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def spectrum(self) -> Spectrum:
        return _eigh(self.matrix, self.tol)

    def __add__(self, other: "HermitianGenerator") -> "HermitianGenerator":
        return HermitianGenerator(self.matrix + other.matrix, tol=self.tol)

    def scaled(self, c: float) -> "HermitianGenerator":
        return HermitianGenerator(c * self.matrix, tol=self.tol)


def as_matrix(A) -> np.ndarray:
    if isinstance(A, HermitianGenerator):
        return A.matrix
    return HermitianGenerator(A).matrix


def _eigh(m: np.ndarray, tol: float) -> Spectrum:
    try:
        values, vectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalInconsistencyError(f"eigendecomposition failed: {exc}") from exc
    norm = float(np.max(np.abs(values)))
    gap = float(np.min(np.diff(values)))
    values.flags.writeable = False
    vectors.flags.writeable = False
    return Spectrum(values, vectors, nondegenerate=gap > tol * norm, min_gap=gap)


def inner_product(a: StateLike, b: StateLike) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    va, vb = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if va.shape != vb.shape:
        raise DimensionError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    return complex(np.vdot(va, vb))


def expectation(A, psi: StateLike, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    m = as_matrix(A)
    v = as_vector(psi, tol.norm)
    if v.size != m.shape[0]:
        raise DimensionError(f"state of dimension {v.size} for {m.shape[0]}x{m.shape[0]} generator")
    value = np.vdot(v, m @ v)
    if abs(value.imag) > tol.herm * max(1.0, abs(value.real)):
        raise HermiticityError(f"expectation has imaginary part {value.imag!r}")
    return float(value.real)


def uncertainty(A, psi: StateLike, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Standard deviation sqrt(<A^2> - <A>^2) of ``A`` in state ``psi``.

    Evaluated as ||(A - <A>) psi||, which equals the textbook radicand for a
    normalized state but cannot go negative through cancellation.
    """
    m = as_matrix(A)
    v = as_vector(psi, tol.norm)
    mean = expectation(m, v, tol)
    return float(np.linalg.norm(m @ v - mean * v))


def batch_moments(matrix: np.ndarray, states: np.ndarray):
    """Means and standard deviations of ``matrix`` over rows of ``states``."""
    applied = states @ matrix.T
    means = np.einsum("ki,ki->k", states.conj(), applied).real
    spread = np.linalg.norm(applied - means[:, None] * states, axis=1)
    return means, spread


def eigendecompose(A, tol: ToleranceConfig = DEFAULT_TOL) -> Spectrum:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns).

    ``nondegenerate`` is set when the smallest level spacing exceeds
    ``tol.herm`` times the spectral norm.
    """
    if isinstance(A, HermitianGenerator):
        return A.spectrum
    return _eigh(as_matrix(A), tol.herm)


def random_hermitian(dimension: int, rng: np.random.Generator) -> HermitianGenerator:
    """(G + G^dagger)/2 with standard complex Gaussian entries."""
    g = rng.standard_normal((dimension, dimension)) + 1j * rng.standard_normal((dimension, dimension))
    return HermitianGenerator((g + g.conj().T) / 2)


def random_state(dimension: int, rng: np.random.Generator) -> QuantumState:
    v = rng.standard_normal(dimension) + 1j * rng.standard_normal(dimension)
    return QuantumState.normalized(v)


def random_unitary(dimension: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dimension, dimension)) + 1j * rng.standard_normal((dimension, dimension))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
