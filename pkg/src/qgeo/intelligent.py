"""Intelligent states: families that reach equality in the uncertainty relation.

Two families are provided. The orthogonal one is an equal superposition of
two eigenstates of ``A`` and reaches an orthogonal state at
``lambda = pi hbar / |a_j - a_i|``. The non-orthogonal one lives under a
split generator ``A = a0 * I + a1 * (|i><j| + |j><i|)`` and starts in ``|i>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .core import (
    DEFAULT_TOL,
    DegenerateSpectrumError,
    DimensionError,
    HermitianGenerator,
    ParameterRangeError,
    SplitParts,
    ToleranceConfig,
    batch_moments,
    eigendecompose,
)
from .evolution import ParameterGrid, evolve_exact, sample_path
from .geometry import (
    geodesic_curve,
    geodesic_residual,
    parallel_transport,
    subspace_rank,
    transport_defect,
)
from .pbur import evaluate_pbur

#: Largest accepted node-wise distance between a transported path and its
#: closed-form geodesic reconstruction.
EQ7_TOL = 1e-8
TRANSPORT_TOL = 1e-6

ORTHOGONAL = "orthogonal"
NONORTHOGONAL = "nonorthogonal"


@dataclass(frozen=True)
class SplitGeneratorSpec:
    dimension: int
    i: int
    j: int
    a0: float
    a1: float
    basis: Optional[np.ndarray] = None

    def __post_init__(self):
        n = self.dimension
        if n < 2:
            raise DimensionError(f"dimension must be >= 2, got {n}")
        if self.i == self.j or not (0 <= self.i < n and 0 <= self.j < n):
            raise ValueError(f"need distinct indices in [0, {n}), got i={self.i}, j={self.j}")
        if not self.a1 > 0:
            raise ValueError(f"a1 must be positive, got {self.a1}")
        if self.basis is not None:
            b = np.asarray(self.basis, dtype=complex)
            if b.shape != (n, n):
                raise DimensionError(f"basis must be {n}x{n}, got {b.shape}")
            if np.max(np.abs(b.conj().T @ b - np.eye(n))) > DEFAULT_TOL.norm * n:
                raise ValueError("basis columns are not orthonormal")
            object.__setattr__(self, "basis", b)

    @property
    def basis_matrix(self) -> np.ndarray:
        return np.eye(self.dimension, dtype=complex) if self.basis is None else self.basis


@dataclass(frozen=True, eq=False)
class IntelligentFamily:
    """Closed-form state family ``phase * (c_i(lam)|psi_i> + c_j(lam)|psi_j>)``."""

    kind: str
    generator: HermitianGenerator
    psi_i: np.ndarray
    psi_j: np.ndarray
    a_i: float
    a_j: float
    hbar: float = 1.0
    phase: complex = 1.0
    a0: Optional[float] = None
    a1: Optional[float] = None
    diagnostics: tuple = field(default=())

    @property
    def psi0(self) -> np.ndarray:
        ci, cj = self.amplitudes(0.0)
        return ci * self.psi_i + cj * self.psi_j

    @property
    def threshold(self) -> float:
        """Parameter value at which the state first becomes orthogonal to psi0."""
        if self.kind == ORTHOGONAL:
            return math.pi * self.hbar / abs(self.a_j - self.a_i)
        return math.pi * self.hbar / (2.0 * self.a1)

    @property
    def speed(self) -> float:
        """Delta A / hbar, constant along the family."""
        if self.kind == ORTHOGONAL:
            return abs(self.a_j - self.a_i) / (2.0 * self.hbar)
        return self.a1 / self.hbar

    def amplitudes(self, lam):
        lam = np.asarray(lam, dtype=float)
        h = self.hbar
        if self.kind == ORTHOGONAL:
            ci = np.exp(-1j * self.a_i * lam / h) / math.sqrt(2)
            cj = np.exp(-1j * self.a_j * lam / h) / math.sqrt(2)
        else:
            envelope = np.exp(-1j * self.a0 * lam / h)
            ci = envelope * np.cos(self.a1 * lam / h)
            cj = -1j * envelope * np.sin(self.a1 * lam / h)
        return self.phase * ci, self.phase * cj

    def state(self, lam):
        ci, cj = self.amplitudes(lam)
        return np.multiply.outer(ci, self.psi_i) + np.multiply.outer(cj, self.psi_j)

    def transported_initial(self):
        """Closed-form initial point and unit-speed direction of the transported family."""
        if self.kind == ORTHOGONAL:
            sign = math.copysign(1.0, self.a_j - self.a_i)
            start = (self.psi_i + self.psi_j) / math.sqrt(2)
            direction = 1j * sign * (self.psi_i - self.psi_j) / math.sqrt(2)
        else:
            start = self.psi_i
            direction = -1j * self.psi_j
        return self.phase * start, self.phase * direction

    def check_endpoint(self, lam2: float) -> None:
        t = self.threshold
        if self.kind == ORTHOGONAL:
            ok = 0 < lam2 <= t * (1 + 1e-12)
            interval = f"(0, {t!r}]"
        else:
            ok = 0 < lam2 < t
            interval = f"(0, {t!r})"
        if not ok:
            raise ParameterRangeError(
                f"lambda2 = {lam2!r} outside {interval}; orthogonality is reached at {t!r}"
            )

    def grid(self, lam2: Optional[float] = None, n_samples: int = 1001) -> ParameterGrid:
        if lam2 is None:
            lam2 = self.threshold if self.kind == ORTHOGONAL else self.threshold / 2
        self.check_endpoint(lam2)
        return ParameterGrid(0.0, lam2, n_samples)

    def path(self, lam2: Optional[float] = None, n_samples: int = 1001, tol: ToleranceConfig = DEFAULT_TOL):
        """Spectrally propagated path from lambda = 0 to ``lam2``."""
        return sample_path(self.generator, self.psi0, self.grid(lam2, n_samples), hbar=self.hbar, tol=tol)

    def rephased(self, c: complex) -> "IntelligentFamily":
        if abs(abs(c) - 1.0) > DEFAULT_TOL.norm:
            raise ValueError(f"rephasing factor must have unit modulus, got |c| = {abs(c)!r}")
        return replace(self, phase=self.phase * c)


def build_split_generator(spec: SplitGeneratorSpec) -> HermitianGenerator:
    """A = a0 * I + a1 * (|psi_i><psi_j| + |psi_j><psi_i|), keeping the split."""
    b = spec.basis_matrix
    bi, bj = b[:, spec.i], b[:, spec.j]
    A0 = spec.a0 * np.eye(spec.dimension, dtype=complex)
    A1 = spec.a1 * (np.outer(bi, bj.conj()) + np.outer(bj, bi.conj()))
    parts = SplitParts(A0=A0, A1=A1, a0=spec.a0, a1=spec.a1, i=spec.i, j=spec.j, basis=b)
    return HermitianGenerator(A0 + A1, split=parts)


def block_leakage(A, psi_i, psi_j) -> float:
    """Spectral norm of the coupling from span{psi_i, psi_j} to its complement."""
    m = A.matrix if isinstance(A, HermitianGenerator) else np.asarray(A, dtype=complex)
    q = np.column_stack([psi_i, psi_j])
    proj = q @ q.conj().T
    return float(np.linalg.norm((np.eye(m.shape[0]) - proj) @ m @ proj, 2))


def horesh_mann_family(
    A: HermitianGenerator,
    i: int,
    j: int,
    *,
    hbar: float = 1.0,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> IntelligentFamily:
    """Equal superposition of eigenstates ``i`` and ``j`` of ``A``.

    Indices refer to the ascending eigenvalue order of :func:`eigendecompose`.
    """
    spec = eigendecompose(A, tol)
    n = spec.values.size
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"need distinct eigen-indices in [0, {n}), got i={i}, j={j}")
    a_i, a_j = float(spec.values[i]), float(spec.values[j])
    norm = float(np.max(np.abs(spec.values)))
    if abs(a_j - a_i) <= tol.herm * norm:
        raise DegenerateSpectrumError(f"eigenvalues {a_i!r} and {a_j!r} are degenerate")
    return IntelligentFamily(
        kind=ORTHOGONAL,
        generator=A,
        psi_i=spec.vectors[:, i],
        psi_j=spec.vectors[:, j],
        a_i=a_i,
        a_j=a_j,
        hbar=hbar,
    )


def nonorthogonal_family(
    spec: SplitGeneratorSpec,
    *,
    hbar: float = 1.0,
    generator: Optional[HermitianGenerator] = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> IntelligentFamily:
    """Family starting in ``|psi_i>`` under the split generator of ``spec``.

    A user-supplied ``generator`` must carry the block structure of ``spec``
    on span{psi_i, psi_j}; couplings from that block to other levels are
    reported in ``diagnostics`` because they spoil the closed form.
    """
    b = spec.basis_matrix
    bi, bj = b[:, spec.i], b[:, spec.j]
    diagnostics = []
    if generator is None:
        generator = build_split_generator(spec)
    else:
        m = generator.matrix
        block = np.array([[np.vdot(x, m @ y) for y in (bi, bj)] for x in (bi, bj)])
        expected = np.array([[spec.a0, spec.a1], [spec.a1, spec.a0]])
        if np.max(np.abs(block - expected)) > tol.herm * max(1.0, float(np.max(np.abs(m)))):
            raise ValueError("generator does not match the split block (a0 diagonal, a1 coupling)")
        leak = block_leakage(m, bi, bj)
        if leak > tol.herm * max(1.0, float(np.max(np.abs(m)))):
            diagnostics.append(f"block leakage {leak:.3g}: generator couples the (i, j) block to other levels")
    return IntelligentFamily(
        kind=NONORTHOGONAL,
        generator=generator,
        psi_i=bi,
        psi_j=bj,
        a_i=spec.a0,
        a_j=spec.a0,
        hbar=hbar,
        a0=spec.a0,
        a1=spec.a1,
        diagnostics=tuple(diagnostics),
    )


@dataclass(frozen=True)
class TheoremReport:
    residual_max: float
    residual_tol: float
    rank: int
    eq7_deviation: float
    initial_deviation: float
    transport_defect: float
    speed: float
    residual_ok: bool
    rank_ok: bool
    eq7_match: bool
    initial_match: bool
    transport_ok: bool

    @property
    def passed(self) -> bool:
        return self.residual_ok and self.rank_ok and self.eq7_match and self.initial_match and self.transport_ok


def verify_theorem(
    family: IntelligentFamily,
    grid: ParameterGrid,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> TheoremReport:
    """Check that the transported family is a geodesic of the closed form.

    The initial velocity is taken from the generator,
    ``d psi_bar/d lambda = -(i/hbar) (A - <A>) psi_bar``, so the
    reconstruction carries no finite-difference error.
    """
    if grid.start != 0.0:
        raise ParameterRangeError(f"grid must start at lambda = 0, got {grid.start!r}")
    family.check_endpoint(grid.end)
    path = sample_path(family.generator, family.psi0, grid, hbar=family.hbar, tol=tol)
    bar = parallel_transport(path)

    x0 = bar.states[0]
    m = family.generator.matrix
    mean = batch_moments(m, x0[None, :])[0][0]
    velocity = -1j / family.hbar * (m @ x0 - mean * x0)
    velocity = velocity - np.vdot(x0, velocity) * x0
    v = float(np.linalg.norm(velocity))

    residual = geodesic_residual(bar, v)
    rank = subspace_rank(bar, tol)
    recon = geodesic_curve(x0, velocity, v, grid.values - grid.start, tol)
    eq7_dev = float(np.max(np.linalg.norm(bar.states - recon, axis=1)))

    start, direction = family.transported_initial()
    overlap = np.vdot(start, x0)
    align = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    init_dev = max(
        float(np.linalg.norm(x0 - align * start)),
        float(np.linalg.norm(velocity / v - align * direction)),
    )
    defect = float(np.max(transport_defect(bar)))
    return TheoremReport(
        residual_max=residual,
        residual_tol=tol.residual_abs,
        rank=rank,
        eq7_deviation=eq7_dev,
        initial_deviation=init_dev,
        transport_defect=defect,
        speed=v,
        residual_ok=residual < tol.residual_abs,
        rank_ok=rank == 2,
        eq7_match=eq7_dev < EQ7_TOL,
        initial_match=init_dev < EQ7_TOL,
        transport_ok=defect < TRANSPORT_TOL,
    )


@dataclass(frozen=True)
class CounterexampleReport:
    lambda_min: float
    fidelity_min: float
    ratio: float
    residual_max: float
    speed: float
    rank: int

    @property
    def residual_over_speed2(self) -> float:
        return self.residual_max / self.speed**2


def first_fidelity_minimum(
    A: HermitianGenerator,
    psi0,
    *,
    hbar: float = 1.0,
    search_points: int = 10_000,
    upper: Optional[float] = None,
) -> tuple:
    """Smallest lambda > 0 at which |<psi0|psi(lambda)>|^2 has a local minimum."""
    values = eigendecompose(A).values
    if upper is None:
        gaps = np.diff(values)
        gaps = gaps[gaps > 0]
        upper = 4 * math.pi * hbar / float(np.min(gaps))
    grid = ParameterGrid(0.0, upper, search_points)
    states = sample_path(A, psi0, grid, hbar=hbar).states
    fid = np.abs(states @ np.conj(psi0)) ** 2
    interior = (fid[1:-1] < fid[:-2]) & (fid[1:-1] <= fid[2:])
    if not interior.any():
        raise ParameterRangeError(f"no fidelity minimum found in (0, {upper!r}]")
    k = int(np.argmax(interior)) + 1
    lams = grid.values

    def fidelity(lam):
        psi = evolve_exact(A, psi0, lam, hbar=hbar).amplitudes
        return abs(np.vdot(psi0, psi)) ** 2

    res = minimize_scalar(fidelity, bounds=(lams[k - 1], lams[k + 1]), method="bounded", options={"xatol": 1e-12})
    return float(res.x), float(res.fun)


def counterexample_three_level(
    scale: float = 1.0,
    spectrum: Sequence[float] = (0.0, 1.0, 3.0),
    *,
    hbar: float = 1.0,
    n_samples: int = 1001,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> CounterexampleReport:
    """Equal superposition of three eigenstates, evolved to its first fidelity minimum."""
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    levels = np.asarray(spectrum, dtype=float)
    if levels.size != 3:
        raise DimensionError("counterexample needs exactly three levels")
    A = HermitianGenerator(np.diag(scale * levels))
    psi0 = np.ones(3, dtype=complex) / math.sqrt(3)
    lam_min, f_min = first_fidelity_minimum(A, psi0, hbar=hbar)
    path = sample_path(A, psi0, ParameterGrid(0.0, lam_min, n_samples), hbar=hbar, tol=tol)
    report = evaluate_pbur(path, tol=tol)
    bar = parallel_transport(path)
    v = report.avg_uncertainty / hbar
    return CounterexampleReport(
        lambda_min=lam_min,
        fidelity_min=f_min,
        ratio=report.ratio,
        residual_max=geodesic_residual(bar, v),
        speed=v,
        rank=subspace_rank(bar, tol),
    )
