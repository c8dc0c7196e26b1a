"""Diagonal evolution model ``A e_j = -lambda_j e_j`` and its semigroup.

Sign convention, used everywhere in the package: a :class:`Spectrum` stores
the numbers ``lambda_j`` in the open right half-plane, and the semigroup acts
as ``e^{tA} e_j = exp(-t lambda_j) e_j``. The discrete counterpart is the
diagonal operator with eigenvalues ``eta_j`` in the unit disc.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import BoundaryEigenvalue, DimensionMismatch, DomainViolation, SingularBasis

MAX_BASIS_CONDITION = 1e8


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalue data ``{lambda_j}`` of ``-A``, truncated to ``N`` terms.

    Repeated values are allowed.
    """

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lambdas, dtype=np.complex128)).copy()
        if lam.ndim != 1 or lam.size == 0:
            raise DimensionMismatch("a spectrum needs a nonempty 1-D list of eigenvalues")
        if not np.all(np.isfinite(lam)):
            raise DomainViolation("eigenvalues must be finite")
        bad = np.flatnonzero(lam.real <= 0)
        if bad.size:
            raise BoundaryEigenvalue(
                f"Re(lambda_j) must be > 0; violated at indices {bad.tolist()}"
            )
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @property
    def N(self) -> int:
        return self.lambdas.size

    @classmethod
    def from_generator(cls, generator: Callable[[int], complex], N: int) -> "Spectrum":
        """Build ``lambda_j = generator(j)`` for ``j = 1..N``."""
        return cls(np.array([generator(j) for j in range(1, N + 1)], dtype=np.complex128))

    def truncate(self, n: int) -> "Spectrum":
        if not 1 <= n <= self.N:
            raise DimensionMismatch(f"cannot truncate a spectrum of size {self.N} to {n}")
        return Spectrum(self.lambdas[:n])

    @property
    def spectral_radius(self) -> float:
        return float(np.abs(self.lambdas).max())


def geometric(ratio: float, scale: complex = 1.0, shift: complex = 0.0):
    return lambda j: scale * ratio**j + shift


def harmonic(scale: complex = 1.0, shift: complex = 0.0):
    return lambda j: scale / j + shift


def linear(scale: complex = 1.0, shift: complex = 0.0):
    return lambda j: scale * j + shift


@dataclass(frozen=True)
class StabilityReport:
    margin: float
    omega: float
    stable: bool


@dataclass(frozen=True)
class BasisChange:
    """Columns are the (Riesz basis) eigenvectors in ambient coordinates."""

    matrix: np.ndarray
    condition_number: float = field(init=False)

    def __post_init__(self):
        B = np.array(self.matrix, dtype=np.complex128)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise DimensionMismatch("basis matrix must be square")
        cond = float(np.linalg.cond(B))
        if not np.isfinite(cond) or cond >= MAX_BASIS_CONDITION:
            raise SingularBasis(
                f"basis condition number {cond:.3g} exceeds {MAX_BASIS_CONDITION:.0e}"
            )
        B.setflags(write=False)
        object.__setattr__(self, "matrix", B)
        object.__setattr__(self, "condition_number", cond)

    @property
    def N(self) -> int:
        return self.matrix.shape[0]


def _lambdas(spec) -> np.ndarray:
    return spec.lambdas if isinstance(spec, Spectrum) else Spectrum(spec).lambdas


def _check_trailing(v: np.ndarray, N: int) -> None:
    if v.shape[-1:] != (N,):
        raise DimensionMismatch(f"expected trailing dimension {N}, got shape {v.shape}")


def semigroup_apply(spec: Spectrum, t: float, v) -> np.ndarray:
    """``e^{tA} v`` in eigencoordinates, i.e. ``(exp(-t lambda_j) v_j)_j``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    lam = _lambdas(spec)
    v = np.asarray(v, dtype=np.complex128)
    _check_trailing(v, lam.size)
    return np.exp(-t * lam) * v


def power_apply(etas, n: int, v) -> np.ndarray:
    """``A^n v`` for the diagonal operator with eigenvalues ``etas``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    eta = np.asarray(etas, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    _check_trailing(v, eta.size)
    return eta**n * v


def stability(spec: Spectrum) -> StabilityReport:
    """Exponential stability data; ``||e^{tA}|| <= exp(omega t)`` with ``M = 1``."""
    margin = float(_lambdas(spec).real.min())
    return StabilityReport(margin=margin, omega=-margin, stable=margin > 0)


def semigroup_gap_norm(spec: Spectrum, t: float) -> float:
    """Operator norm ``||e^{tA} - I|| = max_j |exp(-t lambda_j) - 1|``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    lam = _lambdas(spec)
    return float(np.abs(np.expm1(-t * lam)).max())


def gap_envelope(spec: Spectrum, t: float) -> float:
    """Monotone upper envelope ``t |A| exp(t |A|)`` of :func:`semigroup_gap_norm`."""
    r = spec.spectral_radius if isinstance(spec, Spectrum) else float(np.abs(spec).max())
    return float(t * r * np.exp(t * r))


def margin_trend(generator: Callable[[int], complex], sweep: Iterable[int]) -> list[tuple[int, float]]:
    """Stability margin ``min_j Re(lambda_j)`` for each truncation size in ``sweep``."""
    return [(N, stability(Spectrum.from_generator(generator, N)).margin) for N in sweep]


def to_eigen_coords(basis: BasisChange, ambient) -> np.ndarray:
    """Expansion coefficients ``c`` with ``ambient = B c``."""
    v = np.asarray(ambient, dtype=np.complex128)
    if v.shape[0] != basis.N:
        raise DimensionMismatch(f"vector of length {v.shape[0]} for basis of size {basis.N}")
    try:
        return np.linalg.solve(basis.matrix, v)
    except np.linalg.LinAlgError as exc:
        raise SingularBasis(str(exc)) from exc


def from_eigen_coords(basis: BasisChange, coords: Sequence[complex] | np.ndarray) -> np.ndarray:
    c = np.asarray(coords, dtype=np.complex128)
    if c.shape[0] != basis.N:
        raise DimensionMismatch(f"vector of length {c.shape[0]} for basis of size {basis.N}")
    return basis.matrix @ c
