"""Sampling energy as Hermitian quadratic forms, frame bounds and brute-force oracles.

For a vector table ``g`` (row ``i`` holds the eigencoordinates of ``g^i``)
the continuous-time energy

    sum_i int_0^inf |<e^{tA} g^i, c>|^2 dt = c^* M c,
    M[j, k] = sum_i g^i_j conj(g^i_k) / (lambda_j + conj(lambda_k)),

and the discrete-time energy of ``{B^n a^i}`` with ``B e_j = eta_j e_j``

    sum_i sum_n |<B^n a^i, c>|^2 = c^* M c,
    M[j, k] = sum_i a^i_j conj(a^i_k) / (1 - eta_j conj(eta_k)),

coincide after the Cayley substitution ``eta = h(lambda)``,
``a = sqrt(2) g / (1 + lambda)``. The frame bounds of a truncated system
are the extreme eigenvalues of its form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (
    BoundaryEigenvalue,
    DimensionMismatch,
    EigenSolveFailure,
    InvariantViolation,
    NumericalFailure,
    SingularBasis,
    TailNotBounded,
)
from .hardy import mobius_h
from .operators import BasisChange, Spectrum

CONTINUOUS_G = "continuous_g"
DISCRETE_A = "discrete_a"

NUMERICAL_ZERO_RTOL = 1e-10
HERMITIAN_RTOL = 1e-13
# Relative size below which a smallest eigenvalue is indistinguishable from
# eigen-solver round-off (backward error ~ N eps ||M||).
SOLVER_RTOL = 1000 * np.finfo(float).eps


@dataclass(frozen=True)
class VectorSet:
    """``m x N`` table of sampling vectors in eigencoordinates."""

    coeffs: np.ndarray
    kind: str = CONTINUOUS_G

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim == 1:
            c = c[None, :]
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise DimensionMismatch(f"vector table must be m x N with m, N >= 1, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise DimensionMismatch("vector table has non-finite entries")
        if self.kind not in (CONTINUOUS_G, DISCRETE_A):
            raise ValueError(f"unknown vector kind {self.kind!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]

    @property
    def N(self) -> int:
        return self.coeffs.shape[1]

    def truncate(self, n: int) -> "VectorSet":
        return VectorSet(self.coeffs[:, :n], self.kind)

    @classmethod
    def canonical(cls, spec: Spectrum) -> "VectorSet":
        """Single vector with ``g_j = sqrt(Re lambda_j)``."""
        return cls(np.sqrt(spec.lambdas.real)[None, :], CONTINUOUS_G)


@dataclass(frozen=True)
class QuadForm:
    matrix: np.ndarray
    source: str

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=np.complex128)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatch(f"quadratic form must be square, got {M.shape}")
        scale = max(float(np.abs(M).max(initial=0.0)), np.finfo(float).tiny)
        if np.abs(M - M.conj().T).max(initial=0.0) > HERMITIAN_RTOL * scale:
            raise InvariantViolation("quadratic form is not Hermitian")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    def energy(self, c) -> float:
        c = np.asarray(c, dtype=np.complex128)
        return float(np.real(np.conj(c) @ self.matrix @ c))


@dataclass(frozen=True)
class FrameBounds:
    """Optimal frame constants of a truncated system.

    ``lower`` is clamped at zero; ``raw_lower`` keeps the eigen-solver output.
    ``numerically_zero`` flags ``lower <= 1e-10 * upper``.
    """

    lower: float
    upper: float
    dimension: int
    raw_lower: float
    numerically_zero: bool

    @property
    def condition(self) -> float:
        return self.upper / self.lower if self.lower > 0 else math.inf

    @property
    def resolved(self) -> bool:
        """Lower bound is positive beyond eigen-solver round-off.

        Weaker than ``not numerically_zero``: ill-conditioned but genuine
        frames (condition numbers up to ~1e12) still count as frames.
        """
        return bool(self.lower > SOLVER_RTOL * self.upper)


def _hermitian_part(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


def _check_vectors(vs: VectorSet, kind: str, N: int) -> np.ndarray:
    if vs.kind != kind:
        raise ValueError(f"expected a {kind} vector set, got {vs.kind}")
    if vs.N != N:
        raise DimensionMismatch(f"vector table has N={vs.N}, operator has N={N}")
    return vs.coeffs


def _outer_sum(x: np.ndarray) -> np.ndarray:
    """``sum_i x[i, j] conj(x[i, k])``."""
    return x.T @ x.conj()


def quadform_continuous(spec: Spectrum, g: VectorSet) -> QuadForm:
    lam = spec.lambdas if isinstance(spec, Spectrum) else np.asarray(spec, dtype=np.complex128)
    if np.any(lam.real <= 0):
        raise BoundaryEigenvalue("continuous orbit is not Bessel unless Re(lambda_j) > 0")
    x = _check_vectors(g, CONTINUOUS_G, lam.size)
    M = _outer_sum(x) / (lam[:, None] + np.conj(lam)[None, :])
    return QuadForm(_hermitian_part(M), "continuous")


def quadform_discrete(etas, a: VectorSet) -> QuadForm:
    """Closed form of the discrete energy.

    The Szego denominators ``1 - eta_j conj(eta_k)`` are evaluated in the
    precision of ``etas``; pass ``np.clongdouble`` points to avoid cancellation
    near the unit circle.
    """
    eta = np.asarray(etas)
    eta = eta.astype(np.clongdouble if eta.dtype in (np.clongdouble, np.longdouble) else np.complex128)
    eta = np.atleast_1d(eta)
    if np.any(np.abs(eta) >= 1):
        raise BoundaryEigenvalue("discrete orbit is not Bessel unless |eta_j| < 1")
    x = _check_vectors(a, DISCRETE_A, eta.size)
    den = 1 - eta[:, None] * np.conj(eta)[None, :]
    M = (_outer_sum(x) / den).astype(np.complex128)
    return QuadForm(_hermitian_part(M), "discrete")


def cayley_transform_vectors(spec: Spectrum, g: VectorSet) -> tuple[np.ndarray, VectorSet]:
    """Map continuous data ``(lambda, g)`` to discrete data ``(eta, a)``.

    ``eta_j = h(lambda_j)`` is returned in extended precision; ``a`` is
    ``sqrt(2) g_j / (1 + lambda_j)``.
    """
    x = _check_vectors(g, CONTINUOUS_G, spec.N)
    etas = mobius_h(spec.lambdas.astype(np.clongdouble))
    a = math.sqrt(2) / (1 + spec.lambdas) * x
    return etas, VectorSet(a, DISCRETE_A)


def cayley_residual(spec: Spectrum, g: VectorSet) -> float:
    """Largest entrywise relative gap between the continuous and transported forms.

    Each entry is scaled by ``sum_i |g^i_j| |g^i_k| / |lambda_j + conj(lambda_k)|``,
    the magnitude of the terms summed into it, so that cancellation inside a
    sum over several vectors does not masquerade as a discrepancy.
    """
    Mc = quadform_continuous(spec, g).matrix
    etas, a = cayley_transform_vectors(spec, g)
    Md = quadform_discrete(etas, a).matrix
    lam = spec.lambdas
    ax = np.abs(g.coeffs)
    scale = (ax.T @ ax) / np.abs(lam[:, None] + np.conj(lam)[None, :])
    scale = np.where(scale > 0, scale, 1.0)
    return float((np.abs(Mc - Md) / scale).max())


def frame_bounds(q: QuadForm, zero_rtol: float = NUMERICAL_ZERO_RTOL) -> FrameBounds:
    M = q.matrix if isinstance(q, QuadForm) else QuadForm(q, "raw").matrix
    if not np.all(np.isfinite(M)):
        raise EigenSolveFailure("quadratic form has non-finite entries")
    try:
        ev = np.linalg.eigvalsh(M)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveFailure(str(exc)) from exc
    if not np.all(np.isfinite(ev)):
        raise EigenSolveFailure("eigenvalue solver returned non-finite values")
    raw_lower, upper = float(ev[0]), float(ev[-1])
    upper = max(upper, 0.0)
    lower = min(max(raw_lower, 0.0), upper)
    return FrameBounds(
        lower=lower,
        upper=upper,
        dimension=M.shape[0],
        raw_lower=raw_lower,
        numerically_zero=lower <= zero_rtol * upper,
    )


def riesz_basis_conjugate(q: QuadForm, basis: BasisChange) -> QuadForm:
    """Move a form built from eigencoordinates ``B^{-1} g`` to ambient coordinates.

    For ``A = B diag(-lambda) B^{-1}`` one has ``<e^{tA} g, c> =
    <e^{-t lambda} B^{-1} g, B^* c>``, so the ambient form is ``B M B^*``.
    Its frame bounds lie within a factor ``cond(B)^2`` of those of ``M``.
    """
    if basis.N != q.N:
        raise DimensionMismatch(f"basis of size {basis.N} for form of size {q.N}")
    B = basis.matrix
    out = B @ q.matrix @ B.conj().T
    if not np.all(np.isfinite(out)):
        raise SingularBasis("conjugation produced non-finite entries")
    return QuadForm(_hermitian_part(out), q.source)


# --- independent oracles -------------------------------------------------------

_GL_ORDER = 16


def _gl_panels(f, lo: np.ndarray, hi: np.ndarray, nodes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t = mid[:, None] + half[:, None] * nodes[None, :]
    vals = f(t.ravel()).reshape(t.shape)
    return half * (vals @ weights)


def adaptive_gauss_legendre(f, a: float, b: float, tol: float, max_panels: int = 2_000_000) -> tuple[float, float]:
    """Integrate a vectorized ``f`` over ``[a, b]`` with bisecting Gauss-Legendre panels.

    A panel is accepted once the 16-point rule on it agrees with the sum over
    its two halves to within its share ``tol * width / (b - a)`` of the
    budget. Returns ``(value, error_estimate)``.
    """
    if b <= a:
        return 0.0, 0.0
    nodes, weights = leggauss(_GL_ORDER)
    lo = np.array([a], dtype=float)
    hi = np.array([b], dtype=float)
    total = 0.0
    err = 0.0
    processed = 0
    while lo.size:
        mid = 0.5 * (lo + hi)
        whole = _gl_panels(f, lo, hi, nodes, weights)
        left = _gl_panels(f, lo, mid, nodes, weights)
        right = _gl_panels(f, mid, hi, nodes, weights)
        est = np.abs(left + right - whole)
        ok = est <= tol * (hi - lo) / (b - a)
        total += math.fsum((left + right)[ok])
        err += float(est[ok].sum())
        processed += lo.size
        if processed > max_panels:
            raise NumericalFailure("adaptive quadrature exceeded its panel budget")
        keep = ~ok
        lo, mid, hi = lo[keep], mid[keep], hi[keep]
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
    return total, err


def oracle_continuous(spec: Spectrum, g: VectorSet, c, T_max: float | None = None, tol: float = 1e-8) -> float:
    """Brute-force ``sum_i int_0^inf |<e^{tA} g^i, c>|^2 dt`` by quadrature.

    The integrand is evaluated directly from the semigroup; the tail beyond
    ``T_max`` is bounded analytically by ``tol``. Absolute error <= 2 tol.
    """
    lam = spec.lambdas if isinstance(spec, Spectrum) else np.atleast_1d(np.asarray(spec, dtype=np.complex128))
    margin = float(lam.real.min())
    if not margin > 0:
        raise TailNotBounded("tail bound requires a positive stability margin")
    x = _check_vectors(g, CONTINUOUS_G, lam.size)
    c = np.asarray(c, dtype=np.complex128)
    if c.shape != (lam.size,):
        raise DimensionMismatch(f"c must have length {lam.size}")
    w = x * np.conj(c)[None, :]
    scale = float(np.sum(np.abs(x) ** 2) * np.sum(np.abs(c) ** 2))
    if scale == 0.0:
        return 0.0
    if T_max is None:
        T_max = max(0.0, -math.log(tol * 2 * margin / scale) / (2 * margin))

    def integrand(t: np.ndarray) -> np.ndarray:
        inner = np.exp(-np.outer(t, lam)) @ w.T  # <e^{tA} g^i, c> for every t, i
        return np.sum(np.abs(inner) ** 2, axis=1)

    value, _ = adaptive_gauss_legendre(integrand, 0.0, T_max, tol / 2)
    return value


def oracle_discrete(etas, a: VectorSet, c, tol: float = 1e-10) -> float:
    """Truncated power sum ``sum_i sum_{n < n*} |<B^n a^i, c>|^2`` with tail <= tol."""
    eta = np.atleast_1d(np.asarray(etas)).astype(np.complex128)
    x = _check_vectors(a, DISCRETE_A, eta.size)
    c = np.asarray(c, dtype=np.complex128)
    if c.shape != (eta.size,):
        raise DimensionMismatch(f"c must have length {eta.size}")
    r = float(np.abs(eta).max())
    if r >= 1:
        raise BoundaryEigenvalue("power-sum oracle needs max |eta_j| < 1")
    B = float(np.sum(np.sum(np.abs(x) * np.abs(c)[None, :], axis=1) ** 2))
    if B == 0.0:
        return 0.0
    if r == 0.0:
        n_star = 1
    else:
        n_star = max(1, math.ceil(math.log(tol * (1 - r * r) / B) / math.log(r * r)))
    w = x * np.conj(c)[None, :]
    total = 0.0
    chunk = 4096
    for start in range(0, n_star, chunk):
        n = np.arange(start, min(start + chunk, n_star))
        inner = (eta[None, :] ** n[:, None]) @ w.T
        total += math.fsum(np.sum(np.abs(inner) ** 2, axis=1))
    return total
