"""Time discretization of the continuous sampling system.

Grids use the plain counting measure; a Riemann comparison with the
continuous form multiplies by the step explicitly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import (
    DimensionMismatch,
    InfeasibleStability,
    NoFeasibleDelta,
    TailNotBounded,
    ValidationError,
)
from .frame_analysis import (
    CONTINUOUS_G,
    FrameBounds,
    QuadForm,
    VectorSet,
    _check_vectors,
    _hermitian_part,
    _outer_sum,
    frame_bounds,
    quadform_continuous,
)
from .operators import Spectrum, gap_envelope, margin_trend, semigroup_gap_norm, stability

FINITE = "finite_explicit"
UNIFORM = "uniform_infinite"

DEFAULT_TAIL_TOL = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Sampling instants: an explicit finite list or ``{0, m, 2m, ...}``.

    ``cap`` only matters for uniform grids that are summed term by term.
    """

    kind: str
    points: np.ndarray | None = None
    step: float | None = None
    cap: int | None = None

    def __post_init__(self):
        if self.kind == FINITE:
            pts = np.atleast_1d(np.asarray(self.points, dtype=float)).copy()
            if pts.ndim != 1 or pts.size == 0:
                raise ValidationError("grid needs at least one point", "nonempty grid", "grid.points")
            if not np.all(np.isfinite(pts)):
                raise ValidationError("grid points must be finite", "finite grid", "grid.points")
            if pts[0] != 0.0:
                raise ValidationError("first sampling instant must be 0", "t_1 = 0", "grid.points")
            if np.any(np.diff(pts) <= 0):
                raise ValidationError("grid must be strictly increasing", "strictly increasing", "grid.points")
            pts.setflags(write=False)
            object.__setattr__(self, "points", pts)
        elif self.kind == UNIFORM:
            if self.step is None or not (self.step > 0 and math.isfinite(self.step)):
                raise ValidationError("uniform step must be a positive number", "step > 0", "grid.step")
            if self.cap is not None and self.cap < 1:
                raise ValidationError("cap must be >= 1", "cap >= 1", "grid.cap")
        else:
            raise ValidationError(f"unknown grid kind {self.kind!r}", "kind in {finite, uniform}", "grid.kind")

    @classmethod
    def finite(cls, points) -> "TimeGrid":
        return cls(FINITE, points=points)

    @classmethod
    def uniform(cls, step: float, cap: int | None = None) -> "TimeGrid":
        return cls(UNIFORM, step=float(step), cap=cap)

    @property
    def delta0(self) -> float:
        """Smallest gap; ``inf`` for a single-point grid."""
        if self.kind == UNIFORM:
            return self.step
        return float(np.diff(self.points).min()) if self.points.size > 1 else math.inf

    @property
    def max_gap(self) -> float:
        if self.kind == UNIFORM:
            return self.step
        return float(np.diff(self.points).max()) if self.points.size > 1 else 0.0

    def times(self, cap: int | None = None) -> np.ndarray:
        if self.kind == FINITE:
            return np.asarray(self.points)
        n = cap if cap is not None else self.cap
        if n is None:
            raise ValueError("uniform grid needs a cap to be listed term by term")
        return self.step * np.arange(n)


def uniform_cap(spec: Spectrum, step: float, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    """Number of uniform samples after which the neglected geometric tail is below ``tail_tol``.

    The tail of ``sum_n exp(-2 margin step n)`` past ``n`` is
    ``q^n / (1 - q)`` with ``q = exp(-2 margin step)``.
    """
    st = stability(spec)
    if not st.stable:
        raise TailNotBounded("uniform infinite grid needs a stable spectrum")
    log_q = -2 * st.margin * step
    one_minus_q = -math.expm1(log_q)
    n = math.log(tail_tol * one_minus_q) / log_q
    return max(1, math.ceil(n))


def time_kernel_finite(lam: np.ndarray, times: np.ndarray) -> np.ndarray:
    """``W[j, k] = sum_t exp(-t lambda_j) exp(-t conj(lambda_k))``."""
    E = np.exp(-np.outer(times, lam))
    return E.T @ E.conj()


def time_kernel_uniform(lam: np.ndarray, step: float) -> np.ndarray:
    """Closed-form geometric sum ``1 / (1 - exp(-step (lambda_j + conj lambda_k)))``."""
    s = lam[:, None] + np.conj(lam)[None, :]
    return 1 / (-np.expm1(-step * s))


def time_kernel_horizon(lam: np.ndarray, L: float) -> np.ndarray:
    """``int_0^L exp(-t (lambda_j + conj lambda_k)) dt`` in closed form."""
    s = lam[:, None] + np.conj(lam)[None, :]
    return -np.expm1(-L * s) / s


def sampled_quadform(spec: Spectrum, g: VectorSet, grid: TimeGrid, direct: bool = False,
                     tail_tol: float = DEFAULT_TAIL_TOL) -> QuadForm:
    """Energy ``sum_i sum_{t in T} |<e^{tA} g^i, c>|^2`` as a Hermitian form.

    Uniform grids use the closed-form geometric sum unless ``direct`` is set,
    in which case the sum is truncated at ``grid.cap`` (or at the cap implied
    by ``tail_tol``).
    """
    x = _check_vectors(g, CONTINUOUS_G, spec.N)
    lam = spec.lambdas
    if grid.kind == FINITE:
        W = time_kernel_finite(lam, grid.times())
    else:
        if not stability(spec).stable:
            raise TailNotBounded("uniform infinite grid needs a stable spectrum")
        if direct:
            cap = grid.cap if grid.cap is not None else uniform_cap(spec, grid.step, tail_tol)
            W = time_kernel_finite(lam, grid.times(cap))
        else:
            W = time_kernel_uniform(lam, grid.step)
    return QuadForm(_hermitian_part(_outer_sum(x) * W), "discrete")


def horizon_quadform(spec: Spectrum, g: VectorSet, L: float) -> QuadForm:
    """Continuous energy restricted to ``[0, L]`` (exact incomplete integral)."""
    if not L > 0:
        raise ValueError("horizon must be positive")
    x = _check_vectors(g, CONTINUOUS_G, spec.N)
    return QuadForm(_hermitian_part(_outer_sum(x) * time_kernel_horizon(spec.lambdas, L)), "continuous")


def bessel_constant(g: VectorSet) -> float:
    """Bessel bound of the finite family ``{g^i}``: top eigenvalue of ``sum_i g^i (g^i)^*``."""
    return float(np.linalg.eigvalsh(_outer_sum(g.coeffs)).max())


# --- certificates ---------------------------------------------------------------


@dataclass(frozen=True)
class DiscretizationCertificate:
    """Gap constraints under which every grid is a frame, with a guaranteed lower bound.

    Any grid ``0 = t_1 < t_2 < ...`` whose gaps lie in ``[delta0, delta)``
    (and which runs to ``horizon_L``) has discrete lower frame bound at least
    ``guaranteed_lower = c / (2 delta)``. The perturbation estimate behind it is
    ``2 K M^2 delta eps / (1 - exp(omega delta0)) < c / 2``.
    """

    delta: float
    delta0: float
    epsilon: float
    horizon_L: float
    guaranteed_lower: float
    derivation: dict = field(default_factory=dict)

    def lhs(self) -> float:
        d = self.derivation
        return (2 * d["K"] * d["M"] ** 2 * self.delta * self.epsilon
                / -math.expm1(d["omega"] * self.delta0))

    def lhs_published(self) -> float:
        """Same estimate with the smaller constant ``sqrt(2) K M^2``."""
        return self.lhs() / math.sqrt(2)

    def validate(self, spec: Spectrum | None = None, samples: int = 64) -> bool:
        """Re-evaluate the stored inequality (and, given ``spec``, the gap-norm bound)."""
        d = self.derivation
        ok = (
            self.delta > 0
            and 0 < self.delta0 <= self.delta
            and self.epsilon > 0
            and self.lhs() < d["c"] / 2
            and self.lhs_published() < d["c"] / 2
            and math.isclose(self.guaranteed_lower, d["c"] / (2 * self.delta), rel_tol=1e-12)
        )
        if ok and spec is not None:
            ts = np.linspace(0.0, self.delta, samples)
            ok = all(semigroup_gap_norm(spec, t) <= self.epsilon for t in ts)
        return bool(ok)

    def admits(self, grid: TimeGrid) -> bool:
        """Whether a finite grid satisfies the certificate's gap constraints."""
        if grid.kind == UNIFORM:
            return self.delta0 <= grid.step < self.delta
        gaps = np.diff(grid.times())
        return bool(gaps.size == 0 or (gaps.min() >= self.delta0 and gaps.max() < self.delta))

    def to_dict(self) -> dict:
        return asdict(self)


def search_delta(spec: Spectrum, g: VectorSet, continuous_bounds: FrameBounds,
                 bessel_K: float | None = None, kappa: float = 0.5,
                 horizon_L: float = math.inf) -> DiscretizationCertificate:
    """Find the largest ``delta`` (bisection) satisfying the perturbation estimate.

    ``eps(delta)`` is the envelope ``delta |A| exp(delta |A|)`` of
    ``||e^{sA} - I||`` over ``s <= delta``; the minimum gap is tied to the
    maximum gap by ``delta0 = kappa * delta``. For a finite horizon pass the
    lower bound of the ``[0, L]`` form as ``continuous_bounds``.
    """
    c = continuous_bounds.lower
    if not c > 0:
        raise NoFeasibleDelta("continuous lower frame bound must be positive")
    if not 0 < kappa <= 1:
        raise ValueError("kappa must lie in (0, 1]")
    st = stability(spec)
    if not st.stable:
        raise InfeasibleStability("certificate needs an exponentially stable semigroup")
    K = bessel_constant(g) if bessel_K is None else float(bessel_K)
    M = 1.0
    omega = st.omega
    target = c / 2

    def lhs(delta: float) -> float:
        eps = gap_envelope(spec, delta)
        return 2 * K * M**2 * delta * eps / -math.expm1(omega * kappa * delta)

    hi = 1.0 / max(spec.spectral_radius, 1e-300)
    while lhs(hi) < target:
        hi *= 2
    lo = hi
    while lhs(lo) >= target:
        lo /= 2
        if lo < 1e-300:
            raise NoFeasibleDelta("no positive delta satisfies the estimate")
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if lhs(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1 < 1e-12:
            break
    delta = lo
    return DiscretizationCertificate(
        delta=delta,
        delta0=kappa * delta,
        epsilon=gap_envelope(spec, delta),
        horizon_L=horizon_L,
        guaranteed_lower=c / (2 * delta),
        derivation={
            "K": K,
            "M": M,
            "omega": omega,
            "c": c,
            "C": continuous_bounds.upper,
            "spectral_radius": spec.spectral_radius,
            "kappa": kappa,
        },
    )


def random_admissible_grid(cert: DiscretizationCertificate, horizon: float,
                           rng: np.random.Generator) -> TimeGrid:
    """Random finite grid from 0 to ``horizon`` with gaps drawn in ``[delta0, delta)``."""
    n_est = int(horizon / cert.delta0) + 2
    gaps = rng.uniform(cert.delta0, cert.delta, size=n_est)
    pts = np.concatenate([[0.0], np.cumsum(gaps)])
    return TimeGrid.finite(pts[pts <= horizon])


def grid_tail_bound(spec: Spectrum, g: VectorSet, horizon: float, delta0: float) -> float:
    """Energy bound of samples taken after ``horizon`` on a grid with gaps >= delta0.

    ``sum_{t > T} K ||e^{tA}||^2 <= K exp(-2 margin T) / (1 - exp(-2 margin delta0))``.
    """
    st = stability(spec)
    K = bessel_constant(g)
    return K * math.exp(-2 * st.margin * horizon) / -math.expm1(-2 * st.margin * delta0)


@dataclass(frozen=True)
class FiniteHorizon:
    L: float
    guaranteed_lower: float
    L_closed_form: float


def finite_horizon(continuous_bounds: FrameBounds, M: float = 1.0, omega: float = -1.0,
                   step: float = 0.01) -> FiniteHorizon:
    """Smallest grid horizon ``L = k step`` with ``c - C M^2 exp(2 omega L) > 0``.

    The returned ``guaranteed_lower`` bounds the lower frame constant of the
    continuous system restricted to ``[0, L]``.
    """
    if not omega < 0:
        raise InfeasibleStability("a finite horizon needs omega < 0")
    c, C = continuous_bounds.lower, continuous_bounds.upper
    if not c > 0:
        raise NoFeasibleDelta("continuous lower frame bound must be positive")
    factor = C * M**2
    L_star = max(0.0, math.log(factor / c) / (-2 * omega))
    k = max(1, math.floor(L_star / step) + 1)
    L = k * step
    while c - factor * math.exp(2 * omega * L) <= 0:
        k += 1
        L = k * step
    return FiniteHorizon(L=L, guaranteed_lower=c - factor * math.exp(2 * omega * L), L_closed_form=L_star)


# --- verification -------------------------------------------------------------


@dataclass(frozen=True)
class GridFrameReport:
    lower: float
    upper: float
    is_frame: bool
    numerically_zero: bool
    scaled_lower: float | None
    scaled_upper: float | None
    riemann_deviation: float | None
    within_band: bool | None
    rtol: float

    def to_dict(self) -> dict:
        return asdict(self)


def verify_grid_frame(spec: Spectrum, g: VectorSet, grid: TimeGrid,
                      continuous_bounds: FrameBounds | None = None, rtol: float = 0.02) -> GridFrameReport:
    """Frame bounds of a sampled system and, for uniform grids, the Riemann comparison.

    ``riemann_deviation`` is ``|step * lower_disc - lower_cont| / lower_cont``;
    ``within_band`` also requires the scaled upper bound to be within ``rtol``.
    """
    fb = frame_bounds(sampled_quadform(spec, g, grid))
    scaled_lower = scaled_upper = deviation = within = None
    if grid.kind == UNIFORM:
        if continuous_bounds is None:
            continuous_bounds = frame_bounds(quadform_continuous(spec, g))
        scaled_lower = grid.step * fb.lower
        scaled_upper = grid.step * fb.upper
        if continuous_bounds.lower > 0:
            deviation = abs(scaled_lower - continuous_bounds.lower) / continuous_bounds.lower
            dev_up = abs(scaled_upper - continuous_bounds.upper) / continuous_bounds.upper
            within = deviation <= rtol and dev_up <= rtol
    return GridFrameReport(
        lower=fb.lower,
        upper=fb.upper,
        is_frame=fb.resolved,
        numerically_zero=fb.numerically_zero,
        scaled_lower=scaled_lower,
        scaled_upper=scaled_upper,
        riemann_deviation=deviation,
        within_band=within,
        rtol=rtol,
    )


@dataclass(frozen=True)
class DichotomyVerdict:
    """Numerical status of the three equivalent legs at this truncation."""

    finite_horizon_frame: bool
    finite_grid_frame: bool
    stable: bool
    margin: float
    horizon_L: float | None
    grid_size: int | None
    grid_lower: float | None
    margin_trend: list = field(default_factory=list)
    margin_to_zero: bool | None = None
    notes: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return self.finite_horizon_frame == self.finite_grid_frame == self.stable

    def to_dict(self) -> dict:
        d = asdict(self)
        d["consistent"] = self.consistent
        return d


def stability_dichotomy(spec: Spectrum, g: VectorSet, continuous_bounds: FrameBounds | None = None,
                        generator: Callable[[int], complex] | None = None,
                        sweep: Iterable[int] | None = None,
                        max_grid: int = 1 << 14) -> DichotomyVerdict:
    """Check finite-horizon frame / finite-grid frame / stability at this truncation.

    The finite grid leg doubles the number of equispaced samples on
    ``[0, L]`` (starting from ``ceil(N / m)``) until its lower bound is
    resolved above eigen-solver round-off. With ``generator`` and ``sweep`` the margin trend
    across truncations is reported as well; ``margin_to_zero`` is set when the
    margin shrinks by more than a factor 10 over the sweep.
    """
    st = stability(spec)
    notes: list[str] = []
    if continuous_bounds is None:
        continuous_bounds = frame_bounds(quadform_continuous(spec, g))
    horizon_ok = grid_ok = False
    L = grid_lower = None
    grid_size = None
    if st.stable and continuous_bounds.resolved:
        fh = finite_horizon(continuous_bounds, M=1.0, omega=st.omega)
        L = fh.L
        exact = frame_bounds(horizon_quadform(spec, g, L))
        horizon_ok = exact.resolved and fh.guaranteed_lower > 0
        n = max(2, math.ceil(spec.N / g.m))
        while n <= max_grid:
            grid = TimeGrid.finite(np.linspace(0.0, L, n))
            fb = frame_bounds(sampled_quadform(spec, g, grid))
            if fb.resolved:
                grid_ok, grid_size, grid_lower = True, n, fb.lower
                break
            n *= 2
        if not grid_ok:
            notes.append(f"no equispaced grid with <= {max_grid} points on [0, L] is numerically a frame")
    elif not continuous_bounds.resolved:
        notes.append("continuous system is not a frame at this truncation")
    trend: list = []
    to_zero = None
    if generator is not None and sweep is not None:
        trend = margin_trend(generator, sweep)
        if len(trend) >= 2:
            to_zero = trend[-1][1] < 0.1 * trend[0][1]
    return DichotomyVerdict(
        finite_horizon_frame=horizon_ok,
        finite_grid_frame=grid_ok,
        stable=st.stable,
        margin=st.margin,
        horizon_L=L,
        grid_size=grid_size,
        grid_lower=grid_lower,
        margin_trend=[list(t) for t in trend],
        margin_to_zero=to_zero,
        notes=notes,
    )


def check_dimensions(spec: Spectrum, g: VectorSet) -> None:
    if spec.N != g.N:
        raise DimensionMismatch(f"spectrum has N={spec.N}, vectors have N={g.N}")
