"""Structural frame conditions for diagonal generators.

The orbit ``{e^{tA} g^i}`` of a diagonal generator is a frame exactly when

* the vectors factor as ``g^i_j = d_j alpha^i_j sqrt(Re lambda_j)`` with
  ``d`` bounded above and below and unit columns ``alpha_j``,
* the atoms ``(1 - |eta_j|^2)`` at ``eta_j = h(lambda_j)`` form a Carleson measure,
* pseudo-hyperbolic discs of some radius ``beta`` hold at most ``m`` points, and
* the ``alpha`` columns of points clustered within ``gamma < beta`` are
  uniformly linearly independent.

Each test below is a finite-truncation surrogate; none of them proves the
asymptotic statement.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ClusterTooLarge, DeadCoordinate, DimensionMismatch, DuplicatePoint
from .frame_analysis import CONTINUOUS_G, VectorSet, _check_vectors, frame_bounds, quadform_continuous
from .hardy import HALFPLANE, as_disc_points, as_halfplane_points, mobius_h, normalized_gram
from .operators import Spectrum


def default_radius_grid() -> np.ndarray:
    return np.geomspace(0.05, 0.95, 16)


@dataclass(frozen=True)
class ConditionConfig:
    """Thresholds for the structural tests; all are recorded in every report."""

    carleson_threshold: float = 50.0
    beta_grid: tuple = tuple(default_radius_grid())
    # gamma is searched as beta * fraction
    gamma_fractions: tuple = tuple(default_radius_grid())
    max_C: float = 10.0
    D_floor: float = 1e-10
    interpolating_floor: float = 1e-6
    plateau_rtol: float = 0.10

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


# --- factorization --------------------------------------------------------------


@dataclass(frozen=True)
class FactorizationResult:
    """``g^i_j = d_j alpha^i_j sqrt(Re lambda_j)`` with unit-norm columns ``alpha[:, j]``."""

    d: np.ndarray
    alpha: np.ndarray
    C_bound: float

    def reconstruct(self, spec: Spectrum) -> np.ndarray:
        return self.d[None, :] * self.alpha * np.sqrt(spec.lambdas.real)[None, :]

    def to_dict(self) -> dict:
        return {"d": self.d.tolist(), "C_bound": self.C_bound}


def factorize_vectors(spec: Spectrum, g: VectorSet) -> FactorizationResult:
    x = _check_vectors(g, CONTINUOUS_G, spec.N)
    col_sq = np.sum(np.abs(x) ** 2, axis=0)
    dead = np.flatnonzero(col_sq == 0)
    if dead.size:
        raise DeadCoordinate(int(dead[0]))
    re = spec.lambdas.real
    d = np.sqrt(col_sq / re)
    alpha = x / np.sqrt(col_sq)[None, :]
    C = float(max(d.max(), (1 / d).max()))
    return FactorizationResult(d=d, alpha=alpha, C_bound=C)


# --- Carleson ------------------------------------------------------------------


@dataclass(frozen=True)
class CarlesonReport:
    is_carleson: bool
    constant_estimate: float
    witness: int
    threshold: float
    row_sums: list = field(default_factory=list)
    box_ratio: float | None = None
    box_witness: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _disc_precision(etas) -> np.ndarray:
    arr = np.asarray(etas)
    if arr.dtype in (np.clongdouble, np.longdouble):
        return np.atleast_1d(arr.astype(np.clongdouble))
    return np.atleast_1d(arr.astype(np.complex128))


def carleson_test(etas, threshold: float = 50.0, boxes: bool = True, box_levels: int = 24) -> CarlesonReport:
    """Row-sum Carleson estimate of the atomic measure ``sum_j (1 - |eta_j|^2) delta_{eta_j}``.

    ``constant_estimate = max_j sum_k w_j w_k / |1 - conj(eta_j) eta_k|^2`` with
    ``w = 1 - |eta|^2``: the measure tested on the normalized kernel at each
    atom. Extended-precision inputs keep ``w`` accurate near the circle.

    ``box_ratio`` is a secondary diagnostic: the largest ``mu(S(I)) / |I|``
    over dyadic boxes (two shifted dyadic systems), with ``|I|`` the arc
    length as a fraction of the circle.
    """
    eta = as_disc_points(_disc_precision(etas))
    w = 1 - (eta.real**2 + eta.imag**2)
    den = np.abs(1 - np.conj(eta)[:, None] * eta[None, :]) ** 2
    rows = np.sum(w[:, None] * w[None, :] / den, axis=1).astype(np.float64)
    j = int(np.argmax(rows))
    const = float(rows[j])
    box_ratio = box_witness = None
    if boxes:
        box_ratio, box_witness = _dyadic_box_ratio(eta.astype(np.complex128), w.astype(np.float64), box_levels)
    return CarlesonReport(
        is_carleson=const <= threshold,
        constant_estimate=const,
        witness=j,
        threshold=threshold,
        row_sums=rows.tolist(),
        box_ratio=box_ratio,
        box_witness=box_witness,
    )


def _dyadic_box_ratio(eta: np.ndarray, w: np.ndarray, levels: int) -> tuple[float, dict]:
    theta = np.mod(np.angle(eta) / (2 * np.pi), 1.0)
    depth = 1 - np.abs(eta)
    best, where = 0.0, {}
    for shift in (0.0, 1 / 3):
        th = np.mod(theta + shift, 1.0)
        for k in range(levels + 1):
            size = 2.0**-k
            inside = depth < size
            if not inside.any():
                continue
            bins = np.floor(th[inside] / size).astype(np.int64)
            mass = np.bincount(bins, weights=w[inside])
            b = int(np.argmax(mass))
            ratio = float(mass[b] / size)
            if ratio > best:
                best, where = ratio, {"level": k, "index": b, "shift": shift}
    return best, where


# --- separation and clusters ---------------------------------------------------------


def _rho_matrix(eta: np.ndarray) -> np.ndarray:
    d = np.abs(eta[:, None] - eta[None, :]) / np.abs(1 - np.conj(eta)[:, None] * eta[None, :])
    return d.astype(np.float64)


@dataclass(frozen=True)
class SeparationReport:
    """``beta`` is the largest grid radius whose discs hold at most ``m`` points (or None)."""

    beta: float | None
    max_count: int
    satisfied: bool
    m: int
    counts: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def separation_test(etas, m: int, beta_grid=None) -> SeparationReport:
    """Count points (with repetition) in each disc ``{rho(z, eta_j) < beta}``.

    ``counts[b]`` is the worst count over anchors for ``beta_grid[b]``;
    a repeated point always counts at least twice, for every radius.
    """
    eta = as_disc_points(_disc_precision(etas))
    grid = np.sort(np.asarray(default_radius_grid() if beta_grid is None else beta_grid, dtype=float))
    rho = _rho_matrix(eta)
    counts = [int((rho < b).sum(axis=1).max()) for b in grid]
    ok = [b for b, c in zip(grid, counts) if c <= m]
    if ok:
        beta = float(max(ok))
        max_count = counts[int(np.flatnonzero(grid == beta)[0])]
    else:
        beta, max_count = None, counts[0]
    return SeparationReport(beta=beta, max_count=max_count, satisfied=beta is not None, m=m, counts=counts)


@dataclass(frozen=True)
class ClusterMatrixReport:
    """Best ``gamma`` and the smallest ``sigma_min^2`` over clusters at that radius."""

    gamma: float
    min_sigma_sq: float
    D_estimate: float
    worst_anchor: int
    curve: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def cluster_matrix_test(etas, alpha, beta: float, gamma_grid=None) -> ClusterMatrixReport:
    """Lower bound of the ``m x p`` column blocks of ``alpha`` over pseudo-hyperbolic clusters.

    For each radius ``gamma`` in ``gamma_grid`` (all < ``beta``) and each
    anchor ``j`` the cluster is every ``k`` with ``rho(eta_j, eta_k) < gamma``;
    the smallest squared singular value of ``alpha[:, cluster]`` is minimized
    over anchors. The reported ``gamma`` maximizes that minimum (largest radius
    on ties).
    """
    eta = as_disc_points(_disc_precision(etas))
    alpha = np.asarray(alpha, dtype=np.complex128)
    if alpha.ndim == 1:
        alpha = alpha[None, :]
    m, N = alpha.shape
    if N != eta.size:
        raise DimensionMismatch(f"alpha has {N} columns for {eta.size} points")
    if gamma_grid is None:
        gamma_grid = beta * default_radius_grid()
    gammas = np.sort(np.asarray(gamma_grid, dtype=float))
    if np.any(gammas <= 0) or np.any(gammas >= beta):
        raise ValueError("gamma values must lie in (0, beta)")
    rho = _rho_matrix(eta)
    curve = []
    for gamma in gammas:
        worst, anchor = math.inf, 0
        for j in range(N):
            idx = np.flatnonzero(rho[j] < gamma)
            if idx.size > m:
                raise ClusterTooLarge(
                    f"cluster at anchor {j} with gamma={gamma:.3g} has {idx.size} > m={m} points"
                )
            sv = np.linalg.svd(alpha[:, idx], compute_uv=False)
            s2 = float(sv.min() ** 2)
            if s2 < worst:
                worst, anchor = s2, j
        curve.append((float(gamma), worst, anchor))
    gamma, best, anchor = max(curve, key=lambda r: (r[1], r[0]))
    return ClusterMatrixReport(gamma=gamma, min_sigma_sq=best, D_estimate=best, worst_anchor=anchor,
                               curve=[list(c) for c in curve])


# --- m = 1 interpolation ---------------------------------------------------------


@dataclass(frozen=True)
class InterpolatingReport:
    sizes: list
    min_eigs: list
    max_eigs: list
    plateau: bool
    extrapolated_min: float
    floor: float
    interpolating: bool
    carleson: CarlesonReport
    separated: bool
    min_separation: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["carleson"] = self.carleson.to_dict()
        return d


def _default_sweep(N: int) -> list[int]:
    return sorted({max(1, (N * k) // 4) for k in (1, 2, 3, 4)})


def interpolating_test_m1(lambdas, sweep=None, config: ConditionConfig | None = None) -> InterpolatingReport:
    """Riesz-sequence surrogate for the normalized half-plane kernels at ``lambdas``.

    Reports the extreme eigenvalues of the normalized Gram over growing
    truncations. The verdict is that the smallest eigenvalue at the largest
    size clears ``config.interpolating_floor``. Since that eigenvalue can only
    decrease along nested truncations, the report adds a plateau flag (last
    relative change within ``config.plateau_rtol``) and an ``a + b / N^2``
    extrapolation from the last two sizes; neither enters the verdict.
    """
    cfg = config or ConditionConfig()
    lam = as_halfplane_points(lambdas).astype(np.complex128)
    if np.unique(lam).size != lam.size:
        raise DuplicatePoint("interpolating test needs distinct points")
    sizes = sorted(set(sweep)) if sweep is not None else _default_sweep(lam.size)
    if sizes[-1] > lam.size or sizes[0] < 1:
        raise DimensionMismatch(f"sweep {sizes} exceeds {lam.size} points")
    lo, hi = [], []
    for n in sizes:
        ev = np.linalg.eigvalsh(normalized_gram(lam[:n], HALFPLANE))
        lo.append(float(ev[0]))
        hi.append(float(ev[-1]))
    if len(sizes) >= 2:
        n1, n2 = sizes[-2], sizes[-1]
        extrap = (n2**2 * lo[-1] - n1**2 * lo[-2]) / (n2**2 - n1**2)
        plateau = abs(lo[-1] - lo[-2]) <= cfg.plateau_rtol * abs(lo[-2])
    else:
        extrap, plateau = lo[-1], True
    eta = mobius_h(lam.astype(np.clongdouble))
    carl = carleson_test(eta, cfg.carleson_threshold, boxes=False)
    rho = _rho_matrix(eta)
    min_sep = float(np.min(rho + np.eye(lam.size) * 2)) if lam.size > 1 else 1.0
    return InterpolatingReport(
        sizes=sizes,
        min_eigs=lo,
        max_eigs=hi,
        plateau=plateau,
        extrapolated_min=float(extrap),
        floor=cfg.interpolating_floor,
        interpolating=lo[-1] >= cfg.interpolating_floor,
        carleson=carl,
        separated=min_sep > 0,
        min_separation=min_sep,
    )


# --- aggregate -----------------------------------------------------------------


@dataclass(frozen=True)
class ConditionReport:
    factorization_ok: bool
    C_bound: float
    carleson: CarlesonReport
    separation: SeparationReport
    cluster: ClusterMatrixReport | None
    structural_verdict: bool
    numerical_lower: float
    numerical_upper: float
    numerical_frame: bool
    agreement: bool
    config: dict
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "factorization_ok": self.factorization_ok,
            "C_bound": self.C_bound,
            "carleson": self.carleson.to_dict(),
            "separation": self.separation.to_dict(),
            "cluster": None if self.cluster is None else self.cluster.to_dict(),
            "structural_verdict": self.structural_verdict,
            "numerical_lower": self.numerical_lower,
            "numerical_upper": self.numerical_upper,
            "numerical_frame": self.numerical_frame,
            "agreement": self.agreement,
            "config": self.config,
            "notes": list(self.notes),
        }


def full_theorem_check(spec: Spectrum, g: VectorSet, config: ConditionConfig | None = None) -> ConditionReport:
    """Run every structural test and compare with the truncated frame bounds.

    The ``alpha`` entering the cluster test is the continuous factorization;
    conjugating it (the discrete-side convention) leaves singular values
    unchanged.
    """
    cfg = config or ConditionConfig()
    notes: list[str] = []
    fac = factorize_vectors(spec, g)
    fac_ok = fac.C_bound <= cfg.max_C
    if not fac_ok:
        notes.append(f"C_bound {fac.C_bound:.6g} exceeds max_C {cfg.max_C:g}")
    eta = mobius_h(spec.lambdas.astype(np.clongdouble))
    carl = carleson_test(eta, cfg.carleson_threshold)
    sep = separation_test(eta, g.m, cfg.beta_grid)
    cluster = None
    cluster_ok = False
    if sep.satisfied:
        gammas = sep.beta * np.asarray(cfg.gamma_fractions)
        cluster = cluster_matrix_test(eta, fac.alpha, sep.beta, gammas)
        cluster_ok = cluster.D_estimate >= cfg.D_floor
        if not cluster_ok:
            notes.append(f"cluster lower bound {cluster.D_estimate:.3g} below D_floor {cfg.D_floor:g}")
    else:
        notes.append("separation fails on the beta grid; cluster test skipped")
    structural = fac_ok and carl.is_carleson and sep.satisfied and cluster_ok
    fb = frame_bounds(quadform_continuous(spec, g))
    return ConditionReport(
        factorization_ok=fac_ok,
        C_bound=fac.C_bound,
        carleson=carl,
        separation=sep,
        cluster=cluster,
        structural_verdict=structural,
        numerical_lower=fb.lower,
        numerical_upper=fb.upper,
        numerical_frame=fb.resolved,
        agreement=structural == fb.resolved,
        config=cfg.to_dict(),
        notes=notes,
    )
