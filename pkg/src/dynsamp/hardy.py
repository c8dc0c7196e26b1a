"""Reproducing kernels of H^2(D) and H^2(C_+), the Cayley map and disc geometry.

Points are plain Python/NumPy complex numbers. Extended precision
(``np.clongdouble``) inputs are preserved so that callers can keep disc
points near the unit circle accurate; everything else is promoted to
``complex128``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation, PoleAtMinusOne

DISC = "disc"
HALFPLANE = "halfplane"

_SQRT_PI = np.sqrt(np.pi)


def _as_complex(z) -> np.ndarray:
    arr = np.asarray(z)
    if arr.dtype == np.clongdouble or arr.dtype == np.longdouble:
        return arr.astype(np.clongdouble)
    return arr.astype(np.complex128)


def _unwrap(arr: np.ndarray, like):
    if np.ndim(like) == 0:
        return arr[()] if arr.dtype == np.clongdouble else complex(arr)
    return arr


def _check_finite(arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise DomainViolation("points must be finite (no NaN/Inf components)")


def as_disc_points(points) -> np.ndarray:
    """Validate a collection of points of the open unit disc (strict, zero tolerance)."""
    arr = np.atleast_1d(_as_complex(points))
    _check_finite(arr)
    bad = np.flatnonzero(np.abs(arr) >= 1)
    if bad.size:
        raise DomainViolation(f"points {bad.tolist()} are not inside the open unit disc")
    return arr


def as_halfplane_points(points) -> np.ndarray:
    """Validate a collection of points of the open right half-plane."""
    arr = np.atleast_1d(_as_complex(points))
    _check_finite(arr)
    bad = np.flatnonzero(arr.real <= 0)
    if bad.size:
        raise DomainViolation(f"points {bad.tolist()} have Re <= 0")
    return arr


def mobius_h(z):
    """The self-inverse Cayley map ``(1 - z) / (1 + z)`` exchanging D and C_+."""
    arr = _as_complex(z)
    _check_finite(arr)
    if np.any(arr == -1):
        raise PoleAtMinusOne("mobius_h is undefined at z = -1")
    return _unwrap((1 - arr) / (1 + arr), z)


def kernel_disc(s, z):
    """Szego kernel ``k_s(z) = 1 / (1 - z conj(s))`` of H^2(D)."""
    s = _as_complex(s)
    z = _as_complex(z)
    # 1 - z conj(s) cancels near the circle; form it in extended precision
    denom = 1 - z.astype(np.clongdouble) * np.conj(s.astype(np.clongdouble))
    out = 1 / denom.astype(np.result_type(s, z))
    return _unwrap(out, out)


def kernel_halfplane(s, z):
    """Reproducing kernel ``k_s(z) = 1 / (2 pi (z + conj(s)))`` of H^2(C_+)."""
    s = _as_complex(s)
    z = _as_complex(z)
    out = 1 / (2 * np.pi * (z + np.conj(s)))
    return _unwrap(out, out)


def kernel_transfer_coeff(s):
    """Scalar ``kappa(s)`` with ``V^{-1} k_s^{C_+} = kappa(s) k_{h(s)}^D``.

    ``V f(s) = f(h(s)) / (sqrt(pi) (1 + s))`` is the isometry H^2(D) -> H^2(C_+).
    """
    s = _as_complex(s)
    out = 1 / (_SQRT_PI * (1 + np.conj(s)))
    return _unwrap(out, out)


def halfplane_kernel_via_disc(s, z):
    """Evaluate the half-plane kernel by transporting both kernels to the disc.

    Since V is unitary, ``<k_s, k_z>_{C_+} = kappa(s) conj(kappa(z)) k^D_{h(s)}(h(z))``.
    Independent of :func:`kernel_halfplane`; used as a consistency oracle.
    """
    return kernel_transfer_coeff(s) * np.conj(kernel_transfer_coeff(z)) * kernel_disc(
        mobius_h(s), mobius_h(z)
    )


def pseudo_hyperbolic(z, w):
    """Pseudo-hyperbolic distance ``|z - w| / |1 - conj(z) w|`` in D."""
    z = _as_complex(z)
    w = _as_complex(w)
    out = np.abs(z - w) / np.abs(1 - np.conj(z) * w)
    return float(out) if out.ndim == 0 else out


def pseudo_hyperbolic_matrix(points) -> np.ndarray:
    """All pairwise pseudo-hyperbolic distances; repeated points give exact zeros."""
    p = as_disc_points(points)
    d = np.abs(p[:, None] - p[None, :]) / np.abs(1 - np.conj(p)[:, None] * p[None, :])
    return d.astype(np.float64)


@dataclass(frozen=True)
class KernelGram:
    """``entries[j, k] = <k_{p_k}, k_{p_j}>``; Hermitian positive semidefinite."""

    entries: np.ndarray
    space: str

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def is_hermitian(self, rtol: float = 1e-13) -> bool:
        scale = max(np.abs(self.entries).max(), 1.0)
        return bool(np.abs(self.entries - self.entries.conj().T).max() <= rtol * scale)


def gram(points, space: str = DISC) -> KernelGram:
    """Dense kernel Gram matrix of a point list in D (``space="disc"``) or C_+."""
    if space not in (DISC, HALFPLANE):
        raise ValueError(f"unknown space {space!r}; expected 'disc' or 'halfplane'")
    if np.size(points) == 0:
        raise DomainViolation("gram needs at least one point")
    if space == DISC:
        p = as_disc_points(points)
        entries = 1 / (1 - p[:, None] * np.conj(p)[None, :])
    else:
        p = as_halfplane_points(points)
        entries = 1 / (2 * np.pi * (p[:, None] + np.conj(p)[None, :]))
    return KernelGram(entries=entries.astype(np.complex128), space=space)


def normalized_gram(points, space: str = DISC) -> np.ndarray:
    """Gram matrix of the normalized kernels ``k_p / ||k_p||``."""
    g = gram(points, space).entries
    d = np.sqrt(np.real(np.diag(g)))
    return g / np.outer(d, d)
