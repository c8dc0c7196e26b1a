from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynsamp.errors import DomainViolation, PoleAtMinusOne
from dynsamp.hardy import (
    DISC,
    HALFPLANE,
    gram,
    halfplane_kernel_via_disc,
    kernel_disc,
    kernel_halfplane,
    kernel_transfer_coeff,
    mobius_h,
    normalized_gram,
    pseudo_hyperbolic,
    pseudo_hyperbolic_matrix,
)

from conftest import disc_points, halfplane_points


@pytest.mark.parametrize("z, expected", [(0, 1), (1, 0), (1j, -1j)])
def test_mobius_values(z, expected):
    assert mobius_h(z) == pytest.approx(expected, abs=1e-15)


def test_mobius_pole():
    with pytest.raises(PoleAtMinusOne):
        mobius_h(-1)
    with pytest.raises(PoleAtMinusOne):
        mobius_h(np.array([0.5, -1.0]))


@given(disc_points)
def test_mobius_involution_disc(z):
    back = mobius_h(mobius_h(z))
    assert abs(back - z) <= 1e-14 * max(1.0, abs(z)) + 1e-15


@given(halfplane_points)
def test_mobius_involution_halfplane(s):
    back = mobius_h(mobius_h(s))
    # relative error 1e-14, widened by the round trip's own conditioning:
    # h(s) ~ 1 for tiny s and h(s) ~ -1 for huge s
    cond = (1 + abs(1 - s) / abs(s)) * (1 + abs(1 + s) / 2)
    assert abs(back - s) <= 1e-14 * abs(s) * cond


@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
def test_mobius_exchanges_domains(z):
    if abs(1 + z) < 1e-6 or abs(abs(z) - 1) < 1e-9:
        return
    assert (mobius_h(z).real > 0) == (abs(z) < 1)


def test_mobius_keeps_extended_precision():
    out = mobius_h(np.array([0.5], dtype=np.clongdouble))
    assert out.dtype == np.clongdouble


@pytest.mark.parametrize(
    "s, z, expected",
    [(0, 0.5, 1), (0.5, 0.5, 4 / 3), (0.9, 0.9, 1 / (1 - 0.81))],
)
def test_kernel_disc(s, z, expected):
    assert kernel_disc(s, z) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize(
    "s, z, expected",
    [
        (1, 1, 1 / (4 * math.pi)),
        (1, 3, 1 / (8 * math.pi)),
        (1 + 1j, 2 - 1j, 1 / (2 * math.pi * (3 - 2j))),
    ],
)
def test_kernel_halfplane(s, z, expected):
    assert kernel_halfplane(s, z) == pytest.approx(expected, rel=1e-15)


def test_transfer_coeff():
    assert kernel_transfer_coeff(1) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-15)
    assert kernel_transfer_coeff(1 + 0j).imag == 0
    assert kernel_transfer_coeff(1 + 0.5j) == pytest.approx(1 / (math.sqrt(math.pi) * (2 - 0.5j)), rel=1e-15)


@given(disc_points)
def test_disc_norm_formula(s):
    assert kernel_disc(s, s) == pytest.approx(1 / (1 - abs(s) ** 2), rel=1e-12)


@given(halfplane_points)
def test_halfplane_norm_formula(s):
    assert kernel_halfplane(s, s) == pytest.approx(1 / (4 * math.pi * s.real), rel=1e-14)


@settings(max_examples=200)
@given(halfplane_points, halfplane_points)
def test_kernel_transfer_identity(s, z):
    # unitary transport to the disc reproduces the half-plane kernel
    direct = kernel_halfplane(s, z)
    via = halfplane_kernel_via_disc(s, z)
    assert abs(via - direct) <= 1e-12 * abs(direct) * (1 + abs(s)) * (1 + abs(z))


@pytest.mark.parametrize("z, w, expected", [(0.3 + 0.2j, 0.3 + 0.2j, 0), (0, 0.5, 0.5), (0.5, -0.5, 0.8)])
def test_pseudo_hyperbolic(z, w, expected):
    assert pseudo_hyperbolic(z, w) == pytest.approx(expected, abs=1e-15)


@given(st.lists(disc_points, min_size=1, max_size=6))
def test_pseudo_hyperbolic_range(points):
    d = pseudo_hyperbolic_matrix(points)
    assert np.all(d >= 0) and np.all(d < 1)
    assert np.allclose(d, d.T)


def test_gram_examples():
    assert gram([0], DISC).entries.tolist() == [[1]]
    assert gram([1], HALFPLANE).entries[0, 0] == pytest.approx(1 / (4 * math.pi), rel=1e-15)
    G = gram([0.5, -0.5], DISC).entries
    np.testing.assert_allclose(G, [[4 / 3, 4 / 5], [4 / 5, 4 / 3]], rtol=1e-15)


def test_gram_domain_errors():
    with pytest.raises(DomainViolation):
        gram([0.5, 1.0], DISC)
    with pytest.raises(DomainViolation):
        gram([1.0, -0.1], HALFPLANE)
    with pytest.raises(DomainViolation):
        gram([], DISC)
    with pytest.raises(DomainViolation):
        gram([np.nan], DISC)
    with pytest.raises(ValueError):
        gram([0.1], "sphere")


@given(st.lists(disc_points, min_size=1, max_size=12))
def test_gram_disc_is_psd(points):
    K = gram(points, DISC)
    assert K.is_hermitian()
    assert np.all(np.real(np.diag(K.entries)) > 0)
    ev = np.linalg.eigvalsh(K.entries)
    assert ev[0] >= -1e-12 * np.abs(K.entries).max() * K.size


@given(st.lists(halfplane_points, min_size=1, max_size=12))
def test_gram_halfplane_is_psd(points):
    K = gram(points, HALFPLANE)
    assert K.is_hermitian()
    ev = np.linalg.eigvalsh(K.entries)
    assert ev[0] >= -1e-12 * np.abs(K.entries).max() * K.size


def test_normalized_gram_unit_diagonal():
    G = normalized_gram([1, 2 + 1j, 0.1], HALFPLANE)
    np.testing.assert_allclose(np.diag(G), 1, rtol=1e-15)


def test_mobius_involution_moderate_points(rng):
    r = rng.uniform(0.5, 2.0, 2000)
    th = rng.uniform(-np.pi / 2 + 0.1, np.pi / 2 - 0.1, 2000)
    s = r * np.exp(1j * th)
    back = mobius_h(mobius_h(s))
    assert np.max(np.abs(back - s) / np.abs(s)) <= 1e-14
