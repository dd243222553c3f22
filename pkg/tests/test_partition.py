"""Dyadic partition of unity: exact telescoping, bounded overlap, companion
coverage, and the derivative scaling law at several smoothness orders."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maglab.partition import (
    PartitionError,
    build_partition,
    smoothstep,
    smoothstep_coeffs,
    verify_partition,
)


def test_smoothstep_coeffs_order_four():
    c = smoothstep_coeffs(4)
    expected = np.zeros(10)
    expected[5:] = [126.0, -420.0, 540.0, -315.0, 70.0]
    np.testing.assert_allclose(c, expected, atol=1e-9)


def test_smoothstep_endpoints_and_monotonicity():
    for order in (1, 2, 4, 6):
        c = smoothstep_coeffs(order)
        t = np.linspace(-0.2, 1.2, 400)
        v = smoothstep(t, c)
        assert v[0] == 0.0 and abs(v[-1] - 1.0) < 1e-12
        assert np.all(np.diff(v) >= -1e-15)


def test_smoothstep_order_validation():
    with pytest.raises(PartitionError):
        smoothstep_coeffs(0)


def test_sum_to_one_and_overlap():
    rng = np.random.default_rng(0)
    p = build_partition(1e-3, 1.0)
    r = np.concatenate([rng.uniform(0, 2.5, 20000),
                        rng.uniform(0, 0.02, 20000),
                        [0.0, 1e-3, 2e-3, 1.0, 2.0]])
    assert np.max(np.abs(p.sum_at_radius(r) - 1)) <= 1e-12
    assert int(p.overlap_count(r).max()) <= 4


def test_companions_cover_their_cutoffs():
    # psi_nu must be identically 1 wherever chi_nu is nonzero
    p = build_partition(0.01, 1.0)
    r = np.linspace(0, 2.5, 300001)
    for nu in range(p.N + 1):
        x = np.stack([r, np.zeros_like(r)], axis=-1)
        chi = p.chi_at(nu, x)
        psi = p.psi_at(nu, x)
        on = np.abs(chi) > 1e-15
        assert np.all(np.abs(psi[on] - 1.0) <= 1e-12), "level %d" % nu


def test_level_count_formula():
    assert build_partition(1e-4, 1.0).N == 14
    # delta = Lambda^(-1/2 + eta) with Lambda = 1e4, eta = 0.1 gives 10^-1.6
    assert build_partition(10 ** -1.6, 1.0).N == int(np.ceil(1.6 / np.log10(2)))
    assert build_partition(10 ** -1.6, 1.0).N == 6


def test_small_ratio_rejected():
    with pytest.raises(PartitionError):
        build_partition(0.2, 1.0)          # R <= 8 delta


@settings(max_examples=15, deadline=None)
@given(delta=st.floats(1e-4, 1e-2), ratio=st.floats(10.0, 500.0))
def test_sum_to_one_property(delta, ratio):
    p = build_partition(delta, ratio * delta)
    rng = np.random.default_rng(7)
    r = np.concatenate([rng.uniform(0, 2 * ratio * delta, 2000),
                        rng.uniform(0, 3 * delta, 2000)])
    assert np.max(np.abs(p.sum_at_radius(r) - 1)) <= 1e-12
    assert int(p.overlap_count(r).max()) <= 4


@pytest.mark.parametrize("order", [1, 2, 3])
def test_derivative_scaling_exponent(order):
    p = build_partition(0.01, 1.0)
    rep = verify_partition(p, order)
    assert abs(rep.exponent + order) <= 0.1
