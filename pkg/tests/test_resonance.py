"""Resonance families and amplitude-to-barrier ratio maps."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scarkit.errors import DomainError
from scarkit.resonance import (amplitude_ratio, is_resonant, resonant_family,
                               scan_ratio_grid)

branches = st.one_of(
    st.tuples(st.integers(0, 6), st.integers(0, 6), st.just("+")),
    st.tuples(st.integers(0, 5), st.integers(1, 7), st.just("-")).filter(
        lambda t: t[1] > t[0]),
)


def test_family_ratio_examples():
    assert resonant_family(0, 0, "+").U_over_g == Fraction(2)
    assert resonant_family(0, 0, "+").g_over_omega == 1
    assert resonant_family(0, 1, "-").U_over_g == Fraction(2, 3)
    assert resonant_family(0, 1, "-").g_over_omega == 3
    for k in range(4):
        fam = resonant_family(k, k + 1, "-")
        assert fam.U_over_g == Fraction(2, 2 * k + 3)


def test_minus_branch_constraint():
    with pytest.raises(DomainError):
        resonant_family(1, 1, "-")
    with pytest.raises(DomainError):
        resonant_family(3, 2, "-")


@given(branches)
@settings(max_examples=100, deadline=None)
def test_family_consistency_relations(knb):
    # |1 - U/g| (2 k2 + 1) = 2 k1 + 1 and (1 + U/g)(2 k2 + 1) = 2 k3 + 1
    k1, k2, branch = knb
    fam = resonant_family(k1, k2, branch)
    q = 2 * k2 + 1
    assert abs(1 - fam.U_over_g) * q == 2 * k1 + 1
    assert (1 + fam.U_over_g) * q == 2 * fam.k3 + 1
    assert fam.g_over_omega == q


@given(branches, st.floats(1.0, 200.0))
@settings(max_examples=60, deadline=None)
def test_family_barriers_all_resonant(knb, g):
    k1, k2, branch = knb
    fam = resonant_family(k1, k2, branch)
    omega = g / fam.g_over_omega
    for barrier in fam.barriers(g):
        assert is_resonant(barrier, omega)


def test_is_resonant_odd_multiples_only():
    assert is_resonant(0.0, 20.0)
    assert is_resonant(20.0, 20.0)
    assert is_resonant(60.0, 20.0)
    assert not is_resonant(40.0, 20.0)
    assert not is_resonant(30.0, 20.0)
    assert not is_resonant(20.0 * (1 + 1e-6), 20.0)
    assert is_resonant(20.0 * (1 + 1e-12), 20.0)


def test_ratio_divergence_on_tilt_ridge():
    from scarkit.hamiltonian import ModelParams
    # g = omega with U/g = 2: the family point, so all three barriers
    # (20, 20, 60) are odd multiples and every ratio diverges
    r = amplitude_ratio(ModelParams(g=20.0, U=40.0, u=0.5, omega=20.0))
    assert all(r.divergent)
    # push U off the family ratio: only the bare-tilt process stays on ridge
    r = amplitude_ratio(ModelParams(g=20.0, U=47.0, u=0.5, omega=20.0))
    assert r.divergent[1]
    assert not r.divergent[0] and not r.divergent[2]


def test_ratio_small_off_all_ridges():
    from scarkit.hamiltonian import ModelParams
    r = amplitude_ratio(ModelParams(g=7.0, U=40.0, u=0.5, omega=20.0))
    assert not any(r.divergent)
    assert all(v < 0.2 for v in r.ratios)


def test_ratio_infinite_at_zero_barrier():
    from scarkit.hamiltonian import ModelParams
    r = amplitude_ratio(ModelParams(g=30.0, U=30.0, u=0.5, omega=20.0))
    assert r.divergent[0]
    assert math.isinf(r.ratios[0])


def test_even_multiple_is_flagged_but_vanishing():
    # at an even multiple the folded barrier hits zero while the averaged
    # amplitude vanishes too: the flag fires, but the reported (unfolded)
    # ratio goes to zero rather than diverging
    from scarkit.hamiltonian import ModelParams
    r = amplitude_ratio(ModelParams(g=40.0, U=80.0, u=0.5, omega=20.0))
    assert r.divergent[1]
    assert r.ratios[1] < 1e-12


def test_scan_grid_shape_and_order():
    U = np.array([10.0, 30.0])
    g = np.array([5.0, 15.0, 25.0])
    table = scan_ratio_grid(U, g, omega=20.0, u=0.5)
    assert table.shape == (6, 8)
    # g varies fastest, U slowest
    assert np.array_equal(table[:, 0], [10, 10, 10, 30, 30, 30])
    assert np.array_equal(table[:, 1], [5, 15, 25, 5, 15, 25])


def test_single_point_grid_reduces_to_amplitude_ratio():
    from scarkit.hamiltonian import ModelParams
    table = scan_ratio_grid(np.array([33.0]), np.array([11.0]),
                            omega=20.0, u=0.5)
    r = amplitude_ratio(ModelParams(g=11.0, U=33.0, u=0.5, omega=20.0))
    assert table[0, 2:5] == pytest.approx(r.ratios)
    assert tuple(bool(v) for v in table[0, 5:8]) == r.divergent


def test_scan_is_deterministic():
    U = np.linspace(1, 80, 13)
    g = np.linspace(1, 80, 17)
    t1 = scan_ratio_grid(U, g, omega=20.0, u=0.5)
    t2 = scan_ratio_grid(U, g, omega=20.0, u=0.5)
    assert np.array_equal(t1, t2)
