"""Diagonalization routes, folding, kernel extraction, level statistics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scarkit.errors import CapabilityError, DomainError
from scarkit.fock_basis import SectorBasis
from scarkit.hamiltonian import build_effective_general, build_effective_resonant
from scarkit.resonance import resonant_family
from scarkit.spectral import (diagonalize, fold_quasienergy, gap_ratio_stats,
                              mirror_asymmetry, zero_modes)

FAMILY = resonant_family(0, 0, "+")
PARAMS = FAMILY.params(g=50.0, u=0.5)


def resonant_spectrum(L):
    basis = SectorBasis(L, L // 2)
    return diagonalize(build_effective_resonant(basis, PARAMS, 0, 0, "+"))


def test_fold_half_open_interval():
    assert fold_quasienergy(0.0, 2.0) == 0.0
    assert fold_quasienergy(1.0, 2.0) == -1.0   # upper edge wraps to the lower
    assert fold_quasienergy(-1.0, 2.0) == -1.0
    assert fold_quasienergy(3.0, 2.0) == -1.0
    assert fold_quasienergy(0.9, 2.0) == pytest.approx(0.9)
    assert fold_quasienergy(2.0, 2.0) == 0.0


@given(st.floats(-1e4, 1e4), st.floats(0.1, 100.0))
@settings(max_examples=200, deadline=None)
def test_fold_is_idempotent_and_periodic(e, omega):
    f = fold_quasienergy(e, omega)
    assert -omega / 2 <= f < omega / 2
    assert fold_quasienergy(f, omega) == pytest.approx(f, abs=1e-12)
    assert fold_quasienergy(e + 3 * omega, omega) == pytest.approx(f, abs=1e-9)


@pytest.mark.parametrize("L", [4, 6, 8])
def test_chiral_route_matches_dense_eigh(L):
    spec = resonant_spectrum(L)
    basis = SectorBasis(L, L // 2)
    A = build_effective_resonant(basis, PARAMS, 0, 0, "+").toarray()
    vals = np.linalg.eigvalsh(A)
    assert np.allclose(np.sort(spec.quasienergies), np.sort(vals), atol=1e-12)


@pytest.mark.parametrize("L", [4, 6, 8])
def test_eigenpairs_reconstruct(L):
    spec = resonant_spectrum(L)
    basis = SectorBasis(L, L // 2)
    A = build_effective_resonant(basis, PARAMS, 0, 0, "+").toarray()
    V = spec.vectors.dense()
    resid = A @ V - V * spec.quasienergies[None, :]
    assert np.max(np.abs(resid)) < 1e-12
    # orthonormality
    gram = V.conj().T @ V
    assert np.max(np.abs(gram - np.eye(spec.size))) < 1e-12


def test_vector_views_agree():
    spec = resonant_spectrum(6)
    V = spec.vectors.dense()
    assert np.allclose(spec.vectors.column(3), V[:, 3], atol=0)
    assert np.allclose(spec.vectors.row(5), V[5, :], atol=0)
    assert np.allclose(spec.vectors.columns([1, 4, 7]), V[:, [1, 4, 7]], atol=0)


def test_propagate_matches_direct_exponential():
    spec = resonant_spectrum(6)
    basis = SectorBasis(6, 3)
    A = build_effective_resonant(basis, PARAMS, 0, 0, "+").toarray()
    rng = np.random.default_rng(3)
    psi0 = rng.normal(size=spec.size) + 1j * rng.normal(size=spec.size)
    psi0 /= np.linalg.norm(psi0)
    T = PARAMS.T
    ks = np.array([0, 1, 7, 40])
    out = spec.propagate(psi0, ks, T)
    vals, V = np.linalg.eigh(A)
    for i, k in enumerate(ks):
        direct = (V * np.exp(-1j * vals * k * T)) @ (V.conj().T @ psi0)
        assert np.max(np.abs(out[:, i] - direct)) < 1e-11


def test_propagation_is_unitary_and_periodic_at_zero():
    spec = resonant_spectrum(8)
    psi0 = np.zeros(spec.size, dtype=np.complex128)
    psi0[0] = 1.0
    out = spec.propagate(psi0, [0, 13, 200], PARAMS.T)
    norms = np.linalg.norm(out, axis=0)
    assert np.allclose(norms, 1.0, atol=1e-10)
    assert np.allclose(out[:, 0], psi0, atol=1e-12)


@pytest.mark.parametrize("L,count", [(4, 2), (6, 0), (8, 6), (10, 0), (12, 20)])
def test_zero_mode_counts(L, count):
    spec = resonant_spectrum(L)
    assert len(spec.zero_indices) == count
    assert len(zero_modes(spec)) == count


@pytest.mark.parametrize("L", [4, 6, 8])
def test_mirror_symmetry_at_resonance(L):
    assert mirror_asymmetry(resonant_spectrum(L)) < 1e-10


@pytest.mark.parametrize("L", [4, 8, 12])
def test_kernel_confined_to_larger_parity_sector(L):
    spec = resonant_spectrum(L)
    basis = SectorBasis(L, L // 2)
    split = basis.chiral_split()
    K = spec.kernel_matrix()
    smaller = basis.parities == (1 if split.n_plus < split.n_minus else -1)
    assert np.max(np.abs(K[smaller, :])) < 1e-9
    # and the kernel has full column rank within the larger sector
    s = np.linalg.svd(K[~smaller, :], compute_uv=False)
    assert s[-1] > 1e-9


def test_kernel_vectors_annihilated():
    spec = resonant_spectrum(8)
    basis = SectorBasis(8, 4)
    A = build_effective_resonant(basis, PARAMS, 0, 0, "+").toarray()
    K = spec.kernel_matrix()
    assert np.max(np.abs(A @ K)) < 1e-12


def test_weight_rows_sum_to_one():
    spec = resonant_spectrum(8)
    for n in (0, 17, 42):
        w = spec.weight_row(n)
        assert w.sum() == pytest.approx(1.0, abs=1e-10)
        assert (w >= 0).all()


def test_sector_weights_partition():
    spec = resonant_spectrum(8)
    basis = SectorBasis(8, 4)
    plus = spec.vectors.sector_weight(basis.parities == 1)
    minus = spec.vectors.sector_weight(basis.parities == -1)
    assert np.allclose(plus + minus, 1.0, atol=1e-10)
    # nonzero modes split their weight equally between the parity sectors
    nz = np.setdiff1d(np.arange(spec.size), spec.zero_indices)
    assert np.allclose(plus[nz], 0.5, atol=1e-9)


def test_phase_convention_largest_component_positive():
    spec = resonant_spectrum(6)
    V = spec.vectors.dense()
    for a in range(spec.size):
        lead = V[np.argmax(np.abs(V[:, a])), a]
        assert abs(lead.imag) < 1e-12 and lead.real > 0


def test_general_route_produces_dense_vectors():
    basis = SectorBasis(6, 3)
    p = resonant_family(0, 0, "+").params(g=50.0, u=0.5)
    spec = diagonalize(build_effective_general(basis, p))
    assert spec.kind == "effective_general"
    A = build_effective_general(basis, p).toarray()
    V = spec.vectors.dense()
    resid = A @ V - V * spec.quasienergies[None, :]
    assert np.max(np.abs(resid)) < 1e-11


def test_capability_refusal_above_threshold():
    basis = SectorBasis(6, 3)
    ham = build_effective_resonant(basis, PARAMS, 0, 0, "+")
    with pytest.raises(CapabilityError):
        diagonalize(ham, dense_threshold=10)


def test_gap_ratio_statistics_manual_oracle():
    spec = resonant_spectrum(8)
    pos = np.sort(spec.quasienergies[spec.quasienergies > 1e-12])
    gaps = np.diff(pos)
    keep = gaps > 1e-12
    g = gaps[keep]
    r = np.minimum(g[1:], g[:-1]) / np.maximum(g[1:], g[:-1])
    stats = gap_ratio_stats(spec)
    assert stats.mean_r == pytest.approx(float(r.mean()), abs=1e-12)
    assert stats.n_ratios == len(r)
