"""Stroboscopic dynamics of the driven chain and its effective descriptions.

Two evolution routes: eigenbasis rotation of an effective Hamiltonian's
spectrum, and the exact piecewise-constant drive applied as a pair of
half-period propagators per cycle.  The drive is square, so the full route
has no time-step error; a cycle is one matrix application.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks
from scipy.special import xlogy

from .errors import CapabilityError, DomainError
from .fock_basis import FockState, SectorBasis
from .graph import Tower, spta_matrix, tower_states
from .hamiltonian import (ModelParams, build_effective_resonant,
                          build_half_period)
from .observables import SCHMIDT_FLOOR, StateVector, schmidt_spectrum
from .spectral import Spectrum

FULL_DENSE_MAX = 4096       # dense half-period propagators up to this dimension
DEFAULT_CYCLES = 4096
CLUSTER_WIDTH = 1e-9
UNITARITY_TOL = 1e-8
STATE_BLOCK_BYTES = 2_000_000_000


@dataclass
class TimeSeries:
    """One observable sampled at whole driving cycles k = 0, 1, 2, ..."""

    label: str
    values: np.ndarray
    params: ModelParams | None = None
    initial: str = ""
    sd: np.ndarray | None = None

    @property
    def cycles(self) -> np.ndarray:
        return np.arange(len(self.values))


def _cycle_array(cycles) -> np.ndarray:
    if np.isscalar(cycles):
        if cycles < 0:
            raise DomainError(f"cycle count must be >= 0, got {cycles}")
        return np.arange(int(cycles) + 1)
    ks = np.asarray(cycles, dtype=np.int64)
    if len(ks) == 0 or np.any(np.diff(ks) <= 0) or ks[0] < 0:
        raise DomainError("cycle list must be non-empty, ascending, non-negative")
    return ks


def _as_vector(basis: SectorBasis, initial) -> tuple[np.ndarray, int | None]:
    """Amplitude vector plus the basis index when the input is one Fock state."""
    if isinstance(initial, StateVector):
        if initial.basis.size != basis.size:
            raise DomainError("initial state lives on a different sector")
        amps = initial.amplitudes
    elif isinstance(initial, (FockState, str)):
        idx = basis.index_of(initial)
        amps = np.zeros(basis.size, dtype=np.complex128)
        amps[idx] = 1.0
        return amps, idx
    else:
        amps = np.asarray(initial, dtype=np.complex128)
        if amps.shape != (basis.size,):
            raise DomainError(f"initial vector shape {amps.shape} does not "
                              f"match sector dimension {basis.size}")
    if abs(np.linalg.norm(amps) - 1.0) > 1e-10:
        raise DomainError("initial state is not normalized")
    return amps, None


def _describe(initial) -> str:
    if isinstance(initial, FockState):
        return initial.to_string()
    if isinstance(initial, str):
        return initial
    return "vector"


def _guard_block(dim: int, n_states: int) -> None:
    if dim * n_states * 16 > STATE_BLOCK_BYTES:
        raise CapabilityError(
            f"materializing {n_states} states of dimension {dim} exceeds the "
            "state-block budget; use the chunked series functions")


def evolve_effective(spec: Spectrum, initial, cycles) -> np.ndarray:
    """State columns after whole cycles under the diagonalized effective model."""
    psi0, _ = _as_vector(spec.basis, initial)
    ks = _cycle_array(cycles)
    _guard_block(spec.size, len(ks))
    period = 2.0 * np.pi / spec.omega
    return spec.propagate(psi0, ks, period)


def fidelity_series(spec: Spectrum, initial, cycles=DEFAULT_CYCLES,
                    chunk: int = 512) -> TimeSeries:
    """|<psi(0)|psi(k)>|^2 from explicitly evolved states, chunked over k."""
    psi0, _ = _as_vector(spec.basis, initial)
    ks = _cycle_array(cycles)
    period = 2.0 * np.pi / spec.omega
    out = np.empty(len(ks))
    for lo in range(0, len(ks), chunk):
        states = spec.propagate(psi0, ks[lo:lo + chunk], period)
        out[lo:lo + chunk] = np.abs(psi0.conj() @ states) ** 2
    return TimeSeries("F", out, initial=_describe(initial))


def ee_series(spec: Spectrum, initial, cycles=DEFAULT_CYCLES,
              cut: int | None = None, chunk: int = 128) -> TimeSeries:
    """Half-chain entanglement entropy along the evolution."""
    psi0, _ = _as_vector(spec.basis, initial)
    ks = _cycle_array(cycles)
    if cut is None:
        cut = spec.basis.L // 2
    period = 2.0 * np.pi / spec.omega
    out = np.empty(len(ks))
    for lo in range(0, len(ks), chunk):
        states = spec.propagate(psi0, ks[lo:lo + chunk], period)
        for i in range(states.shape[1]):
            lam = schmidt_spectrum(states[:, i], spec.basis, cut)
            lam = lam[lam >= SCHMIDT_FLOOR]
            out[lo + i] = -xlogy(lam, lam).sum()
    return TimeSeries("S_EE", out, initial=_describe(initial))


def tower_probability_series(spec: Spectrum, initial, tower: Tower | None = None,
                             cycles=DEFAULT_CYCLES,
                             chunk: int = 512) -> TimeSeries:
    """Total weight on the tower states along the evolution.

    For a Fock start the tower amplitudes collapse to a row-product form,
    avoiding full state materialization.
    """
    psi0, idx = _as_vector(spec.basis, initial)
    if tower is None:
        tower = tower_states(spec.basis.L)
    t_idx = tower.indices(spec.basis)
    ks = _cycle_array(cycles)
    period = 2.0 * np.pi / spec.omega
    if idx is not None:
        rows = spec.vectors.rows(t_idx)
        weights = rows * np.conj(spec.vectors.row(idx))[None, :]
        phases = np.exp(-1j * np.outer(spec.quasienergies, ks * period))
        out = (np.abs(weights @ phases) ** 2).sum(axis=0)
    else:
        out = np.empty(len(ks))
        for lo in range(0, len(ks), chunk):
            states = spec.propagate(psi0, ks[lo:lo + chunk], period)
            out[lo:lo + chunk] = (np.abs(states[t_idx, :]) ** 2).sum(axis=0)
    return TimeSeries("P_t", out, initial=_describe(initial))


def _cluster(eps: np.ndarray, w: np.ndarray,
             width: float) -> tuple[np.ndarray, np.ndarray]:
    """Merge ascending quasienergies closer than `width`, summing weights."""
    means, sums = [], []
    start = 0
    for i in range(1, len(eps) + 1):
        if i == len(eps) or eps[i] - eps[i - 1] > width:
            means.append(eps[start:i].mean())
            sums.append(w[start:i].sum())
            start = i
    return np.asarray(means), np.asarray(sums)


def analytic_fidelity(spec: Spectrum, f: FockState | str,
                      cycles=DEFAULT_CYCLES) -> TimeSeries:
    """Closed-form fidelity of a Fock start under a mirror-symmetric spectrum.

    The return amplitude is real: kernel weight plus paired cosine terms,
    F(k) = (P0 + 2 sum_c W_c cos(e_c k T))^2 over positive quasienergy
    clusters.  Degenerate levels are merged before forming the cosines.
    """
    idx = spec.basis.index_of(f)
    w = spec.weight_row(idx)
    eps = spec.quasienergies
    p0 = float(w[spec.zero_indices].sum())
    mask = np.ones(len(eps), dtype=bool)
    mask[spec.zero_indices] = False
    pos = mask & (eps > 0)
    neg = mask & (eps < 0)
    pe, pw = _cluster(eps[pos], w[pos], CLUSTER_WIDTH)
    ne, nw = _cluster(-eps[neg][::-1], w[neg][::-1], CLUSTER_WIDTH)
    if len(pe) != len(ne) or np.max(np.abs(pe - ne), initial=0.0) > 1e-8:
        raise DomainError("spectrum is not mirror symmetric; the paired "
                          "cosine form does not apply")
    wbar = 0.5 * (pw + nw)
    ks = _cycle_array(cycles)
    period = 2.0 * np.pi / spec.omega
    amplitude = p0 + 2.0 * (wbar @ np.cos(np.outer(pe, ks * period)))
    return TimeSeries("F", amplitude ** 2, initial=_describe(f))


def _expi_real_symmetric(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t h) for real symmetric h via its eigendecomposition."""
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * t * vals)) @ vecs.T


class FullPropagator:
    """One-cycle map of the square-wave drive: two half-period exponentials.

    Below `dense_max` both halves are composed into a single dense cycle
    matrix; above it each application falls back to sparse Krylov
    exponentials, trading speed for memory.
    """

    def __init__(self, basis: SectorBasis, params: ModelParams,
                 dense_max: int = FULL_DENSE_MAX):
        self.basis = basis
        self.params = params
        h1 = build_half_period(basis, params, 1).matrix
        h2 = build_half_period(basis, params, 2).matrix
        half = params.T / 2.0
        if basis.size <= dense_max:
            u1 = _expi_real_symmetric(h1.toarray().real, half)
            u2 = _expi_real_symmetric(h2.toarray().real, half)
            self._cycle = u2 @ u1
            self._halves = None
        else:
            self._cycle = None
            self._halves = (h1.tocsc() * (-1j * half), h2.tocsc() * (-1j * half))

    def step(self, psi: np.ndarray) -> np.ndarray:
        if self._cycle is not None:
            return self._cycle @ psi
        from scipy.sparse.linalg import expm_multiply
        return expm_multiply(self._halves[1], expm_multiply(self._halves[0], psi))


def evolve_full(basis: SectorBasis, params: ModelParams, initial, cycles,
                dense_max: int = FULL_DENSE_MAX) -> np.ndarray:
    """State columns at the requested cycles under the exact driven model."""
    psi0, _ = _as_vector(basis, initial)
    ks = _cycle_array(cycles)
    _guard_block(basis.size, len(ks))
    prop = FullPropagator(basis, params, dense_max)
    out = np.empty((basis.size, len(ks)), dtype=np.complex128)
    psi = psi0.astype(np.complex128)
    ptr = 0
    for k in range(int(ks[-1]) + 1):
        if ptr < len(ks) and ks[ptr] == k:
            out[:, ptr] = psi
            ptr += 1
        if k < ks[-1]:
            psi = prop.step(psi)
    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > UNITARITY_TOL * max(int(ks[-1]), 1):
        raise AssertionError(f"unitarity drift {drift:.2e} over {ks[-1]} cycles")
    return out


def full_fidelity_series(basis: SectorBasis, params: ModelParams, initial,
                         cycles=DEFAULT_CYCLES,
                         dense_max: int = FULL_DENSE_MAX) -> TimeSeries:
    """Streaming |<psi(0)|psi(k)>|^2 under the exact drive, k = 0..K."""
    psi0, _ = _as_vector(basis, initial)
    ks = _cycle_array(cycles)
    if not np.array_equal(ks, np.arange(len(ks))):
        raise DomainError("streaming fidelity needs contiguous cycles 0..K")
    prop = FullPropagator(basis, params, dense_max)
    out = np.empty(len(ks))
    out[0] = 1.0
    psi = psi0.astype(np.complex128)
    for k in range(1, len(ks)):
        psi = prop.step(psi)
        out[k] = abs(psi0.conj() @ psi) ** 2
    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > UNITARITY_TOL * max(len(ks) - 1, 1):
        raise AssertionError(f"unitarity drift {drift:.2e} over {len(ks)} cycles")
    return TimeSeries("F", out, params=params, initial=_describe(initial))


def fta(series) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude spectrum of a cycle series, static bin removed, peak = 1.

    Frequencies come back in radians per driving cycle, so a quasienergy
    difference e maps to the frequency |e| * T.
    """
    values = series.values if isinstance(series, TimeSeries) else np.asarray(series)
    n = len(values)
    if n < 64:
        raise DomainError(f"series of length {n} too short for a spectrum")
    amps = np.abs(np.fft.rfft(np.asarray(values, dtype=np.float64)))[1:]
    freqs = 2.0 * np.pi * np.arange(1, len(amps) + 1) / n
    peak = amps.max()
    return freqs, amps / peak if peak > 0 else amps


def dominant_peaks(freqs: np.ndarray, amps: np.ndarray, count: int = 2,
                   min_height: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    """Strongest local maxima of an amplitude spectrum, descending by height."""
    idx, props = find_peaks(amps, height=min_height)
    if len(idx) == 0:
        idx = np.array([int(np.argmax(amps))])
        heights = amps[idx]
    else:
        heights = props["peak_heights"]
    order = np.argsort(heights)[::-1][:count]
    return freqs[idx[order]], amps[idx[order]]


def spta_fidelity(params: ModelParams, L: int, cycles=DEFAULT_CYCLES,
                  k1: int = 0, k2: int = 0, branch: str = "+") -> TimeSeries:
    """Fidelity of the pinnacle under the tower-restricted effective model.

    The restriction is taken from the genuine sector operator, so any change
    to the builder propagates here; the L x L block then evolves in closed
    form.
    """
    basis = SectorBasis(L, L // 2)
    ham = build_effective_resonant(basis, params, k1, k2, branch)
    block = spta_matrix(ham, tower_states(L))
    vals, vecs = np.linalg.eigh(block)
    weights = np.abs(vecs[-1, :]) ** 2       # pinnacle sits in the last row
    ks = _cycle_array(cycles)
    phases = np.exp(-1j * np.outer(vals, ks * params.T))
    out = np.abs(weights @ phases) ** 2
    return TimeSeries("F_spta", out, params=params, initial="pinnacle")


def random_nontower_states(basis: SectorBasis, tower: Tower | None = None,
                           count: int = 10, seed: int = 7) -> list[FockState]:
    """Uniform sample of Fock states outside the tower, fixed by the seed."""
    if tower is None:
        tower = tower_states(basis.L)
    pool = np.setdiff1d(np.arange(basis.size), tower.indices(basis))
    if count > len(pool):
        raise DomainError(f"asked for {count} states, only {len(pool)} outside "
                          "the tower")
    rng = np.random.default_rng(seed)
    picks = rng.choice(pool, size=count, replace=False)
    return [basis.state(int(i)) for i in picks]


def ensemble_stats(series_list: list[TimeSeries], label: str) -> TimeSeries:
    """Pointwise mean and standard deviation across an ensemble of series."""
    stack = np.stack([s.values for s in series_list])
    return TimeSeries(label, stack.mean(axis=0), sd=stack.std(axis=0))
