"""Diagonalization, folding, zero modes, and level statistics.

Two eigensolver routes live here. Generic Hermitian matrices go through dense
`eigh`. The resonant stroboscopic Hamiltonian is purely imaginary with zero
diagonal and anticommutes with the diagonal dipole-parity operator, so it is
unitarily equivalent (multiply odd-parity basis states by -i) to a real
symmetric matrix of the block form [[0, C], [C^T, 0]]. Its eigensystem is
recovered from one real SVD of C at half the dimension, which keeps the
largest half-filled sectors this package targets inside a few hundred MB,
and the +s/-s pairing and the kernel come out exact instead of only to
solver precision.

Eigenvector phase convention: whenever a column is materialized, its
largest-magnitude component is made real positive (ties: lowest basis index;
equal maxima in both parity blocks: the even-parity block wins).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import CapabilityError, DomainError

if TYPE_CHECKING:  # pragma: no cover
    from .hamiltonian import HamiltonianMatrix

DENSE_EIG_DEFAULT = 20000       # refuse eigh / SVD above this sector dimension
DENSE_VECTORS_MAX = 6000        # refuse materializing a full D x D eigenvector matrix
ZERO_MODE_RTOL = 1e-9           # kernel tolerance relative to the spectral radius

COE_MEAN_R = 0.53
POISSON_MEAN_R = 0.386


def fold_quasienergy(energy: float, omega: float) -> float:
    """Fold an energy into the principal window [-omega/2, omega/2).

    The upper endpoint maps to -omega/2, keeping the window half open.
    """
    if omega <= 0:
        raise DomainError(f"omega must be positive, got {omega}")
    return energy - omega * math.floor(energy / omega + 0.5)


def _phase_fix(V: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude component is real positive."""
    idx = np.abs(V).argmax(axis=0)
    pivot = V[idx, np.arange(V.shape[1])]
    return V * (np.abs(pivot) / pivot)


class DenseVectors:
    """Eigenvector columns stored as one dense matrix."""

    def __init__(self, V: np.ndarray):
        self._V = V

    @property
    def n_states(self) -> int:
        return self._V.shape[0]

    def column(self, a: int) -> np.ndarray:
        return self._V[:, a]

    def columns(self, indices) -> np.ndarray:
        return self._V[:, np.asarray(indices, dtype=np.intp)]

    def row(self, n: int) -> np.ndarray:
        return self._V[n, :]

    def rows(self, indices) -> np.ndarray:
        return self._V[np.asarray(indices, dtype=np.intp), :]

    def dense(self) -> np.ndarray:
        return self._V

    def sector_weight(self, mask: np.ndarray) -> np.ndarray:
        return (np.abs(self._V[mask, :]) ** 2).sum(axis=0)

    def propagate(self, psi0: np.ndarray, kt_values: np.ndarray,
                  eigvals: np.ndarray) -> np.ndarray:
        c = self._V.conj().T @ psi0
        phases = np.exp(-1j * np.outer(eigvals, kt_values))
        return self._V @ (c[:, None] * phases)


def _real_matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """A @ B for real A and possibly complex B without upcasting A."""
    if not np.iscomplexobj(B):
        return A @ B
    return (A @ B.real) + 1j * (A @ B.imag)


class ChiralPairVectors:
    """Eigenvectors of a purely imaginary chiral Hamiltonian, stored factored.

    From the SVD C = U diag(s) V^T of the real off-diagonal block (rows: even
    dipole parity, columns: odd), the paired eigenvectors of the original
    matrix are (u_i on even rows, -+ i v_i on odd rows) / sqrt(2) with
    eigenvalue +- s_i, and the kernel consists of the singular directions
    beyond the rank: (u_i, 0) and (0, v_i). Only the two factor matrices are
    stored; columns are materialized on demand.
    """

    def __init__(self, plus_idx: np.ndarray, minus_idx: np.ndarray,
                 Uf: np.ndarray, Vt: np.ndarray, s: np.ndarray, rank: int,
                 perm: np.ndarray):
        self.plus_idx = plus_idx
        self.minus_idx = minus_idx
        self.Uf = Uf
        self.Vt = Vt
        self.s = s
        self.rank = rank
        self.n_plus = Uf.shape[0]
        self.n_minus = Vt.shape[0]
        self.n_states = self.n_plus + self.n_minus
        self._perm = np.asarray(perm, dtype=np.intp)
        # position of each basis state inside its parity block
        self._block_pos = np.empty(self.n_states, dtype=np.intp)
        self._block_pos[plus_idx] = np.arange(self.n_plus)
        self._block_pos[minus_idx] = np.arange(self.n_minus)
        self._is_plus = np.zeros(self.n_states, dtype=bool)
        self._is_plus[plus_idx] = True
        self._fix_kernel_signs()
        self._precompute_pair_phases()

    def _fix_kernel_signs(self):
        # paired factors must not be flipped independently (that would break
        # C v = s u), but kernel directions are unpaired and safe to fix
        r = self.rank
        if self.n_plus > r:
            blk = self.Uf[:, r:]
            idx = np.abs(blk).argmax(axis=0)
            piv = blk[idx, np.arange(blk.shape[1])]
            blk *= np.where(piv < 0, -1.0, 1.0)
        if self.n_minus > r:
            blk = self.Vt[r:, :]
            idx = np.abs(blk).argmax(axis=1)
            piv = blk[np.arange(blk.shape[0]), idx]
            blk *= np.where(piv < 0, -1.0, 1.0)[:, None]

    def _precompute_pair_phases(self):
        """Unit phases on the u and v factors of each +-s pair column.

        The bare pair column is (u, -i*sigma*v)/sqrt(2) with sigma = +-1 the
        branch sign; the stored phases rotate whichever factor carries the
        overall largest-magnitude component to real positive.
        """
        r = self.rank
        if r == 0:
            empty = np.zeros(0, dtype=np.complex128)
            self._ph = {k: empty for k in ("mu", "mv", "pu", "pv")}
            return
        Ub, Vb = self.Uf[:, :r], self.Vt[:r, :]
        iu = np.abs(Ub).argmax(axis=0)
        upiv = Ub[iu, np.arange(r)]
        iv = np.abs(Vb).argmax(axis=1)
        vpiv = Vb[np.arange(r), iv]
        su = np.where(upiv < 0, -1.0, 1.0).astype(np.complex128)
        sv = np.where(vpiv < 0, -1.0, 1.0).astype(np.complex128)
        u_wins = np.abs(upiv) >= np.abs(vpiv)
        self._ph = {
            "mu": np.where(u_wins, su, -1j * sv),   # '-' branch, u factor
            "mv": np.where(u_wins, 1j * su, sv),    # '-' branch, v factor
            "pu": np.where(u_wins, su, 1j * sv),    # '+' branch, u factor
            "pv": np.where(u_wins, -1j * su, sv),   # '+' branch, v factor
        }

    def _decode(self, a: int) -> tuple[str, int]:
        """Map a spectrum column to ('-'|'0+'|'0-'|'+', factor index)."""
        j = int(self._perm[a])
        r = self.rank
        if j < r:
            return "-", j
        j -= r
        if j < self.n_plus - r:
            return "0+", r + j
        j -= self.n_plus - r
        if j < self.n_minus - r:
            return "0-", r + j
        j -= self.n_minus - r
        return "+", r - 1 - j

    def column(self, a: int) -> np.ndarray:
        kind, i = self._decode(a)
        psi = np.zeros(self.n_states, dtype=np.complex128)
        if kind == "0+":
            psi[self.plus_idx] = self.Uf[:, i]
        elif kind == "0-":
            psi[self.minus_idx] = self.Vt[i, :]
        else:
            bu, bv = ("mu", "mv") if kind == "-" else ("pu", "pv")
            w = 1.0 / math.sqrt(2.0)
            psi[self.plus_idx] = self._ph[bu][i] * w * self.Uf[:, i]
            psi[self.minus_idx] = self._ph[bv][i] * w * self.Vt[i, :]
        return psi

    def columns(self, indices) -> np.ndarray:
        out = np.empty((self.n_states, len(indices)), dtype=np.complex128)
        for k, a in enumerate(indices):
            out[:, k] = self.column(int(a))
        return out

    def row(self, n: int) -> np.ndarray:
        return self.rows([n])[0]

    def rows(self, indices) -> np.ndarray:
        r = self.rank
        w = 1.0 / math.sqrt(2.0)
        out = np.empty((len(indices), self.n_states), dtype=np.complex128)
        for k, n in enumerate(indices):
            n = int(n)
            p = self._block_pos[n]
            internal = np.zeros(self.n_states, dtype=np.complex128)
            if self._is_plus[n]:
                fac = self.Uf[p, :]
                internal[:r] = self._ph["mu"] * w * fac[:r]
                internal[r:self.n_plus] = fac[r:]
                internal[self.n_states - r:] = (self._ph["pu"] * w * fac[:r])[::-1]
            else:
                fac = self.Vt[:, p]
                internal[:r] = self._ph["mv"] * w * fac[:r]
                internal[self.n_plus:self.n_plus + self.n_minus - r] = fac[r:]
                internal[self.n_states - r:] = (self._ph["pv"] * w * fac[:r])[::-1]
            out[k] = internal[self._perm]
        return out

    def dense(self) -> np.ndarray:
        if self.n_states > DENSE_VECTORS_MAX:
            raise CapabilityError(
                f"refusing to materialize {self.n_states}^2 eigenvector matrix; "
                f"bound is {DENSE_VECTORS_MAX}")
        return self.columns(range(self.n_states))

    def sector_weight(self, mask: np.ndarray) -> np.ndarray:
        r = self.rank
        wu = (self.Uf[mask[self.plus_idx], :] ** 2).sum(axis=0)
        wv = (self.Vt[:, mask[self.minus_idx]] ** 2).sum(axis=1)
        internal = np.empty(self.n_states)
        internal[:r] = 0.5 * (wu[:r] + wv[:r])
        internal[r:self.n_plus] = wu[r:]
        internal[self.n_plus:self.n_plus + self.n_minus - r] = wv[r:]
        internal[self.n_states - r:] = internal[:r][::-1]
        return internal[self._perm]

    def propagate(self, psi0: np.ndarray, kt_values: np.ndarray,
                  eigvals: np.ndarray) -> np.ndarray:
        # rotate to the real frame: z_even = psi_even, z_odd = i * psi_odd
        del eigvals  # the factored form uses the singular values directly
        r = self.rank
        a = psi0[self.plus_idx]
        b = 1j * psi0[self.minus_idx]
        alpha = _real_matmul(self.Uf.T, a)
        beta = _real_matmul(self.Vt, b)
        skt = np.outer(self.s[:r], kt_values)
        cos_m, sin_m = np.cos(skt), np.sin(skt)
        coef_plus = cos_m * alpha[:r, None] - 1j * (sin_m * beta[:r, None])
        coef_minus = cos_m * beta[:r, None] - 1j * (sin_m * alpha[:r, None])
        z_plus = _real_matmul(self.Uf[:, :r], coef_plus)
        z_minus = _real_matmul(self.Vt[:r, :].T, coef_minus)
        if self.n_plus > r:
            z_plus += _real_matmul(self.Uf[:, r:], alpha[r:])[:, None]
        if self.n_minus > r:
            z_minus += _real_matmul(self.Vt[r:, :].T, beta[r:])[:, None]
        out = np.empty((self.n_states, len(kt_values)), dtype=np.complex128)
        out[self.plus_idx, :] = z_plus
        out[self.minus_idx, :] = -1j * z_minus
        return out


@dataclass
class Spectrum:
    """Folded eigensystem of one sector Hamiltonian."""

    quasienergies: np.ndarray      # folded into [-omega/2, omega/2), ascending
    raw_energies: np.ndarray       # unfolded eigenvalues, same column order
    vectors: DenseVectors | ChiralPairVectors
    zero_indices: np.ndarray       # columns with |quasienergy| below tolerance
    basis: object
    omega: float
    kind: str

    @property
    def size(self) -> int:
        return len(self.quasienergies)

    def kernel_matrix(self) -> np.ndarray:
        return self.vectors.columns(self.zero_indices)

    def weight_row(self, n: int) -> np.ndarray:
        """|<n|psi_a>|^2 against every eigenstate, for one Fock basis index n."""
        return np.abs(self.vectors.row(n)) ** 2

    def propagate(self, psi0: np.ndarray, cycles, period: float) -> np.ndarray:
        """State columns after whole numbers of driving cycles."""
        kt = np.asarray(cycles, dtype=np.float64) * period
        return self.vectors.propagate(np.asarray(psi0, dtype=np.complex128),
                                      kt, self.quasienergies)


def _zero_tol(values: np.ndarray) -> float:
    radius = float(np.max(np.abs(values))) if len(values) else 0.0
    return ZERO_MODE_RTOL * radius


def diagonalize(ham: "HamiltonianMatrix",
                dense_threshold: int = DENSE_EIG_DEFAULT) -> Spectrum:
    """Full eigensystem of a sector Hamiltonian, quasienergies folded.

    Resonant stroboscopic Hamiltonians take the chiral SVD route; everything
    else is dense-diagonalized. Sectors above `dense_threshold` are refused.
    """
    d = ham.dimension
    if d > dense_threshold:
        raise CapabilityError(
            f"sector dimension {d} exceeds dense threshold {dense_threshold}")
    if ham.kind == "effective_resonant":
        return _diagonalize_chiral(ham)
    A = ham.toarray()
    vals, V = np.linalg.eigh(A)
    folded = np.array([fold_quasienergy(float(e), ham.params.omega) for e in vals])
    perm = np.argsort(folded, kind="stable")
    folded, vals, V = folded[perm], vals[perm], V[:, perm]
    V = _phase_fix(V)
    tol = _zero_tol(folded)
    zero_idx = np.flatnonzero(np.abs(folded) < tol)
    return Spectrum(folded, vals, DenseVectors(V), zero_idx,
                    ham.basis, ham.params.omega, ham.kind)


def _diagonalize_chiral(ham: "HamiltonianMatrix") -> Spectrum:
    m = ham.matrix
    if m.nnz and np.max(np.abs(m.data.real)) != 0.0:
        raise DomainError("chiral route requires a purely imaginary matrix")
    parities = ham.basis.parities
    plus_idx = np.flatnonzero(parities == 1)
    minus_idx = np.flatnonzero(parities == -1)
    # the real rotated frame keeps only the even-odd block
    C = np.imag(m.tocsr()[plus_idx, :][:, minus_idx].toarray())
    if 2 * np.count_nonzero(C) != m.nnz:
        raise DomainError("matrix couples equal-parity states; not chiral")
    Uf, s, Vt = np.linalg.svd(C, full_matrices=True)
    tol = ZERO_MODE_RTOL * (float(s[0]) if len(s) else 0.0)
    r = int(np.count_nonzero(s > tol))
    n_zero = (len(plus_idx) - r) + (len(minus_idx) - r)
    internal = np.concatenate([-s[:r], np.zeros(n_zero), s[:r][::-1]])
    folded = np.array([fold_quasienergy(float(e), ham.params.omega)
                       for e in internal])
    perm = np.argsort(folded, kind="stable")
    vec = ChiralPairVectors(plus_idx, minus_idx, Uf, Vt, s, r, perm)
    folded = folded[perm]
    zero_idx = np.flatnonzero(folded == 0.0)
    return Spectrum(folded, internal[perm], vec, zero_idx,
                    ham.basis, ham.params.omega, ham.kind)


def zero_modes(spec: Spectrum, tol: float | None = None) -> np.ndarray:
    """Indices of kernel eigenstates; default tolerance is relative to the radius."""
    if tol is None:
        tol = _zero_tol(spec.quasienergies)
    idx = np.flatnonzero(np.abs(spec.quasienergies) < tol)
    outside = np.abs(spec.quasienergies[np.abs(spec.quasienergies) >= tol])
    if len(outside) and outside.min() < 10 * tol:
        warnings.warn(
            f"zero-mode count is tolerance-sensitive: nearest level at "
            f"{outside.min():.3e} vs tol {tol:.3e}", stacklevel=2)
    return idx


def mirror_asymmetry(spec: Spectrum) -> float:
    """Max |eps_sorted + reversed(eps_sorted)|; zero for a chiral spectrum."""
    e = np.sort(spec.quasienergies)
    return float(np.max(np.abs(e + e[::-1])))


@dataclass(frozen=True)
class GapRatioStats:
    """Consecutive-gap ratio statistics over the strictly positive levels."""

    mean_r: float
    n_levels: int
    n_ratios: int
    coe_reference: float = COE_MEAN_R
    poisson_reference: float = POISSON_MEAN_R


def gap_ratio_stats(spec: Spectrum, degenerate_cut: float = 1e-12) -> GapRatioStats:
    """Mean r = min(d1, d2)/max(d1, d2) over consecutive positive-level gaps.

    Kernel and negative levels are excluded; gaps below `degenerate_cut` are
    dropped as exact degeneracies.
    """
    tol = _zero_tol(spec.quasienergies)
    pos = np.sort(spec.quasienergies[spec.quasienergies > tol])
    if len(pos) < 3:
        raise DomainError("need at least three positive levels for gap ratios")
    gaps = np.diff(pos)
    gaps = gaps[gaps > degenerate_cut]
    if len(gaps) < 2:
        raise DomainError("not enough non-degenerate gaps for ratios")
    r = np.minimum(gaps[:-1], gaps[1:]) / np.maximum(gaps[:-1], gaps[1:])
    return GapRatioStats(float(r.mean()), len(pos), len(r))
