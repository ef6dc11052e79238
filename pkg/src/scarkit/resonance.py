"""Resonance conditions of the driven tilted chain and the amplitude-ratio landscape.

A tunneling process with static energy barrier ``delta`` is resonant with the
square-wave drive when ``|delta|`` is zero or an odd multiple of the driving
frequency.  All three barrier classes (|g-U|, g, g+U) are resonant
simultaneously only on discrete parameter families: g an odd multiple of
omega and U/g displaced from 1 by an odd/odd rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .hamiltonian import ModelParams, amplitudes_general
from .spectral import fold_quasienergy

RESONANCE_RTOL = 1e-9
# folded barrier below this is reported as a divergent ratio, not an error
DIVERGENCE_CUT = 1e-12


def is_resonant(delta: float, omega: float) -> bool:
    """First-order resonance test: |delta| equals 0 or (2k+1)*omega.

    Relative tolerance 1e-9; rational family parameters enter exactly in
    double precision, so the slack only absorbs user-typed decimals.
    """
    if omega <= 0:
        raise DomainError(f"need omega > 0, got {omega}")
    d = abs(float(delta))
    if d <= RESONANCE_RTOL * omega:
        return True
    m = round(d / omega)
    return m % 2 == 1 and abs(d - m * omega) <= RESONANCE_RTOL * m * omega


@dataclass(frozen=True)
class ResonantFamily:
    """One member of the two-branch family on which all three barriers resonate.

    U_over_g is exact: 1 +/- (2*k1+1)/(2*k2+1), the minus branch requiring
    k2 > k1 to keep the interaction repulsive.  g_over_omega = 2*k2 + 1, and
    k3 indexes the resonance order of the g+U process.
    """

    k1: int
    k2: int
    branch: str
    U_over_g: Fraction
    g_over_omega: int
    k3: int

    def params(self, g: float, u: float, J: float = 1.0) -> ModelParams:
        """Concrete model parameters at tilt g and drive amplitude u."""
        return ModelParams(g=g, U=g * float(self.U_over_g), u=u,
                           omega=g / self.g_over_omega, J=J)

    def barriers(self, g: float) -> tuple[float, float, float]:
        return (abs(g - g * float(self.U_over_g)), g, g + g * float(self.U_over_g))


def resonant_family(k1: int, k2: int, branch: str) -> ResonantFamily:
    """The family member at integer indices (k1, k2) on the given branch."""
    if k1 < 0 or k2 < 0:
        raise DomainError(f"family indices must be non-negative, got ({k1}, {k2})")
    if branch == "+":
        ratio = 1 + Fraction(2 * k1 + 1, 2 * k2 + 1)
        k3 = 2 * k2 + k1 + 1
    elif branch == "-":
        if k2 <= k1:
            raise DomainError(
                f"branch '-' needs k2 > k1 to keep U > 0, got k1={k1}, k2={k2}")
        ratio = 1 - Fraction(2 * k1 + 1, 2 * k2 + 1)
        k3 = 2 * k2 - k1
    else:
        raise DomainError(f"branch must be '+' or '-', got {branch!r}")
    return ResonantFamily(k1, k2, branch, ratio, 2 * k2 + 1, k3)


@dataclass(frozen=True)
class AmplitudeRatios:
    """Drive-averaged amplitude over folded barrier, one entry per hop class.

    Where the folded barrier vanishes the ratio diverges; those points carry
    a flag and the ratio is reported against the unfolded barrier instead
    (infinite only for a barrier that is exactly zero).
    """

    ratios: tuple[float, float, float]
    divergent: tuple[bool, bool, bool]


def amplitude_ratio(params: ModelParams) -> AmplitudeRatios:
    """Perturbative validity measure |J_i| / |folded barrier_i| at one point."""
    amps = amplitudes_general(params)
    barriers = (abs(params.g - params.U), params.g, params.g + params.U)
    ratios, flags = [], []
    for amp, barrier in zip(amps, barriers):
        gap = abs(fold_quasienergy(barrier, params.omega))
        if gap < DIVERGENCE_CUT:
            flags.append(True)
            ratios.append(abs(amp) / barrier if barrier > DIVERGENCE_CUT
                          else float("inf"))
        else:
            flags.append(False)
            ratios.append(abs(amp) / gap)
    return AmplitudeRatios(tuple(ratios), tuple(flags))


def scan_ratio_grid(U_values, g_values, omega: float, u: float,
                    J: float = 1.0) -> np.ndarray:
    """Amplitude-ratio table over a (U, g) grid at fixed drive.

    Returns rows (U, g, r1, r2, r3, div1, div2, div3) with g varying fastest;
    the row order is deterministic so repeated scans are byte-identical.
    """
    U_values = np.atleast_1d(np.asarray(U_values, dtype=np.float64))
    g_values = np.atleast_1d(np.asarray(g_values, dtype=np.float64))
    out = np.empty((U_values.size * g_values.size, 8))
    i = 0
    for U in U_values:
        for g in g_values:
            point = amplitude_ratio(ModelParams(g=float(g), U=float(U),
                                                u=u, omega=omega, J=J))
            out[i, 0], out[i, 1] = U, g
            out[i, 2:5] = point.ratios
            out[i, 5:8] = point.divergent
            i += 1
    return out
