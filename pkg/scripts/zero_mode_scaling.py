#!/usr/bin/env python3
"""Kernel dimension versus chain length, against the combinatorial bound.

For each even L the resonant sector is diagonalized and the zero-mode count
is compared with the chiral-imbalance bound binomial(N, N/2) (even N) or 0
(odd N).  The match is exact in every case we can reach by dense ED.
"""

import argparse
import math
import sys
import time

from scarkit.fock_basis import SectorBasis, subspace_dims
from scarkit.hamiltonian import build_effective_resonant
from scarkit.resonance import resonant_family
from scarkit.spectral import diagonalize


def bound(N: int) -> int:
    return math.comb(N, N // 2) if N % 2 == 0 else 0


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-L", type=int, default=12,
                    help="largest chain (16 takes minutes)")
    ap.add_argument("--g", type=float, default=50.0)
    ap.add_argument("--u", type=float, default=0.5)
    args = ap.parse_args(argv)

    params = resonant_family(0, 0, "+").params(g=args.g, u=args.u)
    print(f"{'L':>3} {'dim':>7} {'N+':>6} {'N-':>6} {'bound':>6} "
          f"{'kernel':>6} {'time':>7}")
    for L in range(4, args.max_L + 1, 2):
        t0 = time.time()
        basis = SectorBasis(L, L // 2)
        split = subspace_dims(L, L // 2)
        spec = diagonalize(build_effective_resonant(basis, params, 0, 0, "+"))
        n0 = len(spec.zero_indices)
        flag = "" if n0 == bound(L // 2) else "  <-- MISMATCH"
        print(f"{L:>3} {basis.size:>7} {split.n_plus:>6} {split.n_minus:>6} "
              f"{bound(L // 2):>6} {n0:>6} {time.time() - t0:>6.1f}s{flag}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
