#!/usr/bin/env python3
"""Regenerate every figure-data bundle into one output tree.

Thin driver over `scarkit reproduce`; each bundle writes its CSVs, SVG
quick-looks, and a manifest, so a single run of this script leaves a
complete, re-runnable copy of the numerical results at the chosen scale.
"""

import argparse
import sys
import time

from scarkit.cli import BUNDLES, main as cli_main


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="figures")
    ap.add_argument("--scale", choices=("desk", "paper"), default="desk")
    ap.add_argument("--only", help="comma-separated subset of bundles")
    args = ap.parse_args(argv)

    wanted = args.only.split(",") if args.only else list(BUNDLES)
    unknown = [b for b in wanted if b not in BUNDLES]
    if unknown:
        ap.error(f"unknown bundle {unknown[0]!r} (choose from {', '.join(BUNDLES)})")

    for bundle in wanted:
        t0 = time.time()
        print(f"[{bundle}] running ...", flush=True)
        rc = cli_main(["reproduce", "--bundle", bundle, "--scale", args.scale,
                       "--outdir", f"{args.outdir}/{bundle}"])
        if rc != 0:
            print(f"[{bundle}] FAILED with exit code {rc}", file=sys.stderr)
            return rc
        print(f"[{bundle}] done in {time.time() - t0:.1f}s", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(run())
