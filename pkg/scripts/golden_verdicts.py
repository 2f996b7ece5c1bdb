"""Run the reference visibility classifications and print a comparison table.

    python scripts/golden_verdicts.py            # K = 200, cached in results/
    python scripts/golden_verdicts.py -K 20      # quick look
"""

import argparse
from pathlib import Path

from hetnet.golden import GOLDEN_CASES, run_golden
from hetnet.visibility import VisibilityConfig

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("-K", type=int, default=200, help="samples per delta")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = VisibilityConfig(samples_per_delta=args.K, rng_seed=args.seed)
    cache = ROOT / "results" / f"golden_K{args.K}_seed{args.seed}.json"
    res = run_golden(cfg, cache, log=lambda s: print(s, flush=True))
    print()
    print(f"{'case':16s} {'expected':36s} {'got':36s}")
    for case in GOLDEN_CASES:
        r = res[case.key]
        got = f"{r['mode']} ({r['prefix']})"
        flag = "ok" if case.matches(r["mode"], r["prefix"]) else "DIFFERS"
        print(f"{case.key:16s} {case.expected:36s} {got:36s} {flag}")
        for mode, fr in r["mode_fractions"].items():
            vals = " ".join(f"{float(v):.3f}" for v in fr.values())
            print(f"    {mode:22s} {r['mode_prefixes'][mode]:14s} {vals}")


if __name__ == "__main__":
    main()
