"""Print the complete-data and half-circle error tables next to the reference values.

    python scripts/reproduce_tables.py --scale 256 > tables.md

Each cell shows the best relative L2 error (percent) within the iteration
budget and, in parentheses, the iteration where it was reached.
"""

import argparse

from tatrec.experiment import ExperimentConfig, run_configs
from tatrec.verify import BAND, REFERENCE_COMPLETE, REFERENCE_HALF, SPEEDS

ENGINES = ("BFN", "CG", "NS")


def run(configs):
    out = {}
    for cfg, rep in zip(configs, run_configs(configs, write=False)):
        out[cfg.speed, cfg.sensor_arc, cfg.method] = rep
    return out


def cell(rep, ref=None):
    if rep.status != "ok":
        return rep.status
    text = f"{rep.best_error:.2f} ({rep.best_iteration})"
    if ref is not None:
        text += " ok" if rep.best_error <= BAND * ref else " over"
    return text


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scale", type=int, default=256)
    p.add_argument("--iters", type=int, default=10)
    args = p.parse_args()

    complete = [ExperimentConfig(speed=sp, method=m, scale=args.scale, iters=args.iters) for sp in SPEEDS for m in ENGINES]
    half = [
        ExperimentConfig(sensor_arc="upper_half", method=m, scale=args.scale, iters=args.iters)
        for m in ENGINES + ("TR",)
    ]
    res = run(complete + half)

    print(f"Complete data, {args.scale} cells across the object (reference in brackets, band x{BAND})\n")
    print("| speed | " + " | ".join(ENGINES) + " |")
    print("|---" * (len(ENGINES) + 1) + "|")
    for sp in SPEEDS:
        row = [f"{cell(res[sp, 'full', m], REFERENCE_COMPLETE[sp][m])} [{REFERENCE_COMPLETE[sp][m]}]" for m in ENGINES]
        print(f"| {sp} | " + " | ".join(row) + " |")

    print("\nUpper half circle, c = 1\n")
    print("| " + " | ".join(ENGINES + ("TR",)) + " |")
    print("|---" * (len(ENGINES) + 1) + "|")
    row = [f"{cell(res['constant', 'upper_half', m], REFERENCE_HALF[m])} [{REFERENCE_HALF[m]}]" for m in ENGINES]
    row.append(cell(res["constant", "upper_half", "TR"]))
    print("| " + " | ".join(row) + " |")


if __name__ == "__main__":
    main()
