"""Regenerate the synthetic skull slice shipped as assets/skull.pgm.

Axial head section: thick bone ring of varying width, soft brain tissue with
smooth contrast, two ventricles, a frontal sinus and a few small lesions.
Everything sits inside radius 0.6 of the [-0.5, 0.5]^2 window (radius 1.2 in
the normalized coordinates used below).
"""

import argparse
from pathlib import Path

import numpy as np

from tatrec.pgm import field_to_image, write_pgm


def skull_image(n: int = 256) -> np.ndarray:
    s = (np.arange(n) + 0.5) / n * 2 - 1
    X, Y = np.meshgrid(s, s, indexing="ij")
    th = np.arctan2(Y, X)

    def ell(a, b, cx=0.0, cy=0.0, rot=0.0):
        c, sn = np.cos(rot), np.sin(rot)
        xr = (X - cx) * c + (Y - cy) * sn
        yr = -(X - cx) * sn + (Y - cy) * c
        return (xr / a) ** 2 + (yr / b) ** 2

    # outer contour with a slightly irregular shape
    wobble = 1 + 0.03 * np.cos(3 * th) + 0.02 * np.sin(5 * th + 0.4)
    outer = ell(0.72, 0.88) / wobble**2
    thickness = 0.075 + 0.035 * (1 + np.sin(th - 0.6)) / 2
    inner = ell(0.72 - thickness, 0.88 - thickness) / wobble**2

    f = np.zeros((n, n))
    f[outer <= 1] = 1.0
    brain = inner <= 1
    f[brain] = 0.45 + 0.08 * np.cos(3 * X[brain]) * np.cos(2.5 * Y[brain])
    # grey matter rim
    rim = brain & (inner > 0.8)
    f[rim] += 0.1
    # ventricles
    for cx, rot in ((-0.12, 0.35), (0.12, -0.35)):
        f[ell(0.07, 0.22, cx, 0.05, rot) <= 1] = 0.15
    # frontal sinus (air, inside the bone)
    f[ell(0.12, 0.04, 0.0, 0.76) <= 1] = 0.0
    # small lesions
    f[ell(0.05, 0.05, 0.3, -0.35) <= 1] = 0.8
    f[ell(0.03, 0.06, -0.35, -0.3, 0.5) <= 1] = 0.65
    f[ell(0.025, 0.025, 0.25, 0.4) <= 1] = 0.75
    return np.clip(f, 0, 1)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--out", type=Path, default=Path(__file__).parents[1] / "src/tatrec/assets/skull.pgm")
    args = ap.parse_args()
    img = field_to_image(skull_image(args.size))
    write_pgm(args.out, np.rint(img * 255))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
