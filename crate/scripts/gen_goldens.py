#!/usr/bin/env python3
"""Regenerate crates/zetalab/tests/data/goldens.json.

High-precision reference values computed with mpmath at 40 significant
digits and frozen to double precision. Run offline; the Rust test suite
only reads the committed JSON.
"""
import json
import os

import mpmath as mp

mp.mp.dps = 40

OUT = os.path.join(
    os.path.dirname(__file__), "..", "crates", "zetalab", "tests", "data", "goldens.json"
)


def f(x) -> float:
    return float(mp.mpf(x))


def zeta_abs2(t) -> float:
    z = mp.zeta(mp.mpc(0.5, t))
    return f(mp.re(z) ** 2 + mp.im(z) ** 2)


def main():
    g = {}

    # Riemann-Siegel theta at sample heights, and its unique positive root.
    g["theta"] = {str(t): f(mp.siegeltheta(t)) for t in [2 * mp.pi, 50, 100, 500, 1000, 5000, 100000]}
    g["theta_root"] = f(mp.findroot(mp.siegeltheta, 17.8))

    # First zero of Z on the critical line.
    g["first_zero"] = f(mp.zetazero(1).imag)

    # Hardy Z at sample heights (siegelz uses full-precision zeta internally).
    g["hardy_z"] = {str(t): f(mp.siegelz(t)) for t in [5, 14.0, 14.2, 50, 100, 500, 1000, 2500, 5000]}

    # |zeta(1/2+it)|^2 at sample heights, including the Riemann-Siegel range.
    g["abs2"] = {
        str(t): zeta_abs2(t)
        for t in [0, 0.5, 1, 5, 14.1347, 50, 100, 500, 1000, 2500, 5000, 6000, 8000, 10000, 30000, 100000]
    }

    # zeta(sigma + it) off the critical line: [sigma, t, re, im].
    pts = [(2, 0), (4, 0), (0.5, 0), (1, 10), (1, 100), (1, 10000), (0.6, 50), (2, 1000), (0.55, 300)]
    g["zeta_points"] = [
        [float(s), float(t), f(mp.re(mp.zeta(mp.mpc(s, t)))), f(mp.im(mp.zeta(mp.mpc(s, t))))]
        for (s, t) in pts
    ]

    # Second-moment increment over [1000, 1010]: integral of |zeta(1/2+it)|^2.
    # Split per mean zero spacing so quadgl converges cleanly.
    a, b, n = mp.mpf(1000), mp.mpf(1010), 40
    nodes = [a + (b - a) * k / n for k in range(n + 1)]
    acc = mp.mpf(0)
    for lo, hi in zip(nodes, nodes[1:]):
        acc += mp.quad(lambda u: abs(mp.zeta(mp.mpc(0.5, u))) ** 2, [lo, hi])
    g["j_1000_1010"] = f(acc)

    g["euler_gamma"] = f(mp.euler)

    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w") as fh:
        json.dump(g, fh, indent=1, sort_keys=True)
    print("wrote", OUT)


if __name__ == "__main__":
    main()
