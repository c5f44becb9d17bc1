#!/usr/bin/env python3
"""Arbitrary-precision re-derivation of the frozen formula oracles.

Recomputes, with mpmath at 50 significant digits and without importing
the package under test, every hand-frozen constant the test suite
asserts.  Run it directly to print the table:

    python tools/rederive_oracles.py
"""

import mpmath as mp

mp.mp.dps = 50


def dies_per_wafer_raw(diameter, die_area):
    d, a = mp.mpf(diameter), mp.mpf(die_area)
    return mp.pi * (d / 2) ** 2 / a - mp.pi * d / mp.sqrt(2 * a)


def negbin_yield(area, d0, alpha):
    area, d0, alpha = mp.mpf(area), mp.mpf(d0), mp.mpf(alpha)
    return (1 + area * d0 / alpha) ** (-alpha)


def rent_terminals(n, k, p, a):
    n, k, p, a = mp.mpf(n), mp.mpf(k), mp.mpf(p), mp.mpf(a)
    return a * k * n * (1 - n ** (p - 1))


def tsv_count_raw(ng_i, ng_j, k, p, a):
    return (
        rent_terminals(mp.mpf(ng_i) + mp.mpf(ng_j), k, p, a)
        - rent_terminals(ng_i, k, p, a)
        - rent_terminals(ng_j, k, p, a)
    )


def average_wire_length(p, ng):
    p, ng = mp.mpf(p), mp.mpf(ng)
    scale = (1 - mp.mpf(4) ** (p - 1)) / (1 - ng ** (p - 1))
    term1 = (7 * ng ** (p - mp.mpf("0.5")) - 1) / (mp.mpf(4) ** (p - mp.mpf("0.5")) - 1)
    term2 = (1 - ng ** (p - mp.mpf("1.5"))) / (1 - mp.mpf(4) ** (p - mp.mpf("1.5")))
    return mp.mpf(2) / 9 * scale * (term1 - term2)


def beol_layers_raw(fanout, ng, l_abs, omega, eta, area):
    vals = [mp.mpf(v) for v in (fanout, ng, l_abs, omega, eta, area)]
    fanout, ng, l_abs, omega, eta, area = vals
    return fanout * ng * l_abs * omega / (eta * area)


def frozen_oracles():
    """The constants asserted by the test suite, as (name, value) pairs."""
    return {
        "dies_per_wafer(30, 1) raw": dies_per_wafer_raw(30, 1),           # 640.215... -> floor 640
        "die_yield_negbin(1, 0.1, 3)": negbin_yield(1, "0.1", 3),         # 0.9063140
        "tsv_count(1e6, 1e6; k=4, p=0.6, a=1) raw": tsv_count_raw(
            10**6, 10**6, 4, "0.6", 1
        ),                                                                # 7711.868 -> ceil 7712
        "average_wire_length(0.6, 4)": average_wire_length("0.6", 4),     # 10.30003
        "beol_layers(fo=4, ng=1e6, Labs=1e-3, w=1e-4, eta=0.4, A=1) raw": beol_layers_raw(
            4, 10**6, "1e-3", "1e-4", "0.4", 1
        ),                                                                # exactly 1
    }


if __name__ == "__main__":
    for name, value in frozen_oracles().items():
        print(f"{name:<58} = {mp.nstr(value, 15)}")
