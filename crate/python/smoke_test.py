"""Smoke test for the mattis_py extension.

Build first:  pip install -e crates/mattis-py --no-build-isolation
"""

import math
import sys

import mattis_py as m


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    failures = []

    def check(name, ok):
        print(("ok   " if ok else "FAIL ") + name)
        if not ok:
            failures.append(name)

    d = m.derived_constants(0.5, 0.3)
    check("A", close(d["a"], 1 - (0.3 / 1.5) ** 2, 1e-14))
    check("v_tilde", close(d["v_tilde"], math.sqrt(0.75), 1e-14))

    wp, wm = m.dispersion(0.5, 0.3, 1.0, 0.7)
    check("dispersion sum of squares", close(wp**2 + wm**2, 0.75 * (1 + 0.49), 1e-12))

    c, err = m.c_constant(0.5, 0.5)
    check("C(0.5, 0.5)", close(c, 0.91387657209060, 1e-10))
    check("C(0.3, 0)", close(m.c_constant(0.3, 0.0)[0], 1.0, 1e-8))

    fe = m.free_energy(0.0, 0.0, 5.0, 21, zero_mode="closed")
    check("free energy below zero", fe["scaled"] < 0 and fe["qft_target"] < 0)

    g = m.fermion_two_point(0.0, 0.0, 1, 1, 1.0, 21, 0.3, sum="ir")
    want = 1 / (2 * math.pi * complex(0.3, -1.0))
    check("free fermion IR two-point", abs(g - want) <= 1e-8 * abs(want))

    q = m.qft_two_point(0.5, 0.5, 1, 1.0)
    check("QFT two-point finite", math.isfinite(q.real) and math.isfinite(q.imag))

    try:
        m.dispersion(1.5, 0.0, 1.0, 0.0)
        check("invalid coupling raises", False)
    except ValueError:
        check("invalid coupling raises", True)

    passed, details = m.run_criterion(2)
    check("criterion 2", passed and len(details) > 0)

    if failures:
        print(f"{len(failures)} smoke check(s) failed", file=sys.stderr)
        sys.exit(1)
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
