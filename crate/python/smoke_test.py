"""Smoke test for the pyheavytraffic extension.

Build with `cargo build --release -p heavytraffic-py`, then copy
target/release/libpyheavytraffic.so next to this file as pyheavytraffic.so.
"""

import math
import sys

import pyheavytraffic as ht


def check(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'} {name} {detail}")
    return ok


def main():
    results = []

    rad = ht.JumpSpec.rademacher()
    results.append(check("rademacher c_100", abs(ht.c_of_n(rad, 100) - 10.0) < 1e-8))

    par = ht.JumpSpec.two_sided_pareto(1.5, 1.0)
    v = par.truncated_second_moment(16.0)
    results.append(check("pareto V(16)", abs(v - 3 * (4 - 1)) < 1e-9, f"{v}"))
    n = ht.n_of_a(par, 0.1)
    results.append(check("pareto n(0.1)", 8300 <= n <= 8500, f"{n}"))
    results.append(check("round trip", ht.JumpSpec(dict(par.to_kv())) == par))

    e = ht.mittag_leffler_e(0.5, -1.0)
    results.append(check("E_0.5(-1)", abs(e - math.e * math.erfc(1.0)) < 1e-10, f"{e}"))

    gauss = ht.JumpSpec.gaussian(1.0)
    out = ht.simulate_max(gauss, 0.2, 2000, 11, t=10.0)
    results.append(check("simulate_max", len(out["scaled"]) == 2000 and out["n_a"] > 0))

    exact = ht.mstar_sup_exact(1.5, "positive", 5000, 3)
    ks = ht.ks_mittag_leffler(exact, 1.5, ht.analytic_ml_scale(1.5))
    results.append(check("exact limit sup vs ML", ks < 0.03, f"ks={ks:.4f}"))

    lap = ht.mstar_laplace(1.0, 2.0, "symmetric", 5, eps=1e-3, t=60.0, samples=20000)
    gap = abs(lap["estimate"] - 2.0 / 3.0)
    allow = 4 * lap["stderr"] + lap["eps_bound"] + lap["t_bound"]
    results.append(check("brownian laplace", gap <= allow, f"gap={gap:.4f} allow={allow:.4f}"))

    try:
        ht.JumpSpec.gaussian(-1.0)
        results.append(check("invalid sigma raises", False))
    except ValueError:
        results.append(check("invalid sigma raises", True))

    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
