#!/usr/bin/env python3
"""Smoke test for the shefk_py extension module.

Builds the cdylib with cargo, copies it next to this script under the
importable name, and exercises the main entry points with cheap parameters.

Run from anywhere:  python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_and_import():
    subprocess.run(
        ["cargo", "build", "-p", "shefk-py"], cwd=ROOT, check=True
    )
    built = ROOT / "target" / "debug" / "libshefk_py.so"
    dest = Path(__file__).resolve().parent / "shefk_py.so"
    shutil.copyfile(built, dest)
    sys.path.insert(0, str(dest.parent))
    import shefk_py

    return shefk_py


def approx(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    m = build_and_import()

    # Hermite basis anchors
    approx(m.hermite_function(1, 0.0), math.pi ** -0.25, 1e-12)
    approx(m.hermite_polynomial(3, 2.0), 2.0, 1e-12)  # He_3(z) = z^3 - 3z

    # solver: z = 0 keeps u in (0, 1] for u0 = 1, and t = 0 is exact
    cfg = m.SolverConfig(1.0, 0.0, 20, n_paths=400, dt=4e-3, seed=7)
    value, se, n = m.solve_fk(cfg, [0.0] * 20)
    assert 0.0 < value <= 1.0 and se > 0.0 and n == 400, (value, se, n)
    v_limit, _, _ = m.solve_fk_limit(cfg, [0.0] * 20)
    assert 0.0 < v_limit <= 1.0

    # mean-field identity: E[u^K] = (P_t u0)(x) = 1 for u0 = 1
    mf, mf_se, _ = m.mean_field(cfg, 800)
    approx(mf, 1.0, 4.0 * mf_se + 1e-9)

    # moments, both routes
    cfg_small = m.SolverConfig(
        0.5, 0.0, 10, n_paths=300, n_noise=120, dt=4e-3, seed=11
    )
    fk2 = m.moment_fk(2, cfg_small)
    emp2 = m.empirical_moment(2, cfg_small)
    gap = abs(fk2[0] - emp2[0])
    assert gap <= 5.0 * math.hypot(fk2[1], emp2[1]) + 1e-9, (fk2, emp2)

    # chaos algebra: Wick exponential tail, projection, evaluation
    exp_c, tail = m.wick_exponential([0.5, 0.25], 6)
    assert tail >= 0.0 and len(exp_c) > 1
    assert exp_c.coefficient((1,)) == 0.5
    proj = exp_c.project(1)
    assert proj.basis_bound() <= 1
    ce = m.ChaosExpansion([((0,), 2.0), ((1, 1), 0.5)])
    approx(ce.eval([1.0, 3.0]), 2.0 + 0.5 * 1.0 * 3.0, 1e-12)
    prod = ce.wick(ce)
    assert prod.degree_bound() == 4

    # conditional expectation of a projected expansion is exact
    got, cse = m.conditional_expectation(ce, 4, [1.0], 500, seed=3)
    direct = ce.project(1).eval([1.0])
    approx(got, direct, 4.0 * cse + 1e-9)

    # chaos coefficients: alpha = 0 term is (P_t u0)(x) = 1 for u0 = 1
    kc, ses = m.chaos_coefficients(0.5, 0.0, 4, 2, "one", 500, 4e-3, 5)
    approx(kc.coefficient(()), 1.0, 1e-12)
    assert len(ses) == len(kc)

    # chaos kernel anchor: f_1(t, x; x) = sqrt(2 t / pi)
    approx(m.chaos_kernel(1, 1.0, 0.3, [0.3], "one"), math.sqrt(2.0 / math.pi), 1e-3)

    # PDE route against its own Feynman-Kac representation
    u_pde = m.reduced_pde_point("one", 1, 0.1, 0.25, 0.0, [0.5])
    u_fk, u_se = m.fk_pde_point(0.25, 0.0, [0.5], "one", 4000, 4e-3, 9)
    approx(u_pde, u_fk, 0.02 * abs(u_fk) + 4.0 * u_se)

    # quick self-check battery
    checks = m.validate(quick=True, seed=1)
    failed = [name for name, passed, _ in checks if not passed]
    assert not failed, f"failed checks: {failed}"

    # invalid inputs surface as ValueError
    for bad in (
        lambda: m.hermite_function(0, 1.0),
        lambda: m.SolverConfig(1.0, 0.0, 0),
        lambda: m.chaos_kernel(9, 1.0, 0.0, [0.0] * 9, "one"),
    ):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print(f"smoke test passed ({len(checks)} self-checks, all green)")


if __name__ == "__main__":
    main()
