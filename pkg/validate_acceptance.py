#!/usr/bin/env python3
"""
ACCEPTANCE WALK-THROUGH

Runs the reference checks against closed-form values and prints a verdict.
Exit status 1 when any check fails.
"""

import sys

import numpy as np

from analysis.critical import REFINE_LOCAL, find_critical_points, morse_check
from analysis.sweep import GridSpec, SweepConfig, make_evaluator, sweep
from core.domains import load_demo
from core.geometry import assemble_domain, make_circle, make_polygon
from core.kernel import conjugation_matrix
from core.mityuk import MityukConfig, SlitSpec, boundary_condition_residuals, evaluate
from core.oracles import annulus_R_circular, annulus_R_radial, disk_R, square_center_R

Q = 0.25


def _check(ok, text):
    print(f"{'✅' if ok else '❌'} {text}")
    return ok


def comprehensive_validation(n=1024):
    """Run every acceptance check; True when all pass."""

    print("=" * 70)
    print("🔍 MITYUK ACCEPTANCE VALIDATION")
    print("=" * 70)

    annulus = assemble_domain(make_circle(0.0, 1.0, n=n), [make_circle(0.0, Q, n=n)])
    circ, rad = SlitSpec.parse("c"), SlitSpec.parse("r")
    all_passed = True

    # 1. Conjugation matrix
    print("\n1. 🧮 CONJUGATION MATRIX")
    print("-" * 40)
    for m in (64, 256, 1024):
        t = 2 * np.pi * np.arange(m) / m
        C = conjugation_matrix(m)
        worst = max(np.max(np.abs(C @ np.cos(k * t) - np.sin(k * t))) for k in range(1, m // 2))
        all_passed &= _check(worst <= 1e-13, f"n={m}: max error on cos modes {worst:.2e}")

    # 2. Annulus against the product formulas
    print("\n2. 📐 ANNULUS ORACLES")
    print("-" * 40)
    for r in (0.3, 0.5, 0.7, 0.9):
        for slits, oracle, name in ((circ, annulus_R_circular, "circular"), (rad, annulus_R_radial, "radial")):
            got = evaluate(annulus, r * np.exp(0.4j), slits).R
            want = oracle(Q, r)
            rel = abs(got - want) / want
            all_passed &= _check(rel <= 1e-10, f"{name:8s} r={r}: R={got:.12f} rel error {rel:.1e}")

    # 3. Critical circle and radial monotonicity
    print("\n3. 🎯 CRITICAL CIRCLE AND RADIAL MONOTONICITY")
    print("-" * 40)
    h = 1e-4
    slope = (evaluate(annulus, 0.5 + h, circ).R - evaluate(annulus, 0.5 - h, circ).R) / (2 * h)
    all_passed &= _check(abs(slope) <= 1e-6, f"dR/dr at |alpha| = 0.5: {slope:.2e}")
    radii = np.linspace(0.26, 0.99, 30)
    values = np.array([evaluate(annulus, r, rad).R for r in radii])
    all_passed &= _check(bool(np.all(np.diff(values) < 0)), "radial R strictly decreasing on (0.26, 0.99)")
    all_passed &= _check(values[0] > 10 * evaluate(annulus, 0.5, rad).R, f"R(0.26) = {values[0]:.4f} blows up")

    # 4. Disk
    print("\n4. ⭕ DISK")
    print("-" * 40)
    disk = assemble_domain(make_circle(0.0, 1.0, n=256), [])
    rng = np.random.default_rng(1)
    points = 0.8 * np.sqrt(rng.random(25)) * np.exp(2j * np.pi * rng.random(25))
    worst = max(abs(evaluate(disk, a, SlitSpec(())).R - disk_R(a)) for a in points)
    all_passed &= _check(worst <= 1e-10, f"|R - (1 - |alpha|^2)| over 25 points: {worst:.1e}")

    # 5. Boundary conditions
    print("\n5. 🧭 BOUNDARY CONDITIONS")
    print("-" * 40)
    for slits, name in ((circ, "circular"), (rad, "radial")):
        result = evaluate(annulus, 0.35 - 0.2j, slits, MityukConfig(boundary_values=True))
        check = boundary_condition_residuals(annulus, slits, result.boundary_values)
        worst = max(check["outer_modulus_error"], *check["component_spread"])
        all_passed &= _check(worst <= 1e-8, f"annulus {name:8s}: worst boundary residual {worst:.1e}")
    spec = load_demo("three-circles")
    domain = spec.build(n)
    for mix in spec.mixes:
        slits = spec.slit_spec(mix)
        result = evaluate(domain, 0.3j, slits, MityukConfig(boundary_values=True))
        check = boundary_condition_residuals(domain, slits, result.boundary_values)
        worst = max(check["outer_modulus_error"], *check["component_spread"])
        all_passed &= _check(worst <= 1e-8, f"three-circles {mix:8s}: worst boundary residual {worst:.1e}")

    # 6. Critical points of a small sweep
    print("\n6. 🔍 CRITICAL POINTS (disk)")
    print("-" * 40)
    field = sweep(disk, SlitSpec(()), GridSpec(21, 21, (-0.6, 0.6, -0.6, 0.6)), sweep_cfg=SweepConfig(workers=1))
    report = morse_check(find_critical_points(field, REFINE_LOCAL, make_evaluator(disk, SlitSpec(()))), 0)
    all_passed &= _check(report.passed and report.n_m == 1, f"n_m = {report.n_m}, n_s = {report.n_s}")

    # 7. Polygons
    print("\n7. ⬛ POLYGONS")
    print("-" * 40)
    square = assemble_domain(make_polygon([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j], n=4096), [])
    got, want = evaluate(square, 0.0, SlitSpec(())).R, square_center_R()
    rel = abs(got - want) / want
    all_passed &= _check(rel <= 1e-9, f"square center: R={got:.12f} (closed form {want:.12f}) rel error {rel:.1e}")
    spec = load_demo("sq-circle")
    domain = spec.build(n=4096)
    for mix in spec.mixes:
        slits = spec.slit_spec(mix)
        result = evaluate(domain, 0.6j, slits, MityukConfig(boundary_values=True))
        check = boundary_condition_residuals(domain, slits, result.boundary_values)
        worst = max(check["outer_modulus_error"], *check["component_spread"])
        all_passed &= _check(worst <= 1e-8, f"sq-circle {mix:8s} (n=4096): worst boundary residual {worst:.1e}")

    print("\n" + "=" * 70)
    print("📋 FINAL VALIDATION RESULTS")
    print("=" * 70)
    if all_passed:
        print("🎉 ALL ACCEPTANCE CHECKS PASSED")
        print("\n🚀 NEXT:")
        print("   • python main.py demo three-circles --grid 51,51")
        print("   • python main.py demo rect-slit --mix radial")
    else:
        print("❌ ACCEPTANCE FAILED")
    return bool(all_passed)


if __name__ == "__main__":
    sys.exit(0 if comprehensive_validation() else 1)
