#!/usr/bin/env python3
"""Smoke test for the nlburgers_py extension module.

Builds the cdylib if needed, imports it straight from the cargo target
directory, and checks a handful of end-to-end facts: conservation, the
Godunov support property, kernel weight normalization and the exact-solution
plumbing.

Usage: python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def import_module():
    try:
        import nlburgers_py
        return nlburgers_py
    except ImportError:
        pass
    subprocess.run(
        ["cargo", "build", "-p", "nlburgers-py", "--release"], cwd=ROOT, check=True
    )
    libdir = ROOT / "target" / "release"
    src = libdir / "libnlburgers_py.so"
    dst = libdir / "nlburgers_py.so"
    if src.exists():
        shutil.copy2(src, dst)
    sys.path.insert(0, str(libdir))
    import nlburgers_py
    return nlburgers_py


def main():
    m = import_module()

    # kernel weights sum to one and the normalization matches the closed form
    gamma, ell = m.quadrature_weights("even", 0.2, 0.02)
    assert abs(sum(gamma) - 1.0) < 1e-10, sum(gamma)
    assert len(gamma) == 2 * ell
    alpha = m.normalization_constant("even", 0.2)
    closed = 16.0 / (5.0 * math.pi * 0.2**6)
    assert abs(alpha - closed) / closed < 1e-8

    # local Godunov run: conservation and agreement with the entropy solution
    traj = m.solve("local", "godunov", "B", h=0.01, t_final=1.0, snapshots=[1.0])
    assert traj.n_steps == 600
    drift = max(abs(mm - traj.total_mass[0]) for mm in traj.total_mass)
    assert drift < 1e-12, drift
    rho = traj.snapshots[-1]
    err = sum(
        abs(r - m.exact_local("B", 1.0, x)) * 0.01 for x, r in zip(traj.x, rho)
    )
    assert err < 0.05, err

    # nonlocal Godunov with the left-support kernel never moves mass past 0
    traj = m.solve(
        "nonlocal", "godunov", "B", h=0.02, t_final=0.5,
        kernel="left", eps=0.2, snapshots=[0.5],
    )
    assert max(traj.right_support_max) == 0.0

    # experiment runner writes a manifest
    with tempfile.TemporaryDirectory() as out:
        m.run_test("T5", out)
        assert (Path(out) / "t5_manifest.json").exists()

    # flux sanity
    assert m.godunov_local_flux(-1.0, 1.0) == 0.0
    assert m.godunov_local_flux(1.0, -1.0) == 1.0
    assert m.CFL_RATIO == 1.0 / 6.0

    print("smoke test: OK")


if __name__ == "__main__":
    main()
