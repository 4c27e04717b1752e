"""Acceptance criteria 1-7.

Each test records a one-line PASS/FAIL verdict with the measured numbers; the
lines are printed in the terminal summary (see ``conftest.py``). Run directly
with ``python3 tests/test_acceptance.py`` to print them without pytest.
"""

import json
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from cosserat_cre import shapefn
from cosserat_cre.appendix import appendix_oracle, compare_with_oracle
from cosserat_cre.cli import main as cli_main
from cosserat_cre.element import build_element, nonlinear_force, nonlinear_jacobian, nonlinear_potential
from cosserat_cre.kinematics import DirectorState, frame_cubic, frame_exact, nu_from_phi, phi_from_nu
from cosserat_cre.section import Material, rect_section
from cosserat_cre.so3 import exp_rotvec, log_rotmat
from cosserat_cre.system import Mesh, PointLoad, build_system, cbt_frequencies, integrate, modal

LT, B, D, RHO, E = 0.3, 0.01, 0.005, 3000.0, 2.08e8
# published reference frequencies (rad/s): five-element CRE and classical beam theory
CRE = {
    "e1-e3": (29.7607, 186.358, 522.329, 1028.68, 1707.74),
    "e2-e3": (14.8827, 93.2838, 261.868, 516.914, 857.104),
}
CBT = {
    "e1-e3": (29.7665, 186.544, 522.329, 1023.56, 1692.01),
    "e2-e3": (14.8833, 93.2718, 261.164, 511.778, 846.007),
}
# bending stiffness of each plane
EI = {"e1-e3": "J22", "e2-e3": "J11"}

SEC = rect_section(B, D, Material(E, RHO))


def cold():
    """Drop cached shape solutions so timings include the full build."""
    shapefn.jet_shape.cache_clear()
    shapefn._linear_operator.cache_clear()


def verdict(record_property, n, checks):
    ok = all(c[1] for c in checks)
    detail = "; ".join(f"{name}={'ok' if good else 'FAIL'} ({info})" for name, good, info in checks)
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} | {detail}"
    if record_property is not None:
        record_property("acceptance", line)
    print(line)
    return ok, line


def criterion_1(rp=None):
    cold()
    t0 = time.perf_counter()
    r = modal(build_system(Mesh.uniform(LT, 5, SEC)))
    elapsed = time.perf_counter() - t0
    checks = []
    for plane, ref in CRE.items():
        w = r.plane(plane, 5)
        err = np.abs(w - ref) / np.asarray(ref)
        ok = len(w) == 5 and np.all(err[:3] <= 0.01) and np.all(err[3:] <= 0.02)
        checks.append((plane, bool(ok), "max err 1-3 %.3f%%, 4-5 %.3f%%" % (100 * err[:3].max(), 100 * err[3:].max())))
    checks.append(("runtime", elapsed < 1.0, "%.2f s" % elapsed))
    return verdict(rp, 1, checks)


def criterion_2(rp=None):
    checks = []
    for plane, ref in CBT.items():
        w = cbt_frequencies(LT, getattr(SEC, EI[plane]), SEC.mu, 5)
        err = np.abs(w - ref) / np.asarray(ref)
        checks.append((plane, bool(np.all(err <= 0.005)), "max err %.3f%%" % (100 * err.max())))
    return verdict(rp, 2, checks)


def criterion_3(rp=None):
    cold()
    t0 = time.perf_counter()
    errs = {}
    for n in range(1, 11):
        r = modal(build_system(Mesh.uniform(LT, n, SEC)))
        for plane in CRE:
            w = r.plane(plane, 3)
            cbt = cbt_frequencies(LT, getattr(SEC, EI[plane]), SEC.mu, len(w))
            errs[n, plane] = np.abs(w - cbt) / cbt
    elapsed = time.perf_counter() - t0
    one = errs[1, "e2-e3"][0]
    six = max(errs[6, p].max() for p in CRE)
    return verdict(
        rp,
        3,
        [
            ("one element", one <= 0.006, "%.4f%%" % (100 * one)),
            ("six elements modes 1-3", six <= 0.003, "max %.4f%%" % (100 * six)),
            ("runtime", elapsed < 5.0, "%.2f s" % elapsed),
        ],
    )


def criterion_4(rp=None):
    cold()
    t0 = time.perf_counter()
    rows = compare_with_oracle(build_element(SEC, LT), appendix_oracle(SEC, LT))
    elapsed = time.perf_counter() - t0
    mk = [r for r in rows if r.name[0] in "MK"]
    g = [r for r in rows if r.name.startswith("g")]
    fails = [f"{r.name} rel {r.rel_err:.3g}" for r in g if r.status == "fail"]
    flagged = [r for r in g if r.status == "flagged"]
    return verdict(
        rp,
        4,
        [
            ("M,K", all(r.status == "ok" for r in mk), "max rel %.2g" % max(r.rel_err for r in mk)),
            ("g unflagged", not fails, "%d ok, %d fail%s" % (sum(r.status == "ok" for r in g), len(fails),
                                                              (": " + ", ".join(fails)) if fails else "")),
            ("g flagged reported", all(np.isfinite([r.computed, r.oracle]).all() for r in flagged),
             "%d flagged" % len(flagged)),
            ("runtime", elapsed < 10.0, "%.2f s" % elapsed),
        ],
    )


def _printed_order_one(l):
    """Printed linear shape polynomials: ``{field: {variable index: sigma coefficients}}``."""
    a, b = 0, 6
    X, Y, Z, PX, PY, PZ = range(6)
    return {
        "x": {a + X: [1, 0, -3 / l**2, 2 / l**3], a + PY: [0, 1, -2 / l, 1 / l**2],
              b + X: [0, 0, 3 / l**2, -2 / l**3], b + PY: [0, 0, -1 / l, 1 / l**2]},
        "y": {a + Y: [1, 0, -3 / l**2, 2 / l**3], a + PX: [0, -1, 2 / l, -1 / l**2],
              b + Y: [0, 0, 3 / l**2, -2 / l**3], b + PX: [0, 0, 1 / l, -1 / l**2]},
        "z": {a + Z: [1, -1 / l], b + Z: [0, 1 / l]},
        "phi": {a + PZ: [1, -1 / l], b + PZ: [0, 1 / l]},
    }


def criterion_5(rp=None):
    l = LT
    sh = shapefn.jet_shape(SEC, l, 3)
    sp = sh.space
    worst = 0.0
    for f, table in _printed_order_one(l).items():
        part = sh.orders[f][0]
        for v in range(12):
            col = part.c[:, sp.degree_start[1] + v]
            ref = np.zeros(max(len(col), 4))
            ref[: len(table.get(v, []))] = table.get(v, [])
            ref = ref[: len(col)] if len(col) >= 4 else ref
            got = np.pad(col, (0, len(ref) - len(col)))
            worst = max(worst, np.abs(got - ref).max() / max(1.0, np.abs(ref).max()))
    rng = np.random.default_rng(5)
    c1_err = 0.0
    for _ in range(20):
        q = rng.normal(size=12)
        x2 = sh.orders["x"][1].c @ sp.monomial_values(q)
        Xa, PYa, Za, Xb, PYb, Zb = q[0], q[4], q[2], q[6], q[10], q[8]
        C1 = SEC.K33 / (20 * l**4 * SEC.J22) * (Zb - Za) * (2 * Xa - 2 * Xb + l * PYa + l * PYb)
        c1_err = max(c1_err, abs(x2[5] - C1) / abs(C1))
    return verdict(
        rp,
        5,
        [("order-1 coefficients", worst <= 1e-12, "max err %.2g" % worst),
         ("sigma^5 of x order 2", c1_err <= 1e-10, "max rel err %.2g" % c1_err)],
    )


def _tip_envelope(n, t_end=6.0, tol=1e-6):
    loads = [PointLoad(n, 0, 0.01, 8.0), PointLoad(n, 1, 0.005, 8.0, kind="sin")]
    ts = integrate(build_system(Mesh.uniform(LT, n, SEC), loads), t_end, tol=tol, output_dt=1e-3)
    late = ts.t >= 0.5 * t_end
    return np.abs(ts.dof(n, 0)[late]).max(), np.abs(ts.dof(n, 1)[late]).max()


def criterion_6(rp=None):
    coarse, fine = _tip_envelope(2), _tip_envelope(10)
    checks = []
    for name, a, b in zip(("X_b", "Y_b"), coarse, fine):
        rel = abs(a - b) / b
        checks.append((name, rel <= 0.05, "2 el %.4g, 10 el %.4g, diff %.2f%%" % (a, b, 100 * rel)))
    return verdict(rp, 6, checks)


def _cli_reruns_identical():
    base = {
        "version": 1,
        "geometry": {"length": LT, "width": B, "thickness": D},
        "material": {"E": E, "rho": RHO},
        "mesh": {"elements": 2},
        "restraints": [{"node": 0, "dofs": [0, 1, 2, 3, 4, 5]}],
        "modal": {"count": 3, "sweep": [1, 2]},
        "shapefn": {"order": 3},
        "loads": [{"node": 2, "dof": 0, "amplitude": 0.01, "frequency": 8.0, "phase": 0.0, "kind": "cos"}],
        "integrator": {"t_end": 0.05, "output_dt": 0.005},
        "simulate": {"phase_plane": True},
    }
    bad = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cfg = tmp / "c.json"
        cfg.write_text(json.dumps(base))
        for cmd in ("modal", "simulate", "shapefn", "element-dump", "verify-appendix"):
            outs = [tmp / f"{cmd}-{k}" for k in range(2)]
            codes = {cli_main([cmd, "--config", str(cfg), "--out", str(o)]) for o in outs}
            # verify-appendix signals the known oracle mismatch through its exit code
            if codes - {0, 4} or len(codes) != 1:
                bad.append(f"{cmd} (exit {sorted(codes)})")
                continue
            names = sorted(p.name for p in outs[0].iterdir())
            if not names or names != sorted(p.name for p in outs[1].iterdir()):
                bad.append(cmd)
            elif any((outs[0] / n).read_bytes() != (outs[1] / n).read_bytes() for n in names):
                bad.append(cmd)
    return bad


def criterion_7(rp=None):
    rng = np.random.default_rng(7)
    checks = []

    rt = 0.0
    for _ in range(1000):
        d = rng.normal(size=3)
        phi = d / np.linalg.norm(d) * rng.uniform(1e-6, np.pi - 1e-3)
        rt = max(rt, np.linalg.norm(log_rotmat(exp_rotvec(phi)) - phi) / np.linalg.norm(phi))
    checks.append(("SO(3) round trip", rt <= 1e-10, "%.2g" % rt))

    orth = 0.0
    for _ in range(1000):
        d3 = rng.normal(size=3)
        d3 /= np.linalg.norm(d3)
        if d3[2] < -0.99:
            continue
        R = frame_exact(DirectorState(*d3, rng.uniform(-np.pi, np.pi))).matrix
        orth = max(orth, np.abs(R.T @ R - np.eye(3)).max())
    checks.append(("frame orthonormality", orth <= 1e-12, "%.2g" % orth))

    amps = np.array([0.01, 0.02, 0.04])
    errs = []
    for a in amps:
        st = DirectorState(a, a, np.sqrt(1 - 2 * a * a), a)
        errs.append(np.abs(frame_exact(st).matrix - frame_cubic(st).matrix).max())
    slope = np.polyfit(np.log(amps), np.log(errs), 1)[0]
    checks.append(("cubic directors order 4", 3.5 <= slope <= 4.5, "slope %.2f" % slope))

    amps = np.array([0.0125, 0.025, 0.05])
    slopes, worst = [], 0.0
    for _ in range(50):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        res = [np.abs(np.array(nu_from_phi(*phi_from_nu(*(a * d)))) - a * d).max() for a in amps]
        worst = max(worst, res[-1])
        slopes.append(np.polyfit(np.log(amps), np.log(res), 1)[0])
    low = min(slopes)
    checks.append(("map composition order 5", low >= 4.5 and worst <= 1e-6,
                   "min slope %.2f over 50 directions, residual at 0.05 %.2g" % (low, worst)))

    ops = build_element(SEC, LT)
    sym, fd = 0.0, 0.0
    for _ in range(5):
        q = rng.normal(scale=1e-2, size=12)
        J = nonlinear_jacobian(ops, q)
        sym = max(sym, np.linalg.norm(J - J.T) / np.linalg.norm(J))
        h = 1e-6
        grad = np.array([(nonlinear_potential(ops, q + h * e) - nonlinear_potential(ops, q - h * e)) / (2 * h)
                         for e in np.eye(12)])
        g = nonlinear_force(ops, q)
        fd = max(fd, np.linalg.norm(grad - g) / np.linalg.norm(g))
    checks.append(("g symmetry", sym <= 1e-8, "%.2g" % sym))
    checks.append(("g gradient", fd <= 1e-6, "%.2g" % fd))

    tol = 1e-8
    sys2 = build_system(Mesh.uniform(LT, 2, SEC))
    r = modal(sys2)
    x = r.shapes[sys2.free, 0]
    x = 1e-4 * x / np.abs(x).max()
    ts = integrate(sys2, 10 * 2 * np.pi / r.omega[0], tol=tol, q0=x)
    En = np.array([sys2.energy(*ts.full(k)) for k in range(0, len(ts.t), 5)])
    drift = np.abs(En - En[0]).max() / En[0]
    checks.append(("energy drift", drift <= 100 * tol, "%.1f tol" % (drift / tol)))

    bad = _cli_reruns_identical()
    checks.append(("CLI reruns", not bad, "differing: " + (", ".join(bad) if bad else "none")))
    return verdict(rp, 7, checks)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 7])
def test_criterion(n, record_property):
    ok, line = globals()[f"criterion_{n}"](record_property)
    assert ok, line


@pytest.mark.slow
def test_criterion_6(record_property):
    ok, line = criterion_6(record_property)
    assert ok, line


if __name__ == "__main__":
    for k in range(1, 8):
        globals()[f"criterion_{k}"]()
