"""Compare the numba and pure-numpy paths of the hot kernels.

Kernel timings run both variants in one process. End-to-end timings (element
build and a short simulation) run in child processes, once with
``CRE_DISABLE_NUMBA=1`` and once without, since the switch is read at import.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np


def kernel_timings(repeat: int) -> dict:
    from cosserat_cre import USE_NUMBA
    from cosserat_cre.jets import _polymul_loops, _polymul_numpy, jet_space
    from cosserat_cre.section import Material, rect_section
    from cosserat_cre.system import (
        Mesh,
        _element_tables,
        _nonlinear_loops,
        _nonlinear_numpy,
        build_system,
    )

    if not USE_NUMBA:
        raise SystemExit("kernel comparison needs numba enabled")
    rng = np.random.default_rng(0)
    out = {}

    sp = jet_space(12, 4)
    a, b = rng.normal(size=(3, sp.size)), rng.normal(size=(3, sp.size))
    args = (sp.product_table, sp.degrees, sp.max_degree, 3)
    _polymul_loops(a, b, *args)
    out["polymul (12 vars, degree 4)"] = (
        min(timeit.repeat(lambda: _polymul_loops(a, b, *args), number=20, repeat=repeat)) / 20,
        min(timeit.repeat(lambda: _polymul_numpy(a, b, *args), number=20, repeat=repeat)) / 20,
    )

    sec = rect_section(0.01, 0.005, Material(2.08e8, 3000.0))
    sys10 = build_system(Mesh.uniform(0.3, 10, sec))
    tabs = _element_tables(sys10)
    sp3 = jet_space(12, 3)
    nf = len(sys10.free)
    q = rng.normal(scale=1e-3, size=nf)
    f = np.zeros(nf)
    nl = (q, f, *tabs, sp3.parent, sp3.pvar)
    _nonlinear_loops(*nl)
    out["nonlinear force (10 elements)"] = (
        min(timeit.repeat(lambda: _nonlinear_loops(*nl), number=200, repeat=repeat)) / 200,
        min(timeit.repeat(lambda: _nonlinear_numpy(*nl), number=200, repeat=repeat)) / 200,
    )

    return out


_CHILD = """
import json, time
import numpy as np
from cosserat_cre import shapefn
from cosserat_cre.section import Material, rect_section
from cosserat_cre.system import Mesh, PointLoad, build_system, integrate
sec = rect_section(0.01, 0.005, Material(2.08e8, 3000.0))
loads = [PointLoad(2, 0, 0.01, 8.0), PointLoad(2, 1, 0.005, 8.0, kind="sin")]
build_system(Mesh.uniform(0.3, 2, sec), loads)
integrate(build_system(Mesh.uniform(0.3, 2, sec), loads), 0.01)  # compile or warm up
shapefn.jet_shape.cache_clear(); shapefn._linear_operator.cache_clear()
t0 = time.perf_counter(); s = build_system(Mesh.uniform(0.3, 2, sec), loads); t1 = time.perf_counter()
integrate(s, 0.5, tol=1e-8); t2 = time.perf_counter()
print(json.dumps({"element build": t1 - t0, "simulate 0.5 s, 2 elements": t2 - t1}))
"""


def end_to_end() -> dict:
    res = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, CRE_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", _CHILD], env=env, capture_output=True, text=True, check=True)
        res[label] = json.loads(out.stdout.strip().splitlines()[-1])
    return {k: (res["numba"][k], res["numpy"][k]) for k in res["numba"]}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--skip-end-to-end", action="store_true")
    args = p.parse_args(argv)
    rows = kernel_timings(args.repeat)
    if not args.skip_end_to_end:
        rows.update(end_to_end())
    print(f"{'case':34s} {'numba [s]':>12s} {'numpy [s]':>12s} {'speedup':>9s}")
    for name, (fast, slow) in rows.items():
        print(f"{name:34s} {fast:12.3e} {slow:12.3e} {slow / fast:9.1f}")


if __name__ == "__main__":
    main()
