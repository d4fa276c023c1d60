"""Numba vs numpy kernel backends, plus an end-to-end arrangement timing.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]

Each kernel is timed with both implementations on the same inputs (the
numba variant after one warm-up call, so JIT compilation is excluded) and
the outputs are checked for agreement.  The end-to-end section runs the
three-cube scene and a random box scene in subprocesses with and without
``CHAINCSG_DISABLE_NUMBA=1``.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from chaincsg import _kernels as K
from chaincsg.geometry import FaceTable, plane_frame
from chaincsg.primitives import sphere


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_segment_splits(n, repeat, rng):
    S = rng.uniform(0, 100, (n, 4))
    P, R = S[:, :2], S[:, 2:] - S[:, :2]
    a, b = K.segment_splits_numba(P, R, 1e-9), K.segment_splits_numpy(P, R, 1e-9)
    assert np.array_equal(a[0], b[0]) and np.allclose(a[1], b[1])
    return (_best(lambda: K.segment_splits_numba(P, R, 1e-9), repeat),
            _best(lambda: K.segment_splits_numpy(P, R, 1e-9), repeat))


def bench_points_in_polygon(n, repeat, rng):
    ang = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    poly = np.c_[np.cos(ang), np.sin(ang)] * (1 + 0.3 * np.sin(7 * ang))[:, None]
    segs = np.hstack([poly, np.roll(poly, -1, axis=0)])
    pts = rng.uniform(-1.5, 1.5, (n, 2))
    a, b = K.points_in_polygon_numba(pts, segs, 1e-12), K.points_in_polygon_numpy(pts, segs, 1e-12)
    assert np.array_equal(a, b)
    return (_best(lambda: K.points_in_polygon_numba(pts, segs, 1e-12), repeat),
            _best(lambda: K.points_in_polygon_numpy(pts, segs, 1e-12), repeat))


def bench_ray_crossings(n, repeat, rng):
    m = sphere(32, 16)
    frames, segs = [], []
    for f in m.FV:
        q = m.V[list(f)]
        frames.append(plane_frame(q))
        segs.append(np.stack([q, np.roll(q, -1, axis=0)], axis=1))
    t = FaceTable(frames, segs)
    faces = np.arange(len(m.FV))
    rays = [(p, d / np.linalg.norm(d)) for p, d in
            zip(rng.uniform(-.9, .9, (n, 3)) / np.sqrt(3), rng.normal(size=(n, 3)))]

    def run(fn):
        return [fn(p, d, faces, t.normals, t.origins, t.U, t.W, t.ptr, t.segs, 1e-12)
                for p, d in rays]
    assert run(K.ray_crossings_numba) == run(K.ray_crossings_numpy)
    return _best(lambda: run(K.ray_crossings_numba), repeat), \
        _best(lambda: run(K.ray_crossings_numpy), repeat)


_E2E = r"""
import json, sys, time
sys.path.insert(0, {tests!r})
from conftest import random_box_scene, three_cube_models
from chaincsg import _kernels
from chaincsg.pipeline import arrange_models
out = {{"backend": _kernels.BACKEND}}
arrange_models([("W", three_cube_models()[0])])  # warm-up (JIT compilation)
for name, models in (("three_cubes", three_cube_models()), ("random_boxes", random_box_scene(3, 4, 4)[0])):
    t = time.perf_counter()
    arrange_models([(f"X{{k}}", m) for k, m in enumerate(models)])
    out[name] = time.perf_counter() - t
print(json.dumps(out))
"""


def bench_end_to_end():
    tests = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests")
    res = {}
    for disable in ("0", "1"):
        env = dict(os.environ, CHAINCSG_DISABLE_NUMBA=disable)
        p = subprocess.run([sys.executable, "-c", _E2E.format(tests=tests)], env=env,
                           capture_output=True, text=True, check=True)
        r = json.loads(p.stdout.strip().splitlines()[-1])
        res[r.pop("backend")] = r
    return res


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="small inputs")
    args = ap.parse_args(argv)
    if not K._HAVE_NUMBA:
        sys.exit("numba is not installed; both variants would run the same numpy code")
    rng = np.random.default_rng(0)
    sizes = {"segment_splits": 200 if args.quick else 1000,
             "points_in_polygon": 2000 if args.quick else 20000,
             "ray_crossings": 100 if args.quick else 1000}
    print(f"{'kernel':<20}{'n':>8}{'numba [ms]':>14}{'numpy [ms]':>14}{'speed-up':>10}")
    for name, fn in (("segment_splits", bench_segment_splits),
                     ("points_in_polygon", bench_points_in_polygon),
                     ("ray_crossings", bench_ray_crossings)):
        tn, tp = fn(sizes[name], args.repeat, rng)
        print(f"{name:<20}{sizes[name]:>8}{1e3 * tn:>14.2f}{1e3 * tp:>14.2f}{tp / tn:>9.1f}x")
    print()
    print(f"{'scene':<20}{'numba [s]':>14}{'numpy [s]':>14}")
    e2e = bench_end_to_end()
    for scene in ("three_cubes", "random_boxes"):
        print(f"{scene:<20}{e2e['numba'][scene]:>14.3f}{e2e['numpy'][scene]:>14.3f}")


if __name__ == "__main__":
    main()
