"""Acceptance criteria; each test records one PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) or through pytest; the
lines are printed in the "acceptance criteria" summary section.
"""

if __name__ == "__main__":
    # hand over to pytest before anything imports the plugins it rewrites
    import sys

    import pytest
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider", *sys.argv[1:]]))

import functools
import math
import time

import numpy as np
import pytest

from chaincsg.arrangement3d import euler_defect, space_arrangement
from chaincsg.boolean import BitChain, boundary_chain, brep_extract, eval_bitwise
from chaincsg.chain import characteristic_matrix, check_exactness, unsigned_boundary2
from chaincsg.dsl import parse_csg
from chaincsg.geometry import rotate, translate
from chaincsg.io import format_lar, format_obj, parse_lar, parse_obj, parse_svg
from chaincsg.pipeline import arrange_models, arrange_shapes, d3_plus_report, evaluate
from chaincsg.primitives import cube, cuboid

import conftest
from conftest import DATA1_EV, DATA1_FV, random_box_scene, three_cube_models
from test_chain import EF_T, K_EV, K_FV_T


def criterion(num, title, limit):
    """Time the test, check the limit and record a PASS/FAIL line."""
    def deco(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                detail = fn(*args, **kwargs)
                dt = time.perf_counter() - t0
                assert dt < limit, f"took {dt:.2f} s, limit {limit} s"
            except BaseException as e:
                dt = time.perf_counter() - t0
                conftest.ACCEPTANCE[num] = f"FAIL AC{num} {title} ({dt:.2f} s): {e}".splitlines()[0]
                raise
            conftest.ACCEPTANCE[num] = f"PASS AC{num} {title} ({dt:.2f} s < {limit} s): {detail}"
        return run
    return deco


def _zb(cells):
    return [[i - 1 for i in c] for c in cells]


@criterion(1, "Data-1 reproduction", 1)
def test_ac1_data1():
    K1 = characteristic_matrix(_zb(DATA1_EV))
    K2 = characteristic_matrix(_zb(DATA1_FV))
    assert np.array_equal(K1.toarray(), K_EV)
    assert np.array_equal(K2.toarray().T, K_FV_T)
    EF = unsigned_boundary2(K1, K2)
    assert np.array_equal(EF.toarray().T, EF_T)
    b1 = np.nonzero((EF @ np.array([1, 1, 1])) % 2)[0] + 1
    b2 = np.nonzero((EF @ np.array([1, 1, 0])) % 2)[0] + 1
    assert b1.tolist() == [1, 2, 7, 8, 9, 12]
    assert b2.tolist() == list(range(1, 13))
    return "K_EV 14x12, K_FV 12x3, b1={1,2,7,8,9,12}, b2={1..12}"


# structure of all 16 terms of the algebra over (c1 = Ω, c2 = A only, c3 = A∩B, c4 = B only)
TABLE2 = [
    ("(! (- A A))", "1111"), ("A", "0110"), ("B", "0011"), ("(+ A B)", "0111"),
    ("(! (+ A B))", "1000"), ("(- A B)", "0100"), ("(* A B)", "0010"), ("(- B A)", "0001"),
    ("(+ (- A B) (- B A))", "0101"), ("(! (- A B))", "1011"), ("(! B)", "1100"),
    ("(! (- B A))", "1110"), ("(! A)", "1001"), ("(! (+ (- A B) (- B A)))", "1010"),
    ("(! (* A B))", "1101"), ("(- A A)", "0000"),
]

TWO_RECTS = """<svg xmlns="http://www.w3.org/2000/svg">
  <rect id="A" x="0" y="0" width="2" height="1"/>
  <rect id="B" x="1" y="0.5" width="2" height="1"/>
</svg>"""


@criterion(2, "2D two-rectangle algebra", 1)
def test_ac2_two_rectangles():
    scene = arrange_shapes(parse_svg(TWO_RECTS))
    bm = scene.boolmatrix
    assert bm.bits.shape == (4, 3)  # 3 bounded atoms + outer, columns Ω A B
    rows = [tuple(r) for r in bm.bits[1:, 1:].tolist()]
    # up to relabeling: one atom per kind A-only, A∩B, B-only; A = c2+c3, B = c3+c4
    kinds = {(True, False): 2, (True, True): 3, (False, True): 4}
    assert sorted(rows) == sorted(kinds)
    label = [kinds[r] for r in rows]  # atom k is c_label[k]
    cols = bm.chains()
    assert set(cols["A"].indices()) == {k for k, c in enumerate(label) if c in (2, 3)}
    assert set(cols["B"].indices()) == {k for k, c in enumerate(label) if c in (3, 4)}
    seen = set()
    for text, bits in TABLE2:
        r = eval_bitwise(parse_csg(text), cols)
        got = ["0"] * 4
        got[0] = "1" if r.outer else "0"
        for k in r.indices():
            got[label[k] - 1] = "1"
        assert "".join(got) == bits, f"{text}: {''.join(got)} != {bits}"
        seen.add(bits)
    assert len(seen) == 16
    assert eval_bitwise(parse_csg("(- A B)"), cols).count() == 1
    return "4 atoms; A = c2+c3, B = c3+c4, all 16 terms match"


EXPECTED_BOOLMATRIX = np.array([
    [1, 0, 0, 0], [0, 0, 0, 1], [0, 1, 1, 0], [0, 1, 1, 1],
    [0, 1, 0, 0], [0, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 1]], dtype=bool)


@criterion(3, "three-cube end-to-end", 30)
def test_ac3_three_cubes():
    scene = arrange_models(list(zip("ABC", three_cube_models())))
    bits = scene.boolmatrix.bits
    assert bits.shape == (8, 4)
    assert bits[0].tolist() == EXPECTED_BOOLMATRIX[0].tolist()
    assert sorted(map(tuple, bits.tolist())) == sorted(map(tuple, EXPECTED_BOOLMATRIX.tolist()))
    assert evaluate(scene, "(- A B C)").chain.count() == 1
    res = evaluate(scene, "(+ A B C)")
    assert res.counts == (38, 57, 21) and res.euler == 2
    assert np.count_nonzero(res.boundary) == 21
    assert not np.any(scene.complex.d2 @ res.boundary)
    return f"boolmatrix matches up to row order; union {res.counts}, chi={res.euler}"


def _scene_signature(scene):
    c = scene.complex
    return (c.V.tobytes(), c.d1, c.d2, c.d3, scene.boolmatrix.bits.tobytes())


@criterion(4, "exactness property suite", 300)
def test_ac4_random_scenes():
    for seed in range(50):
        models, _ = random_box_scene(seed)
        named = [(f"X{k + 1}", m) for k, m in enumerate(models)]
        seq = arrange_models(named, threads=1, seed=seed)
        par = arrange_models(named, threads=4, seed=seed)
        c = seq.complex
        assert check_exactness(c.d1, c.d2)[0], f"seed {seed}: d1 d2 != 0"
        assert check_exactness(c.d2, c.d3)[0], f"seed {seed}: d2 d3 != 0"
        rep = d3_plus_report(c.d2, c.d3_plus)
        assert rep["d3_plus_cycles"], f"seed {seed}: d3_plus column is not a cycle"
        assert rep["d3_plus_rows_two_opposite"], f"seed {seed}: d3_plus row structure"
        assert c.meta["euler"] == c.meta["euler_defect"], f"seed {seed}: Euler identity"
        assert _scene_signature(seq) == _scene_signature(par), f"seed {seed}: threads differ"
    return "50 seeded scenes, zero violations"


@criterion(5, "rotated concentric cubes", 120)
def test_ac5_rotated_concentric():
    details = []
    for seed in range(3):
        rng = np.random.default_rng(seed)
        maps = [rotate(*rng.uniform(0, 2 * math.pi, 3)) @ translate(-.5, -.5, -.5)
                for _ in range(3)]
        scene = arrange_models([(n, cube().transformed(M)) for n, M in zip("ABC", maps)],
                               seed=seed)
        arr = scene.complex
        V, E, F, C = arr.counts()
        euler = V - E + F - C
        if arr.meta["contractible"]:
            assert euler == 0, f"seed {seed}: V-E+F-C = {euler}"
        else:
            # holed faces / solid-torus atoms shift the identity by a computable defect
            defect = euler_defect(arr.d2, arr.EV, arr.d3_with_outer.columns())
            assert euler == defect, f"seed {seed}: chi {euler} vs defect {defect}"
        cols = scene.boolmatrix.chains()
        assert (cols["A"] | cols["B"] | cols["C"]).count() == arr.d3.ncols
        inter = cols["A"] & cols["B"] & cols["C"]
        assert inter.count() > 0
        for k in inter.indices():
            for M in maps:
                p = M.inverse().apply([arr.atoms[k].witness])[0]
                assert np.all((p > 0) & (p < 1)), f"seed {seed}: witness {k} outside"
        details.append(f"seed {seed}: {(V, E, F, C)} chi={euler}"
                       f"{'' if arr.meta['contractible'] else ' (torus atoms)'}")
    return "; ".join(details)


@criterion(6, "nested-cube cavity", 5)
def test_ac6_nested_cubes():
    arr = space_arrangement([cuboid((2, 2, 2), (-1, -1, -1)), cuboid((1, 1, 1), (-.5, -.5, -.5))])
    assert arr.d3.ncols == 2
    shell = [a for a in arr.atoms if len(a.column) == 12]
    assert len(shell) == 1
    col = arr.d3.toarray()[:, shell[0].index]
    assert np.count_nonzero(col) == 12
    assert not np.any(arr.d2 @ col)
    return "2 bounded atoms; shell column has 12 faces and is a 2-cycle"


@criterion(7, "bitwise algebra properties", 5)
def test_ac7_bitwise_laws():
    rng = np.random.default_rng(7)
    for _ in range(10 ** 4):
        n = int(rng.integers(0, 65))
        A, B, C = (BitChain.from_bools(rng.random(n) < .5, bool(rng.random() < .5))
                   for _ in range(3))
        assert ~(A | B) == ~A & ~B and ~(A & B) == ~A | ~B
        assert A | A == A and A & A == A
        assert A | (A & B) == A and A & (A | B) == A
        assert A - B == A & ~B
        assert A & (B | C) == (A & B) | (A & C)
    return "10^4 random cases, De Morgan/idempotence/absorption/diff"


SVG_BOX = """<svg xmlns="http://www.w3.org/2000/svg">
  <rect id="box" x="0" y="0" width="10" height="8"/>
  <rect id="r" x="1" y="1" width="3" height="2"/>
  <polygon id="p" points="6,1 9,2 8,6 6,5"/>
  <path id="q" d="M 2 5 l 2 0 l -1 2 z"/>
</svg>"""


@criterion(8, "I/O round trips", 10)
def test_ac8_io():
    models = three_cube_models()
    back = [parse_lar(format_lar(m)) for m in models]
    a = space_arrangement(models)
    b = space_arrangement(back)
    assert a.counts() == b.counts()
    mesh = brep_extract(boundary_chain(BitChain.from_bools([True] * a.d3.ncols), a.d3), a)
    V, T = parse_obj(format_obj(mesh.V, mesh.T))
    assert V.shape == mesh.V.shape and T.shape == mesh.T.shape
    assert np.array_equal(T, mesh.T)
    scene = arrange_shapes(parse_svg(SVG_BOX))
    res = evaluate(scene, "(- box r p q)")
    assert len(res.components) == 4
    assert all(v - e + f == 2 for v, e, f in res.components)
    return (f"LAR/OBJ counts {a.counts()} / {len(T)} triangles; "
            f"SVG box minus 3 shapes: {len(res.components)} components, each V-E+F=2")

