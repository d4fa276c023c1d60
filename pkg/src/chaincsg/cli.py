"""Command-line interface.

Exit status: 0 success, 2 validation error, 3 geometric degeneracy,
4 I/O error.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .assembly import evaluate_assembly, read_assembly
from .chain import LarModel
from .errors import ChainCSGError, ValidationError
from .io import read_complex, read_svg, write_complex, write_lar, write_obj
from .pipeline import (arrange_models, arrange_shapes, evaluate, from_container,
                       invariant_report, to_container)

log = logging.getLogger("chaincsg")


def _common(p):
    p.add_argument("--epsilon", type=float, default=1e-6, help="vertex identification tolerance")
    p.add_argument("--seed", type=int, default=0, help="seed for ray directions")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--report", choices=("json", "text"), default="text")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    ap = argparse.ArgumentParser(prog="chaincsg", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("arrange2d", help="planar arrangement of an SVG drawing")
    p.add_argument("--svg", required=True)
    p.add_argument("--out")
    _common(p)

    p = sub.add_parser("arrange3d", help="space arrangement of an assembly file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    _common(p)

    p = sub.add_parser("eval", help="evaluate a CSG expression")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--complex")
    src.add_argument("--in", dest="input")
    src.add_argument("--svg")
    p.add_argument("--expr", required=True, help="expression text, or @file")
    p.add_argument("--out")
    _common(p)

    for name, hlp in (("atoms", "dump atoms and their classification"),
                      ("check", "run the invariant suite")):
        p = sub.add_parser(name, help=hlp)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--complex")
        src.add_argument("--in", dest="input")
        src.add_argument("--svg")
        _common(p)
    return ap


def _scene(args):
    if getattr(args, "complex", None):
        return from_container(read_complex(args.complex))
    if getattr(args, "svg", None):
        return arrange_shapes(read_svg(args.svg), args.epsilon)
    named = evaluate_assembly(read_assembly(args.input))
    if any(m.dim != 3 for _, m in named):
        raise ValidationError("assembly must contain 3D solids only")
    return arrange_models(named, args.epsilon, args.threads, args.seed)


def _counts(scene):
    c = scene.complex
    out = {"vertices": len(c.V), "edges": c.d1.ncols, "faces": c.d2.ncols}
    if scene.dim == 3:
        out["cells"] = c.d3.ncols + 1
        out["atoms"] = c.d3.ncols
    else:
        out["atoms"] = c.d2.ncols
    return out


def cmd_arrange(args):
    if args.command == "arrange2d":
        scene = arrange_shapes(read_svg(args.svg), args.epsilon)
    else:
        scene = _scene(args)
    if args.out:
        write_complex(to_container(scene), args.out)
    rep = {"command": args.command, "dim": scene.dim, **_counts(scene),
           "solids": scene.boolmatrix.names}
    if scene.dim == 3:
        rep.update(invariant_report(scene.complex))
        rep["contractible"] = bool(scene.complex.meta.get("contractible"))
    return rep


def cmd_eval(args):
    text = args.expr
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            from .errors import ChainIOError
            raise ChainIOError(f"cannot read {text[1:]}: {e}") from e
    if not text.strip():
        raise ValidationError("empty expression")
    scene = _scene(args)
    res = evaluate(scene, text)
    if args.out:
        if res.mesh is not None:
            write_obj(res.mesh, args.out)
        else:
            c = scene.complex
            edges = np.nonzero(res.boundary)[0]
            EV = [tuple(c.EV[e][::int(res.boundary[e])]) for e in edges]
            used = sorted({v for e in EV for v in e})
            remap = {v: i for i, v in enumerate(used)}
            write_lar(LarModel(c.V[used], [(remap[a], remap[b]) for a, b in EV]), args.out)
    from .dsl import to_string
    rep = {"command": "eval", "expr": to_string(res.expr), "atoms": res.chain.indices().tolist(),
           "natoms": int(res.chain.count()), "boundary_cells": int(np.count_nonzero(res.boundary)),
           "counts": list(res.counts), "euler": res.euler}
    if res.components is not None:
        rep["component_euler"] = [v - e + f for v, e, f in res.components]
    if res.mesh is not None:
        rep["triangles"] = len(res.mesh.T)
        rep["volume"] = res.mesh.volume()
    return rep


def cmd_atoms(args):
    scene = _scene(args)
    bm = scene.boolmatrix
    rows = []
    c = scene.complex
    atoms = getattr(c, "atoms", None)
    wits = getattr(c, "witnesses", None)
    for k in range(bm.natoms):
        row = {"atom": k + 1, "in": [n for j, n in enumerate(bm.names) if bm.bits[k + 1, j + 1]]}
        if atoms is not None:
            a = atoms[k]
            row.update(faces=len(a.column), volume=a.volume, witness=a.witness.tolist())
        elif wits is not None:
            row["witness"] = list(map(float, wits[k]))
        rows.append(row)
    return {"command": "atoms", "names": bm.names, **_counts(scene), "atoms_table": rows}


def cmd_check(args):
    scene = _scene(args)
    c = scene.complex
    rep = {"command": "check", **_counts(scene)}
    if scene.dim == 3:
        rep.update(invariant_report(c))
    else:
        from .chain import check_exactness
        rep["d1d2_zero"] = check_exactness(c.d1, c.d2)[0]
    b = scene.boolmatrix.bits
    rep["partition"] = bool(np.all(b.any(axis=1)))
    rep["ok"] = all(v for k, v in rep.items() if isinstance(v, bool))
    if scene.dim == 3 and "euler" in rep and getattr(c, "meta", {}).get("contractible"):
        rep["ok"] = rep["ok"] and rep["euler"] == 0
    if not rep["ok"]:
        from .errors import ExactnessError
        raise ExactnessError("invariant check failed: " + json.dumps(rep))
    return rep


def _print(rep, fmt):
    if fmt == "json":
        print(json.dumps(rep, indent=2, default=float))
        return
    for k, v in rep.items():
        if k == "atoms_table":
            for row in v:
                print("  " + " ".join(f"{a}={b}" for a, b in row.items()))
        else:
            print(f"{k}: {v}")


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"arrange2d": cmd_arrange, "arrange3d": cmd_arrange, "eval": cmd_eval,
               "atoms": cmd_atoms, "check": cmd_check}[args.command]
    try:
        rep = handler(args)
    except ChainCSGError as e:
        print(f"chaincsg {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    _print(rep, args.report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
