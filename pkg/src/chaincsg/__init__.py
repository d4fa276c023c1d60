"""Variadic CSG evaluation on space arrangements and sparse chain complexes."""

__version__ = "0.1.0"

from .chain import (ChainComplex, LarModel, SparseSignedMatrix, boundary1,
                    characteristic_matrix, check_exactness, euler_characteristic,
                    unsigned_boundary2)
from .geometry import AffineMap, Box, IntervalTreeSet, rotate, scale, translate
from .arrangement2d import planar_arrangement
from .arrangement3d import euler_defect, space_arrangement
from .primitives import cube, cuboid, cuboid_grid, cylinder, polygon, rect, sphere
from .boolean import (BitChain, BoolMatrix, boundary_chain, boundary_counts,
                      brep_extract, classify_atoms, eval_bitwise)
from .dsl import parse_csg, parse_program, to_string
from .assembly import evaluate_assembly, parse_assembly, read_assembly
from .errors import (ChainCSGError, ClassificationError, DegenerateFaceError,
                     ExactnessError, GeometryError, NonRegularError,
                     NonWatertightError, ParseError, UnboundedResultError,
                     ValidationError)

__all__ = [
    "AffineMap", "BitChain", "BoolMatrix", "Box", "ChainCSGError", "ChainComplex",
    "ClassificationError", "DegenerateFaceError", "ExactnessError", "GeometryError",
    "IntervalTreeSet", "LarModel", "NonRegularError", "NonWatertightError",
    "ParseError", "SparseSignedMatrix", "UnboundedResultError", "ValidationError",
    "boundary1", "boundary_chain", "boundary_counts", "brep_extract",
    "characteristic_matrix", "check_exactness", "classify_atoms", "euler_characteristic",
    "eval_bitwise", "evaluate_assembly", "parse_assembly", "parse_csg", "parse_program",
    "planar_arrangement", "read_assembly", "rotate", "scale", "space_arrangement",
    "to_string", "translate", "unsigned_boundary2", "cube", "cuboid", "cuboid_grid",
    "cylinder", "euler_defect", "polygon", "rect", "sphere",
]
