"""Foliations of the strip and the parabolic strip and the resulting V and B."""
from .build import (balance_roots, build_all_left, build_all_right, build_angle_square,
                    build_corner, build_cup_angle, build_foliation_auto, build_symmetric_chord,
                    solve_balance)
from .chords import (ChordalSolution, Herringbone, A_residual, cup_origins, cup_residual,
                     differentials, grow_cup, project, solve_A, solve_cup)
from .fans import LEFT, RIGHT, TangentSolution, certificate_violation, infinite_slope, ode_residual, solve_m
from .gluing import GLUE_TOL, GluingReport, check_c1_gluing
from .patches import (AffinePatch, BilinearPatch, angle_coeffs, balance_residual, corner_coeffs,
                      corner_gluing_slopes, multifigure_coeffs, square_coeffs, trolleybus_coeffs)
from .serialize import FORMAT, dumps, from_document, load, loads, save, to_document
from .spec import REGIMES, FoliationSpec, Interface, Piece, eval_B, eval_V

__all__ = [
    "A_residual", "AffinePatch", "FORMAT", "GLUE_TOL", "BilinearPatch", "ChordalSolution", "FoliationSpec", "GluingReport",
    "Herringbone", "Interface", "LEFT", "Piece", "REGIMES", "RIGHT", "TangentSolution",
    "angle_coeffs", "balance_residual", "balance_roots", "build_all_left", "build_all_right",
    "build_angle_square", "build_corner", "build_cup_angle", "build_foliation_auto",
    "build_symmetric_chord", "certificate_violation", "check_c1_gluing", "corner_coeffs",
    "corner_gluing_slopes", "cup_origins", "cup_residual", "differentials", "dumps", "eval_B",
    "eval_V", "from_document", "grow_cup", "infinite_slope", "load", "loads", "multifigure_coeffs",
    "ode_residual", "project", "save", "solve_A", "solve_balance", "solve_cup", "solve_m",
    "square_coeffs", "to_document", "trolleybus_coeffs",
]
