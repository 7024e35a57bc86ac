"""Bellman functions for martingale transforms on the strip.

Three independent routes to the same functions: explicit foliations
(:mod:`.foliation`), a discrete lattice solver (:mod:`.lattice`) and
lower bounds from explicit martingale trees (:mod:`.martingale`).
"""
from .boundary import (FAMILY_GRAMMAR, BoundaryData, exp_family, negexp_family, parse_family, pmoment,
                       poly5, quad, table)
from .errors import (BellmanError, ConvergenceError, CoverageError, DegenerateChordError, DomainError,
                     NoRootError, RegimeError, StepSizeError, UnsupportedFoliationError)

__version__ = "0.1.0"

__all__ = [
    "FAMILY_GRAMMAR", "BoundaryData", "exp_family", "negexp_family", "parse_family", "pmoment", "poly5",
    "quad", "table", "BellmanError", "ConvergenceError", "CoverageError", "DegenerateChordError",
    "DomainError", "NoRootError", "RegimeError", "StepSizeError", "UnsupportedFoliationError",
]
