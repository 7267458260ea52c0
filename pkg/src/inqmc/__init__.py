"""Model checking left-positive InqLTL against finite Kripke structures."""

from .formula import Formula, FormulaSyntaxError, classify, parse, pretty
from .kripke import KripkeStructure, Lasso, StructureError, load_structure

__version__ = "0.1.0"
