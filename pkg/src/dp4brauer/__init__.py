"""
Exact computations for del Pezzo surfaces of degree 4 given as intersections
of two quadrics in P^4 over parametric function fields: degeneracy locus,
discriminant square classes, the Galois action on the Picard lattice, H^1,
the generating quaternion algebra and its tame residues.
"""
from pathlib import Path

from .field import FieldDescriptor, FieldElement, Valuation
from .parsing import ParseError, PencilSpec, ValidationError, parse_pencil, parse_pencil_text
from .pipeline import AnalysisReport, StageError, analyze

FIXTURES = Path(__file__).parent / "fixtures"

__all__ = [
    "AnalysisReport", "FIXTURES", "FieldDescriptor", "FieldElement", "ParseError",
    "PencilSpec", "StageError", "Valuation", "ValidationError", "analyze",
    "parse_pencil", "parse_pencil_text",
]
__version__ = "0.1.0"
