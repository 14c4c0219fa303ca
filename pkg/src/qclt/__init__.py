"""Desk-scale numerical laboratory for Dirichlet L-function value
distribution over the family of characters mod q.

Subpackages:
    arith       sieved integer arithmetic and mollifier coefficient functions
    characters  exact Dirichlet characters, Gauss sums, batched twisted sums
    lfunc       L-values (truncated / smoothed), gamma factors, completed xi
    mollifier   auxiliary prime series, mollifier polynomials, convolutions
    stats       family moments, Gaussian predictions, EDF / KS machinery
    harness     experiment orchestration, CLI, CSV/JSONL/SVG emission
"""

__version__ = "0.1.0"

from .arith import MollifierSpec, SieveTables, build_sieve, mangoldt, moebius
from .characters import Character, CharacterGroup, UnitRoot, build_group
from .lfunc import ComplexPoint, LValue, RootNumber
from .mollifier import CoeffSeries, DeskParams, desk_params
from .stats import EdfReport, MomentReport

__all__ = [
    "__version__",
    "SieveTables",
    "MollifierSpec",
    "build_sieve",
    "mangoldt",
    "moebius",
    "CharacterGroup",
    "Character",
    "UnitRoot",
    "build_group",
    "ComplexPoint",
    "LValue",
    "RootNumber",
    "CoeffSeries",
    "DeskParams",
    "desk_params",
    "MomentReport",
    "EdfReport",
]
