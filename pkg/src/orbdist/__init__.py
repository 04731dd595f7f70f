"""Critical points of the distance between two Keplerian orbits.

Six algebraic solvers (ordinary and trigonometric polynomials, eccentric or
true anomalies, with optional angular shifts) reduce the critical-point
system of d^2 to a univariate polynomial of degree 16; a coplanar solver
handles orbits in one plane.  Results are polished, classified and checked
for internal consistency.
"""

from .catalog import Catalog, parse_catalog
from .critpoints import CheckReport, CriticalPoint, CriticalSet, moid
from .errors import (
    Coplanar,
    DegenerateSystem,
    DegreeOverflow,
    DomainError,
    EigenFailure,
    NoConvergence,
    NoMinimum,
    NotDivisible,
    OrbDistError,
    ParseError,
)
from .methods import METHODS, best_set, compute, compute_all, consensus, minimum_distance
from .orbits import AnomalyPair, KeplerianElements, MutualGeometry, mutual_geometry
from .planar import PlanarPair, planar_critical_set

__all__ = [
    "AnomalyPair",
    "Catalog",
    "CheckReport",
    "Coplanar",
    "CriticalPoint",
    "CriticalSet",
    "DegenerateSystem",
    "DegreeOverflow",
    "DomainError",
    "EigenFailure",
    "KeplerianElements",
    "METHODS",
    "MutualGeometry",
    "NoConvergence",
    "NoMinimum",
    "NotDivisible",
    "OrbDistError",
    "ParseError",
    "PlanarPair",
    "best_set",
    "compute",
    "compute_all",
    "consensus",
    "minimum_distance",
    "moid",
    "mutual_geometry",
    "parse_catalog",
    "planar_critical_set",
]
