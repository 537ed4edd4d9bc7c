"""Capacitated vehicle routing by tabu search with QUBO-sampled sequencing."""

__version__ = "0.1.0"

from .instance import DistanceMatrix, Instance, Location, build_distance_matrix, parse_instance
from .solution import Route, Solution

__all__ = [
    "DistanceMatrix",
    "Instance",
    "Location",
    "Route",
    "Solution",
    "build_distance_matrix",
    "parse_instance",
]
