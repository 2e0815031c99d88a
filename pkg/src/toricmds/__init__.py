"""Smooth toric Fano varieties and Mori dream space tests for their anticanonical hypersurfaces."""

from .classify import ClassificationVerdict, analyze, classify, cone_conjecture_check, gen_family
from .lattice import LatticePolytope, polar

__all__ = [
    "ClassificationVerdict",
    "LatticePolytope",
    "analyze",
    "classify",
    "cone_conjecture_check",
    "gen_family",
    "polar",
]

__version__ = "0.1.0"
