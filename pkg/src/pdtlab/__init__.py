"""Parity decision tree laboratory.

GF(2) query algebra, weighted Fourier discrepancy, skew complexity with
random partial fixings, instance extraction and compression pipelines, exact
brute-force oracles, and a seeded experiment harness.
"""

from . import boolfun, compress, dist, extract, f2core, lp, pdt, suite
from .boolfun import BooleanFunction
from .dist import PartialFixing, ProductDistribution
from .pdt import ParityTree, RandomizedParityTree

__version__ = "0.1.0"

__all__ = [
    "BooleanFunction",
    "ParityTree",
    "PartialFixing",
    "ProductDistribution",
    "RandomizedParityTree",
    "boolfun",
    "compress",
    "dist",
    "extract",
    "f2core",
    "lp",
    "pdt",
    "suite",
]
