"""Campana point counting on explicit orbifold models.

Subpackages: arith (integer kernels), geometry (models and invariants),
points (zoo, membership, enumeration), euler (local factors and constants),
fit (growth-law regression), verify (the criterion suite), cli.
"""

__version__ = "0.1.0"

from . import arith, euler, fit, geometry, points, verify  # noqa: F401
