"""Monte Carlo and exact analysis of two-parameter random sign surfaces.

A sign surface is an i.i.d. +/-1 array indexed by the positive quadrant;
its rectangular partial sums form a two-parameter walk.  This package
computes exact closed forms for the walk's zero-set statistics
(``exactprob``), simulates grids and counts the same statistics pathwise
(``randfield``, ``walkstats``), and reconciles the two via a deterministic
Monte Carlo harness (``mcharness``) and a command-line front end (``cli``).
"""

from .randfield import RademacherField, Seed, StreamKey

__all__ = ["RademacherField", "Seed", "StreamKey"]

__version__ = "0.1.0"
