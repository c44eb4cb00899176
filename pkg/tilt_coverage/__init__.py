"""
Tilt Coverage

Uplink coverage probability of a 3D-beamforming massive-MIMO network with
height-distributed users: an analytic integral, a Monte Carlo oracle, and
a search for the coverage-maximising antenna tilt.
"""

__version__ = "1.0.0"
__author__ = "Tilt Coverage"
