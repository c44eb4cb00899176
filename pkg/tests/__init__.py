"""
Test package for the tilt coverage toolkit.
"""
