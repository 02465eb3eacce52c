"""Inverse problems for time-series valued simulators by multiple scalar contour estimation."""
__version__ = "0.1.0"
