"""Fractional Allen-Cahn equations, s-perimeters and min-max sweepouts on flat tori."""

__version__ = "0.1.0"
