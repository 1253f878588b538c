"""Equilibria of three point charges on closed plane curves."""

from .curves import (Circle, Curve, CurvePoint, Ellipse, FourierOval, ParabolaArc,
                     SampledCurve, center_of_curvature, curvature_derivative, evaluate,
                     make_point)

__all__ = [
    "Circle", "Curve", "CurvePoint", "Ellipse", "FourierOval", "ParabolaArc",
    "SampledCurve", "center_of_curvature", "curvature_derivative", "evaluate",
    "make_point",
]
