"""Matrix orthogonal polynomials on the unit circle and the Gross-Witten matrix sum rule."""

__version__ = "0.1.0"
