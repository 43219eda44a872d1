"""Hyperbolic SQG model: z-reduced solver, Biot-Savart quadrature and blow-up diagnostics."""

__version__ = "0.1.0"
