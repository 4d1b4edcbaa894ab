"""One-dimensional Pucci-type Schrodinger equations: ground states, solvers and certificates."""

__version__ = "0.1.0"
