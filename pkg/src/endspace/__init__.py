"""Exact computations on end spaces of trees: Bratteli diagrams, dimension
groups, local rigidity, germ groupoids and Thompson-group representations."""

__version__ = "0.1.0"
