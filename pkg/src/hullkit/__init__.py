"""Global-local analysis of stiffened box girders with a graph transformer surrogate."""

__version__ = "0.1.0"
