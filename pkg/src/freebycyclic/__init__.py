"""Train track maps, folded mapping tori, cross sections, and cone
computations for free-by-cyclic groups."""

__version__ = "0.1.0"
