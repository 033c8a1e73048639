"""Squares of random linear codes, quadratic forms over finite fields, and the experiments linking them."""

__version__ = "0.1.0"
