"""Desk-scale simulations of quantum attacks on public-key cryptosystems."""

__version__ = "0.1.0"
