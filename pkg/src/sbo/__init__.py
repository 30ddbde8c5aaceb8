"""Pseudo-spectral laboratory for the Schrodinger-Benjamin-Ono system."""
__version__ = "0.1.0"
