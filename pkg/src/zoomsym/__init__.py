"""Lie point symmetry analysis toolkit for the generalized Zoomeron equations."""

__version__ = "0.1.0"
