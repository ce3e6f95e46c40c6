"""Toolkit for contact-contraction certification, partial mapping tori,
skeleton attractor exploration, and integer companion-matrix spectrum search."""

__version__ = "0.1.0"

from . import exactlin, spectrum_search, contact_kernel, torus_builder  # noqa: F401
