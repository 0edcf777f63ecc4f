"""Confluence of two free boundaries in the spherical Stefan problem with kinetic
undercooling: interaction integrals, sharp-interface solver, smooth
approximation, phase-field solver and weak-residual checks."""

__version__ = "0.1.0"
