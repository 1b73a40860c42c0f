"""Elliptic, trigonometric and classical excursion processes on the parity lattice."""
