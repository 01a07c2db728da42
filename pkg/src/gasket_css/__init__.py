"""Exact geometry, energies and cutoff Sobolev checks on the Sierpinski gasket."""
