"""Eigen-structure, EDS classification and Helmholtz verification."""
