"""Numerical helpers: index geometry, dense solvers and report output."""
