"""Switching-diffusion models, discretization and homogenization solvers."""
