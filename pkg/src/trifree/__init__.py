"""Simulation and analysis toolkit for the triangle-free random graph process."""
