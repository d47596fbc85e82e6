"""Exact tools for endowed equilibria in combinatorial auctions."""
from .equilibrium import Allocation, Instance, verify_endowed_equilibrium

__version__ = "0.1.0"
__all__ = ["Allocation", "Instance", "verify_endowed_equilibrium"]
