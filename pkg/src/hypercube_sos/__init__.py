"""Exact low-degree sum-of-squares certificates on the Boolean hypercube."""
