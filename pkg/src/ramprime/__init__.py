"""Least Ramanujan primes of Maass forms: computations and cross-checks."""
