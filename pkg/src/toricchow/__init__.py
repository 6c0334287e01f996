"""Exact toric fan constructions, orderings, Chow groups and Z-complexes."""
