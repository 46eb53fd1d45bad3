"""Dual-path magnitude restoration network."""
