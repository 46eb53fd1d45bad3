"""Dual-path magnitude network for general speech restoration."""
