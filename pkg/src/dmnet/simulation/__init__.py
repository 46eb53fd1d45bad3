"""Distortion simulation: reverberation, noise and band limitation."""
