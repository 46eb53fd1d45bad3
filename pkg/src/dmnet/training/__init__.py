"""Training loop, losses and batch assembly."""
