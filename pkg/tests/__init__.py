"""Tests for dmnet."""
