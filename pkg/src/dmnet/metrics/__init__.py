"""Objective quality measures and evaluation reports."""
