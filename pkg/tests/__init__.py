"""Test package for teg-sim."""
