"""Unit tests for the adversary module."""
