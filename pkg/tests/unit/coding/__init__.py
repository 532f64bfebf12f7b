"""Unit tests for the coding module."""
