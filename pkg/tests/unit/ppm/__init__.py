"""Unit tests for the ppm module."""
