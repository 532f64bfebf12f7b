"""Unit tests for IC256 Sampler."""
