"""Test suite for IC256 Sampler."""
