"""Unit tests for CSV writer."""
