"""Unit tests for application."""
