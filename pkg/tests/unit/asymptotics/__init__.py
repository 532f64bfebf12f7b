"""Unit tests for the asymptotics module."""
