"""Tests for reebvolmin."""
