"""Tests of fair-noma."""
