"""Tiny text-serialization helpers shared by the CSV writers."""

from __future__ import annotations


def fmt(value) -> str:
    """Shortest round-trip decimal form of a scalar (numpy or python)."""
    return repr(float(value))
