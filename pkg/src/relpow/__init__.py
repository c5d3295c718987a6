"""Complex powers, semigroups and fractional evolution for finite-dimensional linear relations."""
from __future__ import annotations

__version__ = "0.1.0"
