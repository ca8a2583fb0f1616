"""Exact bigraded homotopy of derived idempotent quotients of monomial algebras."""

from __future__ import annotations

__version__ = "0.1.0"
