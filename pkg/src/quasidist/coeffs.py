"""Coefficients that track powers of hbar exactly.

Operator and symbol coefficients are small polynomials in hbar with complex
entries, stored as a mapping {hbar power -> complex}.  Keeping the power as an
integer grade (instead of folding the numeric value of hbar into the float)
lets reordering identities stay exact and lets printed output render hbar
symbolically, e.g. ``0.5 i hbar`` rather than ``0.5i`` at hbar = 1.
"""
from __future__ import annotations


class HbarPoly:
    """Polynomial in hbar with complex coefficients.

    Parameters
    ----------
    parts : dict, optional
        Mapping from hbar power (non-negative int) to complex coefficient.
        Zero entries are dropped.
    """

    __slots__ = ("parts",)

    def __init__(self, parts=None):
        cleaned = {}
        for grade, value in (parts or {}).items():
            if grade < 0 or grade != int(grade):
                raise ValueError(f"hbar power must be a non-negative integer, got {grade}")
            value = complex(value)
            if value != 0:
                cleaned[int(grade)] = value
        self.parts = cleaned

    @classmethod
    def scalar(cls, value, grade=0):
        """Build a single-grade coefficient ``value * hbar**grade``."""
        return cls({grade: value})

    @classmethod
    def zero(cls):
        return cls({})

    def is_zero(self):
        return not self.parts

    def evaluate(self, hbar):
        """Collapse to a plain complex number at a numeric hbar."""
        return sum(value * hbar ** grade for grade, value in self.parts.items())

    def max_abs(self):
        """Largest coefficient magnitude across grades (0.0 if empty)."""
        return max((abs(v) for v in self.parts.values()), default=0.0)

    def conjugate(self):
        return HbarPoly({g: v.conjugate() for g, v in self.parts.items()})

    def items_sorted(self):
        """(grade, value) pairs in ascending grade order."""
        return sorted(self.parts.items())

    def __add__(self, other):
        if not isinstance(other, HbarPoly):
            return NotImplemented
        parts = dict(self.parts)
        for grade, value in other.parts.items():
            parts[grade] = parts.get(grade, 0j) + value
        return HbarPoly(parts)

    def __sub__(self, other):
        if not isinstance(other, HbarPoly):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return HbarPoly({g: -v for g, v in self.parts.items()})

    def __mul__(self, other):
        if isinstance(other, HbarPoly):
            parts = {}
            for g1, v1 in self.parts.items():
                for g2, v2 in other.parts.items():
                    grade = g1 + g2
                    parts[grade] = parts.get(grade, 0j) + v1 * v2
            return HbarPoly(parts)
        if isinstance(other, (int, float, complex)):
            return HbarPoly({g: v * other for g, v in self.parts.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, HbarPoly):
            return NotImplemented
        return self.parts == other.parts

    def __hash__(self):
        return hash(tuple(sorted(self.parts.items(), key=lambda kv: kv[0])))

    def close_to(self, other, tol):
        """True when every grade matches within absolute tolerance ``tol``."""
        grades = set(self.parts) | set(other.parts)
        return all(abs(self.parts.get(g, 0j) - other.parts.get(g, 0j)) <= tol
                   for g in grades)

    def __repr__(self):
        inner = ", ".join(f"{g}: {v}" for g, v in self.items_sorted())
        return f"HbarPoly({{{inner}}})"
