"""Polynomial operator algebra and the one-parameter ordering calculus.

Operators are complex polynomials in the canonical pair (q, p) for a single
degree of freedom, stored in standard order: every stored monomial means
q^qpow p^ppow with all q factors to the left.  The commutator convention is
[q, p] = +i hbar throughout.

The ordering parameter alpha labels a family of operator-to-symbol maps.  The
symbol of the standard-ordered monomial q^m p^n is

    sum_{r=0}^{min(m,n)} C(m, r) * n!/(n-r)! * (-i hbar alpha)^r
                         * p^(n-r) q^(m-r)

which is the closed form of the integral transform

    O_alpha(q, p) = integral dz <q + alpha z| O |q + (alpha+1) z> e^{i p z / hbar}

under the stated commutator and kernel conventions.  alpha = -1/2 reproduces
the symmetric (Weyl) symbol and alpha = 0 the standard-ordering symbol
p^n q^m.  The map is unitriangular in the monomial basis graded by total
degree, so it inverts exactly; ``alpha_quantize`` implements the inverse by
back-substitution.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, perm

import numpy as np

from .coeffs import HbarPoly
from .errors import InputError


@dataclass(frozen=True)
class OperatorMonomial:
    """One standard-ordered term: coeff * q^qpow * p^ppow."""

    coeff: HbarPoly
    qpow: int
    ppow: int

    def __post_init__(self):
        if self.qpow < 0 or self.ppow < 0:
            raise InputError("monomial powers must be non-negative")

    @property
    def degree(self):
        return self.qpow + self.ppow


@dataclass(frozen=True)
class SymbolTerm:
    """One commuting phase-space term: coeff * p^ppow * q^qpow."""

    coeff: HbarPoly
    qpow: int
    ppow: int

    def __post_init__(self):
        if self.qpow < 0 or self.ppow < 0:
            raise InputError("symbol powers must be non-negative")

    @property
    def degree(self):
        return self.qpow + self.ppow


def _canonical_terms(raw, term_cls):
    """Merge duplicate (qpow, ppow) keys, drop zeros, sort canonically."""
    merged = {}
    for coeff, qpow, ppow in raw:
        if not isinstance(coeff, HbarPoly):
            coeff = HbarPoly.scalar(coeff)
        key = (int(qpow), int(ppow))
        merged[key] = merged.get(key, HbarPoly.zero()) + coeff
    terms = [term_cls(coeff=c, qpow=k[0], ppow=k[1])
             for k, c in merged.items() if not c.is_zero()]
    # stable print/storage order: descending total degree, then descending qpow
    terms.sort(key=lambda t: (-t.degree, -t.qpow))
    return tuple(terms)


def _check_hbar(hbar):
    if not (isinstance(hbar, (int, float)) and hbar > 0):
        raise InputError(f"hbar must be a positive real number, got {hbar!r}")
    return float(hbar)


class OperatorExpr:
    """A polynomial operator in canonical (standard-ordered) form.

    Parameters
    ----------
    terms : iterable of (coeff, qpow, ppow)
        Coefficients may be complex scalars or :class:`HbarPoly`.  Duplicate
        power pairs are merged and zero coefficients dropped.
    hbar : float
        The numeric value of hbar carried by this expression.  Mixing
        expressions with different hbar raises :class:`InputError`.
    """

    __slots__ = ("terms", "hbar")

    def __init__(self, terms=(), hbar=1.0):
        object.__setattr__(self, "hbar", _check_hbar(hbar))
        object.__setattr__(self, "terms", _canonical_terms(terms, OperatorMonomial))

    def __setattr__(self, name, value):
        raise AttributeError("OperatorExpr is immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def identity(cls, hbar=1.0):
        return cls([(1.0, 0, 0)], hbar=hbar)

    @classmethod
    def position(cls, hbar=1.0):
        return cls([(1.0, 1, 0)], hbar=hbar)

    @classmethod
    def momentum(cls, hbar=1.0):
        return cls([(1.0, 0, 1)], hbar=hbar)

    @classmethod
    def monomial(cls, coeff, qpow, ppow, hbar=1.0):
        return cls([(coeff, qpow, ppow)], hbar=hbar)

    # -- queries ----------------------------------------------------------

    @property
    def degree(self):
        return max((t.degree for t in self.terms), default=0)

    def coefficient(self, qpow, ppow):
        """The HbarPoly coefficient of q^qpow p^ppow (zero if absent)."""
        for t in self.terms:
            if t.qpow == qpow and t.ppow == ppow:
                return t.coeff
        return HbarPoly.zero()

    def is_zero(self):
        return not self.terms

    def close_to(self, other, tol=1e-12):
        """Compare coefficients grade-by-grade within absolute ``tol``."""
        if self.hbar != other.hbar:
            return False
        keys = {(t.qpow, t.ppow) for t in self.terms} | \
               {(t.qpow, t.ppow) for t in other.terms}
        return all(self.coefficient(*k).close_to(other.coefficient(*k), tol)
                   for k in keys)

    # -- arithmetic -------------------------------------------------------

    def _require_same_hbar(self, other):
        if self.hbar != other.hbar:
            raise InputError(
                f"cannot combine operators with hbar={self.hbar} and hbar={other.hbar}")

    def __add__(self, other):
        if not isinstance(other, OperatorExpr):
            return NotImplemented
        self._require_same_hbar(other)
        raw = [(t.coeff, t.qpow, t.ppow) for t in self.terms]
        raw += [(t.coeff, t.qpow, t.ppow) for t in other.terms]
        return OperatorExpr(raw, hbar=self.hbar)

    def __sub__(self, other):
        if not isinstance(other, OperatorExpr):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return OperatorExpr([(-t.coeff, t.qpow, t.ppow) for t in self.terms],
                            hbar=self.hbar)

    def __mul__(self, other):
        if isinstance(other, OperatorExpr):
            return multiply(self, other)
        if isinstance(other, (int, float, complex, HbarPoly)):
            return OperatorExpr([(t.coeff * other, t.qpow, t.ppow)
                                 for t in self.terms], hbar=self.hbar)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, HbarPoly)):
            return self * other
        return NotImplemented

    def __pow__(self, exponent):
        if not (isinstance(exponent, int) and exponent >= 0):
            raise InputError("operator exponent must be a non-negative integer")
        result = OperatorExpr.identity(self.hbar)
        for _ in range(exponent):
            result = multiply(result, self)
        return result

    def __eq__(self, other):
        if not isinstance(other, OperatorExpr):
            return NotImplemented
        return self.hbar == other.hbar and self.terms == other.terms

    def __hash__(self):
        return hash((self.terms, self.hbar))

    def __str__(self):
        return render_terms(self.terms, q_first=True)

    def __repr__(self):
        return f"OperatorExpr({self}, hbar={self.hbar})"


class PhaseSpaceSymbol:
    """A commuting phase-space polynomial with hbar-graded coefficients."""

    __slots__ = ("terms", "hbar")

    def __init__(self, terms=(), hbar=1.0):
        object.__setattr__(self, "hbar", _check_hbar(hbar))
        object.__setattr__(self, "terms", _canonical_terms(terms, SymbolTerm))

    def __setattr__(self, name, value):
        raise AttributeError("PhaseSpaceSymbol is immutable")

    @classmethod
    def monomial(cls, coeff, qpow, ppow, hbar=1.0):
        return cls([(coeff, qpow, ppow)], hbar=hbar)

    @property
    def degree(self):
        return max((t.degree for t in self.terms), default=0)

    def coefficient(self, qpow, ppow):
        for t in self.terms:
            if t.qpow == qpow and t.ppow == ppow:
                return t.coeff
        return HbarPoly.zero()

    def is_zero(self):
        return not self.terms

    def close_to(self, other, tol=1e-12):
        if self.hbar != other.hbar:
            return False
        keys = {(t.qpow, t.ppow) for t in self.terms} | \
               {(t.qpow, t.ppow) for t in other.terms}
        return all(self.coefficient(*k).close_to(other.coefficient(*k), tol)
                   for k in keys)

    def __add__(self, other):
        if not isinstance(other, PhaseSpaceSymbol):
            return NotImplemented
        if self.hbar != other.hbar:
            raise InputError(
                f"cannot combine symbols with hbar={self.hbar} and hbar={other.hbar}")
        raw = [(t.coeff, t.qpow, t.ppow) for t in self.terms]
        raw += [(t.coeff, t.qpow, t.ppow) for t in other.terms]
        return PhaseSpaceSymbol(raw, hbar=self.hbar)

    def __sub__(self, other):
        if not isinstance(other, PhaseSpaceSymbol):
            return NotImplemented
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, PhaseSpaceSymbol):
            if self.hbar != other.hbar:
                raise InputError(
                    f"cannot combine symbols with hbar={self.hbar} and hbar={other.hbar}")
            raw = [(ta.coeff * tb.coeff, ta.qpow + tb.qpow, ta.ppow + tb.ppow)
                   for ta in self.terms for tb in other.terms]
            return PhaseSpaceSymbol(raw, hbar=self.hbar)
        if isinstance(other, (int, float, complex, HbarPoly)):
            return PhaseSpaceSymbol([(t.coeff * other, t.qpow, t.ppow)
                                     for t in self.terms], hbar=self.hbar)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, HbarPoly)):
            return self * other
        return NotImplemented

    def __pow__(self, exponent):
        if not (isinstance(exponent, int) and exponent >= 0):
            raise InputError("symbol exponent must be a non-negative integer")
        result = PhaseSpaceSymbol.monomial(1.0, 0, 0, hbar=self.hbar)
        for _ in range(exponent):
            result = result * self
        return result

    def __neg__(self):
        return (-1.0) * self

    def __eq__(self, other):
        if not isinstance(other, PhaseSpaceSymbol):
            return NotImplemented
        return self.hbar == other.hbar and self.terms == other.terms

    def __hash__(self):
        return hash((self.terms, self.hbar))

    def evaluate(self, qvals, pvals):
        """Evaluate on the tensor grid of two 1D coordinate arrays.

        Returns a complex matrix shaped (len(qvals), len(pvals)) with entry
        [i, j] equal to the symbol at (qvals[i], pvals[j]).
        """
        qvals = np.asarray(qvals, dtype=float)
        pvals = np.asarray(pvals, dtype=float)
        out = np.zeros((qvals.size, pvals.size), dtype=complex)
        for t in self.terms:
            c = t.coeff.evaluate(self.hbar)
            out += c * np.outer(qvals ** t.qpow, pvals ** t.ppow)
        return out

    def __str__(self):
        return render_terms(self.terms, q_first=False)

    def __repr__(self):
        return f"PhaseSpaceSymbol({self}, hbar={self.hbar})"


# -- rendering ------------------------------------------------------------


def format_number(x):
    """Shortest faithful decimal for a real number, ints without the dot."""
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def _render_complex(value):
    """Render a complex scalar, returning (sign, body); body has no sign."""
    re, im = value.real, value.imag
    if im == 0:
        return ("-" if re < 0 else "+"), format_number(abs(re))
    if re == 0:
        body = "i" if abs(im) == 1 else f"{format_number(abs(im))} i"
        return ("-" if im < 0 else "+"), body
    re_part = format_number(abs(re))
    im_part = "i" if abs(im) == 1 else f"{format_number(abs(im))} i"
    inner_sign = "-" if (im < 0) != (re < 0) else "+"
    return ("-" if re < 0 else "+"), f"({re_part} {inner_sign} {im_part})"


def _render_single(coeff, powers_text):
    """Render one (HbarPoly coefficient, factor text) as (sign, body)."""
    graded = coeff.items_sorted()
    if len(graded) == 1:
        grade, value = graded[0]
        sign, num = _render_complex(value)
        pieces = []
        if num not in ("1",) or (grade == 0 and not powers_text):
            pieces.append(num)
        if grade == 1:
            pieces.append("hbar")
        elif grade > 1:
            pieces.append(f"hbar^{grade}")
        if powers_text:
            pieces.append(powers_text)
        return sign, " ".join(pieces)
    # several hbar grades under one power pair: parenthesize the sum
    chunks = []
    for grade, value in graded:
        sign, num = _render_complex(value)
        part = num
        if grade == 1:
            part = f"{num} hbar" if num != "1" else "hbar"
        elif grade > 1:
            part = f"{num} hbar^{grade}" if num != "1" else f"hbar^{grade}"
        chunks.append((sign, part))
    body = chunks[0][1] if chunks[0][0] == "+" else f"-{chunks[0][1]}"
    for sign, part in chunks[1:]:
        body += f" {sign} {part}"
    body = f"({body})"
    if powers_text:
        body += f" {powers_text}"
    return "+", body


def _power_text(name, power):
    if power == 0:
        return ""
    if power == 1:
        return name
    return f"{name}^{power}"


def render_terms(terms, q_first):
    """Canonical text for a term sequence already in storage order."""
    if not terms:
        return "0"
    rendered = []
    for t in terms:
        names = [("q", t.qpow), ("p", t.ppow)] if q_first else [("p", t.ppow), ("q", t.qpow)]
        powers = " ".join(filter(None, (_power_text(n, k) for n, k in names)))
        rendered.append(_render_single(t.coeff, powers))
    sign, body = rendered[0]
    text = body if sign == "+" else f"-{body}"
    for sign, body in rendered[1:]:
        text += f" {sign} {body}"
    return text


# -- products and the ordering maps ---------------------------------------


def multiply(a, b):
    """Product of two operators, reduced to canonical standard order.

    The reordering uses the exact identity (for [q, p] = +i hbar)

        p^n q^m = sum_r C(n, r) C(m, r) r! (-i hbar)^r q^(m-r) p^(n-r)

    applied to every cross pair of monomials, so the result is canonical by
    construction.

    Parameters
    ----------
    a, b : OperatorExpr
        Factors; must carry the same hbar.

    Returns
    -------
    OperatorExpr
    """
    if not isinstance(a, OperatorExpr) or not isinstance(b, OperatorExpr):
        raise InputError("multiply expects two OperatorExpr values")
    a._require_same_hbar(b)
    raw = []
    for ta in a.terms:
        for tb in b.terms:
            # q^m1 p^n1 * q^m2 p^n2: reorder the inner p^n1 q^m2 block
            n1, m2 = ta.ppow, tb.qpow
            base = ta.coeff * tb.coeff
            for r in range(0, min(n1, m2) + 1):
                factor = comb(n1, r) * comb(m2, r)
                for s in range(1, r + 1):
                    factor *= s
                coeff = base * HbarPoly.scalar(factor * (-1j) ** r, grade=r)
                raw.append((coeff, ta.qpow + m2 - r, n1 + tb.ppow - r))
    return OperatorExpr(raw, hbar=a.hbar)


def alpha_symbol(op, alpha):
    """Phase-space symbol of an operator under the ordering parameter alpha.

    Parameters
    ----------
    op : OperatorExpr
    alpha : float
        Ordering parameter; -1/2 gives the symmetric (Weyl) symbol, 0 the
        standard-ordering symbol.

    Returns
    -------
    PhaseSpaceSymbol

    Notes
    -----
    Per standard-ordered monomial q^m p^n the symbol is

        sum_{r=0}^{min(m,n)} C(m, r) * n!/(n-r)! * (-i hbar alpha)^r
                             * p^(n-r) q^(m-r)

    extended linearly.  The hbar power r is tracked exactly as a grade.
    """
    if not isinstance(op, OperatorExpr):
        raise InputError("alpha_symbol expects an OperatorExpr")
    alpha = float(alpha)
    raw = []
    for t in op.terms:
        m, n = t.qpow, t.ppow
        for r in range(0, min(m, n) + 1):
            scale = comb(m, r) * perm(n, r) * (-1j * alpha) ** r
            raw.append((t.coeff * HbarPoly.scalar(scale, grade=r), m - r, n - r))
    return PhaseSpaceSymbol(raw, hbar=op.hbar)


def alpha_quantize(sym, alpha):
    """Invert the symbol map: the operator whose alpha-symbol is ``sym``.

    The symbol map is unitriangular in the degree-graded monomial basis
    (the r = 0 term reproduces the powers with coefficient exactly 1), so
    back-substitution from the highest total degree downward terminates and
    is exact in the hbar grading.

    Parameters
    ----------
    sym : PhaseSpaceSymbol
    alpha : float

    Returns
    -------
    OperatorExpr
    """
    if not isinstance(sym, PhaseSpaceSymbol):
        raise InputError("alpha_quantize expects a PhaseSpaceSymbol")
    alpha = float(alpha)
    remaining = {(t.qpow, t.ppow): t.coeff for t in sym.terms}
    out_terms = []
    while remaining:
        key = max(remaining, key=lambda k: (k[0] + k[1], k[0]))
        coeff = remaining.pop(key)
        if coeff.is_zero():
            continue
        m, n = key
        out_terms.append((coeff, m, n))
        # subtract the r >= 1 tail of this monomial's symbol; the leading
        # r = 0 term is the key itself and was popped exactly
        for r in range(1, min(m, n) + 1):
            scale = comb(m, r) * perm(n, r) * (-1j * alpha) ** r
            tail_key = (m - r, n - r)
            tail = coeff * HbarPoly.scalar(scale, grade=r)
            remaining[tail_key] = remaining.get(tail_key, HbarPoly.zero()) - tail
    return OperatorExpr(out_terms, hbar=sym.hbar)


def matrix_representation(op, basis_size):
    """Truncated matrix of an operator in the oscillator ladder basis.

    Builds q and p from the ladder operators of a unit-mass, unit-frequency
    oscillator (q = sqrt(hbar/2)(a + a+), p = i sqrt(hbar/2)(a+ - a)) and
    multiplies truncated matrices.  Truncation corrupts only the trailing
    ``degree`` rows and columns, so products of representations agree with
    representations of products on the leading interior block.

    Parameters
    ----------
    op : OperatorExpr
    basis_size : int
        Must be at least 2 and exceed the polynomial degree of ``op``.

    Returns
    -------
    numpy.ndarray
        Complex matrix of shape (basis_size, basis_size).
    """
    if not isinstance(op, OperatorExpr):
        raise InputError("matrix_representation expects an OperatorExpr")
    if not isinstance(basis_size, int) or basis_size < 2:
        raise InputError("basis_size must be an integer >= 2")
    if basis_size <= op.degree:
        raise InputError(
            f"basis_size {basis_size} too small for operator degree {op.degree}")
    hbar = op.hbar
    lower = np.diag(np.sqrt(np.arange(1, basis_size)), k=1)  # annihilation
    raise_op = lower.T
    qmat = np.sqrt(hbar / 2.0) * (lower + raise_op)
    pmat = 1j * np.sqrt(hbar / 2.0) * (raise_op - lower)
    out = np.zeros((basis_size, basis_size), dtype=complex)
    for t in op.terms:
        block = np.eye(basis_size, dtype=complex)
        for _ in range(t.qpow):
            block = block @ qmat
        for _ in range(t.ppow):
            block = block @ pmat
        out += t.coeff.evaluate(hbar) * block
    return out
