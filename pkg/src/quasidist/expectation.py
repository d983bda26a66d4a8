"""Expectation values in the Hilbert picture and the phase-space picture.

The Hilbert-side value Tr(rho O) is computed spectrally: each monomial
q^m p^n acts on the density matrix with an FFT-based derivative along the
first index, and the trace picks up the grid measure.  This side has no
ordering ambiguity and serves as the reference.

On the phase-space side a distribution field is paired with a polynomial
symbol by plain integration.  Which symbol reproduces the Hilbert value
depends on the ordering parameters: the field at alpha pairs exactly with
symbols taken at the dual parameter -1 - alpha.  Three pairings are exposed:

    plain      integral of field * symbol(alpha of the field)
    conjugate  integral of conj(field) * symbol(alpha of the field)
    dual       integral of field * symbol(-1 - alpha)

For hermitian densities the field conjugate equals the dual-parameter field,
so ``conjugate`` and ``dual`` agree with the Hilbert value at every alpha,
while ``plain`` does so only at the self-dual point alpha = -1/2.  The
report certifies whichever pairings land within tolerance instead of
hard-coding that reasoning.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .distributions import DistributionField, compute_distribution
from .errors import InputError, InvariantError
from .grids import DensityMatrix
from .operators import OperatorExpr, PhaseSpaceSymbol, alpha_symbol

_TAIL_FRACTION = 8  # top 1/8 of |k| band checked for spectral leakage
_TAIL_LIMIT = 1e-6

PAIRINGS = ("plain", "conjugate", "dual")


def _spectral_modes(count, step, hbar):
    """Momentum values hbar * kappa matching numpy's FFT layout."""
    return hbar * 2.0 * np.pi * np.fft.fftfreq(count, d=step)


def expect_hilbert(rho, op):
    """Tr(rho O) by spectral action of the operator on the density matrix.

    Raises :class:`InvariantError` when the density's spectrum carries more
    than 1e-6 relative weight in the top band, since derivatives of an
    under-resolved state are garbage.
    """
    if not isinstance(rho, DensityMatrix):
        raise InputError("expect_hilbert expects a DensityMatrix")
    if not isinstance(op, OperatorExpr):
        raise InputError("expect_hilbert expects an OperatorExpr")
    if rho.hbar != op.hbar:
        raise InputError(
            f"density carries hbar={rho.hbar} but operator carries hbar={op.hbar}")
    n = rho.grid.count
    step = rho.grid.step
    hbar = rho.hbar
    spectrum = np.fft.fft(rho.entries, axis=0)

    magnitudes = np.abs(spectrum).max(axis=1)
    order = np.argsort(np.abs(np.fft.fftfreq(n)))
    tail = magnitudes[order[-max(1, n // _TAIL_FRACTION):]].max()
    peak = magnitudes.max()
    if tail > _TAIL_LIMIT * peak:
        raise InvariantError(
            f"density spectrum keeps {tail / peak:.3e} relative weight at the "
            "band edge; the grid cannot resolve this state")

    pvals = _spectral_modes(n, step, hbar)
    q = rho.grid.points()
    nyquist = None
    if n % 2 == 0:
        nyquist = n // 2
    total = 0.0 + 0.0j
    for term in op.terms:
        modes = pvals ** term.ppow
        if nyquist is not None and term.ppow % 2 == 1:
            modes = modes.copy()
            modes[nyquist] = 0.0
        acted = np.fft.ifft(spectrum * modes[:, None], axis=0)
        diagonal = np.einsum("aa->a", acted)
        total += term.coeff.evaluate(hbar) * np.sum(q ** term.qpow * diagonal) * step
    return complex(total)


def expect_phase_space(field, symbol, pairing="dual"):
    """Pair a distribution field with a polynomial symbol by integration."""
    if not isinstance(field, DistributionField):
        raise InputError("expect_phase_space expects a DistributionField")
    if not isinstance(symbol, PhaseSpaceSymbol):
        raise InputError("expect_phase_space expects a PhaseSpaceSymbol")
    if pairing not in PAIRINGS:
        raise InputError(f"unknown pairing {pairing!r}; choose from {PAIRINGS}")
    if field.hbar != symbol.hbar:
        raise InputError(
            f"field carries hbar={field.hbar} but symbol carries hbar={symbol.hbar}")
    table = symbol.evaluate(field.qgrid.points(), field.pgrid.points())
    values = field.values.conj() if pairing == "conjugate" else field.values
    measure = field.qgrid.step * field.pgrid.step
    return complex(np.sum(values * table) * measure)


@dataclass
class ExpectationReport:
    """Hilbert reference value next to all three phase-space pairings."""

    alpha: float
    hbar: float
    operator_text: str
    hilbert: complex
    pairings: dict = dataclass_field(default_factory=dict)
    discrepancies: dict = dataclass_field(default_factory=dict)
    certified: tuple = ()
    tolerance: float = 1e-5

    def to_json_dict(self):
        out = {
            "alpha": self.alpha,
            "hbar": self.hbar,
            "operator": self.operator_text,
            "tolerance": self.tolerance,
            "hilbert": {"re": self.hilbert.real, "im": self.hilbert.imag},
            "pairings": {},
            "certified": list(self.certified),
        }
        for name in PAIRINGS:
            value = self.pairings[name]
            out["pairings"][name] = {
                "re": value.real,
                "im": value.imag,
                "abs_error": self.discrepancies[name],
            }
        return out


def expectation_report(rho, op, alpha, pgrid, tolerance=1e-5):
    """Build the full cross-picture comparison for one operator and alpha.

    Computes the alpha-member field once, pairs it all three ways, and
    certifies the pairings whose absolute discrepancy against the Hilbert
    value stays within ``tolerance`` (scaled by the value's magnitude when
    that exceeds 1).
    """
    if not isinstance(op, OperatorExpr):
        raise InputError("expectation_report expects an OperatorExpr")
    alpha = float(alpha)
    reference = expect_hilbert(rho, op)
    field = compute_distribution(rho, alpha, pgrid)
    own = alpha_symbol(op, alpha)
    dual = alpha_symbol(op, -1.0 - alpha)
    pairings = {
        "plain": expect_phase_space(field, own, "plain"),
        "conjugate": expect_phase_space(field, own, "conjugate"),
        "dual": expect_phase_space(field, dual, "plain"),
    }
    scale = max(1.0, abs(reference))
    discrepancies = {name: abs(value - reference) for name, value in pairings.items()}
    certified = tuple(name for name in PAIRINGS
                      if discrepancies[name] <= tolerance * scale)
    return ExpectationReport(
        alpha=alpha,
        hbar=rho.hbar,
        operator_text=str(op),
        hilbert=reference,
        pairings=pairings,
        discrepancies=discrepancies,
        certified=certified,
        tolerance=tolerance,
    )
