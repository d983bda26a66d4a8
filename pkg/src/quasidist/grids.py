"""Uniform grids, wavefunctions, density matrices, and the q/p transform.

Everything downstream assumes uniform sampling, so the grid type is a plain
(count, minimum, step) triple.  States normalize themselves on construction
against the grid measure (sum |psi|^2 step = 1).  The position/momentum
transform is the dense quadrature of the continuum kernel

    phi(p) = (2 pi hbar)^(-1/2) * sum_q psi(q) e^{-i p q / hbar} step

rather than an FFT, which keeps the two grids fully independent.  Transforms
check norm preservation and edge decay and refuse to hand back a silently
aliased result.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, InvariantError

_EDGE_DECAY_LIMIT = 1e-10
_TAIL_LIMIT = 1e-6
_NORM_DRIFT_LIMIT = 1e-8


@dataclass(frozen=True)
class UniformGrid:
    count: int
    minimum: float
    step: float

    def __post_init__(self):
        if not isinstance(self.count, int) or self.count < 8:
            raise InputError(f"grid count must be an integer >= 8, got {self.count!r}")
        if not self.step > 0:
            raise InputError(f"grid step must be positive, got {self.step!r}")
        object.__setattr__(self, "minimum", float(self.minimum))
        object.__setattr__(self, "step", float(self.step))

    def points(self):
        return self.minimum + self.step * np.arange(self.count)

    @property
    def maximum(self):
        return self.minimum + self.step * (self.count - 1)


def _normalized(values, step, what):
    values = np.asarray(values, dtype=complex)
    norm = np.sqrt(np.sum(np.abs(values) ** 2) * step)
    if not np.isfinite(norm) or norm < 1e-12:
        raise InputError(f"cannot normalize {what}: norm {norm:.3e}")
    return values / norm


class PositionState:
    """A normalized wavefunction sampled on a position grid."""

    __slots__ = ("grid", "values", "hbar")

    def __init__(self, grid, values, hbar=1.0):
        if not isinstance(grid, UniformGrid):
            raise InputError("PositionState needs a UniformGrid")
        if len(values) != grid.count:
            raise InputError(
                f"value count {len(values)} does not match grid count {grid.count}")
        if not hbar > 0:
            raise InputError("hbar must be positive")
        self.grid = grid
        self.values = _normalized(values, grid.step, "position state")
        self.hbar = float(hbar)

    def norm_squared(self):
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.step)


class MomentumState:
    """A normalized wavefunction sampled on a momentum grid."""

    __slots__ = ("grid", "values", "hbar")

    def __init__(self, grid, values, hbar=1.0):
        if not isinstance(grid, UniformGrid):
            raise InputError("MomentumState needs a UniformGrid")
        if len(values) != grid.count:
            raise InputError(
                f"value count {len(values)} does not match grid count {grid.count}")
        if not hbar > 0:
            raise InputError("hbar must be positive")
        self.grid = grid
        self.values = _normalized(values, grid.step, "momentum state")
        self.hbar = float(hbar)

    def norm_squared(self):
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.step)


class DensityMatrix:
    """Discretized density operator on a position grid.

    entries[i, j] samples rho(q_i, q_j).  Construction enforces hermiticity
    to machine precision and unit trace under the grid measure; violations
    raise :class:`InvariantError` because they signal corrupted input, not a
    user mistake.
    """

    __slots__ = ("grid", "entries", "hbar")

    def __init__(self, grid, entries, hbar=1.0):
        if not isinstance(grid, UniformGrid):
            raise InputError("DensityMatrix needs a UniformGrid")
        entries = np.asarray(entries, dtype=complex)
        if entries.shape != (grid.count, grid.count):
            raise InputError(
                f"entry shape {entries.shape} does not match grid count {grid.count}")
        if not hbar > 0:
            raise InputError("hbar must be positive")
        scale = max(1.0, float(np.abs(entries).max()))
        herm_defect = float(np.abs(entries - entries.conj().T).max())
        if herm_defect > 1e-12 * scale:
            raise InvariantError(
                f"density matrix not hermitian: defect {herm_defect:.3e}")
        trace = float(np.real(np.trace(entries))) * grid.step
        if abs(trace - 1.0) > 1e-8:
            raise InvariantError(
                f"density matrix trace {trace!r} differs from 1 beyond 1e-8")
        self.grid = grid
        self.entries = entries
        self.hbar = float(hbar)

    def purity(self):
        """Tr(rho^2) under the grid measure; 1 for a pure state."""
        return float(np.real(np.trace(self.entries @ self.entries)) * self.grid.step ** 2)


def _check_edge_decay(values, what):
    peak = float(np.abs(values).max())
    edge = max(float(np.abs(values[0])), float(np.abs(values[-1])))
    if edge > _EDGE_DECAY_LIMIT * peak:
        raise InvariantError(
            f"{what} does not decay at the grid edge "
            f"(edge/peak = {edge / peak:.3e}); enlarge the grid")


def oscillator_eigenstate(index, grid, hbar=1.0):
    """Eigenstate ``index`` of the unit-mass, unit-frequency oscillator.

    Uses the normalized Hermite-function recurrence, which is stable for any
    index the grid can resolve.  Raises :class:`InvariantError` if the state
    fails to decay at the grid edge.
    """
    if not (isinstance(index, int) and index >= 0):
        raise InputError(f"eigenstate index must be a non-negative integer, got {index!r}")
    q = grid.points()
    x = q / np.sqrt(hbar)
    prev = np.zeros_like(x)
    cur = np.pi ** -0.25 * np.exp(-x ** 2 / 2.0)
    for k in range(index):
        cur, prev = (x * np.sqrt(2.0 / (k + 1)) * cur
                     - np.sqrt(k / (k + 1.0)) * prev), cur
    values = cur * hbar ** -0.25
    _check_edge_decay(values, f"oscillator eigenstate {index}")
    return PositionState(grid, values, hbar=hbar)


def coherent_state(q0, p0, grid, hbar=1.0):
    """Gaussian coherent state centered at (q0, p0)."""
    q = grid.points()
    values = ((np.pi * hbar) ** -0.25
              * np.exp(-(q - q0) ** 2 / (2.0 * hbar) + 1j * p0 * q / hbar))
    _check_edge_decay(values, f"coherent state at ({q0}, {p0})")
    return PositionState(grid, values, hbar=hbar)


def _fourier_checks(values, step, what):
    total = float(np.sum(np.abs(values) ** 2) * step)
    if abs(total - 1.0) > _NORM_DRIFT_LIMIT:
        raise InvariantError(
            f"{what} lost norm in the transform ({total!r}); "
            "the target grid cannot hold the state")
    peak = float(np.abs(values).max())
    tail = max(float(np.abs(values[0])), float(np.abs(values[-1])))
    if tail > _TAIL_LIMIT * peak:
        raise InvariantError(
            f"{what} has edge weight {tail / peak:.3e}; "
            "the target grid aliases the state")


def to_momentum(state, pgrid):
    """Momentum representation of a position state by dense quadrature."""
    if not isinstance(state, PositionState):
        raise InputError("to_momentum expects a PositionState")
    if not isinstance(pgrid, UniformGrid):
        raise InputError("to_momentum needs a UniformGrid target")
    hbar = state.hbar
    q = state.grid.points()
    p = pgrid.points()
    kernel = np.exp(-1j * np.outer(p, q) / hbar)
    values = kernel @ state.values * state.grid.step / np.sqrt(2.0 * np.pi * hbar)
    _fourier_checks(values, pgrid.step, "momentum state")
    return MomentumState(pgrid, values, hbar=hbar)


def from_momentum(state, qgrid):
    """Position representation of a momentum state (inverse quadrature)."""
    if not isinstance(state, MomentumState):
        raise InputError("from_momentum expects a MomentumState")
    if not isinstance(qgrid, UniformGrid):
        raise InputError("from_momentum needs a UniformGrid target")
    hbar = state.hbar
    p = state.grid.points()
    q = qgrid.points()
    kernel = np.exp(1j * np.outer(q, p) / hbar)
    values = kernel @ state.values * state.grid.step / np.sqrt(2.0 * np.pi * hbar)
    _fourier_checks(values, qgrid.step, "position state")
    return PositionState(qgrid, values, hbar=hbar)


def density_from_pure(state):
    """Rank-one density matrix |psi><psi| of a position state."""
    if not isinstance(state, PositionState):
        raise InputError("density_from_pure expects a PositionState")
    entries = np.outer(state.values, state.values.conj())
    rho = DensityMatrix(state.grid, entries, hbar=state.hbar)
    purity = rho.purity()
    if abs(purity - 1.0) > 1e-6:
        raise InvariantError(f"pure-state density has purity {purity!r}")
    return rho


def mix(weighted):
    """Convex combination of (DensityMatrix, weight) pairs on a shared grid."""
    weighted = [(rho, float(w)) for rho, w in weighted]
    if not weighted:
        raise InputError("mix needs at least one (density, weight) pair")
    if any(w < 0 for _, w in weighted):
        raise InputError("mixture weights must be non-negative")
    total = sum(w for _, w in weighted)
    if abs(total - 1.0) > 1e-12:
        raise InputError(f"mixture weights sum to {total!r}, expected 1")
    first = weighted[0][0]
    for rho, _ in weighted[1:]:
        if rho.grid != first.grid:
            raise InputError("mixture components must share one grid")
        if rho.hbar != first.hbar:
            raise InputError("mixture components must share one hbar")
    entries = sum(w * rho.entries for rho, w in weighted)
    return DensityMatrix(first.grid, entries, hbar=first.hbar)
