"""Phase-space transport for the joint field chi(q, p, t).

The field obeys a linear equation of motion built from a terminating
series: for a polynomial Hamiltonian H(q, p) the generator is a finite
sum of single-axis derivative terms,

    sum over n >= 1 of (-i*hbar)^n / n! times
        (d^n H / dp^n) d^n/dq^n  minus  (d^n H / dq^n) d^n/dp^n,

and the time derivative of chi is that sum applied to chi, divided by
i*hbar.  No mixed q/p derivatives appear, so every term touches one
axis only and spatial derivatives can be evaluated spectrally per axis.

Two propagation paths are provided.  `evolve` integrates the full 2D
field with classical fourth-order Runge-Kutta stepping.  For separable
H = T(p) + V(q), `separable_evolution` instead runs two independent 1D
Schrodinger problems (one in position, one in momentum, the latter with
the position operator realized spectrally as +i*hbar d/dp) and the
outer-product assembly of the pair solves the same field equation.
That gives two routes to the same answer and each serves as the other's
oracle in the tests.

Grids are treated as periodic; both paths assume the state decays well
below the boundary, and `apply_generator` enforces that as a hard
precondition.  The generator is not Hermitian in the plain L2 sense, so
the field normalization is logged as a diagnostic rather than enforced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .distributions import ChiField, SeparableSolution
from .errors import InputError, InvariantError, StabilityError
from .grids import MomentumState, PositionState, UniformGrid

_BOUNDARY_DECAY = 1e-8
# Explicit RK4 keeps purely imaginary spectra stable up to |lambda dt| = 2*sqrt(2).
_RK4_IMAG_LIMIT = 2.0 * math.sqrt(2.0)
_NORM_BLOWUP = 10.0
_POWER_ITERATIONS = 40
_POWER_SEED = 1721


class HamiltonianPolynomial:
    """Real-coefficient polynomial in commuting (q, p).

    Terms are (coeff, qpow, ppow) triples; duplicates merge and zero
    coefficients drop.  This is the c-number function that seeds the
    transport generator, not an operator.
    """

    __slots__ = ("terms", "hbar")

    def __init__(self, terms: Sequence[Tuple[float, int, int]], hbar: float = 1.0):
        hbar = float(hbar)
        if not (hbar > 0.0) or not math.isfinite(hbar):
            raise InputError(f"hbar must be a positive real, got {hbar!r}")
        merged: dict = {}
        for coeff, qpow, ppow in terms:
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise InputError("Hamiltonian coefficients must be finite")
            if qpow != int(qpow) or ppow != int(ppow) or qpow < 0 or ppow < 0:
                raise InputError(
                    f"powers must be non-negative integers, got ({qpow}, {ppow})")
            key = (int(qpow), int(ppow))
            merged[key] = merged.get(key, 0.0) + coeff
        cleaned = tuple(sorted(
            ((c, m, n) for (m, n), c in merged.items() if c != 0.0),
            key=lambda t: (-(t[1] + t[2]), -t[1])))
        self.terms = cleaned
        self.hbar = hbar

    @classmethod
    def from_text(cls, text: str, hbar: float = 1.0) -> "HamiltonianPolynomial":
        """Parse an expression like ``0.5 p^2 + 0.5 q^2``.

        The coefficients must come out real once any explicit hbar
        factors are evaluated; a residual imaginary part is rejected.
        """
        from .parsing import parse_symbol

        sym = parse_symbol(text, hbar=hbar)
        triples = []
        for term in sym.terms:
            value = term.coeff.evaluate(hbar)
            scale = max(1.0, abs(value))
            if abs(value.imag) > 1e-12 * scale:
                raise InputError(
                    f"Hamiltonian coefficients must be real; the q^{term.qpow} "
                    f"p^{term.ppow} term evaluates to {value}")
            triples.append((value.real, term.qpow, term.ppow))
        return cls(triples, hbar=hbar)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((m + n for _, m, n in self.terms), default=0)

    @property
    def max_qpow(self) -> int:
        return max((m for _, m, n in self.terms), default=0)

    @property
    def max_ppow(self) -> int:
        return max((n for _, m, n in self.terms), default=0)

    def derivative(self, var: str, order: int = 1) -> "HamiltonianPolynomial":
        if var not in ("q", "p"):
            raise InputError(f"derivative variable must be 'q' or 'p', got {var!r}")
        if order < 0 or order != int(order):
            raise InputError("derivative order must be a non-negative integer")
        terms = list(self.terms)
        for _ in range(int(order)):
            step = []
            for coeff, m, n in terms:
                if var == "q" and m > 0:
                    step.append((coeff * m, m - 1, n))
                elif var == "p" and n > 0:
                    step.append((coeff * n, m, n - 1))
            terms = step
        return HamiltonianPolynomial(terms, hbar=self.hbar)

    def evaluate(self, qvals, pvals):
        """Evaluate the polynomial with broadcasting over array inputs."""
        q = np.asarray(qvals, dtype=float)
        p = np.asarray(pvals, dtype=float)
        total = np.zeros(np.broadcast_shapes(q.shape, p.shape), dtype=float)
        for coeff, m, n in self.terms:
            piece = np.full_like(total, coeff)
            if m:
                piece = piece * q ** m
            if n:
                piece = piece * p ** n
            total = total + piece
        return total if total.shape else float(total)

    def split_separable(self):
        """Return (kinetic, potential) or None when a mixed term blocks it.

        The kinetic part collects pure-p terms, the potential part
        pure-q terms plus any constant.
        """
        kinetic, potential = [], []
        for coeff, m, n in self.terms:
            if m > 0 and n > 0:
                return None
            if n > 0:
                kinetic.append((coeff, m, n))
            else:
                potential.append((coeff, m, n))
        return (HamiltonianPolynomial(kinetic, hbar=self.hbar),
                HamiltonianPolynomial(potential, hbar=self.hbar))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for coeff, m, n in self.terms:
            bits = []
            if coeff != 1.0 or (m == 0 and n == 0):
                bits.append(format(coeff, "g"))
            if m:
                bits.append("q" if m == 1 else f"q^{m}")
            if n:
                bits.append("p" if n == 1 else f"p^{n}")
            parts.append(" ".join(bits))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"HamiltonianPolynomial({self.terms!r}, hbar={self.hbar!r})"


@dataclass(frozen=True)
class GeneratorTerm:
    """One single-axis derivative term: scalar * coeff(q, p) * d^n on one axis."""

    scalar: complex
    coeff: HamiltonianPolynomial
    dq_order: int
    dp_order: int

    def __post_init__(self):
        if self.dq_order < 0 or self.dp_order < 0:
            raise InputError("derivative orders must be non-negative")
        if (self.dq_order > 0) == (self.dp_order > 0):
            raise InputError(
                "each generator term must differentiate along exactly one axis")


@dataclass(frozen=True)
class EPSGenerator:
    """Finite sum of single-axis derivative terms acting on chi fields."""

    terms: Tuple[GeneratorTerm, ...]
    hbar: float

    def __len__(self) -> int:
        return len(self.terms)


def build_generator(h: HamiltonianPolynomial) -> EPSGenerator:
    """Expand the transport series for a polynomial Hamiltonian.

    The series terminates at the degree of H: q-derivative terms are
    weighted by p-derivatives of H and vice versa, with scalar factors
    (-i hbar)^n / n! and a relative minus sign on the dp family.
    """
    if not isinstance(h, HamiltonianPolynomial):
        raise InputError("build_generator expects a HamiltonianPolynomial")
    hbar = h.hbar
    out: List[GeneratorTerm] = []
    for n in range(1, h.max_ppow + 1):
        coeff = h.derivative("p", n)
        if coeff.is_zero():
            continue
        scalar = (-1j * hbar) ** n / math.factorial(n)
        out.append(GeneratorTerm(scalar, coeff, dq_order=n, dp_order=0))
    for n in range(1, h.max_qpow + 1):
        coeff = h.derivative("q", n)
        if coeff.is_zero():
            continue
        scalar = -((-1j * hbar) ** n) / math.factorial(n)
        out.append(GeneratorTerm(scalar, coeff, dq_order=0, dp_order=n))
    return EPSGenerator(tuple(out), hbar=hbar)


def _angular_modes(grid: UniformGrid) -> np.ndarray:
    return 2.0 * math.pi * np.fft.fftfreq(grid.count, d=grid.step)


def _compile_generator(gen: EPSGenerator, qgrid: UniformGrid,
                       pgrid: UniformGrid) -> Callable[[np.ndarray], np.ndarray]:
    """Bind a generator to grids, returning vals -> d(vals)/dt.

    Coefficient polynomials become broadcastable meshes and each
    derivative becomes a per-axis Fourier multiplier, so the returned
    closure does one forward FFT per axis used and one inverse FFT per
    term.
    """
    qcol = qgrid.points()[:, None]
    prow = pgrid.points()[None, :]
    ikq = 1j * _angular_modes(qgrid)
    ikp = 1j * _angular_modes(pgrid)
    qterms = []
    pterms = []
    for term in gen.terms:
        mesh = term.coeff.evaluate(qcol, prow)
        weight = term.scalar * np.asarray(mesh, dtype=complex)
        if term.dq_order:
            qterms.append((ikq ** term.dq_order, weight))
        else:
            pterms.append((ikp ** term.dp_order, weight))
    divisor = 1j * gen.hbar

    def apply(values: np.ndarray) -> np.ndarray:
        out = np.zeros_like(values, dtype=complex)
        if qterms:
            spec = np.fft.fft(values, axis=0)
            for modes, weight in qterms:
                out += weight * np.fft.ifft(spec * modes[:, None], axis=0)
        if pterms:
            spec = np.fft.fft(values, axis=1)
            for modes, weight in pterms:
                out += weight * np.fft.ifft(spec * modes[None, :], axis=1)
        return out / divisor

    return apply


def _boundary_ratio(values: np.ndarray) -> float:
    peak = float(np.abs(values).max())
    if peak == 0.0:
        return 0.0
    edge = max(float(np.abs(values[0, :]).max()),
               float(np.abs(values[-1, :]).max()),
               float(np.abs(values[:, 0]).max()),
               float(np.abs(values[:, -1]).max()))
    return edge / peak


def _require_decay(values: np.ndarray, when: str):
    ratio = _boundary_ratio(values)
    if ratio > _BOUNDARY_DECAY:
        raise InvariantError(
            f"field does not decay at the grid boundary {when}: edge magnitude "
            f"is {ratio:.3e} of the peak (limit {_BOUNDARY_DECAY:g}); enlarge "
            "the domain")


def _check_chi(chi: ChiField, hbar: float):
    if not isinstance(chi, ChiField):
        raise InputError("expected a ChiField")
    if chi.hbar != hbar:
        raise InputError(
            f"hbar mismatch: field carries {chi.hbar}, Hamiltonian {hbar}")


def apply_generator(gen: EPSGenerator, chi: ChiField) -> ChiField:
    """Evaluate d(chi)/dt at the field's current time.

    Precondition: chi must be negligible (relative 1e-8) on the grid
    boundary, since derivatives are taken on the periodic extension.
    """
    if not isinstance(gen, EPSGenerator):
        raise InputError("apply_generator expects an EPSGenerator")
    _check_chi(chi, gen.hbar)
    _require_decay(chi.values, "in apply_generator")
    apply = _compile_generator(gen, chi.qgrid, chi.pgrid)
    return ChiField(chi.qgrid, chi.pgrid, apply(chi.values), hbar=chi.hbar,
                    time=chi.time)


def estimate_spectral_radius(gen: EPSGenerator, qgrid: UniformGrid,
                             pgrid: UniformGrid) -> float:
    """Power-iteration estimate of the discretized generator's radius.

    Uses a fixed seed so the stability gate in `evolve` is
    deterministic run to run.
    """
    apply = _compile_generator(gen, qgrid, pgrid)
    rng = np.random.default_rng(_POWER_SEED)
    shape = (qgrid.count, pgrid.count)
    vec = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    vec /= np.linalg.norm(vec)
    radius = 0.0
    for _ in range(_POWER_ITERATIONS):
        vec = apply(vec)
        radius = float(np.linalg.norm(vec))
        if radius == 0.0:
            return 0.0
        vec /= radius
    return radius


@dataclass(frozen=True)
class EvolutionResult:
    """Final field plus the per-step diagnostic log of a run.

    normalizations holds |integral of chi| per step (the tracked, not
    enforced, normalization); l2_norms the plain L2 norm; centroids the
    first-moment trajectory with NaN rows where the field integral is
    too small to divide by.  snapshots is empty unless a stride was
    requested.
    """

    final: ChiField
    times: np.ndarray
    normalizations: np.ndarray
    l2_norms: np.ndarray
    centroids: np.ndarray
    snapshots: Tuple[ChiField, ...]


def _field_logs(values, qcol, prow, cell):
    total = complex(values.sum() * cell)
    l2 = float(np.linalg.norm(values)) * math.sqrt(cell)
    if abs(total) < 1e-12:
        qc = pc = math.nan
    else:
        # first moments divided by the full complex integral, real parts kept
        qc = float(((values * qcol).sum() * cell / total).real)
        pc = float(((values * prow).sum() * cell / total).real)
    return abs(total), l2, qc, pc


def evolve(chi0: ChiField, h: HamiltonianPolynomial, dt: float, steps: int,
           snapshot_stride: Optional[int] = None) -> EvolutionResult:
    """Propagate a field with classical fourth-order Runge-Kutta steps.

    dt may be negative to run time backwards (the reversibility checks
    depend on that) but must stay inside the stability bound estimated
    from the generator's spectral radius; a violation raises
    StabilityError up front with a usable step suggestion.  A tenfold
    L2 growth during the run aborts with the offending dt named.
    """
    if not isinstance(h, HamiltonianPolynomial):
        raise InputError("evolve expects a HamiltonianPolynomial")
    _check_chi(chi0, h.hbar)
    dt = float(dt)
    if not math.isfinite(dt) or dt == 0.0:
        raise InputError(f"dt must be a nonzero finite real, got {dt!r}")
    steps = int(steps)
    if steps < 1:
        raise InputError("steps must be a positive integer")
    if snapshot_stride is not None:
        snapshot_stride = int(snapshot_stride)
        if snapshot_stride < 1:
            raise InputError("snapshot_stride must be a positive integer")
    _require_decay(chi0.values, "at the start of evolve")

    gen = build_generator(h)
    apply = _compile_generator(gen, chi0.qgrid, chi0.pgrid)
    radius = estimate_spectral_radius(gen, chi0.qgrid, chi0.pgrid)
    if radius > 0.0:
        bound = _RK4_IMAG_LIMIT / radius
        if abs(dt) > bound:
            raise StabilityError(
                f"time step {dt:g} exceeds the explicit-stability bound "
                f"{bound:.6g} for this grid and Hamiltonian; choose |dt| <= "
                f"{0.9 * bound:.6g}")

    qcol = chi0.qgrid.points()[:, None]
    prow = chi0.pgrid.points()[None, :]
    cell = chi0.qgrid.step * chi0.pgrid.step

    values = np.array(chi0.values, dtype=complex)
    times = chi0.time + dt * np.arange(steps + 1)
    normalizations = np.empty(steps + 1)
    l2_norms = np.empty(steps + 1)
    centroids = np.empty((steps + 1, 2))
    normalizations[0], l2_norms[0], centroids[0, 0], centroids[0, 1] = \
        _field_logs(values, qcol, prow, cell)
    initial_l2 = l2_norms[0]
    snapshots: List[ChiField] = []

    def record_snapshot(step_index):
        snapshots.append(ChiField(chi0.qgrid, chi0.pgrid, values.copy(),
                                  hbar=chi0.hbar, time=float(times[step_index])))

    if snapshot_stride is not None:
        record_snapshot(0)

    for k in range(1, steps + 1):
        k1 = apply(values)
        k2 = apply(values + (0.5 * dt) * k1)
        k3 = apply(values + (0.5 * dt) * k2)
        k4 = apply(values + dt * k3)
        values = values + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        normalizations[k], l2_norms[k], centroids[k, 0], centroids[k, 1] = \
            _field_logs(values, qcol, prow, cell)
        if initial_l2 > 0.0 and l2_norms[k] > _NORM_BLOWUP * initial_l2:
            raise StabilityError(
                f"field norm grew more than {_NORM_BLOWUP:g}x by step {k} "
                f"(t = {times[k]:g}); dt = {dt:g} is unstable for this grid, "
                "reduce the step")
        _require_decay(values, f"at step {k} of evolve")
        if snapshot_stride is not None and (k % snapshot_stride == 0
                                            or k == steps):
            if not snapshots or snapshots[-1].time != float(times[k]):
                record_snapshot(k)

    final = ChiField(chi0.qgrid, chi0.pgrid, values, hbar=chi0.hbar,
                     time=float(times[-1]))
    return EvolutionResult(final=final, times=times,
                           normalizations=normalizations, l2_norms=l2_norms,
                           centroids=centroids, snapshots=tuple(snapshots))


def _conjugate_momentum_grid(grid: UniformGrid, hbar: float) -> UniformGrid:
    step = 2.0 * math.pi * hbar / (grid.count * grid.step)
    return UniformGrid(grid.count, -(grid.count // 2) * step, step)


# Triple-jump composition weights turning a symmetric 2nd-order splitting
# into a 4th-order one.
_YOSHIDA_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_YOSHIDA_W0 = 1.0 - 2.0 * _YOSHIDA_W1


def separable_evolution(psi0: PositionState, h: HamiltonianPolynomial,
                        dt: float, steps: int,
                        pgrid: Optional[UniformGrid] = None) -> SeparableSolution:
    """Evolve the two 1D factors of a separable Hamiltonian H = T(p) + V(q).

    The position factor follows the ordinary Schrodinger equation with
    split-step spectral stepping; the momentum factor evolves with the
    position operator realized as +i*hbar d/dp, which the grid sees as
    multiplication by -hbar*k on momentum-axis Fourier modes.  Both use
    the triple-jump composition of Strang splittings, so the scheme is
    globally fourth order in dt, matching the order of `evolve` so the
    two paths can be compared under step refinement.

    pgrid defaults to the Fourier-conjugate grid of psi0's lattice.
    Raises InputError for a Hamiltonian with mixed q*p terms.
    """
    if not isinstance(psi0, PositionState):
        raise InputError("separable_evolution expects a PositionState")
    if not isinstance(h, HamiltonianPolynomial):
        raise InputError("separable_evolution expects a HamiltonianPolynomial")
    if psi0.hbar != h.hbar:
        raise InputError(
            f"hbar mismatch: state carries {psi0.hbar}, Hamiltonian {h.hbar}")
    dt = float(dt)
    if not math.isfinite(dt) or dt == 0.0:
        raise InputError(f"dt must be a nonzero finite real, got {dt!r}")
    steps = int(steps)
    if steps < 1:
        raise InputError("steps must be a positive integer")
    parts = h.split_separable()
    if parts is None:
        raise InputError(
            "separable_evolution needs H = T(p) + V(q); this Hamiltonian has "
            "a mixed q/p term")
    kinetic, potential = parts
    hbar = h.hbar
    if pgrid is None:
        pgrid = _conjugate_momentum_grid(psi0.grid, hbar)
    elif not isinstance(pgrid, UniformGrid):
        raise InputError("pgrid must be a UniformGrid")

    from .grids import to_momentum

    phi0 = to_momentum(psi0, pgrid)

    qpts = psi0.grid.points()
    kq = _angular_modes(psi0.grid)
    ppts = pgrid.points()
    kp = _angular_modes(pgrid)

    v_on_q = np.asarray(potential.evaluate(qpts, 0.0), dtype=float)
    t_on_qmodes = np.asarray(kinetic.evaluate(0.0, hbar * kq), dtype=float)
    t_on_p = np.asarray(kinetic.evaluate(0.0, ppts), dtype=float)
    v_on_pmodes = np.asarray(potential.evaluate(-hbar * kp, 0.0), dtype=float)

    def substep_factors(tau):
        return (np.exp(-0.5j * v_on_q * tau / hbar),
                np.exp(-1j * t_on_qmodes * tau / hbar),
                np.exp(-0.5j * t_on_p * tau / hbar),
                np.exp(-1j * v_on_pmodes * tau / hbar))

    stages = [substep_factors(_YOSHIDA_W1 * dt),
              substep_factors(_YOSHIDA_W0 * dt)]
    sequence = (0, 1, 0)

    psi = np.array(psi0.values, dtype=complex)
    phi = np.array(phi0.values, dtype=complex)
    for _ in range(steps):
        for idx in sequence:
            half_v, full_t, half_t, full_v = stages[idx]
            psi = half_v * np.fft.ifft(full_t * np.fft.fft(half_v * psi))
            phi = half_t * np.fft.ifft(full_v * np.fft.fft(half_t * phi))

    return SeparableSolution(PositionState(psi0.grid, psi, hbar=hbar),
                             MomentumState(pgrid, phi, hbar=hbar))
