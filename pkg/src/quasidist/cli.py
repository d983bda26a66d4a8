"""Command-line front door.

Four subcommands drive the library: ``symbol`` (ordering calculus),
``distribution`` (phase-space transform of a state), ``expect``
(cross-picture expectation report), and ``evolve`` (joint-field time
evolution with snapshot export).  Configuration is a flat key=value
file with command-line flag overrides; every numeric artifact is
written through the deterministic 17-digit JSON/CSV layer, and the
report paths additionally render PNG figures next to the delimited
output unless figures are switched off.

Exit codes: 0 success, 2 input or parse error, 3 invariant failure,
4 numerical instability.
"""
from __future__ import annotations

import argparse
import math
import re
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .distributions import (SeparableSolution, assemble_separable,
                            compute_distribution, field_diagnostics, marginals)
from .dynamics import HamiltonianPolynomial, evolve
from .errors import (InputError, InvariantError, QuasidistError,
                     StabilityError)
from .expectation import PAIRINGS, expectation_report
from .fileio import format_float, load_state, save_field, write_json
from .grids import (UniformGrid, coherent_state, density_from_pure,
                    from_momentum, oscillator_eigenstate, to_momentum,
                    MomentumState)
from .operators import alpha_symbol
from .parsing import parse_operator

_DEFAULT_DT = 2.0 * math.pi / 2000.0


@dataclass
class RunConfig:
    """Flat run configuration; field names double as config-file keys."""

    hbar: float = 1.0
    alpha: float = -0.5
    q_count: int = 128
    q_min: float = -8.0
    q_step: float = 0.125
    p_count: int = 128
    p_min: float = -8.0
    p_step: float = 0.125
    state: str = "oscillator:0"
    op: Optional[str] = None
    ham: str = "0.5 p^2 + 0.5 q^2"
    dt: float = _DEFAULT_DT
    steps: int = 2000
    stride: int = 100
    out: str = "out"
    figures: bool = True


def _as_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def load_config(path) -> RunConfig:
    """Parse a flat key=value file; unknown keys are hard errors."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    cfg = RunConfig()
    types = {f.name: type(getattr(cfg, f.name)) if getattr(cfg, f.name)
             is not None else str for f in fields(RunConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}, line {lineno}: expected key=value, "
                             f"got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in types:
            raise InputError(f"{path}, line {lineno}: unknown config key {key!r}")
        caster = types[key]
        if caster is bool:
            caster = _as_bool
        try:
            setattr(cfg, key, caster(value))
        except ValueError as exc:
            raise InputError(
                f"{path}, line {lineno}: bad value for {key}: {exc}") from exc
    return cfg


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def validate_config(cfg: RunConfig):
    """Reject bad numbers up front, before anything touches the disk."""
    for name in ("hbar", "alpha", "q_min", "q_step", "p_min", "p_step", "dt"):
        value = getattr(cfg, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise InputError(f"config field {name} must be finite, got {value!r}")
    if cfg.hbar <= 0:
        raise InputError(f"hbar must be positive, got {cfg.hbar}")
    if cfg.q_step <= 0 or cfg.p_step <= 0:
        raise InputError("grid steps must be positive")
    for name in ("q_count", "p_count"):
        count = getattr(cfg, name)
        if not isinstance(count, int) or count < 8:
            raise InputError(f"{name} must be an integer of at least 8")
        if not _is_power_of_two(count):
            raise InputError(f"{name} must be a power of two, got {count}")
    if cfg.dt == 0:
        raise InputError("dt must be nonzero")
    if not isinstance(cfg.steps, int) or cfg.steps < 0:
        raise InputError(f"steps must be a non-negative integer, got {cfg.steps!r}")
    if not isinstance(cfg.stride, int) or cfg.stride < 1:
        raise InputError(f"stride must be a positive integer, got {cfg.stride!r}")


def _grids(cfg: RunConfig):
    return (UniformGrid(cfg.q_count, cfg.q_min, cfg.q_step),
            UniformGrid(cfg.p_count, cfg.p_min, cfg.p_step))


def resolve_state(cfg: RunConfig, qgrid: UniformGrid):
    """Turn the state spec into a PositionState on a definite grid.

    ``oscillator:N`` and ``coherent:Q0,P0`` build on the configured
    grid; ``file:PATH`` brings its own lattice (a momentum-kind file is
    transformed onto the configured position grid).  Returns the state
    and the grid it actually lives on.
    """
    spec = cfg.state.strip()
    tokens = [t for t in re.split(r"[:,\s]+", spec) if t]
    if not tokens:
        raise InputError("empty state spec")
    kind = tokens[0].lower()
    if kind == "oscillator":
        if len(tokens) != 2:
            raise InputError(f"state {spec!r}: expected oscillator:N")
        try:
            index = int(tokens[1])
        except ValueError:
            raise InputError(f"state {spec!r}: bad eigenstate index")
        return oscillator_eigenstate(index, qgrid, hbar=cfg.hbar), qgrid
    if kind == "coherent":
        if len(tokens) != 3:
            raise InputError(f"state {spec!r}: expected coherent:Q0,P0")
        try:
            q0, p0 = float(tokens[1]), float(tokens[2])
        except ValueError:
            raise InputError(f"state {spec!r}: bad center coordinates")
        return coherent_state(q0, p0, qgrid, hbar=cfg.hbar), qgrid
    if kind == "file":
        match = re.match(r"file[:\s]+(.+)$", spec)
        if not match:
            raise InputError(f"state {spec!r}: expected file:PATH")
        loaded = load_state(match.group(1).strip(), hbar=cfg.hbar)
        if isinstance(loaded, MomentumState):
            return from_momentum(loaded, qgrid), qgrid
        return loaded, loaded.grid
    raise InputError(
        f"state {spec!r}: expected oscillator:N, coherent:Q0,P0, or file:PATH")


def _require_op(cfg: RunConfig):
    if not cfg.op:
        raise InputError("this subcommand needs an operator; pass --op or set "
                         "op in the config")


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _config_echo(cfg: RunConfig) -> dict:
    echo = asdict(cfg)
    if echo["op"] is None:
        del echo["op"]
    return echo


def _null_safe(value: float):
    value = float(value)
    return value if math.isfinite(value) else None


def cmd_symbol(cfg: RunConfig) -> int:
    _require_op(cfg)
    validate_config(cfg)
    op = parse_operator(cfg.op, hbar=cfg.hbar)
    sym = alpha_symbol(op, cfg.alpha)
    text = str(sym)
    terms = []
    for term in sym.terms:
        grades = [{"grade": g, "re": c.real, "im": c.imag}
                  for g, c in term.coeff.items_sorted()]
        terms.append({"q_power": term.qpow, "p_power": term.ppow,
                      "hbar_grades": grades})
    out = _out_dir(cfg)
    write_json(out / "symbol.json", {
        "alpha": cfg.alpha,
        "hbar": cfg.hbar,
        "operator": cfg.op,
        "symbol": text,
        "terms": terms,
    })
    print(text)
    return 0


def _print_field_report(field, diag):
    print(f"normalization: {diag['integral_real']:.12g} "
          f"{diag['integral_imag']:+.3e} i")
    print(f"max |Im|: {diag['max_imag']:.3e}")
    print(f"minimum real value: {float(field.values.real.min()):.9g}")
    print(f"q-marginal integral: {diag['q_marginal_integral']:.12g}")
    print(f"p-marginal integral: {diag['p_marginal_integral']:.12g}")


def cmd_distribution(cfg: RunConfig) -> int:
    validate_config(cfg)
    qgrid, pgrid = _grids(cfg)
    psi, qgrid = resolve_state(cfg, qgrid)
    rho = density_from_pure(psi)
    field = compute_distribution(rho, cfg.alpha, pgrid)
    field.validate()
    diag = field_diagnostics(field)
    out = _out_dir(cfg)
    save_field(out / "field.csv", field, config=_config_echo(cfg))
    written = [out / "field.csv", out / "field.json"]
    if cfg.figures:
        from .plotting import save_field_figure, save_marginals_figure

        save_field_figure(out / "field.png", field)
        save_marginals_figure(out / "marginals.png", field)
        written += [out / "field.png", out / "marginals.png"]
    print(f"alpha {cfg.alpha:g} on {qgrid.count}x{pgrid.count} grid")
    _print_field_report(field, diag)
    print("wrote: " + ", ".join(str(p) for p in written))
    return 0


def cmd_expect(cfg: RunConfig) -> int:
    _require_op(cfg)
    validate_config(cfg)
    op = parse_operator(cfg.op, hbar=cfg.hbar)
    qgrid, pgrid = _grids(cfg)
    psi, qgrid = resolve_state(cfg, qgrid)
    rho = density_from_pure(psi)
    report = expectation_report(rho, op, cfg.alpha, pgrid)
    out = _out_dir(cfg)
    write_json(out / "expectation.json", report.to_json_dict())
    print(f"operator: {report.operator_text}")
    print(f"alpha: {cfg.alpha:g}   hbar: {cfg.hbar:g}   state: {cfg.state}")
    print(f"hilbert: {report.hilbert.real:.12g} {report.hilbert.imag:+.3e} i")
    print(f"{'pairing':<12}{'re':>22}{'im':>14}{'|err|':>12}  certified")
    for name in PAIRINGS:
        value = report.pairings[name]
        err = report.discrepancies[name]
        mark = "yes" if name in report.certified else "no"
        print(f"{name:<12}{value.real:>22.12g}{value.imag:>14.3e}"
              f"{err:>12.3e}  {mark}")
    print(f"wrote: {out / 'expectation.json'}")
    return 0


def _snapshot_entry(snap, out, dt, t0, cfg):
    step = int(round((snap.time - t0) / dt)) if dt else 0
    name = f"snapshot_{step:06d}.csv"
    save_field(out / name, snap, config=_config_echo(cfg))
    mq, mp = marginals(snap)
    qpts, ppts = snap.qgrid.points(), snap.pgrid.points()
    dq, dp = snap.qgrid.step, snap.pgrid.step
    q_mean = float((qpts * mq).sum() * dq)
    p_mean = float((ppts * mp).sum() * dp)
    return {
        "time": snap.time,
        "file": name,
        "q_mean": q_mean,
        "q_variance": float(((qpts - q_mean) ** 2 * mq).sum() * dq),
        "p_mean": p_mean,
        "p_variance": float(((ppts - p_mean) ** 2 * mp).sum() * dp),
    }


def cmd_evolve(cfg: RunConfig) -> int:
    validate_config(cfg)
    h = HamiltonianPolynomial.from_text(cfg.ham, hbar=cfg.hbar)
    qgrid, pgrid = _grids(cfg)
    psi, qgrid = resolve_state(cfg, qgrid)
    phi = to_momentum(psi, pgrid)
    chi0 = assemble_separable(SeparableSolution(psi, phi), qgrid, pgrid)

    if cfg.steps == 0:
        # echo the input as a single snapshot
        cell = qgrid.step * pgrid.step
        total = abs(complex(chi0.values.sum() * cell))
        times = np.array([0.0])
        normalizations = np.array([total])
        l2_norms = np.array([float(np.linalg.norm(chi0.values))
                             * math.sqrt(cell)])
        from .distributions import centroid

        c = centroid(chi0)
        centroids = np.array([[c[0], c[1]]])
        snapshots = (chi0,)
        final = chi0
    else:
        result = evolve(chi0, h, cfg.dt, cfg.steps, snapshot_stride=cfg.stride)
        times = result.times
        normalizations = result.normalizations
        l2_norms = result.l2_norms
        centroids = result.centroids
        snapshots = result.snapshots
        final = result.final

    out = _out_dir(cfg)
    entries = [_snapshot_entry(snap, out, cfg.dt, chi0.time, cfg)
               for snap in snapshots]
    summary = {
        "hamiltonian": cfg.ham,
        "hbar": cfg.hbar,
        "dt": cfg.dt,
        "steps": cfg.steps,
        "stride": cfg.stride,
        "state": cfg.state,
        "times": [float(t) for t in times],
        "normalization": [_null_safe(v) for v in normalizations],
        "l2_norm": [_null_safe(v) for v in l2_norms],
        "centroid_q": [_null_safe(v) for v in centroids[:, 0]],
        "centroid_p": [_null_safe(v) for v in centroids[:, 1]],
        "snapshots": entries,
    }
    write_json(out / "summary.json", summary)
    written = [out / "summary.json"] + [out / e["file"] for e in entries]
    if cfg.figures:
        from .plotting import (save_field_figure, save_norm_drift_figure,
                               save_trajectory_figure)

        save_trajectory_figure(out / "trajectory.png", centroids, times)
        save_norm_drift_figure(out / "norm_drift.png", times, normalizations)
        save_field_figure(out / "final_field.png", final)
        written += [out / "trajectory.png", out / "norm_drift.png",
                    out / "final_field.png"]
    drift = float(np.nanmax(np.abs(normalizations - normalizations[0])))
    print(f"evolved {cfg.steps} steps of dt = {format_float(cfg.dt)} "
          f"to t = {final.time:g}")
    cq, cp = centroids[-1]
    if math.isfinite(cq) and math.isfinite(cp):
        print(f"final centroid: ({cq:.6g}, {cp:.6g})")
    print(f"max normalization drift: {drift:.3e}")
    print(f"wrote {len(entries)} snapshots to {out}")
    return 0


_COMMANDS = {
    "symbol": cmd_symbol,
    "distribution": cmd_distribution,
    "expect": cmd_expect,
    "evolve": cmd_evolve,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasidist",
        description="phase-space distribution family toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("symbol", "render the alpha-ordered symbol of an operator"),
            ("distribution", "compute a distribution field for a state"),
            ("expect", "cross-check expectation values between pictures"),
            ("evolve", "propagate the joint field and export snapshots")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--alpha", type=float)
        p.add_argument("--hbar", type=float)
        p.add_argument("--op", help="operator text, e.g. 'q p' or 'q^2 p^2'")
        p.add_argument("--state", help="oscillator:N | coherent:Q0,P0 | file:PATH")
        p.add_argument("--out", help="output directory")
        p.add_argument("--ham", help="Hamiltonian text, e.g. '0.5 p^2 + 0.5 q^2'")
        p.add_argument("--dt", type=float)
        p.add_argument("--steps", type=int)
        p.add_argument("--stride", type=int)
        p.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering, write only CSV/JSON")
    return parser


def build_run_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for key in ("alpha", "hbar", "op", "state", "out", "ham", "dt", "steps",
                "stride"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "no_figures", False):
        cfg.figures = False
    return cfg


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_run_config(args)
        return _COMMANDS[args.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StabilityError as exc:
        print(f"instability: {exc}", file=sys.stderr)
        return 4
    except InvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 3
    except QuasidistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
