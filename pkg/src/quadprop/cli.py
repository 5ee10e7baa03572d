"""Command-line interface.

Exit codes: 0 ok, 2 config or parse error, 3 caustic or domain error,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classical import lagrangian, solve_extremal, solve_newton_bvp
from .errors import (
    CausticError,
    ConvergenceError,
    IntegrationError,
    NonFiniteError,
    NyquistError,
    ParseError,
    QuadpropError,
    SupportError,
)
from .evolve import Grid, Propagator, gaussian_wavepacket, propagate
from .propcore import DEFAULT_ATOL, DEFAULT_RTOL, QuadraticPotential, build_coefficients
from .verify import CORPORA, VerifyCase, run_verification

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_VERIFY = 4


class ConfigError(QuadpropError):
    pass


@dataclass
class RunConfig:
    mass: float = 1.0
    hbar: float = 1.0
    t0: float = 0.0
    x0: float = 0.0
    F1: str = "0"
    G1: str = "0"
    J1: str = "0"
    grid: dict = field(default_factory=lambda: {"x_min": -5.0, "x_max": 5.0, "n": 64})
    times: list = field(default_factory=list)
    T: float | None = None
    tolerances: dict = field(default_factory=dict)
    initial_state: dict | None = None
    endpoint: dict | None = None
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
        return cls.from_dict(data)

    @property
    def rtol(self):
        return float(self.tolerances.get("rtol", DEFAULT_RTOL))

    @property
    def atol(self):
        return float(self.tolerances.get("atol", DEFAULT_ATOL))

    @property
    def span_end(self):
        return float(self.T) if self.T is not None else max(self.times)

    def validate(self):
        for name in ("mass", "hbar"):
            if not float(getattr(self, name)) > 0:
                raise ConfigError(f"{name} must be positive")
        for name, value in self.tolerances.items():
            if not float(value) > 0:
                raise ConfigError(f"tolerance {name} must be positive")
        n = int(self.grid.get("n", 0))
        if n < 16 or n & (n - 1):
            raise ConfigError(f"grid n must be a power of two >= 16, got {n}")
        if not float(self.grid["x_max"]) > float(self.grid["x_min"]):
            raise ConfigError("grid x_max must exceed x_min")
        if not self.times:
            raise ConfigError("time sample list is empty")
        if self.T is not None and not float(self.T) > self.t0:
            raise ConfigError("T must exceed t0")
        for t in self.times:
            if not (self.t0 < float(t) <= self.span_end):
                raise ConfigError(f"time sample {t} not inside (t0, T] = ({self.t0}, {self.span_end}]")

    def potential(self):
        return QuadraticPotential(self.F1, self.G1, self.J1, m=self.mass, hbar=self.hbar)

    def make_grid(self):
        return Grid(float(self.grid["x_min"]), float(self.grid["x_max"]), int(self.grid["n"]))


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def render(columns, rows, fmt, meta=None):
    """Render a table as CSV (17 significant digits) or JSON."""
    if fmt == "json":
        doc = dict(meta or {})
        doc["columns"] = list(columns)
        doc["rows"] = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _output(cfg, args):
    out = args.out if args.out is not None else cfg.output.get("path")
    fmt = args.format or cfg.output.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown output format {fmt!r}")
    return out, fmt


def _rtol(cfg, args):
    rtol = args.tol if args.tol is not None else cfg.rtol
    atol = cfg.atol if args.tol is None else min(cfg.atol, args.tol * 1e-2)
    return rtol, atol


def cmd_propagator(cfg, args):
    """Table of (x, t, Re K, Im K, S, |f|, arg f, status) over grid x times."""
    rtol, atol = _rtol(cfg, args)
    p = cfg.potential()
    prop = Propagator(p, cfg.t0, cfg.span_end, rtol, atol)
    xs = cfg.make_grid().x
    cols = ["x", "t", "re_K", "im_K", "S", "abs_f", "arg_f", "status"]
    rows = []
    nan = float("nan")
    for t in map(float, cfg.times):
        status = "ok"
        try:
            f = prop.ff(t)
        except CausticError:
            status, f = "caustic", None
        if f is not None and prop.char.crossings(t) and not args.allow_caustic_phase:
            status, f = "beyond_caustic", None
        if f is None:
            rows.extend([x, t, nan, nan, nan, nan, nan, status] for x in xs)
            continue
        S = prop.ac.action(xs, t, cfg.x0)
        K = f * np.exp(1j * S / p.hbar)
        for x, k, s in zip(xs, K, S):
            rows.append([x, t, k.real, k.imag, s, abs(f), math.atan2(f.imag, f.real), status])
    out, fmt = _output(cfg, args)
    _emit(render(cols, rows, fmt, {"command": "propagator", "x0": cfg.x0, "t0": cfg.t0}), out)
    return EXIT_OK


def cmd_evolve(cfg, args):
    """Propagate a Gaussian; summary table per time plus one snapshot per time."""
    if not cfg.initial_state:
        raise ConfigError("evolve needs an initial_state {xbar, pbar, sigma}")
    st = cfg.initial_state
    rtol, atol = _rtol(cfg, args)
    p = cfg.potential()
    grid = cfg.make_grid()
    psi0 = gaussian_wavepacket(grid, float(st.get("xbar", 0.0)), float(st.get("pbar", 0.0)),
                               float(st["sigma"]), p.hbar, t=cfg.t0)
    prop = Propagator(p, cfg.t0, cfg.span_end, rtol, atol)
    for t in cfg.times:
        if prop.char.crossings(float(t)) and not args.allow_caustic_phase:
            raise CausticError(float(t), f"t={t} lies beyond the caustic at "
                               f"t={prop.char.zeros[0]!r}; pass --allow-caustic-phase")
    cols = ["t", "norm", "mean_x", "width", "caustics_crossed"]
    rows, snaps = [], []
    for t in map(float, cfg.times):
        psi = propagate(prop, psi0, t)
        rows.append([t, psi.norm(), psi.mean_x(), psi.width(), prop.char.crossings(t)])
        snaps.append(psi)
    out, fmt = _output(cfg, args)
    snap_cols = ["x", "re_psi", "im_psi", "abs2_psi"]

    def snap_rows(psi):
        return [[x, v.real, v.imag, abs(v) ** 2] for x, v in zip(psi.x, psi.values)]

    if fmt == "json":
        doc = json.loads(render(cols, rows, "json", {"command": "evolve"}))
        doc["snapshots"] = [json.loads(render(snap_cols, snap_rows(s), "json", {"t": s.t})) for s in snaps]
        _emit(json.dumps(doc, indent=2) + "\n", out)
        return EXIT_OK
    _emit(render(cols, rows, "csv"), out)
    if out not in (None, "-"):
        base = Path(out)
        for k, psi in enumerate(snaps):
            path = base.with_name(f"{base.stem}_t{k:03d}{base.suffix or '.csv'}")
            path.write_text(render(snap_cols, snap_rows(psi), "csv"), encoding="utf-8")
    return EXIT_OK


def cmd_classical(cfg, args):
    """Field-of-extremals and Newton trajectories side by side."""
    if not cfg.endpoint:
        raise ConfigError("classical needs an endpoint {x1, t1}")
    x1, t1 = float(cfg.endpoint["x1"]), float(cfg.endpoint["t1"])
    if not t1 > cfg.t0:
        raise ConfigError("endpoint t1 must exceed t0")
    rtol, atol = _rtol(cfg, args)
    p = cfg.potential()
    ac = build_coefficients(p, cfg.x0, cfg.t0, max(t1, cfg.span_end), rtol, atol)
    n = int(cfg.endpoint.get("n", 201))
    a = solve_extremal(ac, x1, t1, n=n, rtol=rtol, atol=atol)
    b = solve_newton_bvp(p, cfg.x0, cfg.t0, x1, t1, n=n, rtol=rtol, atol=atol)
    cols = ["t", "x_field", "xdot_field", "x_newton", "xdot_newton", "lagrangian"]
    rows = [[t, xa, va, xb, vb, lagrangian(p, xb, vb, t)]
            for t, xa, va, xb, vb in zip(a.t, a.x, a.xdot, b.x, b.xdot)]
    out, fmt = _output(cfg, args)
    meta = {"command": "classical", "action_S": float(ac.action(x1, t1))}
    _emit(render(cols, rows, fmt, meta), out)
    return EXIT_OK


def _verify_cases(cfg, args):
    if cfg is None:
        names = list(CORPORA) if args.corpus in (None, "all") else [args.corpus]
        return [(name, VerifyCase(QuadraticPotential(**CORPORA[name]), corrupt=args.corrupt,
                                  **({"rtol": args.tol} if args.tol else {}))) for name in names]
    rtol, atol = _rtol(cfg, args)
    case = VerifyCase(cfg.potential(), t0=cfg.t0, x0=cfg.x0, t_end=max(map(float, cfg.times)),
                      rtol=rtol, atol=atol, corrupt=args.corrupt)
    if cfg.initial_state:
        case.packet = {"xbar": 0.0, "pbar": 0.0, **cfg.initial_state}
    return [("config", case)]


def cmd_verify(cfg, args):
    """Run the oracle suite; exit 4 if any check fails."""
    cols = ["corpus", "check", "value", "tol", "status", "detail"]
    rows = []
    failed = False
    for name, case in _verify_cases(cfg, args):
        for c in run_verification(case):
            rows.append([name, c.name, c.value, c.tol, "pass" if c.passed else "fail", c.detail])
            failed |= not c.passed
    if cfg is None:
        out, fmt = args.out, args.format or "csv"
    else:
        out, fmt = _output(cfg, args)
    _emit(render(cols, rows, fmt, {"command": "verify", "passed": not failed}), out)
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {
    "propagator": cmd_propagator,
    "evolve": cmd_evolve,
    "classical": cmd_classical,
    "verify": cmd_verify,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="quadprop",
        description="Exact propagators for time-dependent quadratic potentials.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=fn.__doc__.splitlines()[0])
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--tol", type=float, help="integrator relative tolerance")
        sp.add_argument("--allow-caustic-phase", action="store_true",
                        help="continue past zeros of u with the exp(-i pi/2) phase rule")
        if name == "verify":
            sp.add_argument("--corpus", choices=(*CORPORA, "all"),
                            help="built-in potential(s) to verify when no --config is given")
            sp.add_argument("--corrupt", type=float, metavar="FACTOR",
                            help="inject a wrong fluctuation factor f*FACTOR**(t-t0)")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.tol is not None and not args.tol > 0:
            raise ConfigError("--tol must be positive")
        if args.config is None:
            if args.command != "verify":
                raise ConfigError(f"{args.command} needs --config")
            cfg = None
        else:
            cfg = RunConfig.load(args.config)
            cfg.potential()
        return COMMANDS[args.command](cfg, args)
    except ParseError as exc:
        print(f"error: parse error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, TypeError, KeyError, ValueError) as exc:
        print(f"error: configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CausticError, NonFiniteError, IntegrationError, NyquistError, SupportError,
            ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
