"""Batch command line: read a flat key = value config, run one computation, write CSV.

Config grammar: one ``key = value`` per line, dotted keys, ``#`` starts a
comment, blank lines ignored, each key at most once. Recognised keys:

    curve.kind = circle | ellipse | star
    curve.radius, curve.a, curve.b, curve.amplitude, curve.lobes
    couplings.eta, couplings.tau, couplings.lambda, couplings.omega
        (numbers, or expressions in s such as "1 + 0.2*cos(2*pi*s/L)")
    mass            spectral gap half-width m (default 1)
    nodes           quadrature nodes N (default 512)
    scan.grid       z-grid size (default 400)
    scan.prescan    coarse N for the initial sweep (default: none)
    scan.threshold  sigma_min acceptance threshold (default 1e-4)
    oracle.channels largest |n| for the disk reference (default 40)
    approx.epsilons comma-separated layer half-widths
    approx.profiles comma-separated profile names (default box,raised-cosine)
    approx.channels largest |n| in the convergence study (default 6)
    zigzag.count    number of Dirichlet eigenvalues (default 5)
    fields.lambda   magnetic layer strength (default 1)
    fields.profile  profile for the field checks (default raised-cosine)
    fields.epsilons comma-separated layer half-widths
    resolvent.z     complex spectral parameter, e.g. 0.3+0.1j

Exit codes: 0 success, 1 invalid config or arguments, 2 critical couplings,
3 confining couplings, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

import numpy as np
from threadpoolctl import threadpool_limits

from . import approximation, disk_oracle
from .couplings import classify, couplings_from_config, gauge_reductions, CouplingError
from .errors import ConfiningCouplingError, CriticalCouplingError, NumericalFailure, ShellSpecError
from .geometry import curve_from_config
from .kernels import SpectralParameter
from .shell_operator import ShellDiscretization, bump_source, eigenvalue_scan, krein_resolvent_apply

log = logging.getLogger("shellspec")

EXIT_OK, EXIT_CONFIG, EXIT_CRITICAL, EXIT_CONFINING, EXIT_NUMERICAL = 0, 1, 2, 3, 4

KNOWN_KEYS = {
    "curve.kind", "curve.radius", "curve.a", "curve.b", "curve.amplitude", "curve.lobes",
    "couplings.eta", "couplings.tau", "couplings.lambda", "couplings.omega",
    "mass", "nodes", "scan.grid", "scan.prescan", "scan.threshold", "oracle.channels",
    "approx.epsilons", "approx.profiles", "approx.channels", "zigzag.count",
    "fields.lambda", "fields.profile", "fields.epsilons", "resolvent.z",
}


class ConfigError(ShellSpecError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def parse_config(text: str) -> dict[str, str]:
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(key, "unknown key")
        if key in cfg:
            raise ConfigError(key, "given more than once")
        cfg[key] = value.strip("\"'")
    return cfg


class RunConfig:
    """Typed access to a parsed config; every failure names the offending key."""

    INTEGER_KEYS = ("curve.lobes", "nodes", "scan.grid", "scan.prescan", "oracle.channels", "approx.channels", "zigzag.count")
    FLOAT_KEYS = ("curve.radius", "curve.a", "curve.b", "curve.amplitude", "mass", "scan.threshold", "fields.lambda")

    def __init__(self, raw: dict[str, str]):
        self.raw = raw
        self.validate()

    def validate(self):
        """Type-check every key that is present, so bad values fail before any work starts."""
        for key in self.INTEGER_KEYS:
            self.number(key, None, int)
        for key in self.FLOAT_KEYS:
            self.number(key, None, float)
        for key in ("approx.epsilons", "fields.epsilons"):
            self.floats(key, ())
        for key in ("approx.profiles", "fields.profile"):
            self.profiles(key, "box")
        kind = self.raw.get("curve.kind", "circle")
        if kind not in ("circle", "ellipse", "star"):
            raise ConfigError("curve.kind", f"unknown curve kind {kind!r}")
        if "resolvent.z" in self.raw:
            self.spectral_z()

    def spectral_z(self) -> complex:
        try:
            return complex(self.raw.get("resolvent.z", "0.3+0.1j").replace(" ", ""))
        except ValueError:
            raise ConfigError("resolvent.z", "not a complex number") from None

    def number(self, key, default, kind=float, low=None, high=None):
        text = self.raw.get(key)
        if text is None:
            return default
        try:
            value = kind(text)
        except ValueError:
            raise ConfigError(key, f"not a valid {kind.__name__}: {text!r}") from None
        if (low is not None and value < low) or (high is not None and value > high):
            raise ConfigError(key, f"value {text} out of range")
        return value

    def floats(self, key, default):
        text = self.raw.get(key)
        if text is None:
            return tuple(default)
        try:
            values = tuple(float(v) for v in text.split(",") if v.strip())
        except ValueError:
            raise ConfigError(key, f"expected comma-separated numbers: {text!r}") from None
        if not values or min(values) <= 0:
            raise ConfigError(key, "values must be positive")
        return values

    def profiles(self, key, default):
        names = [v.strip() for v in self.raw.get(key, default).split(",") if v.strip()]
        try:
            return [approximation.profile_by_name(n) for n in names]
        except approximation.ProfileError as exc:
            raise ConfigError(key, str(exc)) from None

    def curve(self):
        try:
            return curve_from_config(self.raw)
        except (ValueError, ShellSpecError) as exc:
            raise ConfigError("curve.kind", str(exc)) from None

    def couplings(self, length):
        try:
            return couplings_from_config(self.raw, length)
        except CouplingError as exc:
            raise ConfigError("couplings", str(exc)) from None

    @property
    def mass(self):
        m = self.number("mass", 1.0)
        if m == 0:
            raise ConfigError("mass", "must be nonzero")
        return m

    def disk_radius(self):
        if self.raw.get("curve.kind", "circle") != "circle":
            raise ConfigError("curve.kind", "this subcommand needs a circle")
        return self.number("curve.radius", 1.0, low=1e-12)

    def constant_couplings(self, length):
        c = self.couplings(length)
        if not c.is_constant:
            raise ConfigError("couplings", "this subcommand needs constant couplings")
        return c


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    return "" if np.isnan(x) else f"{x:.15g}"


def write_csv(stream, header, rows):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


# -- subcommands -------------------------------------------------------------


def cmd_classify(cfg: RunConfig, args, out):
    curve = cfg.curve()
    c = cfg.couplings(curve.length)
    report = classify(c, curve.length)
    flags = [name for name in ("confining", "critical", "zigzag") if getattr(report, name)]
    out.write(f"couplings {c}\n")
    out.write(f"flags {', '.join(flags) if flags else 'regular'}\n")
    for line in report.summary_lines():
        out.write(line + "\n")
    record = {
        "d_min": float(np.min(report.d)),
        "d_max": float(np.max(report.d)),
        "criticality_min": float(np.min(report.criticality)),
        "criticality_max": float(np.max(report.criticality)),
        "confining": report.confining,
        "critical": report.critical,
        "zigzag": report.zigzag,
        "hints": report.hints,
    }
    if "gauge_reduce" in report.hints:
        for k, red in enumerate(gauge_reductions(c, curve.length)):
            out.write(f"gauge_root {k} X {red.X:.15g} z {red.z.real:.15g}{red.z.imag:+.15g}j\n")
        record["gauge_X"] = [red.X for red in gauge_reductions(c, curve.length)]
    out.write(json.dumps(record, sort_keys=True) + "\n")


def _scan(cfg: RunConfig, args, curve, c):
    n = cfg.number("nodes", 512, int, low=8)
    if n % 2:
        raise ConfigError("nodes", "must be even")
    disc = ShellDiscretization(curve, n)
    pre = cfg.number("scan.prescan", 0, int, low=0)
    prescan = ShellDiscretization(curve, pre) if pre else None
    return eigenvalue_scan(
        disc,
        c,
        cfg.mass,
        grid_size=cfg.number("scan.grid", 400, int, low=3),
        threshold=cfg.number("scan.threshold", 1e-4, low=0),
        prescan=prescan,
        threads=args.threads,
    )


def cmd_spectrum(cfg: RunConfig, args, out):
    curve = cfg.curve()
    c = cfg.couplings(curve.length)
    found = _scan(cfg, args, curve, c)
    write_csv(
        out,
        ["z_refined", "sigma_min", "multiplicity_estimate", "N", "curve_kind"],
        [(e.z, e.sigma_min, e.multiplicity, e.N, e.curve_kind) for e in found],
    )


def cmd_oracle_compare(cfg: RunConfig, args, out):
    radius = cfg.disk_radius()
    curve = cfg.curve()
    c = cfg.constant_couplings(curve.length)
    m = cfg.mass
    oracle = [z for z, _ in disk_oracle.disk_eigenvalues(
        c, m=m, R=radius, max_channel=cfg.number("oracle.channels", disk_oracle.MAX_CHANNEL, int, low=0))]
    scanned = [e.z for e in _scan(cfg, args, curve, c)]
    rows = []
    remaining = list(scanned)
    for z in oracle:
        if remaining:
            k = int(np.argmin([abs(z - y) for y in remaining]))
            y = remaining.pop(k)
            rows.append((z, y, abs(z - y)))
        else:
            rows.append((z, np.nan, np.nan))
    rows.extend((np.nan, y, np.nan) for y in remaining)
    write_csv(out, ["oracle_z", "nystrom_z", "abs_diff"], rows)
    worst = max((r[2] for r in rows), default=0.0)
    if len(oracle) != len(scanned) or not worst <= 1e-6:
        raise NumericalFailure(f"disk reference and boundary solver disagree (max diff {worst:.3g})")


def cmd_approx_converge(cfg: RunConfig, args, out):
    radius = cfg.disk_radius()
    curve = cfg.curve()
    c = cfg.constant_couplings(curve.length)
    eps = cfg.floats("approx.epsilons", approximation.EPS_SEQUENCE)
    if max(eps) >= 0.9 * radius:
        raise ConfigError("approx.epsilons", "layer half-width must stay below 0.9 R")
    channels = cfg.number("approx.channels", 6, int, low=0, high=disk_oracle.MAX_CHANNEL)
    rows = []
    for prof in cfg.profiles("approx.profiles", "box,raised-cosine"):
        table = approximation.convergence_table(radius, cfg.mass, c, prof, eps, channels)
        rows.extend((r.epsilon, r.channel, r.eigenvalue, r.oracle_limit, r.abs_err, r.profile) for r in table)
        for n in sorted({r.channel for r in table}):
            part = [r for r in table if r.channel == n]
            limit = approximation.richardson_limit([r.epsilon for r in part], [r.eigenvalue for r in part])
            print(f"{prof.name} channel {n}: extrapolated {limit:.15g}, shell {part[0].oracle_limit:.15g}", file=sys.stderr)
    write_csv(out, ["epsilon", "channel", "eigenvalue", "oracle_limit", "abs_err", "profile"], rows)


def cmd_zigzag(cfg: RunConfig, args, out):
    radius = cfg.disk_radius()
    count = cfg.number("zigzag.count", 5, int, low=1)
    rows = disk_oracle.zigzag_spectrum(radius, cfg.mass, count)
    write_csv(out, ["eigenvalue", "multiplicity", "bessel_order", "zero_index"], rows)


def cmd_fields(cfg: RunConfig, args, out):
    curve = cfg.curve()
    prof = cfg.profiles("fields.profile", "raised-cosine")[0]
    eps = cfg.floats("fields.epsilons", (1e-1, 3e-2, 1e-2, 3e-3, 1e-3))
    if max(eps) >= curve.max_tube_halfwidth():
        raise ConfigError("fields.epsilons", "layer half-width must stay inside the tubular neighbourhood")
    lam = cfg.number("fields.lambda", 1.0)
    if prof.derivative is None:
        raise ConfigError("fields.profile", f"the {prof.name} profile has no pointwise derivative")
    chk = approximation.field_checks(curve, lam, prof, eps)
    rows = [
        (e, a, b, chk.order_vector_potential, chk.order_magnetic_field, chk.curl_error)
        for e, a, b in zip(chk.eps, chk.errors_vector_potential, chk.errors_magnetic_field)
    ]
    write_csv(
        out,
        ["epsilon", "vector_potential_error", "magnetic_field_error", "vector_potential_order",
         "magnetic_field_order", "curl_error"],
        rows,
    )


def cmd_resolvent_check(cfg: RunConfig, args, out):
    curve = cfg.curve()
    c = cfg.couplings(curve.length)
    z = cfg.spectral_z()
    param = SpectralParameter(z, cfg.mass)
    disc = ShellDiscretization(curve, cfg.number("nodes", 256, int, low=8))
    scale = curve.max_tube_halfwidth()
    source = bump_source(np.array([0.15, 0.05]), 0.2)
    sol = krein_resolvent_apply(disc, c, param, source)
    rng = np.random.default_rng(args.seed)
    s = rng.uniform(0, curve.length, 8)
    x, _, n, _ = curve.frames(s)
    off = rng.uniform(0.15, 0.3, 8)[:, None] * min(scale, 1.0)
    points = np.concatenate([x - off * n, x + off * n])
    points = points[~source.contains(points)]
    rows = [
        ("pde_residual", sol.pde_residual(points)),
        ("transmission_mismatch", sol.transmission_mismatch(s)),
        ("sigma_min", sol.sigma_min),
    ]
    write_csv(out, ["quantity", "value"], rows)


COMMANDS = {
    "classify": cmd_classify,
    "spectrum": cmd_spectrum,
    "oracle-compare": cmd_oracle_compare,
    "approx-converge": cmd_approx_converge,
    "zigzag": cmd_zigzag,
    "fields": cmd_fields,
    "resolvent-check": cmd_resolvent_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shellspec", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="path to a key = value config (default: built-in defaults)")
    parser.add_argument("--out", help="write output here instead of stdout")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for independent evaluations")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomised sample points")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("SHELLSPEC_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    buffer = io.StringIO()
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = RunConfig(parse_config(text))
        c_check = cfg.couplings(cfg.curve().length)
        log.info("couplings %s", c_check)
        # BLAS stays single-threaded so results do not depend on --threads
        with threadpool_limits(limits=1):
            COMMANDS[args.command](cfg, args, buffer)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CriticalCouplingError as exc:
        print(f"critical couplings: {exc}", file=sys.stderr)
        return EXIT_CRITICAL
    except ConfiningCouplingError as exc:
        print(f"confining couplings: {exc}", file=sys.stderr)
        return EXIT_CONFINING
    except NumericalFailure as exc:
        _emit(buffer.getvalue(), args.out)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ShellSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(buffer.getvalue(), args.out)
    return EXIT_OK


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
