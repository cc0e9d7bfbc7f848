"""Command-line entry point: profiles, reports, and verification suites.

Subcommands
-----------

``profile``
    Assemble the self-similar mixing profile and write one CSV per
    requested time, plus a summary with the mixing-zone endpoints and the
    energy margin.
``verify``
    Run the named verification suites (all of them by default) and report
    every check with its measured margin; exit 2 on any failure.
``wave``
    Build a localized plane wave and print its frequency-ladder decay
    table; exit 2 when the ladder fails its calibrated gates.
``hull``
    Classify random states against the relaxed constraint set and print
    the region histogram.
``critical``
    Print the critical density-ratio threshold and derived constants.
``energy``
    Print the closed-form energy-conversion values for the requested
    times.

Configuration is a flat ``key=value`` text file (``--config``); explicit
command-line flags override file values, which override built-in
defaults.  Exit codes: 0 success, 1 invalid configuration or failed
construction, 2 verification failure.  All file output is written to a
temporary file and renamed, so interrupted runs never leave partial
files; rerunning with identical configuration and seed reproduces output
bit for bit.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from .planewave import build_wave, verify_wave
from .relaxation import classify_state
from .state import FluidSetup, ReducedState, SymTraceless
from .subsolution import (
    PerturbationProfile,
    admissibility_integral,
    assemble_subsolution,
    critical_ratio,
    energy_conversion,
    energy_margin,
    find_admissible_perturbation,
    growth_rates,
    min_flux_convexity,
    reference_time,
    write_profile_csv,
)
from .suites import SUITE_NAMES, run_suites
from .wavecone import mixing_direction, stationary_direction

__all__ = ["RunConfig", "main"]


class ConfigError(Exception):
    """Invalid configuration or command arguments."""


# {{{ configuration


@dataclass(frozen=True)
class RunConfig:
    """Validated physical and bookkeeping parameters shared by commands."""

    rho_minus: float = 0.25
    rho_plus: float = 4.0
    g: float = 1.0
    times: tuple[float, ...] | None = None
    epsilon: float = 0.0
    seed: int = 0
    out: str | None = None
    grid: int = 401

    def setup(self) -> FluidSetup:
        return FluidSetup(rho_minus=self.rho_minus, rho_plus=self.rho_plus,
                          g=self.g)

    def resolved_times(self) -> tuple[float, ...]:
        if self.times is not None:
            return self.times
        return (reference_time(self.setup()),)


_CONFIG_FLOAT_KEYS = ("rho_minus", "rho_plus", "g", "epsilon")
_CONFIG_INT_KEYS = ("seed", "grid")


def _parse_time_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part)
    except ValueError as exc:
        raise ConfigError(f"invalid time list {text!r}: {exc}") from None
    if not values:
        raise ConfigError("time list is empty")
    return values


def _read_config_file(path: str) -> dict:
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    values: dict = {}
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(
                f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in _CONFIG_FLOAT_KEYS:
            try:
                values[key] = float(value)
            except ValueError:
                raise ConfigError(
                    f"{path}:{lineno}: {key} must be a number, "
                    f"got {value!r}") from None
        elif key in _CONFIG_INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise ConfigError(
                    f"{path}:{lineno}: {key} must be an integer, "
                    f"got {value!r}") from None
        elif key == "t":
            values["times"] = _parse_time_list(value)
        elif key == "out":
            values["out"] = value
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    return values


def _build_config(args: argparse.Namespace) -> RunConfig:
    """Merge built-in defaults, config-file values, and explicit flags."""
    merged = {}
    if getattr(args, "config", None) is not None:
        merged.update(_read_config_file(args.config))
    for key in (*_CONFIG_FLOAT_KEYS, *_CONFIG_INT_KEYS, "out"):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if getattr(args, "t", None) is not None:
        merged["times"] = _parse_time_list(args.t)
    config = RunConfig(**merged)

    if not config.rho_minus > 0.0:
        raise ConfigError(f"rho_minus must be positive, got {config.rho_minus}")
    if not config.rho_plus > config.rho_minus:
        raise ConfigError(
            f"rho_plus must exceed rho_minus, got "
            f"{config.rho_plus} <= {config.rho_minus}")
    if not config.g > 0.0:
        raise ConfigError(f"g must be positive, got {config.g}")
    if config.epsilon < 0.0:
        raise ConfigError(f"epsilon must be >= 0, got {config.epsilon}")
    if config.seed < 0:
        raise ConfigError(f"seed must be >= 0, got {config.seed}")
    if config.grid < 2:
        raise ConfigError(f"grid must be at least 2, got {config.grid}")
    if config.times is not None and any(t <= 0.0 for t in config.times):
        raise ConfigError("every time must be positive")
    return config


# }}}


# {{{ output helpers


def _write_text_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _ensure_out_dir(out: str | None) -> str:
    directory = out if out is not None else "."
    if os.path.exists(directory) and not os.path.isdir(directory):
        raise ConfigError(f"output path {directory!r} is not a directory")
    os.makedirs(directory, exist_ok=True)
    return directory


# }}}


# {{{ profile command


def _resolve_profile(config: RunConfig) -> PerturbationProfile:
    """The mixing profile for the requested perturbation size.

    Zero epsilon is the marginal profile.  A positive epsilon keeps the
    bump shapes found by the admissibility search (which refuses
    subcritical density ratios) and re-checks that the requested size
    still gives a strictly dissipative, uniformly convex flux.
    """
    if config.epsilon == 0.0:
        return PerturbationProfile.unperturbed()
    setup = config.setup()
    shape = find_admissible_perturbation(setup)
    profile = dataclasses.replace(shape, epsilon=config.epsilon)
    if min_flux_convexity(profile, setup) <= 0.0:
        raise ConfigError(
            f"epsilon {config.epsilon:g} breaks uniform flux convexity; "
            f"the search found epsilon {shape.epsilon:g} admissible")
    if admissibility_integral(profile, setup) <= 0.0:
        raise ConfigError(
            f"epsilon {config.epsilon:g} is not strictly dissipative; "
            f"the search found epsilon {shape.epsilon:g} admissible")
    return profile


def _cmd_profile(config: RunConfig, args: argparse.Namespace) -> int:
    setup = config.setup()
    times = config.resolved_times()
    out_dir = _ensure_out_dir(config.out)
    try:
        profile = _resolve_profile(config)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    for t in times:
        sub = assemble_subsolution(profile, setup, t, grid=config.grid)
        path = os.path.join(out_dir, f"profile_t{t:.6g}.csv")
        write_profile_csv(sub, path)
        c_minus, c_plus = growth_rates(setup, t, profile)
        margin = energy_margin(sub, t)
        print(f"wrote {path} ({config.grid} grid points)")
        print(f"t = {t:.17g}: mixing zone [{-c_minus:.17g}, {c_plus:.17g}], "
              f"energy margin {margin:.17g}")
    return 0


# }}}


# {{{ verify command


def _cmd_verify(config: RunConfig, args: argparse.Namespace) -> int:
    if args.suites is None:
        names = SUITE_NAMES
    else:
        names = tuple(part for part in args.suites.split(",") if part)
        unknown = [name for name in names if name not in SUITE_NAMES]
        if unknown:
            raise ConfigError(
                f"unknown suite(s) {', '.join(unknown)}; "
                f"choose from {', '.join(SUITE_NAMES)}")
    results = run_suites(names, seed=config.seed)
    for result in results:
        print("\n".join(result.lines()))
    passed = all(result.passed for result in results)
    total = sum(len(result.checks) for result in results)
    failed = sum(1 for result in results for check in result.checks
                 if not check.passed)
    status = "PASS" if passed else "FAIL"
    print(f"verification {status}: {total - failed}/{total} checks passed "
          f"across {len(results)} suites (seed {config.seed})")
    if args.report is not None:
        payload = {
            "passed": passed,
            "seed": config.seed,
            "suites": [result.as_dict() for result in results],
        }
        _write_text_atomic(args.report, json.dumps(payload, indent=2) + "\n")
        print(f"wrote {args.report}")
    return 0 if passed else 2


# }}}


# {{{ wave command


_WAVE_DIRECTIONS = ("mixing", "space", "vertical")


def _wave_direction(name: str, setup: FluidSetup):
    if name == "mixing":
        interior = ReducedState(
            0.5 * (setup.rho_minus + setup.rho_plus),
            np.array([0.3, -0.2]), np.array([0.5, 0.1]),
            SymTraceless(2, (0.2, -0.1)))
        return mixing_direction(interior, setup)
    if name == "space":
        return stationary_direction(np.array([1.0, 0.0]), 0.6, -0.8, 0.5)
    return stationary_direction(np.array([0.0, 1.0]), 0.7, 0.4, -0.6)


def _cmd_wave(config: RunConfig, args: argparse.Namespace) -> int:
    try:
        frequencies = tuple(int(part) for part in args.N.split(",") if part)
    except ValueError as exc:
        raise ConfigError(f"invalid frequency list {args.N!r}: {exc}") from None
    if len(frequencies) < 2:
        raise ConfigError("need at least two frequencies to measure decay")

    setup = config.setup()
    zbar = _wave_direction(args.direction, setup)
    report = verify_wave(build_wave(zbar, frequencies[0]),
                         frequencies=frequencies)

    print(f"direction {args.direction} (construction case {report.case})")
    header = (f"{'N':>6} {'proximity':>14} {'ratio':>8} "
              f"{'weak-norm':>14} {'mass-ratio':>12} {'residual':>12}")
    print(header)
    rows = []
    for j, freq in enumerate(report.frequencies):
        ratio = "" if j == 0 else f"{report.proximity_ratios[j - 1]:.3f}"
        weak = max(row[j] for row in report.weak_norms)
        rows.append((freq, report.proximity[j], ratio, weak,
                     report.mass_ratios[j], report.residuals[j]))
        print(f"{freq:>6} {report.proximity[j]:>14.6e} {ratio:>8} "
              f"{weak:>14.6e} {report.mass_ratios[j]:>12.6f} "
              f"{report.residuals[j]:>12.3e}")

    if args.out is not None:
        lines = ["N,proximity,ratio,weak_norm,mass_ratio,residual"]
        for freq, prox, ratio, weak, mass, residual in rows:
            lines.append(f"{freq},{prox:.17g},{ratio},{weak:.17g},"
                         f"{mass:.17g},{residual:.17g}")
        _write_text_atomic(args.out, "\n".join(lines) + "\n")
        print(f"wrote {args.out}")

    failures = report.gate_failures()
    for failure in failures:
        print(f"gate failure: {failure}")
    if failures:
        print("note: the decay gates are calibrated for the ladder "
              "8,16,32,64; shorter ladders stop in the pre-asymptotic "
              "regime and fail honestly")
        return 2
    print("all decay gates passed")
    return 0


# }}}


# {{{ hull command


def _cmd_hull(config: RunConfig, args: argparse.Namespace) -> int:
    if args.random < 1:
        raise ConfigError(f"--random must be >= 1, got {args.random}")
    if not args.e_level > 0.0:
        raise ConfigError(f"--e-level must be positive, got {args.e_level}")
    setup = config.setup()
    rng = np.random.default_rng(config.seed)
    gap = setup.rho_plus - setup.rho_minus
    counts: dict[str, int] = {}
    for _ in range(args.random):
        rho = rng.uniform(setup.rho_minus - 0.1 * gap,
                          setup.rho_plus + 0.1 * gap)
        mat = rng.normal(size=(setup.n, setup.n))
        dev, _ = SymTraceless.deviatoric(mat + mat.T)
        z = ReducedState(rho, rng.normal(size=setup.n),
                         rng.normal(size=setup.n), dev)
        region = classify_state(z, args.e_level, setup).region
        counts[region] = counts.get(region, 0) + 1

    print(f"classified {args.random} random states at e = {args.e_level:g} "
          f"(seed {config.seed})")
    width = max(len(region) for region in counts)
    for region in sorted(counts, key=counts.get, reverse=True):
        print(f"  {region:<{width}} {counts[region]:>7}")
    if args.out is not None:
        lines = ["region,count"]
        lines += [f"{region},{counts[region]}" for region in sorted(counts)]
        _write_text_atomic(args.out, "\n".join(lines) + "\n")
        print(f"wrote {args.out}")
    return 0


# }}}


# {{{ critical and energy commands


def _cmd_critical(config: RunConfig, args: argparse.Namespace) -> int:
    r_star = critical_ratio()
    atwood = FluidSetup(1.0, r_star * r_star).atwood()
    print(f"critical square-root density ratio r* = {r_star:.17g}")
    print(f"critical density ratio r*^2 = {r_star * r_star:.17g}")
    print(f"Atwood number at the threshold = {atwood:.17g}")
    return 0


def _cmd_energy(config: RunConfig, args: argparse.Namespace) -> int:
    setup = config.setup()
    for t in config.resolved_times():
        print(f"t = {t:.17g}: energy conversion "
              f"{energy_conversion(setup, t):.17g}")
    return 0


# }}}


# {{{ parser and entry point


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors: exit 1, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE",
                        help="flat key=value configuration file")
    parser.add_argument("--rho-minus", dest="rho_minus", type=float,
                        metavar="R", help="light density (default 0.25)")
    parser.add_argument("--rho-plus", dest="rho_plus", type=float,
                        metavar="R", help="heavy density (default 4.0)")
    parser.add_argument("--g", type=float, metavar="G",
                        help="gravity (default 1.0)")
    parser.add_argument("--t", metavar="LIST",
                        help="comma-separated times "
                             "(default: the reference time)")
    parser.add_argument("--epsilon", type=float, metavar="E",
                        help="perturbation size (default 0)")
    parser.add_argument("--seed", type=int, metavar="N",
                        help="seed for randomized routines (default 0)")
    parser.add_argument("--out", metavar="PATH",
                        help="output directory or file")
    parser.add_argument("--grid", type=int, metavar="N",
                        help="profile grid points (default 401)")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="rtmix",
        description="Mixing-relaxation toolkit: profiles, hull membership, "
                    "plane waves, and verification suites.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True,
                                       parser_class=_Parser)

    profile = subparsers.add_parser(
        "profile", help="write mixing-profile CSVs and a summary")
    profile.set_defaults(handler=_cmd_profile)

    verify = subparsers.add_parser(
        "verify", help="run the verification suites at pinned reference "
                       "parameters")
    verify.add_argument("--suites", metavar="LIST",
                        help="comma-separated suite names "
                             f"(default all: {','.join(SUITE_NAMES)})")
    verify.add_argument("--report", metavar="FILE",
                        help="write a JSON report")
    verify.set_defaults(handler=_cmd_verify)

    wave = subparsers.add_parser(
        "wave", help="print a plane-wave frequency-ladder decay table")
    wave.add_argument("--N", metavar="LIST", default="8,16,32,64",
                      help="comma-separated frequency ladder "
                           "(default 8,16,32,64)")
    wave.add_argument("--direction", choices=_WAVE_DIRECTIONS,
                      default="mixing",
                      help="oscillation direction family (default mixing)")
    wave.set_defaults(handler=_cmd_wave)

    hull = subparsers.add_parser(
        "hull", help="classify random states against the relaxed hull")
    hull.add_argument("--random", type=int, default=1000, metavar="N",
                      help="number of random states (default 1000)")
    hull.add_argument("--e-level", dest="e_level", type=float, default=2.0,
                      metavar="E", help="energy level (default 2.0)")
    hull.set_defaults(handler=_cmd_hull)

    critical = subparsers.add_parser(
        "critical", help="print the critical density-ratio threshold")
    critical.set_defaults(handler=_cmd_critical)

    energy = subparsers.add_parser(
        "energy", help="print closed-form energy-conversion values")
    energy.set_defaults(handler=_cmd_energy)

    for sub in (profile, verify, wave, hull, critical, energy):
        _add_common_arguments(sub)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _build_config(args)
        return args.handler(config, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


# }}}


if __name__ == "__main__":
    raise SystemExit(main())
