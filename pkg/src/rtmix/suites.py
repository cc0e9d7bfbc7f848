"""Named verification suites behind the command-line ``verify`` command.

Each suite re-measures one family of library invariants at pinned sample
counts and tolerances and reports every check with its measured margin.
The suites deliberately re-derive their expectations (closed forms,
independent quadrature, frozen reference values) rather than trusting the
code paths they exercise, so a regression in any constructive ingredient
shows up as a failed check with a number attached.

Randomized suites take a ``seed``; the tolerances carry enough headroom
that the pass/fail status does not depend on it.  The hull suite accepts
an injectable ``defect_fn`` so tests can verify that a corrupted flux
defect is actually caught.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .planewave import build_wave, verify_wave
from .quadrature import adaptive_gauss_kronrod
from .relaxation import (
    REGION_CONSTRAINT,
    EnergyFunction,
    classify_state,
    classify_state_lab,
    flux_defect_matrix,
    phase_quadratic_matrix,
    quadratic_matrix_identity_residual,
    sample_constraint_states,
    slip_energies,
)
from .state import (
    FluidSetup,
    ReducedState,
    StateZ,
    SymTraceless,
    embed,
    max_eigenvalue,
    project,
    to_acc,
    to_lab,
)
from .subsolution import (
    PerturbationProfile,
    admissibility_integral,
    assemble_subsolution,
    critical_ratio,
    energy_conversion,
    energy_margin,
    entropy_density,
    find_admissible_perturbation,
    flux_G,
    growth_rates,
    kernel_functions,
    min_flux_convexity,
    reference_time,
    verify_subsolution,
)
from .wavecone import (
    connect_constraint_states,
    mixing_direction,
    shear_direction,
    stationary_direction,
    in_cone,
)

__all__ = [
    "CheckResult",
    "SuiteResult",
    "SUITE_NAMES",
    "REFERENCE_SETUP",
    "run_suite",
    "run_suites",
]

DefectFn = Callable[[StateZ | ReducedState, FluidSetup], np.ndarray]

#: Canonical density pair used throughout the verification suites.
REFERENCE_SETUP = FluidSetup(rho_minus=0.25, rho_plus=4.0, g=1.0)


# {{{ result types


@dataclass(frozen=True)
class CheckResult:
    """One measured property: a value and the bound it must satisfy."""

    name: str
    passed: bool
    measured: float
    bound: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"  [{status}] {self.name}: {self.measured:.6g} (require {self.bound})"


@dataclass(frozen=True)
class SuiteResult:
    """All checks of one named suite plus its wall-clock cost."""

    name: str
    checks: tuple[CheckResult, ...]
    seconds: float

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def lines(self) -> list[str]:
        status = "PASS" if self.passed else "FAIL"
        header = (f"suite {self.name}: {status} "
                  f"({len(self.checks)} checks, {self.seconds:.1f}s)")
        return [header] + [check.line() for check in self.checks]

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "seconds": self.seconds,
            "checks": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "measured": c.measured,
                    "bound": c.bound,
                }
                for c in self.checks
            ],
        }


def _upper(name: str, measured: float, bound: float) -> CheckResult:
    return CheckResult(name, float(measured) <= bound, float(measured),
                       f"<= {bound:g}")


def _lower(name: str, measured: float, bound: float) -> CheckResult:
    return CheckResult(name, float(measured) >= bound, float(measured),
                       f">= {bound:g}")


def _window(name: str, measured: float, lo: float, hi: float) -> CheckResult:
    return CheckResult(name, lo <= float(measured) <= hi, float(measured),
                       f"in [{lo:g}, {hi:g}]")


def _count(name: str, failures: int) -> CheckResult:
    return CheckResult(name, failures == 0, float(failures), "== 0")


# }}}


# {{{ shared random samplers


def _random_reduced(rng: np.random.Generator, setup: FluidSetup,
                    margin: float = 0.02) -> ReducedState:
    gap = setup.rho_plus - setup.rho_minus
    mat = rng.normal(size=(setup.n, setup.n))
    dev, _ = SymTraceless.deviatoric(mat + mat.T)
    return ReducedState(
        rho=rng.uniform(setup.rho_minus + margin * gap,
                        setup.rho_plus - margin * gap),
        v=rng.normal(size=setup.n),
        u=rng.normal(size=setup.n),
        S=dev,
    )


def _random_strip_state(rng: np.random.Generator,
                        setup: FluidSetup) -> StateZ:
    rho = rng.uniform(setup.rho_minus + 0.1, setup.rho_plus - 0.1)
    mat = rng.standard_normal((setup.n, setup.n))
    dev, _ = SymTraceless.deviatoric(0.5 * (mat + mat.T))
    return StateZ(rho, rng.standard_normal(setup.n),
                  rng.standard_normal(setup.n), dev, rng.standard_normal())


def _state_gap(z1: StateZ, z2: StateZ) -> float:
    return max(
        abs(z1.rho - z2.rho),
        float(np.abs(z1.v - z2.v).max()),
        float(np.abs(z1.u - z2.u).max()),
        float(np.abs(np.asarray(z1.S.entries)
                     - np.asarray(z2.S.entries)).max()),
        abs(z1.P - z2.P),
    )


# }}}


# {{{ critical-threshold suite


def _critical_checks(seed: int, defect_fn: DefectFn) -> list[CheckResult]:
    r_star = critical_ratio()
    closed_form = (4.0 + 2.0 * math.sqrt(10.0)) / 3.0
    return [
        _upper("threshold matches closed form (4+2*sqrt(10))/3",
               abs(r_star - closed_form), 1e-10),
        _window("squared threshold ratio", r_star * r_star, 11.84, 11.85),
        _window("Atwood number at the threshold",
                FluidSetup(1.0, r_star * r_star).atwood(), 0.844, 0.845),
    ]


# }}}


# {{{ profile suite (fan endpoints, neutrality, kernel sign, energy)


#: Density pairs with gravity/time used wherever a property must hold across
#: setups, not just at the reference pair.
_SPAN_SETUPS = (
    (FluidSetup(0.25, 4.0, g=1.0), 1.0),
    (FluidSetup(1.0, 16.0, g=1.5), 0.7),
    (FluidSetup(1.0, 2.0, g=2.0), 1.3),
)


def _profile_checks(seed: int, defect_fn: DefectFn) -> list[CheckResult]:
    checks = []
    setup = REFERENCE_SETUP
    base = PerturbationProfile.unperturbed()

    t_ref = reference_time(setup)
    c_minus, c_plus = growth_rates(setup, t_ref)
    endpoint_err = max(abs(-c_minus - (-0.5)), abs(c_plus - 2.0))
    checks.append(_upper("mixing-zone endpoints at the reference time",
                         endpoint_err, 1e-12))

    neutral = max(abs(admissibility_integral(base, s))
                  for s, _ in _SPAN_SETUPS)
    checks.append(_upper("unperturbed profile is dissipation-neutral",
                         neutral, 1e-9))

    worst_h1 = math.inf
    for ratio in (1.5, 3.0, 5.0, 10.0):
        s = FluidSetup(1.0, ratio * ratio)
        grid = np.linspace(s.rho_minus * (1.0 + 1e-9),
                           s.rho_plus * (1.0 - 1e-9), 1000)
        h1, _ = kernel_functions(grid, s)
        worst_h1 = min(worst_h1, float(np.min(h1)))
    checks.append(_lower("first kernel function nonnegative across ratios",
                         worst_h1, -1e-10))

    worst_rel = 0.0
    for s, t in _SPAN_SETUPS:
        integral, _ = adaptive_gauss_kronrod(
            lambda rho: flux_G(rho, base, s).f1 ** 2,
            s.rho_minus, s.rho_plus, abs_tol=1e-12)
        quadrature_route = s.g ** 3 * t ** 4 / 8.0 * integral
        closed = energy_conversion(s, t)
        worst_rel = max(worst_rel, abs(quadrature_route - closed) / closed)
    checks.append(_upper("energy conversion matches independent quadrature",
                         worst_rel, 1e-8))

    ref_integral, _ = adaptive_gauss_kronrod(
        lambda rho: flux_G(rho, base, setup).f1 ** 2,
        setup.rho_minus, setup.rho_plus, abs_tol=1e-12)
    checks.append(_upper("slope-energy integral reference value",
                         abs(ref_integral - 2.8125), 1e-10))
    return checks


# }}}


# {{{ hull suite (identities and mixing-line invariances)


def _hull_checks(seed: int, defect_fn: DefectFn) -> list[CheckResult]:
    checks = []
    setup = REFERENCE_SETUP
    gap = setup.rho_plus - setup.rho_minus

    rng = np.random.default_rng(seed + 99)
    lo = setup.rho_minus + 0.01 * gap
    hi = setup.rho_plus - 0.01 * gap
    worst = max(quadratic_matrix_identity_residual(float(mu), setup)
                for mu in rng.uniform(lo, hi, size=100))
    checks.append(_upper("density-coefficient matrix identity residual",
                         worst, 1e-9))

    worst = 0.0
    for _ in range(50):
        z = _random_reduced(rng, setup)
        xi = rng.normal(size=2)
        lhs = float(xi @ (defect_fn(z, setup) + z.S.matrix) @ xi)
        a11, a12, a22 = phase_quadratic_matrix(z.rho, setup)
        a, b = float(z.v @ xi), float(z.u @ xi)
        rhs = a11 * a * a + 2.0 * a12 * a * b + a22 * b * b
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    checks.append(_upper("defect quadratic form matches the density matrix",
                         worst, 1e-11))

    rng = np.random.default_rng(seed + 555)
    worst = -math.inf
    for _ in range(10_000):
        z1 = _random_reduced(rng, setup)
        z2 = _random_reduced(rng, setup)
        mid = ReducedState(0.5 * (z1.rho + z2.rho), 0.5 * (z1.v + z2.v),
                           0.5 * (z1.u + z2.u), (z1.S + z2.S) * 0.5)
        q_mid = max_eigenvalue(defect_fn(mid, setup))
        q_avg = 0.5 * (max_eigenvalue(defect_fn(z1, setup))
                       + max_eigenvalue(defect_fn(z2, setup)))
        worst = max(worst, (q_mid - q_avg) / max(1.0, abs(q_avg)))
    checks.append(_upper("max flux defect is midpoint convex", worst, 1e-12))

    rng = np.random.default_rng(seed + 13)
    worst_slip = 0.0
    worst_dev = 0.0
    worst_dir = 0.0
    worst_slope = 0.0
    for _ in range(5):
        z = _random_strip_state(rng, setup)
        zt = mixing_direction(z, setup)
        tp0, tm0 = slip_energies(z, setup)
        m0 = defect_fn(z, setup)
        dev0 = m0 - np.trace(m0) / 2.0 * np.eye(2)
        dev_scale = max(1.0, float(np.abs(dev0).max()))
        t_lo = setup.rho_minus - z.rho
        t_hi = setup.rho_plus - z.rho
        pad = 0.02 * (t_hi - t_lo)
        params = np.linspace(t_lo + pad, t_hi - pad, 20)
        for t in params:
            z_t = z + zt * float(t)
            tp, tm = slip_energies(z_t, setup)
            worst_slip = max(worst_slip, abs(tp - tp0) / max(1.0, tp0),
                             abs(tm - tm0) / max(1.0, tm0))
            m_t = defect_fn(z_t, setup)
            dev_t = m_t - np.trace(m_t) / 2.0 * np.eye(2)
            worst_dev = max(worst_dev,
                            float(np.abs(dev_t - dev0).max()) / dev_scale)
        if setup.rho_minus + 0.3 < z.rho < setup.rho_plus - 0.3:
            for t in (-0.05 * gap, 0.05 * gap):
                zt_shift = mixing_direction(z + zt * t, setup)
                worst_dir = max(
                    worst_dir,
                    project(zt_shift - zt).norm() / project(zt).norm(),
                    abs(zt_shift.P - zt.P) / max(1.0, abs(zt.P)),
                )
        slope = (tp0 - tm0) / gap
        qs = [max_eigenvalue(defect_fn(z + zt * float(t), setup))
              for t in params]
        scale = max(1.0, max(abs(q) for q in qs))
        for i in range(1, len(params)):
            secant = (qs[i] - qs[0]) / (params[i] - params[0])
            worst_slope = max(worst_slope, abs(secant - slope) / scale)
    checks.append(_upper("slip energies constant along mixing lines",
                         worst_slip, 1e-11))
    checks.append(_upper("defect traceless part constant along mixing lines",
                         worst_dev, 1e-11))
    checks.append(_upper("mixing direction stable along its own line",
                         worst_dir, 1e-11))
    checks.append(_upper("max defect affine with the slip-gap slope",
                         worst_slope, 1e-11))

    rng = np.random.default_rng(seed + 23)
    worst = 0.0
    for _ in range(5):
        z = _random_strip_state(rng, setup)
        mat = rng.standard_normal((2, 2))
        dev, _ = SymTraceless.deviatoric(0.5 * (mat + mat.T))
        w = rng.standard_normal(2)
        tp0, tm0 = slip_energies(z, setup)
        lock_light = shear_direction(w, dev, setup.rho_minus)
        lock_heavy = shear_direction(w, dev, setup.rho_plus)
        for t in (-1.0, 1.0):
            tp, _ = slip_energies(z + lock_light * t, setup)
            _, tm = slip_energies(z + lock_heavy * t, setup)
            worst = max(worst, abs(tp - tp0) / max(1.0, tp0),
                        abs(tm - tm0) / max(1.0, tm0))
    checks.append(_upper("shear directions preserve the locked slip energy",
                         worst, 1e-12))
    return checks


# }}}


# {{{ cone suite (membership certificates and the pair identity)


def _cone_checks(seed: int, defect_fn: DefectFn) -> list[CheckResult]:
    checks = []
    setup = REFERENCE_SETUP
    tol = 1e-9

    rng = np.random.default_rng(seed + 7)
    failures = sum(
        not in_cone(mixing_direction(_random_strip_state(rng, setup), setup),
                    tol=tol).in_cone
        for _ in range(200))
    checks.append(_count("mixing directions admit oscillations", failures))

    failures = 0
    for _ in range(200):
        w = rng.standard_normal(2)
        mat = rng.standard_normal((2, 2))
        dev, _ = SymTraceless.deviatoric(0.5 * (mat + mat.T))
        lam = rng.uniform(0.2, 5.0)
        failures += not in_cone(shear_direction(w, dev, lam), tol=tol).in_cone
    checks.append(_count("shear directions admit oscillations", failures))

    failures = 0
    for _ in range(200):
        xi = rng.standard_normal(2)
        coefs = rng.standard_normal(3)
        zbar = stationary_direction(xi, *coefs, density=rng.standard_normal())
        failures += not in_cone(zbar, tol=tol).in_cone
    checks.append(_count("stationary directions admit oscillations",
                         failures))

    e_val = 2.0
    samples = sample_constraint_states(e_val, setup, 1000, seed=seed + 47)
    pair_rng = np.random.default_rng(seed + 53)
    failures = 0
    checked = 0
    for _ in range(1000):
        i, j = pair_rng.integers(0, len(samples), size=2)
        z1, z2 = samples[i], samples[j]
        if z1.distance(z2) <= 1e-9:
            continue
        checked += 1
        failures += not in_cone(connect_constraint_states(z1, z2, setup),
                                tol=tol).in_cone
    checks.append(_count("connecting directions admit oscillations",
                         failures))

    lights = [s for s in samples if s.rho == setup.rho_minus]
    heavies = [s for s in samples if s.rho == setup.rho_plus]
    worst = 0.0
    for z1, z2 in list(zip(lights, heavies))[:1000]:
        zbar = connect_constraint_states(z1, z2, setup)
        lhs = zbar.rho * zbar.S.matrix
        rhs = (np.outer(zbar.u, zbar.u)
               - setup.rho_minus * setup.rho_plus * np.outer(zbar.v, zbar.v))
        scale = max(1.0, float(np.abs(rhs).max()))
        worst = max(worst, float(np.abs(lhs - rhs).max()) / scale)
    checks.append(_upper("pair directions factor the stress", worst, 1e-11))
    return checks


# }}}


# {{{ plane-wave suite (all three construction cases)


def _wave_directions() -> list[tuple[str, StateZ]]:
    setup = REFERENCE_SETUP
    interior = StateZ(2.0, np.array([0.3, -0.2]), np.array([0.5, 0.1]),
                      SymTraceless(2, (0.2, -0.1)), 0.05)
    return [
        ("time-oscillating", mixing_direction(interior, setup)),
        ("space-oscillating", stationary_direction(
            np.array([1.0, 0.0]), 0.6, -0.8, 0.5)),
        ("vertical-frequency", stationary_direction(
            np.array([0.0, 1.0]), 0.7, 0.4, -0.6)),
    ]


def _wave_checks(seed: int, defect_fn: DefectFn) -> list[CheckResult]:
    checks = []
    for label, zbar in _wave_directions():
        report = verify_wave(build_wave(zbar, 8))
        checks.append(_count(f"{label}: support confined to the unit ball",
                             int(not report.support_ok)))
        checks.append(_upper(f"{label}: strong residual",
                             max(report.residuals), 1e-9))
        checks.append(_upper(f"{label}: uncut-region identity error",
                             max(report.precutoff_errors), 1e-10))
        checks.append(_upper(f"{label}: proximity never contracts slower "
                             "than halving", max(report.proximity_ratios),
                             0.6))
        checks.append(_window(f"{label}: final proximity ratio",
                              report.proximity_ratios[-1], 0.4, 0.6))
        checks.append(_lower(f"{label}: weak decay exponent",
                             min(report.weak_decay_exponents), 0.9))
        checks.append(_lower(f"{label}: quadratic mass positive",
                             min(report.mass_ratios), 1e-12))
        checks.append(_upper(f"{label}: quadratic mass tail variation",
                             report.mass_tail_variation, 0.3))
    return checks


# }}}


# {{{ admissibility suite (perturbed profile above the threshold)


def _admissibility_checks(seed: int, defect_fn: DefectFn) -> list[CheckResult]:
    checks = []
    setup = REFERENCE_SETUP
    ratio = math.sqrt(setup.rho_plus / setup.rho_minus)

    checks.append(_lower("density ratio exceeds the threshold",
                         ratio - critical_ratio(), 0.0))

    profile = find_admissible_perturbation(setup)
    integral = admissibility_integral(profile, setup)
    checks.append(_lower("perturbed profile strictly dissipative",
                         integral, 1e-12))
    checks.append(_lower("perturbed flux uniformly convex",
                         min_flux_convexity(profile, setup), 1e-12))

    t_ref = reference_time(setup)
    sub = assemble_subsolution(profile, setup, t_ref)
    times = np.array([0.5, 0.75, 1.0, 1.25]) * t_ref
    margins = np.array([energy_margin(sub, float(t)) for t in times])
    checks.append(_lower("energy margins positive at all probe times",
                         float(margins.min()), 1e-15))
    exponent = float(np.polyfit(np.log(times), np.log(margins), 1)[0])
    checks.append(_window("energy margin grows like the fourth power",
                          exponent, 3.95, 4.05))

    predictions = setup.g ** 3 * times ** 4 / 2.0 * integral
    worst = float(np.max(np.abs(margins - predictions) / predictions))
    checks.append(_upper("margins match the first-order prediction",
                         worst, 1e-6))
    return checks


# }}}


# {{{ subsolution suite (marginal and perturbed weak/membership checks)


def _subsolution_checks(seed: int, defect_fn: DefectFn) -> list[CheckResult]:
    checks = []
    setup = REFERENCE_SETUP
    t_ref = reference_time(setup)
    scale = setup.g ** 3 * t_ref ** 4

    marginal = assemble_subsolution(PerturbationProfile.unperturbed(),
                                    setup, t_ref)
    rep_m = verify_subsolution(marginal, seed=seed)
    checks.append(_count("marginal profile has no strictly interior points",
                         rep_m.interior_strict))
    checks.append(_lower("marginal membership margin", rep_m.min_margin,
                         -1e-8))
    checks.append(_upper("marginal weak residuals",
                         max(rep_m.max_weak_residual_mass,
                             rep_m.max_weak_residual_momentum,
                             rep_m.max_weak_residual_conservation),
                         1e-7))
    checks.append(_upper("marginal divergence residual",
                         rep_m.max_weak_residual_divergence, 1e-12))
    checks.append(_upper("marginal energy margins vanish",
                         max(abs(m) for m in rep_m.energy_margins) / scale,
                         1e-8))

    profile = find_admissible_perturbation(setup)
    perturbed = assemble_subsolution(profile, setup, t_ref)
    rep_p = verify_subsolution(perturbed, seed=seed, hull_inset=0.05,
                               hull_points=120)
    checks.append(_count("perturbed profile strictly inside the hull",
                         rep_p.interior_points - rep_p.interior_strict))
    checks.append(_lower("perturbed membership margin", rep_p.min_margin,
                         1e-15))
    checks.append(_count(
        "exterior states stay in the constraint set",
        int(not rep_m.outside_constraint_ok)
        + int(not rep_p.outside_constraint_ok)))
    checks.append(_upper("perturbed weak residuals",
                         max(rep_p.max_weak_residual_mass,
                             rep_p.max_weak_residual_momentum,
                             rep_p.max_weak_residual_conservation),
                         1e-7))
    checks.append(_window("perturbed energy-drop exponent",
                          rep_p.energy_margin_exponent, 3.95, 4.05))
    worst = max(abs(m - p) / p for m, p in
                zip(rep_p.energy_margins, rep_p.energy_margin_predictions))
    checks.append(_upper("perturbed margins match predictions", worst, 1e-6))
    checks.append(_upper("convex split residual",
                         max(rep_m.convex_split_residual,
                             rep_p.convex_split_residual), 1e-12))

    worst_mono = math.inf
    for sub in (marginal, perturbed):
        worst_mono = min(worst_mono,
                         float(np.min(np.diff(sub.table["rho"]))))
    checks.append(_lower("density profiles monotone", worst_mono, -1e-14))

    x2 = np.linspace(-0.45, 1.9, 301)
    worst_sim = 0.0
    for lam in (0.5, 2.0):
        base = entropy_density(x2, t_ref, profile, setup)
        scaled = entropy_density(lam * lam * x2, lam * t_ref, profile, setup)
        worst_sim = max(worst_sim, float(np.abs(scaled - base).max()))
    checks.append(_upper("entropy density is self-similar", worst_sim,
                         1e-12))
    return checks


# }}}


# {{{ frame suite (roundtrips and membership commutation)


def _frames_checks(seed: int, defect_fn: DefectFn) -> list[CheckResult]:
    checks = []
    setup = REFERENCE_SETUP

    rng = np.random.default_rng(seed + 31337)
    worst_acc = 0.0
    worst_lab = 0.0
    for _ in range(1000):
        z = _random_strip_state(rng, setup)
        t = rng.uniform(0.1, 2.0)
        back = to_acc(to_lab(z, t, setup), t, setup)
        worst_acc = max(worst_acc, _state_gap(back, z))
        forth = to_lab(to_acc(z, t, setup), t, setup)
        worst_lab = max(worst_lab, _state_gap(forth, z))
    checks.append(_upper("frame roundtrip recovers accelerated states",
                         worst_acc, 1e-12))
    checks.append(_upper("frame roundtrip recovers lab states",
                         worst_lab, 1e-12))

    rng = np.random.default_rng(seed + 31337)
    t = 0.6
    x = np.array([0.1, -0.2])
    disagreements = 0
    for _ in range(1000):
        rho = rng.uniform(0.05, 4.5)
        mat = rng.normal(size=(2, 2))
        dev, _ = SymTraceless.deviatoric(mat + mat.T)
        z_acc = StateZ(rho, rng.normal(size=2), rng.normal(size=2), dev,
                       P=rng.normal())
        e_val = rng.uniform(0.2, 4.0)
        rep_acc = classify_state(z_acc, e_val, setup)
        rep_lab = classify_state_lab(to_lab(z_acc, t, setup), x, t,
                                     EnergyFunction.constant(e_val), setup)
        disagreements += rep_lab.region != rep_acc.region
    checks.append(_count("membership classification commutes with the "
                         "frame change", disagreements))

    e_val = 2.0
    mislabeled = 0
    for z in sample_constraint_states(e_val, setup, 30, seed=seed + 77):
        rep = classify_state_lab(to_lab(embed(z), 1.1, setup), np.zeros(2),
                                 1.1, EnergyFunction.constant(e_val), setup)
        mislabeled += rep.region != REGION_CONSTRAINT
    checks.append(_count("constraint states keep their tag in the lab frame",
                         mislabeled))
    return checks


# }}}


# {{{ registry and runners


_SUITES: dict[str, Callable[[int, DefectFn], list[CheckResult]]] = {
    "critical": _critical_checks,
    "profile": _profile_checks,
    "hull": _hull_checks,
    "cone": _cone_checks,
    "wave": _wave_checks,
    "admissibility": _admissibility_checks,
    "subsolution": _subsolution_checks,
    "frames": _frames_checks,
}

SUITE_NAMES: tuple[str, ...] = tuple(_SUITES)


def run_suite(name: str, *, seed: int = 0,
              defect_fn: DefectFn | None = None) -> SuiteResult:
    """Run one named suite and time it.

    ``defect_fn`` replaces the flux-defect matrix in the hull suite's
    defect-dependent checks; the default is the library's own
    :func:`~rtmix.relaxation.flux_defect_matrix`.
    """
    if name not in _SUITES:
        raise ValueError(
            f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    fn = defect_fn if defect_fn is not None else flux_defect_matrix
    start = time.perf_counter()
    checks = _SUITES[name](seed, fn)
    elapsed = time.perf_counter() - start
    return SuiteResult(name, tuple(checks), elapsed)


def run_suites(names: Sequence[str] | None = None, *, seed: int = 0,
               defect_fn: DefectFn | None = None) -> list[SuiteResult]:
    """Run the named suites (all of them by default) in declaration order."""
    picked = SUITE_NAMES if names is None else tuple(names)
    for name in picked:
        if name not in _SUITES:
            raise ValueError(
                f"unknown suite {name!r}; choose from "
                f"{', '.join(SUITE_NAMES)}")
    return [run_suite(name, seed=seed, defect_fn=defect_fn)
            for name in picked]


# }}}
