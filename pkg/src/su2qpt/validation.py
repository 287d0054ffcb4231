"""Built-in acceptance suite: end-to-end checks with frozen reference values.

Each check times itself against a fixed budget and reports one
CheckResult; the CLI ``validate`` subcommand prints them as a pass/fail
table.  Derivative identities are verified against arbitrary-precision
central differences (mpmath), because at beta = 50 the energy variance
sits fifteen orders of magnitude below the mean energy and double
precision differencing cannot see it.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass
from time import perf_counter

import numpy as np
from mpmath import mp, mpf

from . import model, thermo, transitions
from .eigensolver import jacobi_eigenvalues
from .model import ModelParams, Spectrum
from .spin_algebra import Multiplet

__all__ = [
    "CheckResult",
    "check_critical_couplings",
    "check_eigenvalue_lists",
    "check_n2_transition",
    "check_zero_t_staircase",
    "check_remnant_peaks",
    "check_thermo_properties",
    "check_robustness",
    "check_determinism",
    "run_all",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed_s: float


def _finish(name: str, ok: bool, detail: str, t0: float, budget: float) -> CheckResult:
    elapsed = perf_counter() - t0
    in_budget = elapsed <= budget
    status = detail if detail else "ok"
    return CheckResult(
        name=name,
        passed=ok and in_budget,
        detail=f"{status}; {elapsed:.3f} s (budget {budget:g} s)"
        + ("" if in_budget else " EXCEEDED"),
        elapsed_s=elapsed,
    )


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _rel_ok(got: float, want: float, rtol: float) -> bool:
    return abs(got - want) <= rtol * max(abs(got), abs(want), 1e-300)


def check_critical_couplings() -> CheckResult:
    """Closed-form crossings for N = 2, 4, 8, exact float agreement."""
    budget = 1e-3
    expected = {2: [1.0], 4: [1 / 3, 1.0], 8: [1 / 7, 1 / 5, 1 / 3, 1.0]}
    t0 = perf_counter()
    got = {n: [cp.lambda_c for cp in model.critical_couplings(Multiplet(n))] for n in expected}
    ok = got == expected
    return _finish(
        "critical couplings, analytic",
        ok,
        "exact rational agreement" if ok else f"mismatch: {got}",
        t0,
        budget,
    )


_EXPECTED_PAIRS = {
    4: [(-2.0, 0.0), (-1.0, -3.0), (0.0, -4.0), (1.0, -3.0), (2.0, 0.0)],
    8: [
        (-4.0, 0.0),
        (-3.0, -7.0),
        (-2.0, -12.0),
        (-1.0, -15.0),
        (0.0, -16.0),
        (1.0, -15.0),
        (2.0, -12.0),
        (3.0, -7.0),
        (4.0, 0.0),
    ],
}


def check_eigenvalue_lists() -> CheckResult:
    """Closed-form (intercept, slope) pairs, cross-checked by Jacobi."""
    budget = 1.0
    lams = (0.0, 0.1, 1 / 3, 0.5, 1.0, 1.7)
    t0 = perf_counter()
    ok = True
    worst = 0.0
    for n, pairs in _EXPECTED_PAIRS.items():
        mult = Multiplet(n)
        s = model.analytic_spectrum(mult)
        got = [(lv.intercept, lv.slope) for lv in s.levels]
        if got != pairs:
            ok = False
            break
        for lam in lams:
            h = model.build_hamiltonian(ModelParams(multiplet=mult, lam=lam))
            jac = jacobi_eigenvalues(h).values
            ana = np.sort(s.energies(lam))
            worst = max(worst, float(np.abs(jac - ana).max()))
    ok = ok and worst <= 1e-10
    return _finish(
        "eigenvalue lists vs Jacobi oracle",
        ok,
        f"pairs exact, max |jacobi - analytic| = {worst:.2e}",
        t0,
        budget,
    )


def check_n2_transition() -> CheckResult:
    """N=2: residual search at beta=200, analytic limit, slope sign change."""
    budget = 1.0
    t0 = perf_counter()
    res = transitions.qpt_from_ceq(200.0, (0.5, 1.5))
    ok_search = res.converged and abs(res.xi - 1.0) <= 1e-3
    ok_limit = transitions.ceq_zero_t_coupling() == 1.0
    g_below = thermo.n2_closed_forms(0.95, 30.0).g_xi
    g_above = thermo.n2_closed_forms(1.05, 30.0).g_xi
    ok_sign = g_below > 0.0 > g_above
    ok = ok_search and ok_limit and ok_sign
    return _finish(
        "N=2 exact transition",
        ok,
        f"xi* = {res.xi:.8f}, limit = 1 exact, g(0.95) = {g_below:.3e}, g(1.05) = {g_above:.3e}",
        t0,
        budget,
    )


_STAIRCASES = {
    4: ([1 / 3, 1.0], [0.0, -3.0, -4.0], [-1.5, -3.5]),
    8: ([1 / 7, 1 / 5, 1 / 3, 1.0], [0.0, -7.0, -12.0, -15.0, -16.0], [-3.5, -9.5, -13.5, -15.5]),
}


def check_zero_t_staircase() -> CheckResult:
    """Jump locations, plateau values and midpoints of the zero-T staircase."""
    budget = 1.0
    tol = 1e-9
    t0 = perf_counter()
    ok = True
    worst = 0.0
    for n, (lams_c, plateaus, midpoints) in _STAIRCASES.items():
        s = model.analytic_spectrum(Multiplet(n))
        jumps = transitions.detect_jumps(s, (0.0, 1.4), 512)
        if len(jumps) != len(lams_c):
            ok = False
            break
        for k, jp in enumerate(jumps):
            errs = (
                abs(jp.lam - lams_c[k]),
                abs(jp.left_value - plateaus[k]),
                abs(jp.right_value - plateaus[k + 1]),
                abs(jp.midpoint_value - midpoints[k]),
            )
            worst = max(worst, *errs)
        ok = ok and worst <= tol
    return _finish(
        "zero-T staircase jumps",
        ok,
        f"max deviation {worst:.2e} (tol {tol:g})",
        t0,
        budget,
    )


def check_remnant_peaks() -> CheckResult:
    """Peak assignments, nesting along a beta schedule, 1/beta offset law."""
    budget = 10.0
    t0 = perf_counter()
    s4 = model.analytic_spectrum(Multiplet(4))
    crit = [1 / 3, 1.0]

    peaks = transitions.find_peaks(s4, 110.0, (0.02, 1.4), 1000)
    assigned = set()
    offsets_ok = bool(peaks)
    for pk in peaks:
        nearest = min(crit, key=lambda c: abs(pk.lambda_at_peak - c))
        assigned.add(nearest)
        if abs(pk.lambda_at_peak - nearest) >= 0.05:
            offsets_ok = False
    ok_assign = assigned == set(crit) and offsets_ok

    def dominant(beta: float, grid: int) -> transitions.PeakEstimate:
        cands = transitions.find_peaks(s4, beta, (0.9, 1.1), grid)
        return max(cands, key=lambda p: p.height)

    triples = []
    for beta in (70.0, 90.0, 110.0):
        pk = dominant(beta, 512)
        triples.append((abs(pk.lambda_at_peak - 1.0), pk.height, pk.width))
    ok_nested = all(
        a[i] > b[i] for a, b in zip(triples, triples[1:]) for i in range(3)
    )

    betas = (100.0, 200.0, 400.0, 800.0)
    offs = [abs(dominant(b, 1024).lambda_at_peak - 1.0) for b in betas]
    slope = float(np.polyfit(np.log(betas), np.log(offs), 1)[0])
    ok_slope = -1.1 <= slope <= -0.9

    ok = ok_assign and ok_nested and ok_slope
    return _finish(
        "remnant peak tracking",
        ok,
        f"assignments {sorted(assigned)}, nesting {'ok' if ok_nested else 'BROKEN'}, "
        f"log-log slope {slope:.4f}",
        t0,
        budget,
    )


def _mp_mean_energy(s: Spectrum, beta, lam):
    """Mean energy in arbitrary precision; beta and lam are mpf."""
    e = [mpf(float(i)) + mpf(float(sl)) * lam for i, sl in zip(s.intercepts, s.slopes)]
    e_min = min(e)
    w = [mp.e ** (-beta * (x - e_min)) for x in e]
    w_sum = sum(w)
    acc = sum(wi * (x - e_min) for wi, x in zip(w, e))
    return e_min + acc / w_sum


def _mp_fd_beta(s: Spectrum, beta: float, lam: float) -> float:
    h = mpf(1e-5 * max(1.0, 1.0 / beta))
    b = mpf(beta)
    x = mpf(lam)
    return float((_mp_mean_energy(s, b + h, x) - _mp_mean_energy(s, b - h, x)) / (2 * h))


def _mp_fd_lambda(s: Spectrum, beta: float, lam: float) -> float:
    h = mpf(1e-6)
    b = mpf(beta)
    x = mpf(lam)
    return float((_mp_mean_energy(s, b, x + h) - _mp_mean_energy(s, b, x - h)) / (2 * h))


def check_thermo_properties() -> CheckResult:
    """Occupations, shift invariance, FD-vs-moment derivatives, entropy limits."""
    budget = 5.0
    t0 = perf_counter()
    ok = True
    notes = []
    shift = 0.37
    worst_fd = 0.0
    with mp.workdps(50):
        for n in (2, 4, 8):
            s = model.analytic_spectrum(Multiplet(n))
            shifted = Spectrum(
                tuple(
                    model.AffineLevel(m=lv.m, intercept=lv.intercept + shift, slope=lv.slope)
                    for lv in s.levels
                )
            )
            for beta in (0.5, 5.0, 50.0):
                for lam in (0.1, 0.4, 0.9, 1.2):
                    obs = thermo.observables(s, beta, lam)
                    p = obs.occupations
                    if abs(float(p.sum()) - 1.0) > 1e-12 or p.min() < 0 or p.max() > 1:
                        ok = False
                        notes.append(f"occupations broken at n={n} beta={beta} lam={lam}")
                    obs_sh = thermo.observables(shifted, beta, lam)
                    inv = (
                        _close(obs_sh.log_z, obs.log_z - beta * shift, 1e-10)
                        and _close(obs_sh.mean_energy - shift, obs.mean_energy, 1e-10)
                        and _close(obs_sh.energy_variance, obs.energy_variance, 1e-10)
                        and _close(obs_sh.c_star_lambda, obs.c_star_lambda, 1e-10)
                        and _close(obs_sh.entropy, obs.entropy, 1e-10)
                        and float(np.abs(obs_sh.occupations - p).max()) <= 1e-10
                    )
                    if not inv:
                        ok = False
                        notes.append(f"shift invariance broken at n={n} beta={beta} lam={lam}")
                    fd_b = _mp_fd_beta(s, beta, lam)
                    fd_l = _mp_fd_lambda(s, beta, lam)
                    if not _rel_ok(obs.c_star_beta, fd_b, 1e-5):
                        ok = False
                        notes.append(f"c_star_beta FD mismatch at n={n} beta={beta} lam={lam}")
                    if not _rel_ok(obs.c_star_lambda, fd_l, 1e-5):
                        ok = False
                        notes.append(f"c_star_lambda FD mismatch at n={n} beta={beta} lam={lam}")
                    worst_fd = max(
                        worst_fd,
                        abs(obs.c_star_beta - fd_b) / max(abs(fd_b), 1e-300),
                        abs(obs.c_star_lambda - fd_l) / max(abs(fd_l), 1e-300),
                    )
                    sh_exact = obs.specific_heat == -(beta * beta) * obs.c_star_beta
                    if not (sh_exact and obs.specific_heat >= 0.0):
                        ok = False
                        notes.append(f"specific heat identity broken at n={n} beta={beta} lam={lam}")
            if abs(thermo.observables(s, 0.0, 0.7).entropy - math.log(n + 1)) > 1e-12:
                ok = False
                notes.append(f"entropy(beta=0) != ln(N+1) at n={n}")
            lam_c1 = model.critical_couplings(Multiplet(n))[0].lambda_c
            if abs(thermo.observables(s, 300.0, lam_c1).entropy - math.log(2.0)) > 1e-6:
                ok = False
                notes.append(f"entropy(beta=300, lambda_c) != ln 2 at n={n}")
    detail = "; ".join(notes[:3]) if notes else f"max FD mismatch {worst_fd:.2e} rel"
    return _finish("thermo engine properties", ok, detail, t0, budget)


def check_robustness() -> CheckResult:
    """No overflow or NaN at N=32 for beta up to 1e4 and lam up to 2."""
    budget = 1.0
    t0 = perf_counter()
    s = model.analytic_spectrum(Multiplet(32))
    ok = True
    for beta in (0.0, 1.0, 110.0, 1e4):
        for lam in (0.0, 0.5, 1.0, 2.0):
            lz = thermo.log_partition(s, beta, lam)
            obs = thermo.observables(s, beta, lam)
            scalars = (
                lz,
                obs.log_z,
                obs.mean_energy,
                obs.energy_variance,
                obs.c_star_beta,
                obs.c_star_lambda,
                obs.specific_heat,
                obs.entropy,
            )
            if not all(math.isfinite(v) for v in scalars):
                ok = False
            if not np.all(np.isfinite(obs.occupations)):
                ok = False
    return _finish(
        "numerical robustness at N=32",
        ok,
        "all observables finite" if ok else "non-finite value encountered",
        t0,
        budget,
    )


def check_determinism() -> CheckResult:
    """The sweep command run twice must emit byte-identical CSV."""
    from . import cli  # local import; cli imports this module

    budget = 5.0
    t0 = perf_counter()
    args = ["sweep", "--n", "4", "--beta", "110", "--lambda-grid", "0.02:1.4:200", "--out"]
    with tempfile.TemporaryDirectory() as td:
        p1 = os.path.join(td, "a.csv")
        p2 = os.path.join(td, "b.csv")
        rc1 = cli.main(args + [p1])
        rc2 = cli.main(args + [p2])
        with open(p1, "rb") as f1, open(p2, "rb") as f2:
            b1, b2 = f1.read(), f2.read()
    ok = rc1 == 0 and rc2 == 0 and b1 == b2 and len(b1) > 0
    return _finish(
        "sweep determinism",
        ok,
        f"{len(b1)} bytes, identical" if ok else "outputs differ",
        t0,
        budget,
    )


def run_all(quick: bool = False) -> list[CheckResult]:
    """Run the acceptance suite; quick mode skips the slow peak-tracking check."""
    checks = [
        check_critical_couplings,
        check_eigenvalue_lists,
        check_n2_transition,
        check_zero_t_staircase,
    ]
    if not quick:
        checks.append(check_remnant_peaks)
    checks += [
        check_thermo_properties,
        check_robustness,
        check_determinism,
    ]
    return [fn() for fn in checks]
