"""Executable acceptance suite: every advertised guarantee as one check.

Each check pits at least two independently implemented routes against each
other (recursion vs closed form, sampler vs exact law, series vs contour
extraction) and condenses the comparison into a single
:class:`CheckResult` with the measured worst case, the budget it must meet,
and a verdict.  :func:`run_all` executes the registry in order; the CLI
``verify`` command is a thin printer around it.

Checks that are only defined at horizons beyond t = 100 are skipped (not
silently passed) in fast mode.
"""

from __future__ import annotations

import csv
import math
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import brentq

from . import analytic, exact, mc, pure, series

__all__ = [
    "CheckResult",
    "criterion_names",
    "run_all",
    "run_criterion",
]

#: Wall-clock budgets (seconds) attached to individual checks.
_BUDGETS = {1: 10.0, 2: 60.0, 6: 600.0, 11: 120.0}

#: Fixed seed for the Monte Carlo acceptance run (results frozen in tests).
MC_ACCEPTANCE_SEED = 107

#: Fixed seed for the sampled (k, z) points of the fixed-point residual check.
RESIDUAL_POINT_SEED = 180


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one acceptance check."""

    number: int
    name: str
    passed: bool
    measured: str
    tolerance: str
    seconds: float
    note: str = ""
    skipped: bool = False

    def line(self) -> str:
        """One printable verdict line (plus an indented note when present)."""
        verdict = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        text = (
            f"[{self.number:2d}] {verdict}  {self.name}\n"
            f"     measured:  {self.measured}\n"
            f"     required:  {self.tolerance}   ({self.seconds:.1f} s)"
        )
        if self.note:
            text += f"\n     note:      {self.note}"
        return text


class _Outcome(NamedTuple):
    passed: bool
    measured: str
    tolerance: str
    note: str = ""
    skipped: bool = False


_SKIP = "skipped under fast mode (only defined beyond t = 100)"


@lru_cache(maxsize=None)
def _table(p: float, t_max: int) -> exact.ProbabilityTable:
    return exact.renewal_evolve(p, t_max)


def _law(p: float, t_max: int, initial: str, t: int) -> exact.PositionDistribution:
    return exact.position_distribution(_table(p, t_max), initial, t)


# ---------------------------------------------------------------------------
# the twelve checks


def _check_path_sum(fast: bool) -> _Outcome:
    """1. Brute-force measurement-history sum agrees with the renewal law."""
    worst = 0.0
    for p in (0.25, 0.5, 0.75):
        tab = _table(p, 6)
        for initial in pure.INITIAL_LABELS:
            for t in range(7):
                oracle = exact.path_sum_oracle(exact.WalkParams(p, initial), t)
                ren = exact.position_distribution(tab, initial, t)
                worst = max(worst, float(np.max(np.abs(oracle.probs - ren.probs))))
    return _Outcome(worst <= 1e-12, f"max |path sum - renewal| = {worst:.3e}", "<= 1e-12")


def _check_superoperator(fast: bool) -> _Outcome:
    """2. Renewal recursion and density-operator channel give the same laws."""
    worst = 0.0
    for p in (0.1, 0.5, 0.9):
        ren = _table(p, 100)
        sup = exact.superoperator_evolve(p, 100)
        for t in range(101):
            for initial in pure.INITIAL_LABELS:
                tv = exact.tv_distance(
                    exact.position_distribution(sup, initial, t),
                    exact.position_distribution(ren, initial, t),
                )
                worst = max(worst, tv)
    return _Outcome(worst <= 1e-10, f"max TV(renewal, superoperator) = {worst:.3e}", "<= 1e-10")


def _check_symmetric_mean(fast: bool) -> _Outcome:
    """3. The symmetric start has mean exactly zero at every time."""
    t_cap = 100 if fast else 300
    worst = 0.0
    for p in (0.01, 0.1, 0.5, 1.0):
        for t in range(1, t_cap + 1):
            m = exact.moments(_law(p, t_cap, "symmetric", t)).mean
            worst = max(worst, abs(m))
    scope = f"t <= {t_cap}"
    return _Outcome(worst <= 1e-12, f"max |mean| = {worst:.3e} ({scope})", "<= 1e-12")


def _highprec_variance_gaps(p: float, ts: tuple[int, ...]) -> dict[int, float]:
    """|Taylor coefficient - linear-growth formula| at 120 decimal digits.

    The true gaps decay like the reciprocal of the second denominator root
    to the power t and pass below the float64 noise of the lattice sums
    near t = 150, so the geometric-decay assertion needs real precision:
    coefficients of the variance generating function are extracted on an
    |z| = 0.8 contour in mpmath arithmetic (the 0.8^-300 amplification eats
    about 29 digits, leaving plenty).
    """
    import mpmath as mp

    with mp.workdps(120):
        pp = mp.mpf(repr(p))
        q = 1 - pp
        radius = mp.mpf("0.8")
        nodes = 1024

        def gf(z):
            root = mp.sqrt(1 + q * q * z * z)
            return z / (1 - z) ** 2 + 2 * z * z * (root - 1) / (
                (1 - z) ** 2 * (pp * z + (1 - z) * root)
            )

        vals = [gf(radius * mp.exp(2 * mp.pi * mp.mpc(0, 1) * j / nodes)) for j in range(nodes)]
        rate = mp.sqrt(1 + q * q)
        v = (pp + 2 * rate - 2) / pp
        const = -2 * q * q / (pp * rate) - (2 / pp**2) * (1 + q * q - rate)
        gaps = {}
        for t in ts:
            acc = mp.fsum(
                (w * mp.exp(-2 * mp.pi * mp.mpc(0, 1) * j * t / nodes) for j, w in enumerate(vals)),
                absolute=False,
            )
            coeff = mp.re(acc) / (nodes * radius**t)
            # cross-pin the high-precision route to the float64 lattice law
            lattice = exact.moments(_law(p, max(ts), "symmetric", t)).variance
            if abs(float(coeff) - lattice) > 1e-6:
                raise AssertionError(
                    f"high-precision coefficient drifted from the lattice variance at t={t}"
                )
            gaps[t] = float(abs(coeff - (v * t + const)))
    return gaps


def _check_variance_formula(fast: bool) -> _Outcome:
    """4. Linear-growth variance formula: absolute error and geometric gap decay."""
    p = 0.3
    ts = (50, 100) if fast else (50, 100, 200, 300)
    t_cap = max(ts)
    parts = []
    ok = True

    if not fast:
        gap300 = abs(
            exact.moments(_law(p, t_cap, "symmetric", 300)).variance
            - analytic.longterm_variance(p, 300)
        )
        ok &= gap300 <= 1e-6
        parts.append(f"|Var(300) - formula| = {gap300:.3e}")

    gaps = _highprec_variance_gaps(p, ts)
    chain = [gaps[t] for t in ts]
    halves = all(b <= a / 2.0 for a, b in zip(chain, chain[1:]))
    ok &= halves
    parts.append("gaps " + " -> ".join(f"{g:.2e}" for g in chain))

    classical = _table(1.0, t_cap)
    drift = max(
        abs(exact.moments(exact.position_distribution(classical, "symmetric", t)).variance - t)
        for t in range(1, t_cap + 1)
    )
    ok &= drift <= 1e-9
    parts.append(f"p=1 max |Var - t| = {drift:.3e}")

    return _Outcome(
        bool(ok),
        "; ".join(parts),
        "gap(300) <= 1e-6; each gap <= half the previous; p=1 <= 1e-9",
    )


def _check_right_mean(fast: bool) -> _Outcome:
    """5. Coin-right mean settles on (sqrt(1+q^2) - 1)/p."""
    if fast:
        return _Outcome(True, _SKIP, "|mean(300) - drift| <= 1e-6", skipped=True)
    gap = abs(
        exact.moments(_law(0.3, 300, "right", 300)).mean - analytic.longterm_mean_right(0.3)
    )
    return _Outcome(gap <= 1e-6, f"|mean(300) - formula| = {gap:.3e}", "<= 1e-6")


def _check_gaussian_limit(fast: bool) -> _Outcome:
    """6. Rescaled laws approach N(0, v) at the advertised per-start rates."""
    if fast:
        return _Outcome(True, _SKIP, "KS decreasing, <= 0.03; CF ratios in window", skipped=True)
    p = 0.5
    ts = (250, 500, 1000)
    ok = True
    parts = []
    ratio_bands = {
        "symmetric": (1.5, 2.6),  # predicted factor 2 per doubling
        "right": (1.5 * math.sqrt(2.0) / 2.0, 2.6 * math.sqrt(2.0) / 2.0),  # predicted sqrt 2
    }
    ratios = {}
    for initial in ("symmetric", "right"):
        laws = [_law(p, 1000, initial, t) for t in ts]
        means = [0.0 if initial == "symmetric" else exact.moments(d).mean for d in laws]
        ks = [analytic.ks_to_limit(d, p, mean=m) for d, m in zip(laws, means)]
        cf = [analytic.cf_gap(d, p) for d in laws]
        ok &= ks[0] > ks[1] > ks[2] and ks[2] <= 0.03
        ratios[initial] = (cf[0] / cf[1], cf[1] / cf[2])
        lo, hi = ratio_bands[initial]
        ok &= all(lo <= r <= hi for r in ratios[initial])
        parts.append(
            f"{initial}: KS {ks[0]:.4f}->{ks[1]:.4f}->{ks[2]:.4f}, "
            f"CF ratios {ratios[initial][0]:.3f}/{ratios[initial][1]:.3f}"
        )
    ok &= min(ratios["symmetric"]) > max(ratios["right"])
    return _Outcome(
        bool(ok),
        "; ".join(parts),
        "KS decreasing and KS(1000) <= 0.03; CF ratios in [1.5, 2.6] (symmetric) "
        "and [1.06, 1.84] (right), symmetric strictly faster",
    )


def _check_pure_variance(fast: bool) -> _Outcome:
    """7. Measurement-free variance series equals the evolved walk, grows ~0.2929 t^2."""
    worst = 0.0
    amps = pure.initial_state("symmetric")[None, :]
    for t in range(1, 51):
        amps = pure.hadamard_step(amps)
        w = pure.born_weights(amps).sum(axis=1)
        x = np.arange(-t, t + 1, dtype=float)
        var = float((x * x) @ w) - float(x @ w) ** 2
        worst = max(worst, abs(var - analytic.pure_variance_exact(t)))
    ok = worst <= 1e-10
    parts = [f"max |series - evolved| = {worst:.3e} (t <= 50)"]
    if not fast:
        ratio = analytic.pure_variance_exact(1000) / 1000.0**2
        target = 1.0 - 1.0 / math.sqrt(2.0)
        ok &= abs(ratio - target) <= 0.01
        parts.append(f"Var(1000)/1000^2 = {ratio:.5f} vs {target:.5f}")
    return _Outcome(
        bool(ok), "; ".join(parts), "<= 1e-10; |ratio - (1 - 1/sqrt 2)| <= 0.01"
    )


def _check_gf_coefficients(fast: bool) -> _Outcome:
    """8. Contour-extracted Taylor coefficients match the lattice transforms."""
    worst = 0.0
    for p in (0.3, 0.7):
        params = exact.WalkParams(p)
        for initial, gf in (("symmetric", analytic.phat_symmetric), ("right", analytic.phat_right)):
            for k in (0.0, 0.5, 1.0):
                coeffs = series.taylor_coeffs(lambda z: gf(k, z, params), t_max=100)
                lattice = np.array(
                    [complex(_law(p, 100, initial, t).char(k)) for t in range(101)]
                )
                worst = max(worst, float(np.max(np.abs(coeffs - lattice))))
    return _Outcome(worst <= 1e-8, f"max |coefficient - transform| = {worst:.3e}", "<= 1e-8")


def _check_fixed_point(fast: bool) -> _Outcome:
    """9. Decoherence fixed-point identity holds; transfer matrix is a contraction."""
    rng = np.random.default_rng(RESIDUAL_POINT_SEED)
    points = [
        (float(rng.uniform(0.0, math.pi)), float(rng.uniform(0.1, 0.6)) * np.exp(2j * math.pi * rng.uniform()))
        for _ in range(20)
    ]
    worst_resid = 0.0
    worst_row = 0.0
    for p in (0.3, 0.7, 1.0):
        params = exact.WalkParams(p)
        depth = series.suggested_truncation(0.6 + 0j, params)
        for k, z in points:
            worst_resid = max(
                worst_resid, series.decoherence_equation_residual(k, z, params, depth)
            )
            rows = np.abs(series.qhat_truncated(k, z, params, depth).entries).sum(axis=1)
            worst_row = max(worst_row, float(rows.max()))
    ok = worst_resid <= 1e-8 and worst_row < 1.0
    return _Outcome(
        ok,
        f"max residual = {worst_resid:.3e}; max row sum = {worst_row:.4f}",
        "residual <= 1e-8; row sum < 1",
    )


def _check_crossover_time(fast: bool) -> _Outcome:
    """10. Crossover-time formula: reference value and brute-force minimizer."""
    t0 = analytic.pseudoquantum_time(0.01)
    ok = abs(t0 - 247.3) <= 0.05
    worst_off = 0.0
    ts = np.arange(1, 10001, dtype=float)
    for p in (0.05, 0.1, 0.5, 1.0):
        gap = ts**2 / 6.0 - np.array([analytic.longterm_variance(p, t) for t in ts])
        worst_off = max(worst_off, abs(float(ts[np.argmin(gap)]) - analytic.pseudoquantum_time(p)))
    ok &= worst_off <= 1.0
    p_star = float(brentq(lambda x: analytic.pseudoquantum_time(x) - 200.0, 1e-4, 1.0))
    note = (
        f"crossover time reaches 200 at p = {p_star:.5f}, not at the documented "
        "0.0014 (informational; the brute-force scan above governs)"
    )
    return _Outcome(
        bool(ok),
        f"t0(0.01) = {t0:.4f}; max |formula - scan argmin| = {worst_off:.1f}",
        "247.3 +/- 0.05; argmin within 1",
        note=note,
    )


def _check_monte_carlo(fast: bool) -> _Outcome:
    """11. Sampler reproduces the exact law: moments, TV distance, determinism."""
    if fast:
        return _Outcome(True, _SKIP, "within 3 SE; TV <= 0.01; bit-identical reruns", skipped=True)
    spec = mc.EnsembleSpec(exact.WalkParams(0.5), 200, 100_000, MC_ACCEPTANCE_SEED)
    first = mc.sample_ensemble(spec)
    second = mc.sample_ensemble(spec)
    identical = first == second

    law = _law(0.5, 200, "symmetric", 200)
    target = exact.moments(law)
    xs = law.positions().astype(float)
    m4 = float((xs**4) @ law.probs)
    se = math.sqrt((m4 - target.variance**2) / spec.n_samples)
    var_off = abs(first.variance - target.variance)

    empirical = np.zeros(2 * spec.t + 1)
    for x, f in first.empirical_probs.items():
        empirical[x + spec.t] = f
    tv = exact.tv_distance(exact.PositionDistribution(spec.t, empirical), law)

    ok = identical and var_off <= 3.0 * se and tv <= 0.01
    return _Outcome(
        bool(ok),
        f"|var - exact| = {var_off:.3f} (3 SE = {3 * se:.3f}); TV = {tv:.5f}; "
        f"reruns identical: {identical}",
        "within 3 SE; TV <= 0.01; bit-identical reruns",
    )


def _render_figures_subprocess(out_dir: Path) -> None:
    subprocess.run(
        [sys.executable, "-m", "dqwalk", "figures", "--out", str(out_dir)],
        check=True,
        capture_output=True,
    )


def _check_figure_data(fast: bool) -> _Outcome:
    """12. Figure CSVs are run-to-run identical and numerically faithful."""
    with tempfile.TemporaryDirectory() as tmp:
        first, second = Path(tmp, "first"), Path(tmp, "second")
        _render_figures_subprocess(first)
        _render_figures_subprocess(second)

        names = ("fig1.csv", "fig2.csv", "fig3.csv")
        identical = all((first / n).read_bytes() == (second / n).read_bytes() for n in names)
        rendered = all((first / n).with_suffix(".png").stat().st_size > 0 for n in names)

        with (first / "fig2.csv").open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        times = (200, 300, 400, 500)
        faithful = all(
            float(row[f"std_t{t}"]) == math.sqrt(analytic.longterm_variance(float(row["p"]), t))
            for row in rows
            for t in times
        )

        with (first / "fig3.csv").open(newline="") as fh:
            t0_by_p = {row["p"]: float(row["t0"]) for row in csv.DictReader(fh)}
        t0_small_p = t0_by_p["0.01"]
        crossover = abs(t0_small_p - 247.3) <= 0.05 and 200.0 < t0_small_p

    ok = identical and rendered and faithful and crossover
    return _Outcome(
        bool(ok),
        f"CSV reruns identical: {identical}; fig2 = sqrt(formula): {faithful}; "
        f"t0(0.01) = {t0_small_p:.4f} > 200: {crossover}",
        "bit-identical; exact sqrt match; 247.3 +/- 0.05 and above t = 200",
    )


_CHECKS: tuple[tuple[int, str, Callable[[bool], _Outcome]], ...] = (
    (1, "history sum vs renewal recursion", _check_path_sum),
    (2, "renewal recursion vs density channel", _check_superoperator),
    (3, "symmetric start has zero mean", _check_symmetric_mean),
    (4, "variance formula and remainder decay", _check_variance_formula),
    (5, "coin-right mean formula", _check_right_mean),
    (6, "normal limit at the advertised rates", _check_gaussian_limit),
    (7, "measurement-free variance series", _check_pure_variance),
    (8, "generating-function coefficients", _check_gf_coefficients),
    (9, "decoherence fixed-point residual", _check_fixed_point),
    (10, "variance-crossover time", _check_crossover_time),
    (11, "trajectory sampler vs exact law", _check_monte_carlo),
    (12, "figure data determinism", _check_figure_data),
)


def criterion_names() -> dict[int, str]:
    """Check numbers mapped to their short names."""
    return {number: name for number, name, _ in _CHECKS}


def run_criterion(number: int, fast: bool = False) -> CheckResult:
    """Run one check by number and time it against its budget, if any."""
    for num, name, fn in _CHECKS:
        if num == number:
            break
    else:
        raise ValueError(f"no acceptance check numbered {number!r}")
    start = time.perf_counter()
    outcome = fn(fast)
    elapsed = time.perf_counter() - start
    passed, tolerance = outcome.passed, outcome.tolerance
    budget = _BUDGETS.get(number)
    if budget is not None and not outcome.skipped:
        tolerance += f"; runtime < {budget:.0f} s"
        passed = passed and elapsed < budget
    return CheckResult(
        number=number,
        name=name,
        passed=bool(passed),
        measured=outcome.measured,
        tolerance=tolerance,
        seconds=elapsed,
        note=outcome.note,
        skipped=outcome.skipped,
    )


def run_all(fast: bool = False, numbers=None) -> list[CheckResult]:
    """Run the requested checks (all twelve by default), in order."""
    wanted = [num for num, _, _ in _CHECKS] if numbers is None else sorted(set(numbers))
    return [run_criterion(num, fast=fast) for num in wanted]
