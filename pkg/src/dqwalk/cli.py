"""Command-line interface: distributions, moments, figures, and verification.

Every command funnels through :class:`RunConfig` (CLI flags override config
file values, which override per-command defaults) and emits either CSV or a
JSON mirror of the same rows.  CSV output is deterministic byte-for-byte:
lowercase snake_case headers, rows ordered by (t, x) ascending, floats
printed with 17 significant digits so values round-trip exactly.

The ``figures`` command writes three fixed data files (``fig1.csv``:
limiting normal densities, ``fig2.csv``: long-run standard deviations,
``fig3.csv``: the variance-crossover time) plus a rendered PNG next to each
CSV; the CSVs are the contract, the PNGs are a convenience.  ``verify``
prints one verdict line per acceptance check and exits nonzero when any
check fails.

The Kolmogorov-Smirnov statistic reported by ``converge`` compares the
lattice CDF with the continuous Gaussian CDF evaluated at lattice midpoints
(x + 1, halfway between consecutive support points); see
:func:`dqwalk.analytic.ks_to_limit`.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analytic, exact
from .mc import EnsembleSpec, sample_ensemble
from .pure import INITIAL_LABELS

__all__ = [
    "RunConfig",
    "converge_rows",
    "distribution_rows",
    "figure_frames",
    "main",
    "moments_rows",
    "render_figures",
]

COMMANDS = ("distribution", "moments", "figures", "verify", "converge", "mc")
METHODS = ("renewal", "superop", "oracle", "mc")

#: Measurement probabilities of the plotted limit densities (fig1).
FIG1_PS = (1.0, 0.8, 0.1, 0.05, 0.01)
#: Horizons of the plotted long-run standard deviations (fig2).
FIG2_TS = (200, 300, 400, 500)


@dataclass(frozen=True)
class RunConfig:
    """One resolved command invocation."""

    command: str
    p: float = 0.5
    t: int = 100
    initial: str = "symmetric"
    seed: int | None = None
    n_samples: int = 10_000
    output_path: str | None = None
    format: str = "csv"
    method: str = "renewal"
    fast: bool = False

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")
        if self.t < 0:
            raise ValueError(f"t must be >= 0, got {self.t!r}")
        if self.initial not in INITIAL_LABELS:
            raise ValueError(f"initial must be one of {INITIAL_LABELS}, got {self.initial!r}")
        if self.n_samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.n_samples!r}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")


# ---------------------------------------------------------------------------
# row builders


def _support_lattice(t: int) -> np.ndarray:
    """Reachable positions at time t (same parity as t), ascending."""
    return np.arange(-t, t + 1, 2)


def _law_rows(t: int, probs_full: np.ndarray, method: str) -> list[tuple]:
    lattice = _support_lattice(t)
    return [(t, int(x), float(probs_full[x + t]), method) for x in lattice]


def _empirical_full(summary, t: int) -> np.ndarray:
    full = np.zeros(2 * t + 1)
    for x, freq in summary.empirical_probs.items():
        full[x + t] = freq
    return full


def distribution_rows(config: RunConfig) -> list[tuple]:
    """Position law at time ``config.t`` as (t, x, probability, method) rows."""
    p, t, initial = config.p, config.t, config.initial
    if config.method == "renewal":
        law = exact.position_distribution(exact.renewal_evolve(p, t), initial, t)
        return _law_rows(t, law.probs, "renewal")
    if config.method == "superop":
        law = exact.position_distribution(exact.superoperator_evolve(p, t), initial, t)
        return _law_rows(t, law.probs, "superop")
    if config.method == "oracle":
        law = exact.path_sum_oracle(exact.WalkParams(p, initial), t)
        return _law_rows(t, law.probs, "oracle")
    summary = sample_ensemble(
        EnsembleSpec(exact.WalkParams(p, initial), t, config.n_samples, _require_seed(config))
    )
    return _law_rows(t, _empirical_full(summary, t), "mc")


def moments_rows(config: RunConfig) -> list[tuple]:
    """(t, mean_exact, var_exact, mean_formula, var_formula) for t = 1..config.t."""
    if config.p == 0.0:
        raise ValueError("moment formulas require p > 0")
    table = exact.renewal_evolve(config.p, config.t)
    rows = []
    for t in range(1, config.t + 1):
        m = exact.moments(exact.position_distribution(table, config.initial, t))
        report = analytic.moment_report(config.p, t, config.initial)
        rows.append(
            (t, m.mean, m.variance, report.mean_formula, report.variance_formula)
        )
    return rows


def converge_rows(config: RunConfig) -> list[tuple]:
    """(t, ks_distance, cf_error) over a fourfold doubling schedule ending near config.t.

    KS compares the law of ``(X_t - mean)/sqrt(t)`` to N(0, v) at lattice
    midpoints, with ``mean`` the exact mean of the chosen start; the
    characteristic-function error is measured on the uncentered law, whose
    decay rate separates the symmetric start (~1/t) from the coin-right
    start (~1/sqrt t).
    """
    if config.p == 0.0:
        raise ValueError("the normal limit requires p > 0")
    if config.t < 8:
        raise ValueError("the doubling schedule needs t >= 8")
    base = config.t // 8
    schedule = [base, 2 * base, 4 * base, 8 * base]
    table = exact.renewal_evolve(config.p, schedule[-1])
    rows = []
    for t in schedule:
        law = exact.position_distribution(table, config.initial, t)
        mean = 0.0 if config.initial == "symmetric" else exact.moments(law).mean
        rows.append(
            (t, analytic.ks_to_limit(law, config.p, mean=mean), analytic.cf_gap(law, config.p))
        )
    return rows


def figure_frames() -> dict[str, tuple[list[str], list[tuple]]]:
    """Header and rows of each figure data file, keyed by file stem."""
    xs = np.arange(-200, 201) / 20.0  # -10..10 step 0.05, exact zero at center
    fig1 = []
    for p in FIG1_PS:
        v = analytic.limit_variance(p)
        for x in xs:
            fig1.append((p, float(x), math.exp(-x * x / (2.0 * v)) / math.sqrt(2.0 * math.pi * v)))

    ps = np.arange(1, 101) / 100.0  # 0.01..1; the p = 0 row is omitted (formulas blow up)
    fig2 = [
        (float(p),)
        + tuple(math.sqrt(analytic.longterm_variance(float(p), t)) for t in FIG2_TS)
        for p in ps
    ]
    fig3 = [(float(p), analytic.pseudoquantum_time(float(p))) for p in ps]

    return {
        "fig1": (["p", "x", "density"], fig1),
        "fig2": (["p"] + [f"std_t{t}" for t in FIG2_TS], fig2),
        "fig3": (["p", "t0"], fig3),
    }


# ---------------------------------------------------------------------------
# serialization


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _serialize(header: list[str], rows: list[tuple], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, row)) for row in rows], indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([_fmt(v) for v in row] for row in rows)
    return buf.getvalue()


def _emit(config: RunConfig, header: list[str], rows: list[tuple]) -> None:
    text = _serialize(header, rows, config.format)
    if config.output_path:
        Path(config.output_path).write_text(text)
    else:
        sys.stdout.write(text)


def render_figures(out_dir: str | Path) -> list[Path]:
    """Write fig1/fig2/fig3 CSVs plus a PNG rendering of each; return the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    frames = figure_frames()
    written = []
    for stem, (header, rows) in frames.items():
        path = out / f"{stem}.csv"
        path.write_text(_serialize(header, rows, "csv"))
        written.append(path)
    written.extend(_render_pngs(out, frames))
    return written


def _render_pngs(out: Path, frames) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    paths = []

    def save(name: str, draw) -> None:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        draw(ax)
        fig.tight_layout()
        path = out / f"{name}.png"
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)

    _, fig1 = frames["fig1"]
    per_p = len(fig1) // len(FIG1_PS)

    def draw1(ax):
        for i, p in enumerate(FIG1_PS):
            chunk = fig1[i * per_p : (i + 1) * per_p]
            ax.plot([r[1] for r in chunk], [r[2] for r in chunk], label=f"p={p:g}")
        ax.set_xlabel("x")
        ax.set_ylabel("limit density")
        ax.legend()

    _, fig2 = frames["fig2"]

    def draw2(ax):
        ps = [r[0] for r in fig2]
        for j, t in enumerate(FIG2_TS):
            ax.plot(ps, [r[1 + j] for r in fig2], label=f"t={t}")
        ax.set_xlabel("p")
        ax.set_ylabel("long-run standard deviation")
        ax.legend()

    _, fig3 = frames["fig3"]

    def draw3(ax):
        ax.plot([r[0] for r in fig3], [r[1] for r in fig3])
        ax.set_xlabel("p")
        ax.set_ylabel("crossover time t0")

    save("fig1", draw1)
    save("fig2", draw2)
    save("fig3", draw3)
    return paths


# ---------------------------------------------------------------------------
# commands


def _require_seed(config: RunConfig) -> int:
    """Seed for a randomized command: the configured one, or fresh entropy."""
    seed = config.seed
    if seed is None:
        seed = int(np.random.default_rng().integers(0, 2**63))
    print(f"seed={seed}", file=sys.stderr)
    return seed


def _cmd_distribution(config: RunConfig) -> int:
    _emit(config, ["t", "x", "probability", "method"], distribution_rows(config))
    return 0


def _cmd_moments(config: RunConfig) -> int:
    _emit(
        config,
        ["t", "mean_exact", "var_exact", "mean_formula", "var_formula"],
        moments_rows(config),
    )
    return 0


def _cmd_converge(config: RunConfig) -> int:
    _emit(config, ["t", "ks_distance", "cf_error"], converge_rows(config))
    return 0


def _cmd_figures(config: RunConfig) -> int:
    out_dir = config.output_path if config.output_path else "."
    for path in render_figures(out_dir):
        print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_mc(config: RunConfig) -> int:
    seed = _require_seed(config)
    spec = EnsembleSpec(
        exact.WalkParams(config.p, config.initial), config.t, config.n_samples, seed
    )
    summary = sample_ensemble(spec)
    print(
        f"n_samples={summary.n_samples} mean={summary.mean:.17g} "
        f"variance={summary.variance:.17g}",
        file=sys.stderr,
    )
    rows = _law_rows(config.t, _empirical_full(summary, config.t), "mc")
    _emit(config, ["t", "x", "frequency", "method"], rows)
    return 0


def _cmd_verify(config: RunConfig) -> int:
    from . import acceptance

    results = acceptance.run_all(fast=config.fast)
    for result in results:
        print(result.line())
    passed = sum(r.passed for r in results)
    suffix = " (fast sub-suite)" if config.fast else ""
    print(f"\n{passed}/{len(results)} checks passed{suffix}")
    return 0 if passed == len(results) else 1


_COMMANDS = {
    "distribution": _cmd_distribution,
    "moments": _cmd_moments,
    "figures": _cmd_figures,
    "verify": _cmd_verify,
    "converge": _cmd_converge,
    "mc": _cmd_mc,
}

#: Hard defaults applied after CLI flags and config-file values.
_DEFAULTS: dict[str, dict] = {
    "distribution": dict(p=0.5, t=100, initial="symmetric", seed=None, n_samples=10_000,
                         output_path=None, format="csv", method="renewal"),
    "moments": dict(p=0.5, t=100, initial="symmetric", seed=None, n_samples=10_000,
                    output_path=None, format="csv", method="renewal"),
    "converge": dict(p=0.5, t=1000, initial="symmetric", seed=None, n_samples=10_000,
                     output_path=None, format="csv", method="renewal"),
    "mc": dict(p=0.5, t=100, initial="symmetric", seed=None, n_samples=10_000,
               output_path=None, format="csv", method="mc"),
    "figures": dict(p=0.5, t=100, initial="symmetric", seed=None, n_samples=10_000,
                    output_path=None, format="csv", method="renewal"),
    "verify": dict(p=0.5, t=100, initial="symmetric", seed=None, n_samples=10_000,
                   output_path=None, format="csv", method="renewal", fast=False),
}

_COERCE = {
    "p": float,
    "t": int,
    "seed": int,
    "samples": int,
    "initial": str,
    "out": str,
    "format": str,
    "method": str,
    "fast": lambda s: s.lower() in ("1", "true", "yes", "on"),
}

#: config-file key -> RunConfig field
_KEY_TO_FIELD = {
    "p": "p",
    "t": "t",
    "initial": "initial",
    "seed": "seed",
    "samples": "n_samples",
    "out": "output_path",
    "format": "format",
    "method": "method",
    "fast": "fast",
}


def _load_config_file(path: str) -> dict:
    """Flat ``key=value`` file: comments (#) and blank lines ignored."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        if key not in _KEY_TO_FIELD:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _COERCE[key](value)
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqwalk",
        description=(
            "Decoherent Hadamard walk toolkit: exact laws, moment and limit "
            "formulas, trajectory sampling, figure data, and the acceptance suite."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "distribution": "Exact (or sampled) position law at one time.",
        "moments": "Exact vs formula means and variances for t = 1..T.",
        "figures": "Write fig1/fig2/fig3 CSV data files and PNG renderings.",
        "verify": "Run the acceptance checks and report verdicts.",
        "converge": (
            "Track convergence of the rescaled law to its normal limit over a "
            "doubling schedule.  The KS statistic compares the lattice CDF "
            "against the Gaussian CDF at lattice midpoints (x + 1)."
        ),
        "mc": "Sample an ensemble of measured trajectories and tabulate frequencies.",
    }
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=descriptions[name], description=descriptions[name])
        cmd.add_argument("--p", type=float, default=None, help="measurement probability in [0, 1]")
        cmd.add_argument("--t", type=int, default=None, help="time horizon (steps)")
        cmd.add_argument("--initial", choices=INITIAL_LABELS, default=None,
                         help="initial coin state")
        cmd.add_argument("--seed", type=int, default=None, help="seed for sampling commands")
        cmd.add_argument("--samples", type=int, default=None, help="number of trajectories")
        cmd.add_argument("--out", default=None, metavar="PATH",
                         help="output file (figures: output directory); default stdout")
        cmd.add_argument("--format", choices=("csv", "json"), default=None,
                         help="row serialization")
        cmd.add_argument("--method", choices=METHODS, default=None,
                         help="evolution backend for distribution rows")
        cmd.add_argument("--fast", action="store_const", const=True, default=None,
                         help="verify only: restrict to the t <= 100 sub-suite")
        cmd.add_argument("--config", default=None, metavar="PATH",
                         help="flat key=value config file (flags take precedence)")
    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    file_values = _load_config_file(args.config) if args.config else {}
    cli_values = {
        "p": args.p,
        "t": args.t,
        "initial": args.initial,
        "seed": args.seed,
        "samples": args.samples,
        "out": args.out,
        "format": args.format,
        "method": args.method,
        "fast": args.fast,
    }
    fields = dict(_DEFAULTS[args.command])
    for key, field in _KEY_TO_FIELD.items():
        if field not in fields:
            continue  # e.g. fast outside verify
        if cli_values.get(key) is not None:
            fields[field] = cli_values[key]
        elif key in file_values:
            fields[field] = file_values[key]
    return RunConfig(command=args.command, **fields)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _resolve(args)
        return _COMMANDS[config.command](config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
