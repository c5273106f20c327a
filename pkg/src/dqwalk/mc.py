"""Monte Carlo sampling of the measured walk by simulating the physical process.

A trajectory alternates coherent steps with probability-``p`` projective
measurements: after each unitary step a coin is flipped, and on "measure"
the wave function collapses to a single position-coin basis vector sampled
from its squared amplitudes.  The final position is read out from the last
wave function.  The marginal law of the output equals the exact renewal
distribution; the sampler exists to cross-check the exact engines, not to
replace them.

Reproducibility contract: trajectory ``i`` of an ensemble draws from the
counter-based stream ``Philox(key=(seed, i))``, so results depend only on
``(seed, i)`` and never on batching or scheduling.  Each trajectory reads a
fixed block of ``2 t + 1`` uniforms: entry ``2 s`` decides measurement after
step ``s``, entry ``2 s + 1`` feeds the collapse-site inverse CDF (consulted
only when that measurement fires), and the last entry drives the final
readout.  Fixed indexing makes the vectorized ensemble engine bit-identical
to the one-trajectory reference engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exact import WalkParams
from .pure import amplitude_history, born_weights, hadamard_step, initial_state

__all__ = [
    "EnsembleSpec",
    "EnsembleSummary",
    "sample_ensemble",
    "sample_trajectory",
    "trajectory_stream",
]

_CHUNK = 4096
_CODES = {"right": 0, "left": 1, "symmetric": 2}


@dataclass(frozen=True)
class EnsembleSpec:
    """A reproducible sampling request."""

    params: WalkParams
    t: int
    n_samples: int
    seed: int

    def __post_init__(self) -> None:
        if self.t < 0:
            raise ValueError(f"time must be nonnegative, got {self.t!r}")
        if self.n_samples < 1:
            raise ValueError(f"need at least one sample, got {self.n_samples!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class EnsembleSummary:
    """Aggregated ensemble: empirical law plus its first two moments.

    ``empirical_probs`` maps visited positions to frequencies; frequencies
    sum to 1 and the support lies in [-t, t] with the parity of t.
    """

    empirical_probs: dict
    mean: float
    variance: float
    n_samples: int
    seed: int


def trajectory_stream(seed: int, index: int) -> np.random.Generator:
    """The deterministic substream assigned to trajectory ``index``."""
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _pick(cdf: np.ndarray, u):
    """Inverse-CDF site selection over the flattened (x, coin) support.

    ``u`` is scaled by the total mass so roundoff in the weights cannot bias
    the tail; flattening is x-major with the coin fastest, and zero-weight
    sites are never selected (their CDF interval is empty).
    """
    idx = np.searchsorted(cdf, u * cdf[-1], side="right")
    return np.minimum(idx, cdf.size - 1)


def sample_trajectory(params: WalkParams, t: int, stream: np.random.Generator) -> int:
    """Simulate one trajectory and return the final position.

    Reference implementation that carries the literal wave function: the
    working window holds amplitudes relative to the last collapse site
    (unitary evolution is translation invariant), and a collapse replaces it
    with an exact basis vector.
    """
    u = stream.random(2 * t + 1)
    pos, amps = _run_trajectory(params, t, u)
    return pos


def _run_trajectory(params: WalkParams, t: int, u: np.ndarray):
    amps = initial_state(params.initial)[None, :]
    origin = 0
    for s in range(t):
        amps = hadamard_step(amps)
        if u[2 * s] < params.p:
            cdf = np.cumsum(born_weights(amps).ravel())
            flat = int(_pick(cdf, u[2 * s + 1]))
            x_rel, coin = divmod(flat, 2)
            origin += x_rel - amps.shape[0] // 2
            amps = np.zeros((1, 2), dtype=complex)
            amps[0, coin] = 1.0
    cdf = np.cumsum(born_weights(amps).ravel())
    x_rel = int(_pick(cdf, u[2 * t])) // 2
    return origin + x_rel - amps.shape[0] // 2, amps


def _cdf_pyramid(label: str, t: int) -> list:
    """Collapse-site CDFs of a ``label`` start after 0..t coherent steps."""
    return [
        np.cumsum(born_weights(table.amps).ravel())
        for table in amplitude_history(label, t)
    ]


def _ensemble_positions(spec: EnsembleSpec) -> np.ndarray:
    """Final positions of all trajectories, vectorized over the ensemble.

    Per-trajectory state is three integers — steps since last collapse
    (``age``), collapse origin, and which basis state (or the initial state)
    the current stretch grew from — so one step touches every trajectory
    with O(1) work plus one inverse-CDF lookup per measuring trajectory,
    grouped by (state, age) to share CDF arrays.
    """
    params, t, n = spec.params, spec.t, spec.n_samples
    p = params.p
    pyramids = {
        _CODES["right"]: _cdf_pyramid("right", t),
        _CODES["left"]: _cdf_pyramid("left", t),
    }
    start_code = _CODES[params.initial]
    if start_code not in pyramids:
        pyramids[start_code] = _cdf_pyramid(params.initial, t)

    out = np.empty(n, dtype=np.int64)
    for base in range(0, n, _CHUNK):
        m = min(_CHUNK, n - base)
        u = np.empty((m, 2 * t + 1))
        for i in range(m):
            u[i] = trajectory_stream(spec.seed, base + i).random(2 * t + 1)

        code = np.full(m, start_code, dtype=np.int64)
        age = np.zeros(m, dtype=np.int64)
        origin = np.zeros(m, dtype=np.int64)
        for s in range(t):
            age += 1
            hit = np.nonzero(u[:, 2 * s] < p)[0]
            if hit.size == 0:
                continue
            keys = code[hit] * (t + 1) + age[hit]
            for key in np.unique(keys):
                grp = hit[keys == key]
                c, a = int(key) // (t + 1), int(key) % (t + 1)
                flat = _pick(pyramids[c][a], u[grp, 2 * s + 1])
                origin[grp] += flat // 2 - a
                code[grp] = flat % 2
                age[grp] = 0
        keys = code * (t + 1) + age
        for key in np.unique(keys):
            grp = np.nonzero(keys == key)[0]
            c, a = int(key) // (t + 1), int(key) % (t + 1)
            flat = _pick(pyramids[c][a], u[grp, 2 * t])
            out[base + grp] = origin[grp] + flat // 2 - a
    return out


def sample_ensemble(spec: EnsembleSpec) -> EnsembleSummary:
    """Sample ``spec.n_samples`` independent trajectories and aggregate.

    Aggregation is order independent (counts are summed, then normalized),
    and the per-trajectory substreams make the result a pure function of
    the spec.
    """
    t, n = spec.t, spec.n_samples
    positions = _ensemble_positions(spec)
    counts = np.bincount(positions + t, minlength=2 * t + 1)
    xs = np.arange(-t, t + 1, dtype=float)
    freqs = counts / float(n)
    mean = float(xs @ freqs)
    variance = float((xs * xs) @ freqs) - mean * mean
    support = np.nonzero(counts)[0]
    return EnsembleSummary(
        empirical_probs={int(x - t): float(counts[x]) / n for x in support},
        mean=mean,
        variance=variance,
        n_samples=n,
        seed=spec.seed,
    )
