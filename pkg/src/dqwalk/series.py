"""Power-series and contour machinery tying closed forms to exact recursions.

Three tools connect the generating functions of :mod:`dqwalk.analytic` to
the lattice recursions of :mod:`dqwalk.exact`:

* :func:`taylor_coeffs` extracts Taylor coefficients of an analytic function
  from equispaced samples on a circle |z| = r < 1 (an FFT evaluates the
  contour integral exactly up to aliasing),
* :func:`qhat_truncated` sums the defining series of the one-collapse
  transfer matrix Q(k, z) directly from measurement-free characteristic
  tables, and
* :func:`decoherence_equation_residual` checks the fixed-point identity
  ``phat-matrix = -(q/p) I + (1/p)(I - Q)^{-1}`` by building both sides from
  independent ingredients.

All reductions are fixed-order (FFT / left-to-right sums), so repeated runs
produce bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .exact import WalkParams, renewal_evolve
from .pure import pure_char, pure_probability_table

__all__ = [
    "ContourSpec",
    "DEFAULT_CONTOUR",
    "QhatMatrix",
    "decoherence_equation_residual",
    "qhat_truncated",
    "suggested_truncation",
    "taylor_coeffs",
]

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class ContourSpec:
    """Sampling circle for coefficient extraction.

    ``nodes`` equispaced samples on |z| = ``radius``.  Aliasing folds the
    coefficient ``c_{t + j*nodes}`` onto ``c_t`` with weight ``radius^nodes``
    per wrap; the constructor rejects configurations whose fold-in bound
    ``radius^nodes / (1 - radius^nodes)`` is not below 1e-14.
    """

    radius: float = 0.95
    nodes: int = 1 << 14

    def __post_init__(self) -> None:
        if not 0.0 < self.radius < 1.0:
            raise ValueError(f"contour radius must lie in (0, 1), got {self.radius!r}")
        if self.nodes < 2 or self.nodes & (self.nodes - 1):
            raise ValueError(f"node count must be a power of two, got {self.nodes!r}")
        fold = self.radius**self.nodes
        if not fold / (1.0 - fold) < 1e-14:
            raise ValueError(
                "aliasing bound radius^nodes/(1-radius^nodes) must be < 1e-14"
            )

    def points(self) -> np.ndarray:
        """The sample points r * exp(2 pi i j / N), j = 0..N-1."""
        return self.radius * np.exp(2j * np.pi * np.arange(self.nodes) / self.nodes)


DEFAULT_CONTOUR = ContourSpec()


@dataclass(frozen=True)
class QhatMatrix:
    """Truncated transfer matrix Q(k, z) with its truncation depth."""

    k: float
    z: complex
    entries: np.ndarray  # (2, 2) complex
    truncation: int


def taylor_coeffs(
    f: Callable[[np.ndarray], np.ndarray],
    contour: ContourSpec | None = None,
    t_max: int = 100,
) -> np.ndarray:
    """Taylor coefficients c_0..c_{t_max} of ``f`` about the origin.

    ``f`` must accept a complex numpy array and be analytic on the closed
    disk |z| <= contour.radius with coefficients bounded by 1 in magnitude
    (true for every probability generating function here).  The discrete
    contour integral

        c_t = (1/N) sum_j f(r e^{2 pi i j/N}) r^{-t} e^{-2 pi i j t/N}

    is one FFT; its error is the contour's aliasing bound plus roundoff
    amplified by r^{-t}.  Rejects ``t_max`` for which the amplified roundoff
    ``r^{-t_max} * eps * N`` exceeds 1e-8.
    """
    if contour is None:
        contour = DEFAULT_CONTOUR
    if t_max < 0:
        raise ValueError(f"t_max must be nonnegative, got {t_max!r}")
    amplified = contour.radius ** (-t_max) * _EPS * contour.nodes
    if amplified > 1e-8:
        raise ValueError(
            f"roundoff amplification {amplified:.2e} exceeds 1e-8 at t_max={t_max}; "
            "raise the contour radius or lower t_max"
        )
    values = np.asarray(f(contour.points()), dtype=complex)
    if values.shape != (contour.nodes,):
        raise ValueError("f must map the contour samples to a same-length vector")
    hat = np.fft.fft(values) / contour.nodes
    return hat[: t_max + 1] / contour.radius ** np.arange(t_max + 1)


@lru_cache(maxsize=8)
def _pure_table(t_max: int):
    return pure_probability_table(t_max)


@lru_cache(maxsize=8)
def _renewal_table(p: float, t_max: int):
    return renewal_evolve(p, t_max)


def suggested_truncation(z: complex, params: WalkParams, tol: float = 1e-12) -> int:
    """Smallest depth T making both geometric tails fall below ``tol``.

    Covers the transfer-matrix series (ratio q|z|, term bound
    ``p q^(T-1) |z|^T / (1 - q|z|)``) and the plain probability series
    (ratio |z|, tail ``|z|^(T+1) / (1 - |z|)``).
    """
    p, q = params.p, params.q
    az = abs(z)
    if q * az >= 1.0 or az >= 1.0:
        raise ValueError("series tails only vanish for |z| < 1 and |qz| < 1")
    t = 2
    while (
        p * q ** (t - 1) * az**t / (1.0 - q * az) >= tol
        or az ** (t + 1) / (1.0 - az) >= tol
    ):
        t += 1
        if t > 100_000:
            raise ValueError("truncation depth exploded; move z away from |z|=1")
    return t


def qhat_truncated(k: float, z: complex, params: WalkParams, T: int) -> QhatMatrix:
    """Partial sums of the transfer-matrix series Q_{m,n}(k, z) to depth T.

    Q is the z-transform, weighted by ``p q^(t-1)``, of the measurement-free
    characteristic tables:  Q_{m,n} = sum_{t>=1} p q^(t-1) z^t What_{m,n}(k,t).
    Rejects |qz| >= 1 and any T whose leading omitted term
    ``p q^(T-1) |z|^T / (1 - q|z|)`` is not below 1e-12.

    Its row sums satisfy max_m sum_n |Q_{m,n}| < 1 for |z| < 1, which is what
    makes I - Q invertible and the decoherence equation well posed.
    """
    p, q = params.p, params.q
    az = abs(z)
    if q * az >= 1.0:
        raise ValueError("transfer-matrix series diverges for |qz| >= 1")
    if T < 1 or p * q ** (T - 1) * az**T / (1.0 - q * az) >= 1e-12:
        raise ValueError(f"insufficient truncation depth T={T} at |z|={az:.3g}")
    table = _pure_table(max(T, 8))
    k_arr = np.array([float(k)])
    entries = np.zeros((2, 2), dtype=complex)
    for t in range(1, T + 1):
        entries += (p * q ** (t - 1) * z**t) * pure_char(table, k_arr, t)[0]
    return QhatMatrix(k=float(k), z=complex(z), entries=entries, truncation=T)


def decoherence_equation_residual(
    k: float, z: complex, params: WalkParams, T: int
) -> float:
    """Max-entry gap between the two sides of the decoherence fixed point.

    Builds the 2x2 generating-function matrix phat_{m,n}(k, z) twice, from
    independent ingredients truncated at depth T:

    * directly, as ``sum_t z^t sum_x e^{ikx} P_{m,n}(x, t)`` with the exact
      renewal recursion supplying P, and
    * through the closed identity ``-(q/p) I + (1/p)(I - Q)^{-1}`` with Q
      from :func:`qhat_truncated` (2x2 adjugate inverse).

    Returns ``max_{m,n} |difference|``; both truncation tails are geometric,
    so size T with :func:`suggested_truncation`.  Signals pole proximity
    when det(I - Q) is tiny.
    """
    p, q = params.p, params.q
    if abs(z) >= 1.0:
        raise ValueError("the probability series only converges for |z| < 1")
    qm = qhat_truncated(k, z, params, T).entries

    ident = np.eye(2, dtype=complex)
    a = ident - qm
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if abs(det) < 1e-13:
        raise ValueError("pole proximity: det(I - Q) ~ 0")
    inv = np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]], dtype=complex) / det
    closed = -(q / p) * ident + inv / p

    table = _renewal_table(p, T)
    phases = np.exp(1j * float(k) * np.arange(-T, T + 1))
    mats = np.einsum("tmnx,x->tmn", table.probs[: T + 1], phases)
    direct = np.einsum("t,tmn->mn", z ** np.arange(T + 1), mats)

    return float(np.max(np.abs(direct - closed)))
