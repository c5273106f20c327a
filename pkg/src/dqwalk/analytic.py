"""Closed-form generating functions and limit laws of the decoherent walk.

In the Fourier-transformed picture the position law of the decoherent walk
has a generating function

    phat(k, z) = sum_{t>=0} z^t sum_x e^{ikx} P(x, t)

that is rational in ``z``, ``cos k``, ``sin k`` and a single square root
``E(k, z)``.  This module evaluates those closed forms and everything that
follows from them: the four sigma building blocks of the one-collapse
transfer matrix, the symmetric-start and coin-right-start generating
functions, the diffusive variance rate ``v(p)``, long-run mean and variance
asymptotes, the exact variance series of the measurement-free walk, and the
time scale where quadratic measurement-free spreading overtakes the linear
decoherent spreading.

All evaluators are pure functions of ``(k, z, p)`` and accept numpy arrays
for ``z``.  The lattice recursions these formulas are validated against
live in :mod:`dqwalk.exact`; the series/contour machinery that ties the two
together lives in :mod:`dqwalk.series`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .exact import PositionDistribution, WalkParams
from .pure import INITIAL_LABELS

__all__ = [
    "CF_K_GRID",
    "GFPoint",
    "MomentReport",
    "SigmaValues",
    "cf_gap",
    "gaussian_limit_cf",
    "ks_to_limit",
    "gf_point",
    "limit_variance",
    "longterm_mean_right",
    "longterm_variance",
    "moment_report",
    "phat_right",
    "phat_symmetric",
    "phat_symmetric_assembled",
    "pseudoquantum_time",
    "pure_variance_exact",
    "second_deriv_gf",
    "second_root_estimate",
    "second_root_expansion",
    "sigma_eval",
]

#: Denominator magnitudes below this are treated as "sitting on a pole".
_POLE_TOL = 1e-13


class SigmaValues(NamedTuple):
    """The four sigma building blocks and the shared square root E.

    The transfer matrix of a single coherent stretch (evolve freely, then
    collapse) has Fourier/z-transform entries assembled from these:
    ``Q11 = sigma1 + i*sigma3``, ``Q12 = sigma2 + i*sigma4``,
    ``Q21 = sigma2 - i*sigma4``, ``Q22 = sigma1 - i*sigma3``.
    """

    sigma1: complex
    sigma2: complex
    sigma3: complex
    sigma4: complex
    E: complex


@dataclass(frozen=True)
class GFPoint:
    """One evaluation of the generating-function stack at fixed ``(k, z)``.

    Invariants (floating point, enforced by the test suite rather than the
    constructor): at ``k = 0`` both ``sigma3`` and ``sigma4`` vanish (each
    carries a factor ``sin k``) and ``phat == 1/(1 - z)``, the normalization
    of a probability sequence.
    """

    k: float
    z: complex
    sigma1: complex
    sigma2: complex
    sigma3: complex
    sigma4: complex
    E: complex
    phat: complex
    phat_tilde: complex


@dataclass(frozen=True)
class MomentReport:
    """Formula-side moments of the walk at decoherence rate ``p``, time ``t``.

    ``limit_variance_v >= 1`` with equality exactly at ``p = 1``;
    ``t0 >= 3`` with equality exactly at ``p = 1``.
    """

    p: float
    q: float
    t: int
    mean_formula: float
    variance_formula: float
    limit_variance_v: float
    t0: float


def _check_p(p: float) -> None:
    if not 0.0 < p <= 1.0:
        raise ValueError(f"decoherence rate p must lie in (0, 1], got {p!r}")


def _check_disk(q: float, z) -> None:
    """Reject evaluation outside the guaranteed convergence disk |qz| < 1."""
    if np.any(q * np.abs(z) >= 1.0):
        raise ValueError(
            "sigma series diverges for |q z| >= 1; evaluate inside |z| < 1/q"
        )


def _root_e(ck, w):
    """Principal square root E of the quartic (in w = q*z) under the radical.

    The quartic factors into two palindromic quadratics,

        E^2 = (w^2 - (1 + cos k) w + 1) * (w^2 + (1 - cos k) w + 1),

    and the principal branch of the square root of the *product* is used
    throughout.  The branch (and the factorization itself) is pinned by the
    series-agreement tests, not assumed: at k = 0 this reduces to
    ``(1 - w) * sqrt(1 + w^2)`` and makes phat(0, z) = 1/(1-z) an identity.
    """
    return np.sqrt((w * w - (1.0 + ck) * w + 1.0) * (w * w + (1.0 - ck) * w + 1.0))


def _sigma_core(k: float, z, p: float, q: float):
    """Shared sigma evaluation with ``sin k`` factored out of sigma3/sigma4.

    Returns ``(sigma1, sigma2, sigma3/sin k, sigma4/sin k, E)``.  Keeping the
    odd pair divided by ``sin k`` makes k = 0 and k = pi regular points for
    the coin-right generating function.
    """
    ck = math.cos(k)
    w = q * z
    e = _root_e(ck, w)
    quad = w * w - 2.0 * ck * w + 1.0
    pz = p * z
    s1 = pz / quad * (ck - w - (ck - 2.0 * w + ck * w * w) / (2.0 * e))
    s2 = pz * ck / (2.0 * e)
    s3t = pz / quad * (1.0 - (1.0 - w * w) / (2.0 * e))
    s4t = -pz / (2.0 * e)
    return s1, s2, s3t, s4t, e


def sigma_eval(k: float, z, params: WalkParams) -> SigmaValues:
    """Closed forms of the four sigma series and the square root E.

    Each sigma_i is the z-transform, weighted by ``p q^(t-1)``, of one part
    (real or imaginary, diagonal or off-diagonal) of the measurement-free
    characteristic table; the closed forms sum those series exactly for
    ``|q z| < 1``.  They agree with the truncated defining series within the
    geometric tail bound ``(q|z|)^T / (1 - q|z|)``.

    ``z`` may be a complex scalar or array.  Raises ``ValueError`` outside
    the convergence disk.
    """
    _check_disk(params.q, z)
    s1, s2, s3t, s4t, e = _sigma_core(k, z, params.p, params.q)
    sk = math.sin(k)
    return SigmaValues(s1, s2, sk * s3t, sk * s4t, e)


def phat_symmetric(k: float, z, params: WalkParams):
    """Generating function of the symmetric-start decoherent walk.

    Evaluates the single closed-form ratio

        [q(q - cos^2 k) z^2 + p cos k z + (1 - z cos k) E] /
        [p q cos k z^3 - (pq + p) z^2 + p cos k z + (z^2 - 2 cos k z + 1) E]

    with E from :func:`sigma_eval`'s branch.  At ``k = 0`` the ratio
    collapses algebraically to ``1/(1 - z)``.

    Raises ``ValueError`` outside ``|qz| < 1`` or when the denominator
    magnitude drops below ``1e-13`` (pole proximity).
    """
    p, q = params.p, params.q
    _check_disk(q, z)
    ck = math.cos(k)
    e = _root_e(ck, q * z)
    z2 = z * z
    num = q * (q - ck * ck) * z2 + p * ck * z + (1.0 - z * ck) * e
    den = p * q * ck * z2 * z - (p * q + p) * z2 + p * ck * z + (z2 - 2.0 * ck * z + 1.0) * e
    if np.any(np.abs(den) < _POLE_TOL):
        raise ValueError("pole proximity: generating-function denominator ~ 0")
    return num / den


def phat_symmetric_assembled(k: float, z, params: WalkParams):
    """Symmetric-start generating function assembled from the sigma blocks.

    Independent algebraic route to :func:`phat_symmetric`:

        -q/p + (1 - sigma1 + sigma2) / (p * det(I - Q)),
        det(I - Q) = (1 - sigma1)^2 - sigma2^2 + sigma3^2 - sigma4^2.

    Kept public so the two routes can be compared; they agree to better
    than 1e-10 everywhere in the convergence disk.
    """
    p, q = params.p, params.q
    _check_disk(q, z)
    s1, s2, s3t, s4t, _ = _sigma_core(k, z, p, q)
    sk2 = math.sin(k) ** 2
    det = (1.0 - s1) ** 2 - s2 * s2 + sk2 * (s3t * s3t - s4t * s4t)
    if np.any(np.abs(det) < _POLE_TOL):
        raise ValueError("pole proximity: det(I - Q) ~ 0")
    return -q / p + (1.0 - s1 + s2) / (p * det)


def phat_right(k: float, z, params: WalkParams):
    """Generating function of the coin-right-start decoherent walk.

    Differs from the symmetric start by a purely imaginary, odd-in-k
    correction:

        phat_tilde = phat + i sin k (sigma3~ + sigma4~) / (p det(I - Q))

    where ``sigma3~ = sigma3 / sin k`` and ``sigma4~ = sigma4 / sin k`` are
    evaluated in factored form, so ``k = 0`` is a regular point and returns
    exactly the symmetric value ``1/(1 - z)``.
    """
    p, q = params.p, params.q
    _check_disk(q, z)
    s1, s2, s3t, s4t, _ = _sigma_core(k, z, p, q)
    sk = math.sin(k)
    det = (1.0 - s1) ** 2 - s2 * s2 + sk * sk * (s3t * s3t - s4t * s4t)
    if np.any(np.abs(det) < _POLE_TOL):
        raise ValueError("pole proximity: det(I - Q) ~ 0")
    return phat_symmetric(k, z, params) + 1j * sk * (s3t + s4t) / (p * det)


def gf_point(k: float, z: complex, params: WalkParams) -> GFPoint:
    """Bundle one ``(k, z)`` evaluation of the whole generating-function stack."""
    sig = sigma_eval(k, z, params)
    return GFPoint(
        k=float(k),
        z=complex(z),
        sigma1=complex(sig.sigma1),
        sigma2=complex(sig.sigma2),
        sigma3=complex(sig.sigma3),
        sigma4=complex(sig.sigma4),
        E=complex(sig.E),
        phat=complex(phat_symmetric(k, z, params)),
        phat_tilde=complex(phat_right(k, z, params)),
    )


def limit_variance(p: float) -> float:
    """Diffusive variance rate ``v = (p + 2 sqrt(1 + q^2) - 2) / p``.

    This is the variance of the limiting normal law of ``X_t / sqrt(t)``.
    Strictly decreasing in ``p`` with ``v(1) = 1`` (classical walk) and
    ``v -> infinity`` as ``p -> 0``.
    """
    _check_p(p)
    q = 1.0 - p
    return (p + 2.0 * math.hypot(1.0, q) - 2.0) / p


def longterm_variance(p: float, t: float) -> float:
    """Linear-growth approximation of Var(X_t) with its constant correction.

    ``v t - 2 q^2 / (p sqrt(1+q^2)) - (2/p^2)(1 + q^2 - sqrt(1+q^2))``; the
    omitted remainder decays geometrically in ``t``.  At ``p = 1`` both
    corrections vanish and the value is exactly ``t``.
    """
    _check_p(p)
    q = 1.0 - p
    r = math.hypot(1.0, q)
    v = (p + 2.0 * r - 2.0) / p
    return v * t - 2.0 * q * q / (p * r) - 2.0 * (1.0 + q * q - r) / (p * p)


def longterm_mean_right(p: float) -> float:
    """Long-run mean ``(sqrt(1 + q^2) - 1) / p`` of the coin-right walk.

    The drift a right-pointing initial coin leaves behind; approached
    geometrically fast in ``t``.  Diverges as ``p -> 0`` and vanishes at
    ``p = 1``.
    """
    _check_p(p)
    q = 1.0 - p
    return (math.hypot(1.0, q) - 1.0) / p


def pure_variance_exact(t: int) -> float:
    """Exact variance of the measurement-free symmetric walk at time ``t``.

    Evaluates the finite series

        Var(Q_t) = t - sum_{j=1}^{floor((t-2)/2)}
                   (t - 2j)(t - 2j - 1) (-1)^j C(2j, j) / 4^j,

    obtained by expanding the measurement-free variance generating function

        V0(z) = z/(1-z)^2 + (2 z^2/(1-z)^3)(1 - 1/sqrt(1+z^2))

    termwise: the coefficient of z^t in [sum m(m-1) z^m][1/sqrt(1+z^2)] is
    the subtracted sum (1/sqrt(1+z^2) = sum (-1)^j C(2j,j)/4^j z^{2j}).  The
    central binomial ratio is built iteratively.  Empty sum for ``t <= 3``;
    ``Var(Q_t) / t^2 -> 1 - 1/sqrt(2)`` as ``t`` grows.
    """
    if t <= 0:
        raise ValueError(f"time must be a positive integer, got {t!r}")
    terms = []
    b = 1.0  # C(2j, j) / 4^j, updated iteratively
    sign = 1.0
    for j in range(1, (t - 2) // 2 + 1):
        b *= (2 * j - 1) / (2 * j)
        sign = -sign
        terms.append((t - 2 * j) * (t - 2 * j - 1) * sign * b)
    return t - math.fsum(terms)


def pseudoquantum_time(p: float) -> float:
    """Time up to which measurement-free spreading outpaces the decoherent walk.

    ``t0 = 6 (sqrt(1 + q^2) - 1) / p + 3``: the minimizer over ``t`` of
    ``t^2/6 - longterm_variance(p, t)``, i.e. where the quadratic variance
    growth ``t^2/6`` of the ballistic walk overtakes the linear decoherent
    growth.  Equals ``3 v(p)``; ``t0(1) = 3``.
    """
    _check_p(p)
    q = 1.0 - p
    return 6.0 * (math.hypot(1.0, q) - 1.0) / p + 3.0


def second_deriv_gf(z, p: float):
    """Generating function of the exact variance sequence: ``-d^2/dk^2 phat(0, z)``.

    Closed form

        z/(1-z)^2 + 2 z^2 (sqrt(1 + q^2 z^2) - 1) /
                    ((1-z)^2 (p z + (1-z) sqrt(1 + q^2 z^2)))

    whose Taylor coefficient at ``z^t`` is Var(X_t) of the symmetric walk.
    Rejects ``|z| >= 1`` and signals pole proximity near ``z = 1``.
    """
    _check_p(p)
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("variance generating function evaluated only inside |z| < 1")
    one_minus = 1.0 - z
    if np.any(np.abs(one_minus) < _POLE_TOL):
        raise ValueError("pole proximity: z ~ 1")
    q = 1.0 - p
    root = np.sqrt(1.0 + (q * z) ** 2)
    return z / one_minus**2 + 2.0 * z * z * (root - 1.0) / (
        one_minus**2 * (p * z + one_minus * root)
    )


def gaussian_limit_cf(k, p: float):
    """Characteristic function ``exp(-v k^2 / 2)`` of the limiting normal law."""
    v = limit_variance(p)
    return np.exp(-0.5 * v * k * k)


#: k grid over which characteristic-function gaps are maximized.
CF_K_GRID = np.arange(0.0, 3.0 + 1e-9, 0.05)


def ks_to_limit(dist: PositionDistribution, p: float, mean: float = 0.0) -> float:
    """Kolmogorov-Smirnov distance of the rescaled law to its normal limit.

    Compares the lattice CDF of ``(X_t - mean) / sqrt(t)`` with the
    ``N(0, v)`` CDF.  The lattice law is supported on points of one parity,
    so its CDF is constant on ``[x, x + 2)`` and the supremum over each
    cell is attained at the right edge: the Gaussian is evaluated at
    ``x + 1``, the midpoint between consecutive support points.
    """
    if dist.t < 1:
        raise ValueError("rescaling by sqrt(t) needs t >= 1")
    scale = math.sqrt(limit_variance(p) * dist.t)
    edges = (dist.positions() + 1.0 - mean) / scale
    gap = np.cumsum(dist.probs) - ndtr(edges)
    return float(np.max(np.abs(gap)))


def cf_gap(dist: PositionDistribution, p: float, k_grid=None) -> float:
    """Largest characteristic-function gap of ``X_t / sqrt(t)`` to the limit.

    Maximizes ``|E exp(i k X_t / sqrt t) - exp(-v k^2 / 2)|`` over the k
    grid (:data:`CF_K_GRID` by default).  No centering is applied: for an
    uncentered start the leading gap term ``i k mu / sqrt t`` dominates, so
    the symmetric start decays like 1/t and the coin-right start like
    1/sqrt(t) — the rate split this gap is used to demonstrate.
    """
    if dist.t < 1:
        raise ValueError("rescaling by sqrt(t) needs t >= 1")
    k = CF_K_GRID if k_grid is None else np.asarray(k_grid, dtype=np.float64)
    emp = dist.char(k / math.sqrt(dist.t))
    return float(np.max(np.abs(emp - gaussian_limit_cf(k, p))))


def second_root_estimate(p: float) -> float:
    """Second real zero of the k = 0 denominator factor, just outside |z| = 1.

    Numerically solves ``p z + (1 - z) sqrt(1 + q^2 z^2) = 0`` for the root
    nearest ``1 + (sqrt 2 / 2) p`` by bracketed bisection/Brent iteration.
    This zero controls the geometric decay rate of the moment remainders and
    bounds usable contour radii from above; ``|root| > 1`` always.

    Raises ``RuntimeError`` when no sign change exists — at ``p = 1`` the
    factor is identically 1 and there is no finite root.
    """
    _check_p(p)
    q = 1.0 - p

    def f(x: float) -> float:
        return p * x + (1.0 - x) * math.hypot(1.0, q * x)

    hi = 1.0 + 0.8 * p
    while f(hi) > 0.0:
        hi = 1.0 + 2.0 * (hi - 1.0)
        if hi - 1.0 > 1e9:
            raise RuntimeError(
                "root finding failed: no sign change — the factor has no "
                "finite zero (it is identically 1 at p = 1)"
            )
    return float(brentq(f, 1.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def second_root_expansion(p: float) -> float:
    """Small-p expansion ``1 + (sqrt2/2) p + (1/2)(1/2 + 1/sqrt2) p^2`` of the root."""
    _check_p(p)
    return 1.0 + (math.sqrt(2.0) / 2.0) * p + 0.5 * (0.5 + 1.0 / math.sqrt(2.0)) * p * p


def moment_report(p: float, t: int, initial: str = "symmetric") -> MomentReport:
    """Formula-side moment summary for one ``(p, t)``.

    ``mean_formula`` is the long-run mean of the requested start (0 for the
    symmetric start, +/- the coin-right drift otherwise);
    ``variance_formula`` is the linear-growth value of
    :func:`longterm_variance`.
    """
    _check_p(p)
    if t < 1:
        raise ValueError(f"time must be a positive integer, got {t!r}")
    if initial not in INITIAL_LABELS:
        raise ValueError(f"initial must be one of {INITIAL_LABELS}, got {initial!r}")
    mu = longterm_mean_right(p)
    mean = {"symmetric": 0.0, "right": mu, "left": -mu}[initial]
    return MomentReport(
        p=p,
        q=1.0 - p,
        t=int(t),
        mean_formula=mean,
        variance_formula=longterm_variance(p, t),
        limit_variance_v=limit_variance(p),
        t0=pseudoquantum_time(p),
    )
