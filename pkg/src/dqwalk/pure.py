"""Pure (measurement-free) Hadamard walk on the integer line.

Conventions used throughout the package:

* Coin axis index 0 is the right-moving component, index 1 the left-moving
  one.  A walker state at time ``t`` lives on positions ``-t..t`` and is
  stored as a complex array of shape ``(2*t + 1, 2)``; row ``j`` holds the
  amplitudes at position ``j - t``.
* One step applies the Hadamard coin ``[[1, 1], [1, -1]]/sqrt(2)`` and then
  shifts the right component by +1 and the left component by -1.
* Fourier transforms use ``psi_hat(k) = sum_x psi(x) exp(i k x)``, so a step
  multiplies the transform by the matrix ``step_matrix_fourier(k)``.
* The dispersion angle ``omega_k`` solves ``sin(omega_k) = sin(k)/sqrt(2)``
  on the branch with ``cos(omega_k) >= 0`` (principal arcsine).  The step
  matrix in momentum space then has eigenvalues ``exp(i*omega_k)`` and
  ``-exp(-i*omega_k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RIGHT",
    "LEFT",
    "INITIAL_LABELS",
    "AmplitudeTable",
    "PureTable",
    "SpectralForm",
    "initial_state",
    "hadamard_step",
    "amplitude_history",
    "born_weights",
    "pure_probability_table",
    "step_matrix_fourier",
    "evolution_matrix_fourier",
    "spectral_form",
    "pure_char",
]

RIGHT = 0
LEFT = 1

INITIAL_LABELS = ("symmetric", "right", "left")

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def initial_state(label: str) -> np.ndarray:
    """Return the length-2 coin vector at the origin for a named start.

    ``"right"`` and ``"left"`` are the coin basis states; ``"symmetric"`` is
    ``(|right> + i |left>)/sqrt(2)``, whose walk distribution is symmetric
    about the origin at every time.
    """
    if label == "right":
        vec = [1.0, 0.0]
    elif label == "left":
        vec = [0.0, 1.0]
    elif label == "symmetric":
        vec = [_INV_SQRT2, 1j * _INV_SQRT2]
    else:
        raise ValueError(
            f"unknown initial state {label!r}; expected one of {INITIAL_LABELS}"
        )
    return np.asarray(vec, dtype=np.complex128)


def born_weights(amps: np.ndarray) -> np.ndarray:
    """Squared moduli of an amplitude array, computed as re^2 + im^2.

    Every engine in the package funnels through this helper so that exact
    (Monte Carlo vs. table) comparisons are bit-for-bit reproducible.
    """
    return amps.real**2 + amps.imag**2


def hadamard_step(amps: np.ndarray) -> np.ndarray:
    """Advance a walker state by one step, growing the window by one site.

    Parameters
    ----------
    amps:
        Complex array of shape ``(n, 2)`` over ``n`` consecutive positions.

    Returns
    -------
    numpy.ndarray
        Array of shape ``(n + 2, 2)`` over the window widened by one
        position on each side.
    """
    amps = np.asarray(amps)
    if amps.ndim != 2 or amps.shape[1] != 2:
        raise ValueError(f"expected shape (n, 2), got {amps.shape}")
    out = np.zeros((amps.shape[0] + 2, 2), dtype=np.complex128)
    out[2:, RIGHT] = (amps[:, RIGHT] + amps[:, LEFT]) * _INV_SQRT2
    out[:-2, LEFT] = (amps[:, RIGHT] - amps[:, LEFT]) * _INV_SQRT2
    return out


@dataclass
class AmplitudeTable:
    """Wave function of the pure walk at a fixed time.

    ``amps[j, c]`` is the amplitude at position ``j - t`` with coin ``c``.
    """

    t: int
    amps: np.ndarray

    def positions(self) -> np.ndarray:
        return np.arange(-self.t, self.t + 1)

    def probabilities(self) -> np.ndarray:
        """Per-(position, coin) probabilities, shape ``(2t+1, 2)``."""
        return born_weights(self.amps)

    def position_marginal(self) -> np.ndarray:
        """Position distribution (coin summed out), shape ``(2t+1,)``."""
        return self.probabilities().sum(axis=1)


def amplitude_history(initial, t_max: int) -> list[AmplitudeTable]:
    """Evolve an origin-localised coin state, keeping every intermediate time.

    Parameters
    ----------
    initial:
        Either a label accepted by :func:`initial_state` or an explicit
        length-2 complex coin vector.
    t_max:
        Number of steps; the result has ``t_max + 1`` entries (time 0
        included).
    """
    if isinstance(initial, str):
        coin = initial_state(initial)
    else:
        coin = np.asarray(initial, dtype=np.complex128)
        if coin.shape != (2,):
            raise ValueError(f"initial coin vector must have shape (2,), got {coin.shape}")
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    state = coin.reshape(1, 2).copy()
    history = [AmplitudeTable(0, state)]
    for t in range(1, t_max + 1):
        state = hadamard_step(state)
        history.append(AmplitudeTable(t, state))
    return history


@dataclass
class PureTable:
    """Per-step probability kernels of the pure walk from both basis starts.

    ``w[t, m, n, x + t_max]`` is the probability that a walker started in
    coin state ``m`` at the origin is found at ``(x, n)`` after ``t`` steps
    of unitary evolution.  Rows with ``|x| > t`` or ``x + t`` odd are zero.
    """

    t_max: int
    w: np.ndarray

    def row(self, t: int) -> np.ndarray:
        """Kernel at time ``t`` restricted to its support window.

        Returns a view of shape ``(2, 2, 2t+1)`` over positions ``-t..t``.
        """
        if not 0 <= t <= self.t_max:
            raise ValueError(f"t={t} outside table range 0..{self.t_max}")
        lo = self.t_max - t
        return self.w[t, :, :, lo : lo + 2 * t + 1]


def pure_probability_table(t_max: int) -> PureTable:
    """Tabulate the walk kernels ``W`` for all times up to ``t_max``.

    The right-start slice is evolved directly; the left-start slice follows
    from the walk's mirror symmetry (flip position and coin), which holds
    exactly at probability level, so only one evolution is run.
    """
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    size = 2 * t_max + 1
    w = np.zeros((t_max + 1, 2, 2, size))
    for table in amplitude_history("right", t_max):
        lo = t_max - table.t
        w[table.t, RIGHT, :, lo : lo + 2 * table.t + 1] = table.probabilities().T
    w[:, LEFT, RIGHT, :] = w[:, RIGHT, LEFT, ::-1]
    w[:, LEFT, LEFT, :] = w[:, RIGHT, RIGHT, ::-1]
    return PureTable(t_max, w)


def step_matrix_fourier(k):
    """Momentum-space step matrix U(k), shape ``k.shape + (2, 2)``."""
    k = np.asarray(k, dtype=np.float64)
    phase = np.exp(1j * k) * _INV_SQRT2
    out = np.empty(k.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = phase
    out[..., 0, 1] = phase
    out[..., 1, 0] = np.conj(phase)
    out[..., 1, 1] = -np.conj(phase)
    return out


@dataclass
class SpectralForm:
    """Spectral data of U(k): dispersion angle and projection weights.

    ``omega`` is the branch of arcsin(sin k / sqrt 2) with non-negative
    cosine; ``a`` and ``c`` are the scalar weights through which the
    eigenprojections of U(k) act (``|c|^2 = a (1 - a)``).
    """

    k: np.ndarray
    omega: np.ndarray
    a: np.ndarray
    c: np.ndarray


def spectral_form(k) -> SpectralForm:
    k = np.asarray(k, dtype=np.float64)
    omega = np.arcsin(np.sin(k) * _INV_SQRT2)
    root = np.sqrt(1.0 + np.cos(k) ** 2)
    a = 0.5 + np.cos(k) / (2.0 * root)
    c = np.exp(-1j * k) / (2.0 * root)
    return SpectralForm(k=k, omega=omega, a=a, c=c)


def evolution_matrix_fourier(k, t: int) -> np.ndarray:
    """Closed form for U(k)^t, shape ``k.shape + (2, 2)``.

    Uses the spectral decomposition of U(k); the even/odd split in ``t``
    comes from the second eigenvalue ``-exp(-i omega_k)``.  Agrees with
    repeated matrix multiplication to machine precision and stays exactly
    unitary up to rounding for all ``t``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    form = spectral_form(k)
    omega_t = form.omega * t
    out = np.empty(form.omega.shape + (2, 2), dtype=np.complex128)
    if t % 2 == 0:
        osc = 2j * np.sin(omega_t)
        out[..., 0, 0] = np.exp(-1j * omega_t) + form.a * osc
        out[..., 1, 1] = np.exp(1j * omega_t) - form.a * osc
    else:
        osc = 2.0 * np.cos(omega_t)
        out[..., 0, 0] = -np.exp(-1j * omega_t) + form.a * osc
        out[..., 1, 1] = np.exp(1j * omega_t) - form.a * osc
    out[..., 0, 1] = np.conj(form.c) * osc
    out[..., 1, 0] = form.c * osc
    return out


def pure_char(table: PureTable, k, t: int) -> np.ndarray:
    """Characteristic functions of the kernels at time ``t``.

    Returns ``sum_x W[t, m, n, x] exp(i k x)`` with shape
    ``k.shape + (2, 2)`` (axes ordered ``(..., m, n)``).
    """
    k = np.asarray(k, dtype=np.float64)
    row = table.row(t)
    phases = np.exp(1j * np.multiply.outer(k, np.arange(-t, t + 1)))
    return np.moveaxis(np.tensordot(row, phases, axes=([2], [-1])), (0, 1), (-2, -1))
