"""Ground-truth signals, Gaussian sensing ensembles, and count channels.

A signal x carries its dose alpha = ||x||^2.  Measurements are quadratic
intensities <a_i, x>^2 pushed through one of four channels:

  noiseless   y_i = <a_i, x>^2
  poisson     y_i ~ Poisson(<a_i, x>^2)
  bernoulli   y_i ~ Bernoulli(1 - exp(-<a_i, x>^2))  (saturating detector)
  truncated   y_i * 1{y_i <= t} applied to a noiseless or poisson vector

Observations are stored as float arrays for every channel so downstream
assembly takes one code path; per-channel integrality is an invariant, not
a storage type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .streams import RngStream

DEFAULT_MEMORY_CAP_BYTES = 2 * 1024**3

CHANNELS = ("noiseless", "poisson", "bernoulli", "truncated")


class MemoryCapExceeded(RuntimeError):
    """Ensemble would not fit under the configured memory cap."""


@dataclass(frozen=True)
class SignalVector:
    """Ground truth x with its dose alpha = ||x||^2 cached."""

    x: np.ndarray
    alpha: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size == 0 or not np.all(np.isfinite(x)):
            raise ValueError("signal must be a nonempty finite 1-D vector")
        object.__setattr__(self, "x", x)
        normsq = float(x @ x)
        if not (self.alpha >= 0.0) or abs(normsq - self.alpha) > 1e-12 * max(normsq, self.alpha, 1.0):
            raise ValueError(f"alpha={self.alpha} does not match ||x||^2={normsq}")

    @property
    def n(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class SensingEnsemble:
    """m-by-n matrix of i.i.d. N(0,1) entries; row i is one sensing vector."""

    matrix: np.ndarray
    master_seed: int
    stream_id: int

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or min(matrix.shape) < 1:
            raise ValueError("ensemble matrix must be 2-D and nonempty")
        object.__setattr__(self, "matrix", matrix)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class ObservationVector:
    """Observed counts/intensities plus the channel that produced them."""

    y: np.ndarray
    channel: str
    threshold: float | None = None  # set for the truncated channel only

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 1 or y.size == 0 or not np.all(np.isfinite(y)):
            raise ValueError("observations must be a nonempty finite 1-D vector")
        object.__setattr__(self, "y", y)
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")
        if (self.threshold is not None) != (self.channel == "truncated"):
            raise ValueError("threshold is set exactly for the truncated channel")
        if np.any(y < 0.0):
            raise ValueError("observations must be nonnegative")
        if self.channel == "poisson" and np.any(y != np.floor(y)):
            raise ValueError("poisson observations must be integer valued")
        if self.channel == "bernoulli" and np.any((y != 0.0) & (y != 1.0)):
            raise ValueError("bernoulli observations must be 0/1 valued")

    @property
    def m(self) -> int:
        return self.y.size


def make_signal(n: int, alpha: float, direction="random_unit", rng: RngStream | None = None) -> SignalVector:
    """Signal of dimension n with ||x||^2 = alpha exactly.

    direction: "random_unit" (needs rng), an int k (k-th basis vector), or an
    explicit nonzero vector that gets rescaled.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (alpha > 0.0 and math.isfinite(alpha)):
        raise ValueError("alpha must be positive and finite")

    if isinstance(direction, str):
        if direction != "random_unit":
            raise ValueError(f"unknown direction {direction!r}")
        if rng is None:
            raise ValueError("random_unit direction requires an RngStream")
        vec = rng.standard_gaussian(n)
        while np.linalg.norm(vec) == 0.0:
            vec = rng.standard_gaussian(n)
    elif isinstance(direction, (int, np.integer)):
        if not 0 <= direction < n:
            raise ValueError("basis index out of range")
        vec = np.zeros(n)
        vec[int(direction)] = 1.0
    else:
        vec = np.asarray(direction, dtype=float)
        if vec.shape != (n,):
            raise ValueError(f"direction vector must have shape ({n},)")
        if not np.all(np.isfinite(vec)) or np.linalg.norm(vec) == 0.0:
            raise ValueError("direction vector must be finite and nonzero")

    x = vec * (math.sqrt(alpha) / np.linalg.norm(vec))
    return SignalVector(x=x, alpha=float(alpha))


def draw_ensemble(
    m: int,
    n: int,
    rng: RngStream,
    memory_cap_bytes: int = DEFAULT_MEMORY_CAP_BYTES,
) -> SensingEnsemble:
    """m*n i.i.d. N(0,1) entries drawn row-major from the stream."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    needed = m * n * 8
    if needed > memory_cap_bytes:
        raise MemoryCapExceeded(
            f"ensemble of {m}x{n} float64 needs {needed} bytes > cap {memory_cap_bytes}"
        )
    matrix = rng.standard_gaussian((m, n))
    return SensingEnsemble(matrix=matrix, master_seed=rng.master_seed, stream_id=rng.stream_id)


def _intensities(signal: SignalVector, ensemble: SensingEnsemble) -> np.ndarray:
    if signal.n != ensemble.n:
        raise ValueError(f"dimension mismatch: signal n={signal.n}, ensemble n={ensemble.n}")
    return (ensemble.matrix @ signal.x) ** 2


def noiseless_intensities(signal: SignalVector, ensemble: SensingEnsemble) -> ObservationVector:
    """y_i = <a_i, x>^2, no quantization."""
    return ObservationVector(y=_intensities(signal, ensemble), channel="noiseless")


def observe_poisson(signal: SignalVector, ensemble: SensingEnsemble, rng: RngStream) -> ObservationVector:
    """y_i ~ Poisson(<a_i, x>^2), independent given the ensemble."""
    lam = _intensities(signal, ensemble)
    counts = rng.poisson(lam)
    return ObservationVector(y=counts.astype(float), channel="poisson")


def observe_bernoulli(signal: SignalVector, ensemble: SensingEnsemble, rng: RngStream) -> ObservationVector:
    """y_i ~ Bernoulli(1 - exp(-<a_i, x>^2)).

    One uniform per entry compared against the success probability, so the
    draws for a fixed stream are monotone in the dose (raising alpha can
    only turn 0s into 1s, never the reverse).
    """
    lam = _intensities(signal, ensemble)
    bits = rng.bernoulli(-np.expm1(-lam))
    return ObservationVector(y=bits.astype(float), channel="bernoulli")


def truncate(obs: ObservationVector, t: float) -> ObservationVector:
    """Zero out entries above t: y -> y * 1{y <= t}."""
    if not (t > 0.0):
        raise ValueError("truncation threshold must be positive")
    if obs.channel not in ("noiseless", "poisson"):
        raise ValueError(f"cannot truncate a {obs.channel!r} observation vector")
    y = np.where(obs.y <= t, obs.y, 0.0)
    return ObservationVector(y=y, channel="truncated", threshold=float(t))


def default_truncation(alpha: float, m: int) -> float:
    """Default baseline threshold 3 * alpha * log(m) (harness choice)."""
    if m < 2:
        raise ValueError("m must be >= 2 for a log(m)-scale threshold")
    return 3.0 * alpha * math.log(m)
