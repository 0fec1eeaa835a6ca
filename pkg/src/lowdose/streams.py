"""Deterministic, splittable random streams for reproducible experiments.

Every stream is a counter-based Philox generator keyed by
(master_seed, stream_id).  The same key reproduces the same draw sequence
on any platform, any run, any worker count; distinct keys give
statistically independent streams with no overlap.  Stream ids are derived
from a trial index plus a free-form purpose tag, so adding a new consumer
(a new purpose tag) never perturbs the draws seen by existing ones.

Samplers:
  * standard Gaussian  -- numpy's ziggurat, bound per numpy release
  * Poisson            -- inversion by sequential search for lam < 10,
                          transformed rejection (PTRS) for lam >= 10
  * Bernoulli          -- one uniform per draw compared against p, so
                          coupled draws are monotone in p
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

_MASK64 = (1 << 64) - 1

# lam below this uses sequential-search inversion, above transformed rejection
SEQUENTIAL_SEARCH_MAX_LAM = 10.0

# inversion safety cap; Poisson(10) mass beyond 150 is ~1e-84, the cap only
# absorbs pathological roundoff where the accumulated CDF saturates below u
_INVERSION_MAX_STEPS = 200


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash (platform independent, stable across releases)."""
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & _MASK64
    return h


def derive_stream_id(trial_index: int, purpose: str) -> int:
    """Stable stream id for one (trial, purpose) pair."""
    return fnv1a64(f"{purpose}#{trial_index}".encode())


def _as_u64(value: int, name: str) -> int:
    if not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if not 0 <= int(value) <= _MASK64:
        raise ValueError(f"{name} must fit in 64 bits, got {value}")
    return int(value)


class RngStream:
    """Single-owner random stream keyed by (master_seed, stream_id).

    Never share one instance across concurrent tasks; derive one stream per
    (trial, purpose) instead.
    """

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = _as_u64(master_seed, "master_seed")
        self.stream_id = _as_u64(stream_id, "stream_id")
        key = np.array([self.master_seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    @classmethod
    def derive(cls, master_seed: int, trial_index: int, purpose: str) -> "RngStream":
        """Stream for one consumer of one trial: id = hash(trial, purpose)."""
        return cls(master_seed, derive_stream_id(trial_index, purpose))

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"

    # -- uniform / Gaussian ------------------------------------------------

    def uniform(self, size=None):
        """Uniform draw(s) on [0, 1)."""
        return self._gen.random(size)

    def standard_gaussian(self, size=None):
        """N(0,1) draw(s); numpy ziggurat, fixed per numpy release."""
        return self._gen.standard_normal(size)

    # -- Bernoulli ---------------------------------------------------------

    def bernoulli(self, p):
        """Bernoulli draw(s): 1 with probability p, else 0.

        Implemented as uniform < p with exactly one uniform per entry, so
        draws made from identical stream state are monotone in p.
        """
        p_arr = np.asarray(p, dtype=float)
        if not np.all(np.isfinite(p_arr)) or np.any(p_arr < 0.0) or np.any(p_arr > 1.0):
            raise ValueError("bernoulli probability must lie in [0, 1]")
        u = self._gen.random(p_arr.shape if p_arr.ndim else None)
        out = u < p_arr
        if p_arr.ndim == 0:
            return int(out)
        return out.astype(np.int64)

    # -- Poisson -----------------------------------------------------------

    def poisson(self, lam):
        """Poisson draw(s) with mean lam (scalar or array, lam >= 0).

        Entries with lam < 10 are sampled by CDF inversion (one uniform
        each, consumed first in input order); larger entries use PTRS
        rejection rounds.  The output is a pure function of (stream state,
        lam), identical across runs and platforms.
        """
        lam_arr = np.asarray(lam, dtype=float)
        scalar = lam_arr.ndim == 0
        lam_flat = np.atleast_1d(lam_arr).ravel()
        if not np.all(np.isfinite(lam_flat)) or np.any(lam_flat < 0.0):
            raise ValueError("poisson rate must be finite and >= 0")

        out = np.zeros(lam_flat.shape, dtype=np.int64)
        small = lam_flat < SEQUENTIAL_SEARCH_MAX_LAM
        if np.any(small):
            out[small] = self._poisson_inversion(lam_flat[small])
        big = ~small
        if np.any(big):
            out[big] = self._poisson_ptrs(lam_flat[big])

        if scalar:
            return int(out[0])
        return out.reshape(lam_arr.shape)

    def _poisson_inversion(self, lam: np.ndarray) -> np.ndarray:
        # classic sequential search: find smallest k with CDF(k) >= u
        u = self._gen.random(lam.shape)
        pmf = np.exp(-lam)
        cdf = pmf.copy()
        k = np.zeros(lam.shape, dtype=np.int64)
        active = u >= cdf
        steps = 0
        while np.any(active) and steps < _INVERSION_MAX_STEPS:
            steps += 1
            k[active] += 1
            pmf[active] *= lam[active] / k[active]
            cdf[active] += pmf[active]
            active &= u >= cdf
        return k

    def _poisson_ptrs(self, lam: np.ndarray) -> np.ndarray:
        # Hoermann's PTRS transformed rejection, valid for lam >= 10;
        # vectorized over rejection rounds (two uniforms per active entry)
        b = 0.931 + 2.53 * np.sqrt(lam)
        a = -0.059 + 0.02483 * b
        inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
        v_r = 0.9277 - 3.6224 / (b - 2.0)
        log_lam = np.log(lam)

        out = np.zeros(lam.shape, dtype=np.int64)
        active = np.arange(lam.size)
        while active.size:
            u = self._gen.random(active.size) - 0.5
            v = self._gen.random(active.size)
            us = 0.5 - np.abs(u)
            la = lam[active]
            k = np.floor((2.0 * a[active] / us + b[active]) * u + la + 0.43)

            accept = (us >= 0.07) & (v <= v_r[active])
            feasible = (k >= 0) & ~((us < 0.013) & (v > us))
            needs_log = feasible & ~accept
            if np.any(needs_log):
                lhs = np.log(
                    v[needs_log]
                    * inv_alpha[active[needs_log]]
                    / (a[active[needs_log]] / us[needs_log] ** 2 + b[active[needs_log]])
                )
                rhs = (
                    k[needs_log] * log_lam[active[needs_log]]
                    - la[needs_log]
                    - gammaln(k[needs_log] + 1.0)
                )
                accept_log = np.zeros(active.size, dtype=bool)
                accept_log[needs_log] = lhs <= rhs
                accept |= accept_log

            done = active[accept]
            out[done] = k[accept].astype(np.int64)
            active = active[~accept]
        return out
