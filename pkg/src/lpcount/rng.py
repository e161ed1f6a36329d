"""Deterministic random streams for simulation and sampling.

Every random quantity in this package is derived from a named, documented
generation path so that an independent implementation can reproduce the
exact draws:

* Bit source: Philox-4x64-10, keyed directly with the 128-bit key
  ``[seed, stream]`` (no seed scrambling).  Raw outputs are consumed in
  order as unsigned 64-bit words.
* Uniform doubles on [0, 1): ``(raw >> 11) * 2**-53``.
* Normals: Box-Muller on consecutive uniform pairs ``(u1, u2)``,
  ``r = sqrt(-2 log(1 - u1))``, returning ``r cos(2 pi u2)`` then
  ``r sin(2 pi u2)``.  Vector draws of odd length discard the final sine.
* Poisson: sequential CDF inversion for ``lam < 10`` (consumes exactly one
  uniform) and Hormann's PTRS transformed rejection for ``lam >= 10``
  (two uniforms per attempt).

Independent substreams (chains, replications, multi-starts) use the same
seed with distinct ``stream`` values.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericError

_INV_2_53 = 2.0 ** -53
_TWO_PI = 2.0 * math.pi

# Counts above this saturate double precision bookkeeping downstream.
_POISSON_LAM_MAX = 1e15


class CounterRNG:
    """Counter-based random stream (see module docstring for the contract)."""

    def __init__(self, seed: int, stream: int = 0, _block: int = 4096):
        if not 0 <= int(seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0 <= int(stream) < 2**64:
            raise ValueError("stream must be a 64-bit unsigned integer")
        self.seed = int(seed)
        self.stream = int(stream)
        self._bit = np.random.Philox(key=np.array([seed, stream], dtype=np.uint64))
        self._block = _block
        self._buf = np.empty(0, dtype=np.uint64)
        self._pos = 0

    def _raw(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit words, in stream order."""
        out = np.empty(n, dtype=np.uint64)
        filled = 0
        while filled < n:
            if self._pos == len(self._buf):
                self._buf = self._bit.random_raw(max(self._block, n - filled))
                self._pos = 0
            take = min(n - filled, len(self._buf) - self._pos)
            out[filled:filled + take] = self._buf[self._pos:self._pos + take]
            self._pos += take
            filled += take
        return out

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` uniform doubles on [0, 1)."""
        return (self._raw(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def uniform(self, low: float = 0.0, high: float = 1.0, size: int | None = None):
        u = self.uniforms(1 if size is None else size)
        out = low + (high - low) * u
        return float(out[0]) if size is None else out

    def normals(self, n: int) -> np.ndarray:
        """``n`` standard normals via Box-Muller pairs."""
        if n == 0:
            return np.empty(0)
        pairs = (n + 1) // 2
        u = self.uniforms(2 * pairs)
        u1, u2 = u[0::2], u[1::2]
        r = np.sqrt(-2.0 * np.log1p(-u1))
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(_TWO_PI * u2)
        out[1::2] = r * np.sin(_TWO_PI * u2)
        return out[:n]

    def normal(self, loc: float = 0.0, scale: float = 1.0, size: int | None = None):
        z = self.normals(1 if size is None else size)
        out = loc + scale * z
        return float(out[0]) if size is None else out

    def poisson(self, lam: float) -> int:
        """One Poisson draw with mean ``lam``."""
        if lam < 0 or not math.isfinite(lam):
            raise NumericError(f"Poisson rate must be finite and nonnegative, got {lam}")
        if lam == 0.0:
            return 0
        if lam > _POISSON_LAM_MAX:
            raise NumericError(f"Poisson rate {lam:.3e} exceeds the supported range")
        if lam < 10.0:
            return self._poisson_inversion(lam)
        return self._poisson_ptrs(lam)

    def poissons(self, lams: np.ndarray) -> np.ndarray:
        """Element-wise Poisson draws, consuming the stream in array order."""
        flat = np.asarray(lams, dtype=float).ravel()
        out = np.empty(flat.shape, dtype=np.int64)
        for i, lam in enumerate(flat):
            out[i] = self.poisson(lam)
        return out.reshape(np.shape(lams))

    def _poisson_inversion(self, lam: float) -> int:
        # Sequential search along the CDF; one uniform per draw.
        u = self.uniform()
        p = math.exp(-lam)
        f = p
        k = 0
        # f saturates below 1 in floats; cap guards the astronomically
        # unlikely u above the saturated CDF.
        while u > f and k < 1000:
            k += 1
            p *= lam / k
            f += p
        return k

    def _poisson_ptrs(self, lam: float) -> int:
        # Hormann (1993), transformed rejection with squeeze (PTRS).
        slam = math.sqrt(lam)
        loglam = math.log(lam)
        b = 0.931 + 2.53 * slam
        a = -0.059 + 0.02483 * b
        inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
        vr = 0.9277 - 3.6224 / (b - 2.0)
        while True:
            u = self.uniform() - 0.5
            v = self.uniform()
            us = 0.5 - abs(u)
            k = math.floor((2.0 * a / us + b) * u + lam + 0.43)
            if us >= 0.07 and v <= vr:
                return int(k)
            if k < 0 or (us < 0.013 and v > us):
                continue
            if (math.log(v) + math.log(inv_alpha) - math.log(a / (us * us) + b)
                    <= k * loglam - lam - math.lgamma(k + 1.0)):
                return int(k)


def bulk_generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Vectorized generator for Monte Carlo work (forecast draws, replicates).

    Shares the Philox bit source and keying scheme with :class:`CounterRNG`
    but uses numpy's vectorized samplers; it is seed-deterministic, not
    specified down to the bit level.
    """
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))
