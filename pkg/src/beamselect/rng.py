"""Deterministic random streams shared by generators, splitters, and experiments.

Every source of randomness in the package flows through :class:`RandomStream`,
a thin wrapper over numpy's counter-based Philox generator. A stream is
identified by a tuple of integers; substreams are derived by appending parts
to that tuple, so ``RandomStream((master, r))`` is the stream for replication
``r`` of an experiment seeded with ``master``. Normal variates are produced
with the Marsaglia polar transform on top of the raw uniform stream, which
keeps the exact sequence reproducible on any platform.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RandomStream"]


class RandomStream:
    """Counter-based uniform/normal stream with derivable substreams."""

    def __init__(self, key):
        if isinstance(key, (int, np.integer)):
            key = (int(key),)
        self.key = tuple(int(k) for k in key)
        if any(k < 0 for k in self.key):
            raise ValueError("stream key parts must be nonnegative integers")
        self._gen = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(self.key))
        )

    def child(self, *parts) -> "RandomStream":
        """Fresh stream keyed by this stream's key extended with `parts`."""
        return RandomStream(self.key + tuple(int(p) for p in parts))

    def random(self, size=None):
        """Uniform doubles in [0, 1)."""
        return self._gen.random(size)

    def uniform(self, low, high, size=None):
        return low + (high - low) * self._gen.random(size)

    def integers(self, n, size=None):
        """Uniform integers in [0, n)."""
        return self._gen.integers(0, n, size=size)

    def permutation(self, n: int) -> np.ndarray:
        """Deterministic random permutation of range(n).

        Implemented as an argsort of fresh uniforms so the result depends
        only on the double stream (ties are broken stably, and exact ties
        between 64-bit uniforms do not occur in practice).
        """
        return np.argsort(self.random(n), kind="stable")

    def normal(self, size=1) -> np.ndarray:
        """Standard normal variates via the Marsaglia polar method."""
        shape = (size,) if isinstance(size, (int, np.integer)) else tuple(size)
        total = int(np.prod(shape)) if shape else 1
        out = np.empty(total)
        filled = 0
        while filled < total:
            pairs = (total - filled + 1) // 2
            # acceptance rate is pi/4; oversample a little to usually finish
            # in one round (the loop stays deterministic either way)
            batch = int(pairs * 1.36) + 8
            u = self.uniform(-1.0, 1.0, 2 * batch)
            x, y = u[:batch], u[batch:]
            s = x * x + y * y
            ok = (s > 0.0) & (s < 1.0)
            xs, ys, ss = x[ok], y[ok], s[ok]
            f = np.sqrt(-2.0 * np.log(ss) / ss)
            z = np.empty(2 * xs.size)
            z[0::2] = xs * f
            z[1::2] = ys * f
            take = min(z.size, total - filled)
            out[filled : filled + take] = z[:take]
            filled += take
        return out.reshape(shape)
