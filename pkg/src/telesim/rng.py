"""Seedable, splittable uniform streams (SplitMix64).

The generator is counter based, so the ``k``-th variate of a stream is a pure
function of ``(state0, k)``:

    GAMMA = 0x9E3779B97F4A7C15
    mix64(z):  z = (z ^ z>>30) * 0xBF58476D1CE4E5B9
               z = (z ^ z>>27) * 0x94D049BB133111EB
               return z ^ z>>31                      (all arithmetic mod 2**64)
    stream state for (seed, trial):
               state0 = mix64(mix64(seed) + GAMMA * (trial + 1))
    k-th uniform (k = 0, 1, ...):
               (mix64(state0 + GAMMA * (k + 1)) >> 11) * 2**-53

The compiled and pure-Python Monte Carlo kernels implement exactly this
derivation, which is why their transcripts agree trial by trial.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MUL1 = 0xBF58476D1CE4E5B9
MUL2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MUL1) & MASK64
    z = ((z ^ (z >> 27)) * MUL2) & MASK64
    return z ^ (z >> 31)


def trial_state(seed: int, trial: int) -> int:
    return mix64((mix64(seed) + GAMMA * (trial + 1)) & MASK64)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(MUL1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(MUL2)
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Uniform stream exposing the ``random()`` method the library functions call.

    >>> a = SplitMix64.for_trial(1, 0)
    >>> b = SplitMix64.for_trial(1, 0)
    >>> a.random() == b.random()
    True
    """

    __slots__ = ("state0", "counter")

    def __init__(self, seed: int):
        self.state0 = mix64(int(seed))
        self.counter = 0

    @classmethod
    def for_trial(cls, seed: int, trial: int) -> "SplitMix64":
        stream = cls.__new__(cls)
        stream.state0 = trial_state(int(seed), int(trial))
        stream.counter = 0
        return stream

    def random(self, size: int | None = None):
        if size is None:
            self.counter += 1
            z = mix64((self.state0 + GAMMA * self.counter) & MASK64)
            return (z >> 11) * INV_2_53
        ks = np.arange(self.counter + 1, self.counter + 1 + int(size), dtype=np.uint64)
        self.counter += int(size)
        with np.errstate(over="ignore"):
            z = _mix64_array(np.uint64(self.state0) + np.uint64(GAMMA) * ks)
        return (z >> np.uint64(11)).astype(np.float64) * INV_2_53


def sample_index(probabilities, u: float) -> int:
    """Inverse-CDF pick over ``probabilities`` in list order for one uniform ``u``.

    If rounding leaves ``u`` above the running total, the last outcome with
    nonzero probability is returned.
    """
    acc = 0.0
    last = -1
    for i, p in enumerate(probabilities):
        if p > 0.0:
            last = i
        acc += p
        if u < acc:
            return i
    if last < 0:
        raise ValueError("all outcome probabilities are zero")
    return last
