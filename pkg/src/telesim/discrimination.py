"""Unambiguous discrimination of two known, non-orthogonal qubit states."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .measure import Povm, validate_povm
from .qcore import StateVector, overlap
from .rng import sample_index

USD_LABELS = ("u", "v", "inconclusive")
MAX_OVERLAP = 1.0 - 1e-6


class IndistinguishableStatesError(ValueError):
    """Raised when the two states are (numerically) the same ray."""


@dataclass(frozen=True)
class UsdSetup:
    u: StateVector
    v: StateVector
    overlap: float
    povm: Povm

    def misidentification(self) -> tuple[float, float]:
        """(<u|E_v|u>, <v|E_u|v>); both vanish for a correct construction."""
        e_u, e_v = self.povm.elements[0], self.povm.elements[1]
        a = np.vdot(self.u.amplitudes, e_v @ self.u.amplitudes).real
        b = np.vdot(self.v.amplitudes, e_u @ self.v.amplitudes).real
        return float(a), float(b)

    def outcome_probabilities(self, state: StateVector) -> list[float]:
        return [float(np.vdot(state.amplitudes, e @ state.amplitudes).real) for e in self.povm.elements]


def _perp(x: np.ndarray) -> np.ndarray:
    return np.array([-np.conj(x[1]), np.conj(x[0])])


def usd_povm(u: StateVector, v: StateVector) -> UsdSetup:
    """Optimal equal-prior USD measurement for the pair ``u``, ``v``.

    ``v`` is rephased so that <u|v> = s >= 0. Then
    ``E_u = |v_perp><v_perp| / (1 + s)``, ``E_v = |u_perp><u_perp| / (1 + s)``
    and ``E_? = I - E_u - E_v``; each conclusive outcome fires with
    probability ``1 - s`` on its own state.
    """
    if u.dim != 2 or v.dim != 2:
        raise ValueError("unambiguous discrimination is implemented for qubits only")
    ov = overlap(u, v)
    s = abs(ov)
    if s > MAX_OVERLAP:
        raise IndistinguishableStatesError(f"states overlap |<u|v>| = {s:.12f}; no conclusive discrimination possible")
    phase = cmath.exp(-1j * cmath.phase(ov)) if s > 0 else 1.0
    v_al = StateVector(v.amplitudes * phase, v.dims, v.labels)
    up, vp = _perp(u.amplitudes), _perp(v_al.amplitudes)
    e_u = np.outer(vp, vp.conj()) / (1 + s)
    e_v = np.outer(up, up.conj()) / (1 + s)
    e_q = np.eye(2) - e_u - e_v
    e_q = 0.5 * (e_q + e_q.conj().T)
    povm = Povm((e_u, e_v, e_q), USD_LABELS)
    report = validate_povm(povm)
    if not report.passed:
        raise ArithmeticError(f"USD construction failed validation: {report.failures}")
    return UsdSetup(u, v_al, s, povm)


def conclusive_probability(alpha: float, beta: float) -> float:
    """Success probability 1 - (alpha^2 - beta^2) for Schmidt coefficients alpha >= beta >= 0."""
    if beta < -1e-15 or alpha < beta - 1e-15:
        raise ValueError(f"Schmidt ordering alpha >= beta >= 0 violated: alpha={alpha!r}, beta={beta!r}")
    if abs(alpha * alpha + beta * beta - 1.0) > 1e-12:
        raise ValueError("alpha^2 + beta^2 must equal 1")
    return 1.0 - (alpha * alpha - beta * beta)


def discriminate(state: StateVector, setup: UsdSetup, rng) -> str:
    """One sampled USD outcome (one uniform from ``rng``)."""
    return USD_LABELS[sample_index(setup.outcome_probabilities(state), rng.random())]


def discriminate_many(state: StateVector, setup: UsdSetup, n: int, rng) -> np.ndarray:
    """``n`` independent outcomes as label indices, drawing ``n`` uniforms at once.

    ``rng.random(n)`` must return an array (``SplitMix64`` and numpy generators do).
    """
    probs = setup.outcome_probabilities(state)
    probs = [max(p, 0.0) for p in probs]
    cdf = np.cumsum(probs)
    u = np.asarray(rng.random(n))
    idx = np.searchsorted(cdf, u, side="right")
    last = max(i for i, p in enumerate(probs) if p > 0)
    return np.minimum(idx, last)


def branch_states(alpha: float, beta: float) -> tuple[StateVector, StateVector]:
    """The two states (alpha, beta) and (alpha, -beta) that must be told apart."""
    return StateVector([alpha, beta], (2,)), StateVector([alpha, -beta], (2,))


def overlap_for(alpha: float, beta: float) -> float:
    return abs(alpha * alpha - beta * beta)


def conclusive_rate_sigma(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n)
