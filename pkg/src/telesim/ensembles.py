"""Remote preparation of rho-ensembles.

When Alice measures her half of a shared pure state, each outcome leaves Bob
with a definite conditional state. The outcome-weighted mixture of those
states is always Bob's reduced density matrix, whichever measurement Alice
chose; only the decomposition (the ensemble) changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measure import TOL_PROB, Povm, x_basis, z_basis
from .qcore import (
    DensityMatrix,
    StateVector,
    canonical_phase,
    hermitian_eig,
    partial_trace,
    singlet,
)

Member = tuple[float, "StateVector | DensityMatrix | None"]


@dataclass(frozen=True)
class RhoEnsemble:
    """Weighted members whose mixture should equal ``target``.

    A member state is ``None`` for an outcome that cannot occur (probability 0);
    the slot is kept so outcome labels stay aligned with the measurement.
    """

    members: tuple[Member, ...]
    labels: tuple[str, ...] | None = None
    target: DensityMatrix | None = None

    def __post_init__(self):
        members = tuple((float(p), s) for p, s in self.members)
        total = math.fsum(p for p, _ in members)
        if any(p < -1e-12 for p, _ in members):
            raise ValueError("negative member probability")
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"member probabilities sum to {total!r}")
        object.__setattr__(self, "members", members)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def probabilities(self) -> list[float]:
        return [p for p, _ in self.members]

    @property
    def states(self) -> list:
        return [s for _, s in self.members]

    def residual(self) -> float:
        """Largest entrywise gap between the mixture and ``target``."""
        if self.target is None:
            raise ValueError("ensemble has no declared target")
        return float(np.max(np.abs(ensemble_density(self).matrix - self.target.matrix)))


def _member_matrix(state) -> np.ndarray:
    if isinstance(state, StateVector):
        return state.projector()
    return np.asarray(state.matrix)


def ensemble_density(e: RhoEnsemble) -> DensityMatrix:
    live = [(p, s) for p, s in e.members if s is not None]
    first = live[0][1]
    rho = sum(p * _member_matrix(s) for p, s in live)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho, first.dims, first.labels)


def generate_at_distance(shared: StateVector, alice_povm: Povm, alice: str | None = None) -> RhoEnsemble:
    """Ensemble induced on Bob by Alice measuring ``alice_povm`` on her subsystem.

    For outcome ``i``: ``p_i = <Psi|A_i (x) I|Psi>`` and Bob holds
    ``tr_A[(A_i (x) I)|Psi><Psi|] / p_i``. Rank-one conditionals are returned
    as state vectors (first nonzero amplitude real positive), higher-rank ones
    as density matrices.
    """
    if len(shared.dims) != 2:
        raise ValueError("shared state must be bipartite")
    alice = shared.labels[0] if alice is None else alice
    if alice not in shared.labels:
        raise KeyError(f"unknown subsystem label {alice!r}")
    a_pos = shared.labels.index(alice)
    b_pos = 1 - a_pos
    da, db = shared.dims[a_pos], shared.dims[b_pos]
    if alice_povm.dim != da:
        raise ValueError(f"POVM dimension {alice_povm.dim} does not match Alice's dimension {da}")
    m = shared.amplitudes.reshape(shared.dims)
    if a_pos == 1:
        m = m.T
    bob_label = (shared.labels[b_pos],)
    members = []
    for e in alice_povm.elements:
        # sigma[b, b'] = sum_{a, a'} A[a', a] M[a, b] conj(M[a', b'])
        sigma = np.einsum("ka,ab,kc->bc", e, m, m.conj())
        sigma = 0.5 * (sigma + sigma.conj().T)
        p = float(np.trace(sigma).real)
        if p < TOL_PROB:
            members.append((0.0, None))
            continue
        cond = sigma / p
        vals, vecs = hermitian_eig(cond)
        if vals[0] >= 1.0 - 1e-10:
            members.append((p, StateVector.normalized(canonical_phase(vecs[:, 0]), (db,), bob_label)))
        else:
            members.append((p, DensityMatrix(cond, (db,), bob_label)))
    # renormalize away rounding in the weights
    total = math.fsum(p for p, _ in members)
    members = [(p / total, s) for p, s in members]
    target = partial_trace(shared, bob_label)
    return RhoEnsemble(tuple(members), alice_povm.labels, target)


def b92_state(alpha: float, beta: float) -> StateVector:
    """alpha|up_x up_x> + beta|down_x down_x>, written in the z basis."""
    if abs(alpha * alpha + beta * beta - 1.0) > 1e-12:
        raise ValueError(f"alpha^2 + beta^2 = {alpha * alpha + beta * beta!r}, expected 1")
    up_x = np.array([1.0, 1.0]) / math.sqrt(2)
    down_x = np.array([1.0, -1.0]) / math.sqrt(2)
    amps = alpha * np.kron(up_x, up_x) + beta * np.kron(down_x, down_x)
    return StateVector.normalized(amps, (2, 2), ("A", "B"))


def b92_demo(alpha: float, beta: float) -> RhoEnsemble:
    """Alice's z measurement on the x-basis correlated pair leaves the two B92 states with Bob."""
    return generate_at_distance(b92_state(alpha, beta), z_basis().as_povm())


def epr_basis_choice_demo(basis: str) -> RhoEnsemble:
    """Alice measures her half of a singlet in the z or x basis."""
    if basis == "z":
        povm = z_basis().as_povm()
    elif basis == "x":
        povm = x_basis().as_povm()
    else:
        raise ValueError(f"basis must be 'z' or 'x', got {basis!r}")
    return generate_at_distance(singlet(), povm)
