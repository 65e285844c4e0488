"""Teleportation protocols over a Schmidt-form channel alpha|00> + beta|11>.

Every protocol is first evaluated as an exact outcome tree (:class:`Branch`
list with probabilities); the sampling entry points walk that tree with one
uniform per measurement step. Particles are labeled "1" (Alice's unknown
input), "2" (Alice's half of the channel) and "3" (Bob's half).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .discrimination import USD_LABELS, branch_states, usd_povm
from .ensembles import generate_at_distance
from .measure import (
    BELL_LABELS,
    BELL_VECTORS,
    bell_basis,
    induced_povm,
    telepovm_elements,
)
from .qcore import (
    I2,
    X,
    Z,
    DensityMatrix,
    StateVector,
    apply_local,
    fidelity,
    ket,
    partial_trace,
    pure_factor,
    singlet,
    tensor,
)
from .rng import sample_index

TOL_BRANCH = 1e-12


@dataclass(frozen=True)
class ChannelSpec:
    alpha: float
    beta: float

    def __post_init__(self):
        if self.beta < 0 or self.alpha < self.beta:
            raise ValueError(f"need alpha >= beta >= 0, got alpha={self.alpha!r}, beta={self.beta!r}")
        if abs(self.alpha**2 + self.beta**2 - 1.0) > 1e-12:
            raise ValueError("alpha^2 + beta^2 must equal 1")

    @classmethod
    def from_alpha2(cls, alpha2: float) -> "ChannelSpec":
        """Channel with alpha^2 = ``alpha2``, swapped into Schmidt order if below 1/2."""
        if not 0.0 < alpha2 <= 1.0:
            raise ValueError(f"alpha2 must lie in (0, 1], got {alpha2!r}")
        a2 = max(alpha2, 1.0 - alpha2)
        return cls(math.sqrt(a2), math.sqrt(1.0 - a2))

    @classmethod
    def maximal(cls) -> "ChannelSpec":
        r = 1 / math.sqrt(2)
        return cls(r, r)

    @property
    def overlap(self) -> float:
        return self.alpha**2 - self.beta**2

    def state(self) -> StateVector:
        return StateVector([self.alpha, 0, 0, self.beta], (2, 2), ("2", "3"))

    def bob_reduced(self) -> np.ndarray:
        return np.diag([self.alpha**2, self.beta**2]).astype(complex)


@dataclass(frozen=True)
class Correction:
    label: str
    operator: np.ndarray

    def __post_init__(self):
        op = np.array(self.operator, dtype=complex)
        if np.max(np.abs(op @ op.conj().T - np.eye(op.shape[0]))) > 1e-12:
            raise ValueError(f"correction {self.label} is not unitary")
        op.setflags(write=False)
        object.__setattr__(self, "operator", op)

    def apply(self, state: StateVector) -> StateVector:
        return StateVector.normalized(self.operator @ state.amplitudes, state.dims, state.labels)


PAULI_CORRECTIONS = {
    "I": Correction("I", I2),
    "X": Correction("X", X),
    "Z": Correction("Z", Z),
    "XZ": Correction("XZ", X @ Z),
}

# Frozen against the Bell ordering in measure.BELL_LABELS; re-derived in tests.
BELL_CORRECTIONS = {"Phi+": "I", "Phi-": "Z", "Psi+": "X", "Psi-": "XZ"}

# Keyed by (first-step subspace, USD outcome).
CONCLUSIVE_CORRECTIONS = {
    ("parallel", "u"): "I",
    ("parallel", "v"): "Z",
    ("antiparallel", "u"): "X",
    ("antiparallel", "v"): "XZ",
}

# Bob's recovery after the four-element POVM on a singlet half.
TELEPOVM_CORRECTIONS = {"A1": "XZ", "A2": "X", "A3": "Z", "A4": "I"}

# Two-dimensional logical basis of particles 1,2 inside each subspace, as
# indices into the 4-dim (1,2) space. The antiparallel order |10>, |01> is the
# one in which the two branch states read (alpha, beta) and (alpha, -beta).
SUBSPACES = {"parallel": (0, 3), "antiparallel": (2, 1)}

BITS = {"standard": 2, "conclusive": 3, "singlet-only": 1, "conclusive-singlet-only": 1}


def correction_for(bell_outcome: str) -> Correction:
    try:
        return PAULI_CORRECTIONS[BELL_CORRECTIONS[bell_outcome]]
    except KeyError:
        raise KeyError(f"unknown Bell outcome {bell_outcome!r}; expected one of {BELL_LABELS}") from None


def derive_correction_table(inputs: Sequence[StateVector], tol: float = 1e-10) -> dict[str, str]:
    """Find, for each Bell outcome, the Pauli that restores every given input.

    Uses the maximally entangled channel. Raises if an outcome has no single
    input-independent correction.
    """
    channel = ChannelSpec.maximal()
    table = {}
    for label in BELL_LABELS:
        fits = []
        for name, corr in PAULI_CORRECTIONS.items():
            ok = True
            for psi in inputs:
                br = {b.outcomes[0]: b for b in standard_branches(psi, channel)}[label]
                if br.bob_state is None or fidelity(psi, corr.apply(br.bob_state)) < 1 - tol:
                    ok = False
                    break
            if ok:
                fits.append(name)
        if len(fits) != 1:
            raise ArithmeticError(f"outcome {label}: corrections {fits} fit all inputs")
        table[label] = fits[0]
    return table


@dataclass(frozen=True)
class Branch:
    """One leaf of a protocol's outcome tree."""

    outcomes: tuple[str, ...]
    probability: float
    bob_reduced: np.ndarray
    bob_state: StateVector | None = None
    conclusive: bool = True
    correction: Correction | None = None
    bob_final: StateVector | None = None
    fidelity: float | None = None


@dataclass(frozen=True)
class Transcript:
    protocol: str
    input_state: StateVector
    channel: ChannelSpec
    step_outcomes: tuple[str, ...]
    classical_bits_sent: int
    conclusive: bool
    correction: Correction | None = None
    bob_final: StateVector | None = None
    fidelity_achieved: float | None = None
    probability: float = field(default=float("nan"), compare=False)


def three_particle_state(input_state: StateVector, channel: ChannelSpec) -> StateVector:
    if input_state.dim != 2:
        raise ValueError("input must be a single qubit")
    return tensor(input_state.relabel(("1",)), channel.state())


def _finish(outcomes, prob, post: StateVector, input_state: StateVector, corr_label: str | None, conclusive: bool):
    bob_red = partial_trace(post, ("3",)).matrix
    if not conclusive:
        return Branch(outcomes, prob, bob_red, conclusive=False)
    bob = pure_factor(post, ("3",))
    corr = PAULI_CORRECTIONS[corr_label]
    final = corr.apply(bob).relabel(("3",))
    return Branch(outcomes, prob, bob_red, bob, True, corr, final, fidelity(input_state, final))


def _check_input(input_state: StateVector):
    if input_state.dim != 2:
        raise ValueError("input must be a single qubit")
    norm = float(np.vdot(input_state.amplitudes, input_state.amplitudes).real)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError("input state is not normalized")


def standard_branches(input_state: StateVector, channel: ChannelSpec, mode: str = "standard") -> list[Branch]:
    """Bell measurement on particles 1,2 followed by the Pauli correction.

    ``mode="singlet-only"`` keeps only the Psi- outcome as a success.
    """
    _check_input(input_state)
    psi = three_particle_state(input_state, channel)
    out = []
    for label, proj in zip(BELL_LABELS, bell_basis().projectors):
        raw = apply_local(proj, psi, ("1", "2"))
        p = float(np.vdot(raw, raw).real)
        if p < TOL_BRANCH:
            out.append(Branch((label,), 0.0, np.zeros((2, 2), complex), conclusive=False))
            continue
        post = StateVector.normalized(raw, psi.dims, psi.labels)
        ok = mode == "standard" or label == "Psi-"
        out.append(_finish((label,), p, post, input_state, BELL_CORRECTIONS[label], ok))
    return out


def subspace_branches(psi123: StateVector) -> list[tuple[str, StateVector | None, float]]:
    """Exact first step: project particles 1,2 onto the parallel or antiparallel subspace."""
    out = []
    for name, (i0, i1) in SUBSPACES.items():
        proj = np.zeros((4, 4), dtype=complex)
        proj[i0, i0] = proj[i1, i1] = 1.0
        raw = apply_local(proj, psi123, ("1", "2"))
        p = float(np.vdot(raw, raw).real)
        post = StateVector.normalized(raw, psi123.dims, psi123.labels) if p >= TOL_BRANCH else None
        out.append((name, post, p))
    return out


def subspace_projection_step(psi123: StateVector, rng):
    """Sample the first step; returns ``(branch, post_state, probability)``."""
    options = subspace_branches(psi123)
    probs = [p for _, _, p in options]
    if max(probs) < TOL_BRANCH:
        raise ValueError("both subspace probabilities vanish")
    name, post, p = options[sample_index(probs, rng.random())]
    return name, post, p


def _lifted_kraus(subspace: str, kraus: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Embed 2x2 USD Kraus factors into the (1,2) space via the subspace isometry."""
    i0, i1 = SUBSPACES[subspace]
    iso = np.zeros((4, 2), dtype=complex)
    iso[i0, 0] = iso[i1, 1] = 1.0
    lifted = [iso @ k @ iso.conj().T for k in kraus]
    lifted[-1] = lifted[-1] + (np.eye(4) - iso @ iso.conj().T)
    return lifted


def conclusive_branches(input_state: StateVector, channel: ChannelSpec, mode: str = "conclusive") -> list[Branch]:
    """Subspace projection then USD of (alpha, beta) vs (alpha, -beta) on particles 1,2.

    ``mode="conclusive-singlet-only"`` keeps only the (antiparallel, v) leaf.
    Raises ``IndistinguishableStatesError`` for a product channel.
    """
    _check_input(input_state)
    setup = usd_povm(*branch_states(channel.alpha, channel.beta))
    kraus = setup.povm.kraus()
    psi = three_particle_state(input_state, channel)
    out = []
    for name, post, p_sub in subspace_branches(psi):
        for label, k in zip(USD_LABELS, _lifted_kraus(name, kraus)):
            outcomes = (name, label)
            if post is None:
                out.append(Branch(outcomes, 0.0, np.zeros((2, 2), complex), conclusive=False))
                continue
            raw = apply_local(k, post, ("1", "2"))
            p_usd = float(np.vdot(raw, raw).real)
            prob = p_sub * p_usd
            if p_usd < TOL_BRANCH:
                out.append(Branch(outcomes, prob, np.zeros((2, 2), complex), conclusive=False))
                continue
            after = StateVector.normalized(raw, psi.dims, psi.labels)
            if mode == "conclusive":
                ok = label != "inconclusive"
            else:
                ok = outcomes == ("antiparallel", "v")
            corr = CONCLUSIVE_CORRECTIONS.get(outcomes)
            out.append(_finish(outcomes, prob, after, input_state, corr, ok))
    return out


def enumerate_branches(protocol: str, input_state: StateVector, channel: ChannelSpec) -> list[Branch]:
    if protocol in ("standard", "singlet-only"):
        return standard_branches(input_state, channel, protocol)
    if protocol in ("conclusive", "conclusive-singlet-only"):
        return conclusive_branches(input_state, channel, protocol)
    raise ValueError(f"unknown protocol {protocol!r}")


def sample_branch(branches: Sequence[Branch], rng) -> Branch:
    """Walk the outcome tree level by level, one uniform per level."""
    prefix: tuple[str, ...] = ()
    pool = list(branches)
    depth = len(pool[0].outcomes)
    for level in range(depth):
        keys: list[str] = []
        weight: dict[str, float] = {}
        for b in pool:
            k = b.outcomes[level]
            if k not in weight:
                keys.append(k)
                weight[k] = 0.0
            weight[k] += b.probability
        total = sum(weight.values())
        probs = [weight[k] / total for k in keys]
        chosen = keys[sample_index(probs, rng.random())]
        prefix += (chosen,)
        pool = [b for b in pool if b.outcomes[level] == chosen]
    return pool[0]


def _transcript(protocol, input_state, channel, b: Branch) -> Transcript:
    return Transcript(
        protocol,
        input_state,
        channel,
        b.outcomes,
        BITS[protocol],
        b.conclusive,
        b.correction,
        b.bob_final,
        b.fidelity,
        b.probability,
    )


def standard_teleport(input_state: StateVector, channel: ChannelSpec, rng) -> Transcript:
    b = sample_branch(standard_branches(input_state, channel), rng)
    return _transcript("standard", input_state, channel, b)


def conclusive_teleport(input_state: StateVector, channel: ChannelSpec, rng) -> Transcript:
    b = sample_branch(conclusive_branches(input_state, channel), rng)
    return _transcript("conclusive", input_state, channel, b)


def one_bit_teleport(input_state: StateVector, channel: ChannelSpec, rng, mode: str = "singlet-only") -> Transcript:
    if mode == "singlet-only":
        branches = standard_branches(input_state, channel, mode)
    elif mode == "conclusive-singlet-only":
        branches = conclusive_branches(input_state, channel, mode)
    else:
        raise ValueError(f"unknown one-bit mode {mode!r}")
    return _transcript(mode, input_state, channel, sample_branch(branches, rng))


def run_protocol(protocol: str, input_state: StateVector, channel: ChannelSpec, rng) -> Transcript:
    b = sample_branch(enumerate_branches(protocol, input_state, channel), rng)
    return _transcript(protocol, input_state, channel, b)


def success_probability(branches: Sequence[Branch]) -> float:
    return math.fsum(b.probability for b in branches if b.conclusive)


def bob_average(branches: Sequence[Branch]) -> np.ndarray:
    """Bob's outcome-averaged state before any classical message arrives."""
    return sum(b.probability * b.bob_reduced for b in branches)


@dataclass(frozen=True)
class EquivalenceReport:
    theta: float
    max_deviation: float
    probabilities: tuple[float, ...]
    recovery_fidelities: tuple[float | None, ...]

    @property
    def passed(self) -> bool:
        fids = [f for f in self.recovery_fidelities if f is not None]
        return self.max_deviation < 1e-12 and all(f >= 1 - 1e-10 for f in fids)


def verify_telepovm_equivalence(theta: float) -> EquivalenceReport:
    """Bell measurement with a (cos, sin) ancilla versus the four-element POVM, end to end."""
    c, s = math.cos(theta), math.sin(theta)
    ancilla = ket(c, s)
    induced = induced_povm(bell_basis(), ancilla)
    direct = telepovm_elements(theta)
    dev = max(float(np.max(np.abs(a - b))) for a, b in zip(induced.elements, direct.elements))
    ens = generate_at_distance(singlet(), direct)
    fids = []
    for label, (p, bob) in zip(direct.labels, ens.members):
        if bob is None:
            fids.append(None)
            continue
        restored = PAULI_CORRECTIONS[TELEPOVM_CORRECTIONS[label]].apply(bob)
        fids.append(fidelity(ancilla, restored))
    return EquivalenceReport(theta, dev, tuple(ens.probabilities), tuple(fids))
