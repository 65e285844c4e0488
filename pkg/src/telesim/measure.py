"""Projective and generalized measurements, Born-rule sampling, and the
ancilla contraction that turns a joint projective measurement into a POVM
on the system alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qcore import (
    TOL_HERM,
    TOL_PSD,
    DensityMatrix,
    StateVector,
    apply_local,
    hermiticity_residual,
    partial_trace,
    psd_sqrt,
)
from .rng import sample_index

TOL_COMPLETE = 1e-10
TOL_PROB = 1e-12


@dataclass(frozen=True)
class Povm:
    """Ordered POVM elements with outcome labels.

    Construction does not validate; call :func:`validate_povm` for a report.
    """

    elements: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = None

    def __post_init__(self):
        elems = tuple(np.array(e, dtype=complex) for e in self.elements)
        if not elems:
            raise ValueError("a POVM needs at least one element")
        d = elems[0].shape
        for e in elems:
            if e.ndim != 2 or e.shape != d or d[0] != d[1]:
                raise ValueError("POVM elements must be square matrices of equal size")
            e.setflags(write=False)
        labels = self.labels
        if labels is None:
            labels = tuple(str(i) for i in range(len(elems)))
        labels = tuple(labels)
        if len(labels) != len(elems):
            raise ValueError("one label per element required")
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    def element(self, label: str) -> np.ndarray:
        return self.elements[self.labels.index(label)]

    def kraus(self) -> tuple[np.ndarray, ...]:
        """Minimal-disturbance Kraus factors sqrt(A_i)."""
        return tuple(psd_sqrt(e) for e in self.elements)


@dataclass(frozen=True)
class PovmReport:
    hermiticity: tuple[float, ...]
    min_eigenvalues: tuple[float, ...]
    completeness_residual: float
    failures: tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.passed


def validate_povm(p: Povm) -> PovmReport:
    herm = tuple(hermiticity_residual(e) for e in p.elements)
    mins = tuple(float(np.linalg.eigvalsh(0.5 * (e + e.conj().T)).min()) for e in p.elements)
    total = sum(p.elements)
    resid = float(np.max(np.abs(total - np.eye(p.dim))))
    failures = []
    for lab, h, m in zip(p.labels, herm, mins):
        if h > TOL_HERM:
            failures.append(f"element {lab}: not Hermitian (residual {h:.3e})")
        if m < -TOL_PSD:
            failures.append(f"element {lab}: negative eigenvalue {m:.3e}")
    if resid > TOL_COMPLETE:
        failures.append(f"completeness residual {resid:.3e}")
    return PovmReport(herm, mins, resid, tuple(failures))


@dataclass(frozen=True)
class ProjectiveMeasurement:
    projectors: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = None

    def __post_init__(self):
        projs = tuple(np.array(p, dtype=complex) for p in self.projectors)
        d = projs[0].shape[0]
        for i, p in enumerate(projs):
            if hermiticity_residual(p) > TOL_HERM:
                raise ValueError(f"projector {i} is not Hermitian")
            if np.max(np.abs(p @ p - p)) > 1e-10:
                raise ValueError(f"projector {i} is not idempotent")
            for j in range(i):
                if np.max(np.abs(p @ projs[j])) > 1e-10:
                    raise ValueError(f"projectors {j} and {i} are not orthogonal")
            p.setflags(write=False)
        if np.max(np.abs(sum(projs) - np.eye(d))) > 1e-10:
            raise ValueError("projectors do not sum to identity")
        labels = self.labels
        if labels is None:
            labels = tuple(str(i) for i in range(len(projs)))
        object.__setattr__(self, "projectors", projs)
        object.__setattr__(self, "labels", tuple(labels))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def as_povm(self) -> Povm:
        return Povm(self.projectors, self.labels)


@dataclass(frozen=True)
class OutcomeRecord:
    index: str
    probability: float
    post_state: StateVector | DensityMatrix | None


def telepovm_elements(theta: float) -> Povm:
    """The four rank-1 elements A1..A4 built from c = cos(theta), s = sin(theta)."""
    c, s = math.cos(theta), math.sin(theta)
    a1 = 0.5 * np.array([[c * c, c * s], [c * s, s * s]])
    a2 = 0.5 * np.array([[c * c, -c * s], [-c * s, s * s]])
    a3 = 0.5 * np.array([[s * s, c * s], [c * s, c * c]])
    a4 = 0.5 * np.array([[s * s, -c * s], [-c * s, c * c]])
    return Povm((a1, a2, a3, a4), ("A1", "A2", "A3", "A4"))


_R2 = 1 / math.sqrt(2)
BELL_LABELS = ("Phi+", "Phi-", "Psi+", "Psi-")
BELL_VECTORS = {
    "Phi+": np.array([_R2, 0, 0, _R2], dtype=complex),
    "Phi-": np.array([_R2, 0, 0, -_R2], dtype=complex),
    "Psi+": np.array([0, _R2, _R2, 0], dtype=complex),
    "Psi-": np.array([0, _R2, -_R2, 0], dtype=complex),
}


def bell_state(label: str, labels=("1", "2")) -> StateVector:
    return StateVector(BELL_VECTORS[label], (2, 2), labels)


def bell_basis() -> ProjectiveMeasurement:
    return ProjectiveMeasurement(
        tuple(np.outer(BELL_VECTORS[k], BELL_VECTORS[k].conj()) for k in BELL_LABELS),
        BELL_LABELS,
    )


def z_basis() -> ProjectiveMeasurement:
    return ProjectiveMeasurement((np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), ("up", "down"))


def x_basis() -> ProjectiveMeasurement:
    plus = np.full((2, 2), 0.5)
    minus = np.array([[0.5, -0.5], [-0.5, 0.5]])
    return ProjectiveMeasurement((plus, minus), ("up_x", "down_x"))


def induced_povm(joint: ProjectiveMeasurement, rho_aux) -> Povm:
    """POVM on the system obtained by measuring ``joint`` on system (x) ancilla.

    Joint indices are system-major: row ``(m, r)`` sits at ``m * d_aux + r``.
    Each element is ``A_mn = sum_rs P[(m, r), (n, s)] * rho_aux[s, r]``.
    """
    if isinstance(rho_aux, StateVector):
        rho = rho_aux.projector()
    else:
        rho = np.asarray(rho_aux, dtype=complex)
    da = rho.shape[0]
    dj = joint.dim
    if dj % da:
        raise ValueError(f"joint dimension {dj} is not a multiple of ancilla dimension {da}")
    ds = dj // da
    elems = []
    for p in joint.projectors:
        t = p.reshape(ds, da, ds, da)
        elems.append(np.einsum("mrns,sr->mn", t, rho))
    return Povm(tuple(elems), joint.labels)


def _local_targets(state: StateVector, subsystem, dim: int) -> tuple[str, ...]:
    if subsystem is None:
        if dim != state.dim:
            raise ValueError(f"measurement dimension {dim} does not match state dimension {state.dim}")
        return state.labels
    if isinstance(subsystem, str):
        subsystem = (subsystem,)
    return tuple(subsystem)


def outcome_distribution(state: StateVector, p: Povm, subsystem: Sequence[str] | str | None = None) -> list[float]:
    """Born probabilities <psi|A_i (x) I|psi> for a POVM on ``subsystem`` of ``state``."""
    targets = _local_targets(state, subsystem, p.dim)
    rho = partial_trace(state, targets)
    if rho.dim != p.dim:
        raise ValueError(f"POVM dimension {p.dim} does not match subsystem dimension {rho.dim}")
    probs = []
    for e in p.elements:
        val = complex(np.trace(e @ rho.matrix))
        if abs(val.imag) > TOL_PROB:
            raise ValueError(f"complex probability {val}")
        probs.append(val.real)
    return probs


def measure_projective(state: StateVector, m: ProjectiveMeasurement, rng, subsystem=None) -> OutcomeRecord:
    """Sample one outcome with a single uniform from ``rng``; post-state renormalized."""
    targets = _local_targets(state, subsystem, m.dim)
    branches = [apply_local(pr, state, targets) for pr in m.projectors]
    probs = [float(np.vdot(b, b).real) for b in branches]
    if max(probs) < TOL_PROB:
        raise ValueError("every outcome has vanishing probability")
    i = sample_index(probs, rng.random())
    post = StateVector.normalized(branches[i], state.dims, state.labels)
    return OutcomeRecord(m.labels[i], probs[i], post)


def measure_povm(state: StateVector, p: Povm, rng, subsystem=None) -> OutcomeRecord:
    """Sample a POVM outcome; the post-state uses the Kraus factor sqrt(A_i)."""
    targets = _local_targets(state, subsystem, p.dim)
    branches = [apply_local(k, state, targets) for k in p.kraus()]
    probs = [float(np.vdot(b, b).real) for b in branches]
    if max(probs) < TOL_PROB:
        raise ValueError("every outcome has vanishing probability")
    i = sample_index(probs, rng.random())
    post = StateVector.normalized(branches[i], state.dims, state.labels)
    return OutcomeRecord(p.labels[i], probs[i], post)


def random_povm(n_outcomes: int, dim: int, gen: np.random.Generator, rank: int | None = None) -> Povm:
    """Random complete POVM: A_i = S^-1/2 G_i^dag G_i S^-1/2 with S = sum G_i^dag G_i."""
    gs = []
    for _ in range(n_outcomes):
        r = rank or int(gen.integers(1, dim + 1))
        g = gen.normal(size=(r, dim)) + 1j * gen.normal(size=(r, dim))
        gs.append(g.conj().T @ g)
    s = sum(gs)
    w, v = np.linalg.eigh(s)
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    elems = []
    for g in gs:
        e = s_inv_half @ g @ s_inv_half
        elems.append(0.5 * (e + e.conj().T))
    return Povm(tuple(elems))
