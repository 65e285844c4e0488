"""Dense state and operator primitives for a handful of qubits.

Operators are plain complex ``numpy`` arrays. States carry their tensor
factorization (``dims``) and subsystem ``labels`` so that partial traces and
local operators can be addressed by name. The leftmost factor is the most
significant index everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TOL_NORM = 1e-12
TOL_HERM = 1e-12
TOL_PSD = 1e-10
TOL_RECON = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _as_labels(labels: Iterable[str] | None, n: int) -> tuple[str, ...]:
    if labels is None:
        return tuple(str(i) for i in range(n))
    labels = tuple(str(x) for x in labels)
    if len(labels) != n:
        raise ValueError(f"expected {n} labels, got {len(labels)}")
    if len(set(labels)) != n:
        raise ValueError(f"duplicate subsystem labels {labels}")
    return labels


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state over labeled subsystems."""

    amplitudes: np.ndarray
    dims: tuple[int, ...] = field(default=None)
    labels: tuple[str, ...] = field(default=None)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dims = self.dims
        if dims is None:
            n = int(round(math.log2(amps.size))) if amps.size > 1 else 1
            if 2**n != amps.size:
                raise ValueError(f"cannot infer qubit dims for length {amps.size}")
            dims = (2,) * n
        dims = tuple(int(d) for d in dims)
        if int(np.prod(dims)) != amps.size:
            raise ValueError(f"dims {dims} do not match {amps.size} amplitudes")
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitude")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > TOL_NORM:
            raise ValueError(f"state not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", _as_labels(self.labels, len(dims)))

    @classmethod
    def normalized(cls, amplitudes, dims=None, labels=None) -> "StateVector":
        """Build a state from unnormalized amplitudes."""
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm < 1e-300:
            raise ValueError("cannot normalize the zero vector")
        return cls(amps / norm, dims, labels)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def relabel(self, labels: Sequence[str]) -> "StateVector":
        return StateVector(self.amplitudes, self.dims, labels)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.projector(), self.dims, self.labels)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix over labeled subsystems."""

    matrix: np.ndarray
    dims: tuple[int, ...] = field(default=None)
    labels: tuple[str, ...] = field(default=None)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        dims = self.dims
        if dims is None:
            n = int(round(math.log2(m.shape[0]))) if m.shape[0] > 1 else 1
            dims = (2,) * n if 2**n == m.shape[0] else (m.shape[0],)
        dims = tuple(int(d) for d in dims)
        if int(np.prod(dims)) != m.shape[0]:
            raise ValueError(f"dims {dims} do not match side {m.shape[0]}")
        if not np.all(np.isfinite(m)):
            raise ValueError("non-finite entry")
        herm = hermiticity_residual(m)
        if herm > TOL_HERM:
            raise ValueError(f"not Hermitian (residual {herm:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TOL_NORM:
            raise ValueError(f"trace {tr!r} != 1")
        lo = float(np.linalg.eigvalsh(m).min())
        if lo < -TOL_PSD:
            raise ValueError(f"not positive semidefinite (min eigenvalue {lo:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", _as_labels(self.labels, len(dims)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class SchmidtForm:
    coefficients: tuple[float, ...]
    alice_basis: tuple[StateVector, ...]
    bob_basis: tuple[StateVector, ...]
    labels: tuple[str, str] = ("A", "B")

    def reconstruct(self) -> StateVector:
        amps = sum(
            c * np.kron(a.amplitudes, b.amplitudes)
            for c, a, b in zip(self.coefficients, self.alice_basis, self.bob_basis)
        )
        dims = (self.alice_basis[0].dim, self.bob_basis[0].dim)
        return StateVector.normalized(amps, dims, self.labels)


def ket(*amplitudes, label: str | None = None) -> StateVector:
    """Normalized single-subsystem state, e.g. ``ket(1, 1)`` for |+>."""
    labels = None if label is None else (label,)
    return StateVector.normalized(amplitudes, (len(amplitudes),), labels)


def hermiticity_residual(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def tensor(a, b):
    """Kronecker product with ``a`` as the most significant factor.

    Works on two ``StateVector``, two ``DensityMatrix`` or two arrays. When the
    concatenated labels collide they are replaced by positional labels.
    """
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        dims = a.dims + b.dims
        labels = a.labels + b.labels
        if len(set(labels)) != len(labels):
            labels = None
        return StateVector.normalized(np.kron(a.amplitudes, b.amplitudes), dims, labels)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        labels = a.labels + b.labels
        if len(set(labels)) != len(labels):
            labels = None
        return DensityMatrix(np.kron(a.matrix, b.matrix), a.dims + b.dims, labels)
    if isinstance(a, (StateVector, DensityMatrix)) or isinstance(b, (StateVector, DensityMatrix)):
        raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")
    return np.kron(np.asarray(a), np.asarray(b))


def _label_positions(labels: Sequence[str], wanted: Iterable[str]) -> list[int]:
    pos = []
    for lab in wanted:
        lab = str(lab)
        if lab not in labels:
            raise KeyError(f"unknown subsystem label {lab!r}; have {tuple(labels)}")
        pos.append(labels.index(lab))
    return pos


def partial_trace(rho, keep: Iterable[str]) -> DensityMatrix:
    """Reduced state on the subsystems named in ``keep`` (original order kept)."""
    if isinstance(rho, StateVector):
        dims, labels = rho.dims, rho.labels
        psi = rho.amplitudes.reshape(dims)
        kept = sorted(_label_positions(labels, keep))
        traced = [i for i in range(len(dims)) if i not in kept]
        # contract psi with conj(psi) over traced axes
        red = np.tensordot(psi, psi.conj(), axes=(traced, traced))
    elif isinstance(rho, DensityMatrix):
        dims, labels = rho.dims, rho.labels
        n = len(dims)
        kept = sorted(_label_positions(labels, keep))
        t = rho.matrix.reshape(dims + dims)
        for i in sorted((i for i in range(n) if i not in kept), reverse=True):
            cur = t.ndim // 2
            t = np.trace(t, axis1=i, axis2=i + cur)
        red = t
    else:
        raise TypeError(f"expected StateVector or DensityMatrix, got {type(rho).__name__}")
    kdims = tuple(dims[i] for i in kept)
    d = int(np.prod(kdims))
    red = red.reshape(d, d)
    red = 0.5 * (red + red.conj().T)
    return DensityMatrix(red, kdims, tuple(labels[i] for i in kept))


def apply_local(op: np.ndarray, state: StateVector, targets: Sequence[str]) -> np.ndarray:
    """Apply ``op`` to the named subsystems; returns raw (unnormalized) amplitudes."""
    pos = _label_positions(state.labels, targets)
    tdims = [state.dims[i] for i in pos]
    dt = int(np.prod(tdims))
    op = np.asarray(op, dtype=complex)
    if op.shape != (dt, dt):
        raise ValueError(f"operator shape {op.shape} does not fit targets {tuple(targets)}")
    psi = state.amplitudes.reshape(state.dims)
    k = len(pos)
    opt = op.reshape(tuple(tdims) * 2)
    out = np.tensordot(opt, psi, axes=(list(range(k, 2 * k)), pos))
    # tensordot puts the target axes first; move them back
    out = np.moveaxis(out, list(range(k)), pos)
    return out.reshape(-1)


def embed(op: np.ndarray, dims: Sequence[int], labels: Sequence[str], targets: Sequence[str]) -> np.ndarray:
    """Full-space matrix of ``op`` acting on ``targets`` and identity elsewhere."""
    dims = tuple(dims)
    pos = _label_positions(labels, targets)
    n = len(dims)
    rest = [i for i in range(n) if i not in pos]
    d_rest = int(np.prod([dims[i] for i in rest])) if rest else 1
    full = np.kron(np.asarray(op, dtype=complex), np.eye(d_rest))
    order = pos + rest
    perm_dims = [dims[i] for i in order]
    t = full.reshape(perm_dims * 2)
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    d = int(np.prod(dims))
    return t.reshape(d, d)


def schmidt_decompose(psi: StateVector) -> SchmidtForm:
    """Schmidt form of a two-party pure state.

    Coefficients are real, nonnegative and descending; all phases live in the
    Bob-side vectors. For equal coefficients the basis pair is not unique.
    """
    if len(psi.dims) != 2:
        raise ValueError(f"Schmidt decomposition needs exactly two subsystems, got {len(psi.dims)}")
    da, db = psi.dims
    m = psi.amplitudes.reshape(da, db)
    u, s, vh = np.linalg.svd(m)
    k = min(da, db)
    coeffs = tuple(float(x) for x in s[:k])
    alice = tuple(StateVector.normalized(u[:, i], (da,), (psi.labels[0],)) for i in range(k))
    bob = tuple(StateVector.normalized(vh[i, :], (db,), (psi.labels[1],)) for i in range(k))
    return SchmidtForm(coeffs, alice, bob, psi.labels)


def overlap(a: StateVector, b: StateVector) -> complex:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(pure: StateVector, other: StateVector) -> float:
    """|<pure|other>|^2, clipped to [0, 1]."""
    f = abs(overlap(pure, other)) ** 2
    return min(1.0, max(0.0, f))


def equal_up_to_global_phase(a: StateVector, b: StateVector, tol: float = 1e-10) -> bool:
    return fidelity(a, b) >= 1.0 - tol


def hermitian_eig(op) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and the matching orthonormal eigenvectors (columns)."""
    m = np.asarray(op, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if hermiticity_residual(m) > TOL_HERM * max(1.0, float(np.max(np.abs(m)))):
        raise ValueError("matrix is not Hermitian")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return w[::-1].copy(), v[:, ::-1].copy()


def psd_sqrt(op) -> np.ndarray:
    """Principal square root of a PSD matrix; eigenvalues down to -TOL_PSD are clamped."""
    w, v = hermitian_eig(op)
    if w.size and w.min() < -TOL_PSD:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {w.min():.3e})")
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root) @ v.conj().T


def canonical_phase(amplitudes: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate the global phase so the first non-negligible amplitude is real positive."""
    amps = np.asarray(amplitudes, dtype=complex)
    for x in amps:
        if abs(x) > tol:
            return amps * (abs(x) / x)
    return amps


def pure_factor(state: StateVector, keep: Sequence[str], tol: float = 1e-10) -> StateVector:
    """The pure state of ``keep`` when it is unentangled from the rest.

    Raises ``ValueError`` when the reduced state has purity below ``1 - tol``.
    """
    red = partial_trace(state, keep)
    if red.purity() < 1.0 - tol:
        raise ValueError(f"subsystems {tuple(keep)} are entangled with the rest (purity {red.purity():.12f})")
    _, vecs = hermitian_eig(red.matrix)
    return StateVector.normalized(canonical_phase(vecs[:, 0]), red.dims, red.labels)


def random_qubit(rng) -> StateVector:
    """Haar-random qubit drawn from exactly two uniforms of ``rng``."""
    u0 = rng.random()
    u1 = rng.random()
    polar = math.acos(1.0 - 2.0 * u0)
    phase = 2.0 * math.pi * u1
    return ket(math.cos(polar / 2), complex(math.cos(phase), math.sin(phase)) * math.sin(polar / 2))


def random_state(dims: Sequence[int], gen: np.random.Generator, labels=None) -> StateVector:
    """Haar-random pure state from a numpy generator (test and suite helper)."""
    d = int(np.prod(dims))
    v = gen.normal(size=d) + 1j * gen.normal(size=d)
    return StateVector.normalized(v, tuple(dims), labels)


def singlet(labels=("A", "B")) -> StateVector:
    return StateVector.normalized([0, 1, -1, 0], (2, 2), labels)
