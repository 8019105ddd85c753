"""Dense complex linear algebra for small labeled-qubit registers.

States are stored as flat amplitude vectors with the *first* label as the
most significant bit.  All operations are pure: they return new objects and
never mutate their inputs.  Equality of states is always judged up to a
global phase via overlap modulus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SQRT2 = float(np.sqrt(2.0))

# Single-qubit constants.
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
HAD = np.array([[1, 1], [1, -1]], dtype=complex) / SQRT2

PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

_KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / SQRT2,
    "-": np.array([1, -1], dtype=complex) / SQRT2,
}
# Polarization / path aliases: H,V are the computational states; P,M the
# diagonal states; R,L the circular states (|0> +/- i|1>)/sqrt2.
_KETS["H"] = _KETS["0"]
_KETS["V"] = _KETS["1"]
_KETS["P"] = _KETS["+"]
_KETS["M"] = _KETS["-"]
_KETS["R"] = np.array([1, 1j], dtype=complex) / SQRT2
_KETS["L"] = np.array([1, -1j], dtype=complex) / SQRT2


def ket(name: str) -> np.ndarray:
    """Return a normalized single-qubit ket by name (H,V,P,M,R,L,0,1,+,-)."""
    try:
        return _KETS[name].copy()
    except KeyError:
        raise ValueError(f"unknown ket name {name!r}") from None


def rz(angle: float) -> np.ndarray:
    """Rotation exp(-i*angle*Z/2) = diag(e^{-i a/2}, e^{i a/2})."""
    return np.array([[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]])


def rx(angle: float) -> np.ndarray:
    """Rotation exp(-i*angle*X/2)."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def phase_gate(angle: float) -> np.ndarray:
    """diag(e^{-i angle/2}, e^{i angle/2}); alias of rz used for wire tensors."""
    return rz(angle)


def kron(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product; the first argument is the most significant qubit."""
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


@dataclass(frozen=True)
class LocalOperator:
    """A named 2x2 operator."""

    mat: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "mat", np.asarray(self.mat, dtype=complex))
        if self.mat.shape != (2, 2):
            raise ValueError("LocalOperator requires a 2x2 matrix")


def embed(op: np.ndarray, labels: Sequence[str], targets: Sequence[str]) -> np.ndarray:
    """Lift an operator on ``targets`` to the full register given by ``labels``.

    ``op`` has dimension 2^len(targets) and acts on the target qubits in the
    order given; all other qubits get the identity.
    """
    labels = list(labels)
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise ValueError("duplicate target labels")
    for t in targets:
        if t not in labels:
            raise KeyError(f"unknown qubit label {t!r}")
    n = len(labels)
    others = [l for l in labels if l not in targets]
    block = np.kron(np.asarray(op, dtype=complex), np.eye(2 ** len(others)))
    # ``block`` acts on the register ordered (targets..., others...); permute
    # its row and column axes into the requested label order.
    cur = targets + others
    perm = [cur.index(l) for l in labels]
    t = block.reshape([2] * (2 * n)).transpose(perm + [n + p for p in perm])
    return t.reshape(2**n, 2**n)


def _index_of(labels: Sequence[str], qubit: str) -> int:
    try:
        return list(labels).index(qubit)
    except ValueError:
        raise KeyError(f"unknown qubit label {qubit!r}") from None


@dataclass(frozen=True)
class StateVector:
    """Pure state of named qubits; amplitudes indexed with labels[0] as MSB."""

    labels: tuple[str, ...]
    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "amps", amps)
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate qubit labels")
        if amps.size != 2 ** len(self.labels):
            raise ValueError("amplitude count does not match label count")

    # -- construction ------------------------------------------------------
    @classmethod
    def from_kets(cls, assignments: Sequence[tuple[str, np.ndarray | str]]) -> "StateVector":
        """Product state from (label, ket) pairs; kets may be names."""
        labels = [a[0] for a in assignments]
        vecs = [ket(a[1]) if isinstance(a[1], str) else np.asarray(a[1], dtype=complex) for a in assignments]
        amps = vecs[0]
        for v in vecs[1:]:
            amps = np.kron(amps, v)
        return cls(tuple(labels), amps)

    # -- basic properties --------------------------------------------------
    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> tuple["StateVector", float]:
        """Return (unit-norm state, discarded raw norm)."""
        nrm = self.norm
        if nrm == 0.0:
            raise ValueError("cannot normalize a zero state")
        return StateVector(self.labels, self.amps / nrm), nrm

    # -- register manipulation ---------------------------------------------
    def tensor(self, other: "StateVector") -> "StateVector":
        if set(self.labels) & set(other.labels):
            raise ValueError("overlapping labels in tensor product")
        return StateVector(self.labels + other.labels, np.kron(self.amps, other.amps))

    def reorder(self, new_labels: Sequence[str]) -> "StateVector":
        """Permute the register into ``new_labels`` order."""
        if set(new_labels) != set(self.labels) or len(new_labels) != len(self.labels):
            raise ValueError("reorder must use exactly the existing labels")
        n = self.n_qubits
        perm = [_index_of(self.labels, q) for q in new_labels]
        amps = self.amps.reshape([2] * n).transpose(perm).reshape(-1)
        return StateVector(tuple(new_labels), amps)

    # -- operators ---------------------------------------------------------
    def apply(self, op: np.ndarray | LocalOperator, qubit: str) -> "StateVector":
        """Apply a single-qubit operator to one tensor factor."""
        mat = op.mat if isinstance(op, LocalOperator) else np.asarray(op, dtype=complex)
        ax = _index_of(self.labels, qubit)
        n = self.n_qubits
        amps = self.amps.reshape([2] * n)
        amps = np.tensordot(mat, amps, axes=(1, ax))
        amps = np.moveaxis(amps, 0, ax)
        return StateVector(self.labels, amps.reshape(-1))

    def apply_two(self, op4: np.ndarray, qa: str, qb: str) -> "StateVector":
        """Apply a two-qubit operator (qa = most significant of the pair)."""
        full = embed(op4, self.labels, [qa, qb])
        return StateVector(self.labels, full @ self.amps)

    # -- inner products and collapse ---------------------------------------
    def overlap(self, other: "StateVector") -> complex:
        """<self|other>, aligning register order first."""
        if set(self.labels) != set(other.labels):
            raise ValueError("states live on different registers")
        return complex(np.vdot(self.amps, other.reorder(self.labels).amps))

    def project(self, qubit: str, onto: np.ndarray | str) -> tuple[float, "StateVector"]:
        """Partial inner product <onto|_qubit self.

        Returns (probability, unnormalized collapsed state with the qubit
        removed from the register).
        """
        vec = ket(onto) if isinstance(onto, str) else np.asarray(onto, dtype=complex)
        ax = _index_of(self.labels, qubit)
        n = self.n_qubits
        amps = self.amps.reshape([2] * n)
        rest = np.tensordot(np.conj(vec), amps, axes=(0, ax))
        prob = float(np.real(np.vdot(rest, rest)))
        new_labels = tuple(l for l in self.labels if l != qubit)
        return prob, StateVector(new_labels, rest.reshape(-1))

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(self.labels, np.outer(self.amps, np.conj(self.amps)))

    def expectation(self, op_full: np.ndarray) -> float:
        """Real part of <self|op|self> for a full-register operator."""
        return float(np.real(np.vdot(self.amps, op_full @ self.amps)))


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state of named qubits as a Hermitian unit-trace matrix."""

    labels: tuple[str, ...]
    mat: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.mat, dtype=complex)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "mat", mat)
        d = 2 ** len(self.labels)
        if mat.shape != (d, d):
            raise ValueError("matrix dimension does not match label count")

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.mat)))

    def normalized(self) -> tuple["DensityMatrix", float]:
        tr = self.trace
        if tr <= 0:
            raise ValueError("cannot normalize a non-positive-trace matrix")
        return DensityMatrix(self.labels, self.mat / tr), tr

    def reorder(self, new_labels: Sequence[str]) -> "DensityMatrix":
        if set(new_labels) != set(self.labels) or len(new_labels) != len(self.labels):
            raise ValueError("reorder must use exactly the existing labels")
        n = self.n_qubits
        perm = [_index_of(self.labels, q) for q in new_labels]
        full_perm = perm + [p + n for p in perm]
        mat = self.mat.reshape([2] * (2 * n)).transpose(full_perm).reshape(2**n, 2**n)
        return DensityMatrix(tuple(new_labels), mat)

    def apply(self, op: np.ndarray | LocalOperator, qubit: str) -> "DensityMatrix":
        mat = op.mat if isinstance(op, LocalOperator) else np.asarray(op, dtype=complex)
        full = embed(mat, self.labels, [qubit])
        return DensityMatrix(self.labels, full @ self.mat @ full.conj().T)

    def project(self, qubit: str, onto: np.ndarray | str) -> tuple[float, "DensityMatrix"]:
        """Collapse one qubit onto a ket: (probability, unnormalized rest)."""
        vec = ket(onto) if isinstance(onto, str) else np.asarray(onto, dtype=complex)
        ax = _index_of(self.labels, qubit)
        n = self.n_qubits
        t = self.mat.reshape([2] * (2 * n))
        t = np.tensordot(np.conj(vec), t, axes=(0, ax))
        t = np.tensordot(vec, t, axes=(0, n - 1 + ax))
        new_labels = tuple(l for l in self.labels if l != qubit)
        d = 2 ** len(new_labels)
        rest = t.reshape(d, d)
        prob = float(np.real(np.trace(rest)))
        return prob, DensityMatrix(new_labels, rest)

    def expectation(self, op_full: np.ndarray) -> float:
        return float(np.real(np.trace(op_full @ self.mat)))


def partial_trace(rho: DensityMatrix | StateVector, keep: Iterable[str]) -> DensityMatrix:
    """Reduced density matrix on ``keep`` (register order preserved)."""
    if isinstance(rho, StateVector):
        rho = rho.to_density()
    keep = list(keep)
    if not keep:
        raise ValueError("keep set must be nonempty")
    for q in keep:
        _index_of(rho.labels, q)
    kept = [l for l in rho.labels if l in keep]
    traced = [l for l in rho.labels if l not in keep]
    n = rho.n_qubits
    t = rho.mat.reshape([2] * (2 * n))
    # Trace out qubits from highest axis down so earlier indices stay valid.
    labels = list(rho.labels)
    for q in traced:
        ax = labels.index(q)
        m = len(labels)
        t = np.trace(t, axis1=ax, axis2=m + ax)
        labels.pop(ax)
    d = 2 ** len(kept)
    return DensityMatrix(tuple(kept), t.reshape(d, d))


def fidelity(rho: DensityMatrix, target: StateVector) -> float:
    """<target|rho|target> for a pure target state."""
    if set(rho.labels) != set(target.labels):
        raise ValueError("state and target live on different registers")
    t = target.reorder(rho.labels).amps
    val = np.vdot(t, rho.mat @ t)
    return float(np.real(val))


def linear_entropy(rho_single: DensityMatrix) -> float:
    """2 (1 - Tr rho^2) for a single-qubit density matrix."""
    if rho_single.mat.shape != (2, 2):
        raise ValueError("linear_entropy expects a single-qubit density matrix")
    purity = float(np.real(np.trace(rho_single.mat @ rho_single.mat)))
    return 2.0 * (1.0 - purity)


def states_equal(a: StateVector, b: StateVector, tol: float = 1e-12) -> bool:
    """Equality up to global phase: | |<a|b>| - 1 | < tol for unit vectors."""
    an, _ = a.normalized()
    bn, _ = b.normalized()
    return abs(abs(an.overlap(bn)) - 1.0) < tol


def overlap_modulus(a: StateVector, b: StateVector) -> float:
    an, _ = a.normalized()
    bn, _ = b.normalized()
    return abs(an.overlap(bn))


def vec_equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    """Global-phase-insensitive comparison of two plain vectors."""
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return na == nb
    return abs(abs(np.vdot(a / na, b / nb)) - 1.0) < tol


def canonical_phase(vec: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rescale by a unit phase so the first non-negligible entry is real > 0."""
    v = np.asarray(vec, dtype=complex).reshape(-1)
    for comp in v:
        if abs(comp) > tol:
            return v * (np.conj(comp) / abs(comp))
    return v.copy()


def mat_proportional(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    """True when a = z*b for some complex scalar z (b nonzero)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    nb = np.linalg.norm(b)
    if nb == 0:
        return np.linalg.norm(a) < tol
    z = np.vdot(b, a) / nb**2
    return bool(np.linalg.norm(a - z * b) < tol * max(1.0, np.linalg.norm(a)))
