"""Matrix-product computational wires and the small 2D resources built
from them.

A wire is an ordered list of site tensors between two boundary vectors in
correlation space.  The amplitude of a physical configuration |s1...sn> is
<r| T[sn] ... T[s1] |l>, where T[s] is the 2x2 matrix the site assigns to
outcome s.  The first site label is the most significant bit of the output
state vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, pi, sin

import numpy as np

from . import qmath
from .qmath import HAD, SQRT2, StateVector, Z, ket, phase_gate

CZ4 = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
CX4 = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def _check_theta(theta: float) -> None:
    if abs(sin(theta)) < 1e-9 or abs(cos(theta)) < 1e-9:
        raise ValueError("degenerate wire angle: sin(theta) and cos(theta) must be nonzero")


@dataclass(frozen=True)
class SiteTensor:
    """Per-site map from a computational outcome index to a 2x2 matrix.

    ``basis_labels`` names the two physical kets the computational indices
    correspond to (for bookkeeping only).  ``kind`` is one of "A" (weighted
    computing site), "B" (readout site), "B-spatial-rotated" (readout site
    whose defining basis is the diagonal one), or "canonical".
    """

    kind: str
    tensors: tuple[np.ndarray, np.ndarray]
    basis_labels: tuple[str, str] = ("H", "V")
    theta: float | None = None

    def matrix(self, outcome: int) -> np.ndarray:
        return self.tensors[outcome]


def a_site(theta: float) -> SiteTensor:
    """Computing site: T[H] = H*cos(theta), T[V] = H*Z*sin(theta)."""
    _check_theta(theta)
    return SiteTensor(
        "A", (HAD * cos(theta), (HAD @ Z) * sin(theta)), ("H", "V"), theta
    )


def b_site() -> SiteTensor:
    """Readout site: T[H] = H, T[V] = H*Z."""
    return SiteTensor("B", (HAD.copy(), HAD @ Z), ("H", "V"))


def b_site_rotated() -> SiteTensor:
    """Readout site defined in the diagonal basis: T[P'] = H, T[M'] = H*Z.

    Stored in the computational basis, where the tensors become
    sqrt2*H|0><0| and sqrt2*H|1><1| for outcomes H' and V'.
    """
    t_p, t_m = HAD, HAD @ Z
    t_h = (t_p + t_m) / SQRT2
    t_v = (t_p - t_m) / SQRT2
    return SiteTensor("B-spatial-rotated", (t_h, t_v), ("H'", "V'"))


@dataclass(frozen=True)
class CanonicalWire:
    """Wire in canonical form: T[0] = W, T[1] = W * diag(e^{-i t/2}, e^{i t/2})."""

    W: np.ndarray
    theta_c: float

    def __post_init__(self) -> None:
        W = np.asarray(self.W, dtype=complex)
        object.__setattr__(self, "W", W)
        if not np.allclose(W.conj().T @ W, np.eye(2), atol=1e-12):
            raise ValueError("W must be unitary")

    def site(self) -> SiteTensor:
        return SiteTensor(
            "canonical",
            (self.W.copy(), self.W @ phase_gate(self.theta_c)),
            ("0", "1"),
            self.theta_c,
        )

    def sites(self, n: int) -> list[SiteTensor]:
        return [self.site() for _ in range(n)]


@dataclass(frozen=True)
class Wire:
    """Ordered site tensors with boundary vectors."""

    sites: tuple[SiteTensor, ...]
    labels: tuple[str, ...]
    left: np.ndarray = field(default_factory=lambda: ket("+"))
    right: np.ndarray = field(default_factory=lambda: ket("0"))

    def __post_init__(self) -> None:
        object.__setattr__(self, "sites", tuple(self.sites))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "left", np.asarray(self.left, dtype=complex))
        object.__setattr__(self, "right", np.asarray(self.right, dtype=complex))
        if len(self.sites) != len(self.labels):
            raise ValueError("one label per site required")
        if np.linalg.norm(self.left) == 0 or np.linalg.norm(self.right) == 0:
            raise ValueError("boundary vectors must be nonzero")

    @property
    def n_sites(self) -> int:
        return len(self.sites)


@dataclass(frozen=True)
class ResourceSpec:
    """Wires plus injected single-qubit sites and two-qubit coupling edges.

    Edges are (site_label, site_label, gate) with gate in {"CZ", "CX"}; for
    "CX" the first label is the control.
    """

    wires: tuple[Wire, ...]
    injected: tuple[tuple[str, np.ndarray], ...] = ()
    edges: tuple[tuple[str, str, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "wires", tuple(self.wires))
        object.__setattr__(
            self,
            "injected",
            tuple((l, np.asarray(v, dtype=complex)) for l, v in self.injected),
        )
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        labels = self.all_labels()
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate site labels across wires/injected sites")
        for a, b, gate in self.edges:
            if a == b or a not in labels or b not in labels:
                raise ValueError(f"edge ({a},{b}) must reference two distinct existing sites")
            if gate not in ("CZ", "CX"):
                raise ValueError(f"unsupported coupling gate {gate!r}")

    def all_labels(self) -> tuple[str, ...]:
        out: list[str] = []
        for w in self.wires:
            out.extend(w.labels)
        out.extend(l for l, _ in self.injected)
        return tuple(out)

    def to_json_dict(self) -> dict:
        return {
            "wires": [
                {
                    "labels": list(w.labels),
                    "site_kinds": [s.kind for s in w.sites],
                    "thetas": [s.theta for s in w.sites],
                    "left": [complex(x) for x in w.left],
                    "right": [complex(x) for x in w.right],
                }
                for w in self.wires
            ],
            "injected": [{"label": l, "state": [complex(x) for x in v]} for l, v in self.injected],
            "edges": [list(e) for e in self.edges],
        }


def contract_wire(wire: Wire) -> tuple[StateVector, float]:
    """Contract a wire to a normalized state vector; also return the raw norm."""
    if not 1 <= wire.n_sites <= 10:
        raise ValueError("wire must have between 1 and 10 sites")
    # part[s1,...,sk;:] = T[sk]...T[s1] |l>, built site by site.
    part = wire.left.reshape(1, 2)
    for site in wire.sites:
        stacked = np.stack([site.matrix(0), site.matrix(1)])  # (2, 2, 2)
        # new axis for this site's outcome is appended after the existing ones
        part = np.einsum("sij,kj->ksi", stacked, part).reshape(-1, 2)
    amps = part @ np.conj(wire.right)
    raw = float(np.linalg.norm(amps))
    if raw < 1e-300:
        raise ValueError("wire contraction produced a zero state")
    return StateVector(wire.labels, amps / raw), raw


def contract_resource(spec: ResourceSpec) -> tuple[StateVector, float]:
    """Contract wires, tensor in injected sites, apply coupling edges."""
    labels = spec.all_labels()
    if len(labels) > 10:
        raise ValueError("resource too large (more than 10 qubits)")
    state: StateVector | None = None
    raw_total = 1.0
    for w in spec.wires:
        s, raw = contract_wire(w)
        raw_total *= raw
        state = s if state is None else state.tensor(s)
    for label, vec in spec.injected:
        nrm = float(np.linalg.norm(vec))
        raw_total *= nrm
        site_state = StateVector((label,), vec / nrm)
        state = site_state if state is None else state.tensor(site_state)
    if state is None:
        raise ValueError("empty resource")
    for a, b, gate in spec.edges:
        state = state.apply_two(CZ4 if gate == "CZ" else CX4, a, b)
    normed, raw = state.normalized()
    return normed, raw_total * raw


# ---------------------------------------------------------------------------
# Named resource states
# ---------------------------------------------------------------------------

def psi4_wire(theta: float = pi / 6) -> Wire:
    """The A,A,A,B wire on labels 1..4."""
    return Wire(
        (a_site(theta), a_site(theta), a_site(theta), b_site()),
        ("1", "2", "3", "4"),
    )


def build_psi4(theta: float = pi / 6) -> StateVector:
    """Four-qubit resource state on labels (1,2,3,4), normalized."""
    state, _ = contract_wire(psi4_wire(theta))
    return state


def psi4_explicit(theta: float = pi / 6) -> tuple[StateVector, float]:
    """Literal expansion of the four-qubit state; returns (normalized, raw norm).

    c|H>1 (c|H>+s|V>)2 (c|H>|P> + s|V>|M>)34
      + s|V>1 (c|H>-s|V>)2 (c|H>|M> + s|V>|P>)34
    """
    _check_theta(theta)
    c, s = cos(theta), sin(theta)
    H, V, P, M = ket("H"), ket("V"), ket("P"), ket("M")

    def prod(*vecs: np.ndarray) -> np.ndarray:
        out = vecs[0]
        for v in vecs[1:]:
            out = np.kron(out, v)
        return out

    amps = c * prod(H, c * H + s * V, c * np.kron(H, P) + s * np.kron(V, M)) + s * prod(
        V, c * H - s * V, c * np.kron(H, M) + s * np.kron(V, P)
    )
    raw = float(np.linalg.norm(amps))
    return StateVector(("1", "2", "3", "4"), amps / raw), raw


def lambda34(theta: float = pi / 6) -> StateVector:
    """Two-qubit readout resource c|H>|P> + s|V>|M> on labels (3,4)."""
    state, _ = contract_wire(Wire((a_site(theta), b_site()), ("3", "4")))
    return state


def psi6_spec(theta: float = pi / 6) -> ResourceSpec:
    """Operational six-qubit resource: two wires coupled through a |+> site.

    Wire (1,2,1p) has sites A,A,B; wire (3,3p) has sites A,B-spatial-rotated;
    site 4 is injected as |+> and CZ-coupled to qubits 2 and 3.
    """
    wire_a = Wire((a_site(theta), a_site(theta), b_site()), ("1", "2", "1p"))
    wire_b = Wire((a_site(theta), b_site_rotated()), ("3", "3p"))
    return ResourceSpec(
        wires=(wire_a, wire_b),
        injected=(("4", ket("+")),),
        edges=(("2", "4", "CZ"), ("3", "4", "CZ")),
    )


PSI6_LABELS = ("1", "2", "1p", "3", "3p", "4")
# Register order used for measurement-settings I/O.
SETTINGS_ORDER = ("4", "3", "3p", "2", "1", "1p")


def build_psi6(theta: float = pi / 6) -> StateVector:
    """Six-qubit resource state on labels (1,2,1p,3,3p,4), normalized.

    Built operationally (coupled wires) and cross-checked against the
    literal expansion; the two must agree up to global phase.
    """
    state, _ = contract_resource(psi6_spec(theta))
    state = state.reorder(PSI6_LABELS)
    literal, _ = psi6_explicit(theta)
    if qmath.overlap_modulus(state, literal) < 1.0 - 1e-12:
        raise AssertionError("operational and literal six-qubit builds disagree")
    return state


def psi6_explicit(theta: float = pi / 6) -> tuple[StateVector, float]:
    """Literal six-qubit expansion; returns (normalized state, raw norm).

    |H>4 |mu>(1,2,1p) |nu>(3,3p) + |V>4 Z2|mu> Z3|nu>, with
    mu = c^2|HHH'> + cs|HVH'> + cs|VHV'> - s^2|VVV'> and
    nu = (c|HH'> + s|VV'>)/2.
    """
    _check_theta(theta)
    c, s = cos(theta), sin(theta)
    mu = np.zeros(8, dtype=complex)
    mu[0b000] = c * c
    mu[0b010] = c * s
    mu[0b101] = c * s
    mu[0b111] = -s * s
    nu = np.zeros(4, dtype=complex)
    nu[0b00] = c / 2
    nu[0b11] = s / 2
    z_mu = mu.copy()
    for idx in range(8):
        if (idx >> 1) & 1:  # qubit 2 is the middle bit of (1,2,1p)
            z_mu[idx] = -z_mu[idx]
    z_nu = nu.copy()
    for idx in range(4):
        if (idx >> 1) & 1:  # qubit 3 is the high bit of (3,3p)
            z_nu[idx] = -z_nu[idx]
    h4 = np.kron(np.kron(mu, nu), ket("H"))
    v4 = np.kron(np.kron(z_mu, z_nu), ket("V"))
    amps = h4 + v4  # register order (1,2,1p,3,3p,4)
    raw = float(np.linalg.norm(amps))
    return StateVector(PSI6_LABELS, amps / raw), raw


def couple_canonical(
    left: list[SiteTensor] | CanonicalWire,
    right: list[SiteTensor] | CanonicalWire,
    left_labels: tuple[str, ...] | None = None,
    right_labels: tuple[str, ...] | None = None,
    coupled: tuple[str, str] | None = None,
    injected_label: str = "c",
    n_sites: int = 3,
) -> ResourceSpec:
    """Couple two canonical-form wires through an injected |+> site.

    The injected qubit is the control of one controlled-X edge onto a chosen
    site of each wire (defaults: the middle site of each).  Measuring the
    injected qubit in the computational basis undoes the coupling (outcome 0)
    or leaves sigma_x on the two coupled sites (outcome 1).
    """
    if isinstance(left, CanonicalWire):
        left = left.sites(n_sites)
    if isinstance(right, CanonicalWire):
        right = right.sites(n_sites)
    if left_labels is None:
        left_labels = tuple(f"L{i}" for i in range(len(left)))
    if right_labels is None:
        right_labels = tuple(f"R{i}" for i in range(len(right)))
    if coupled is None:
        coupled = (left_labels[len(left_labels) // 2], right_labels[len(right_labels) // 2])
    wire_l = Wire(tuple(left), left_labels)
    wire_r = Wire(tuple(right), right_labels)
    return ResourceSpec(
        wires=(wire_l, wire_r),
        injected=((injected_label, ket("+")),),
        edges=((injected_label, coupled[0], "CX"), (injected_label, coupled[1], "CX")),
    )
