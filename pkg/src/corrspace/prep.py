"""Post-selected linear-optics preparation of the resource states.

The builders in :mod:`corrspace.wires` define the target states abstractly.
This module simulates the optical route to the same states: entangled
polarization pairs are pushed through polarization-dependent attenuators
(probabilistic filters), a post-selected two-photon conditional-phase
element, a path relabeling, and polarization-to-path expansions.  Every
filter is a contraction, so the pipeline tracks the overall post-selection
probability, and the final state is verified against the abstract builder.

Element model
-------------
``pbc``          single-qubit polarization filter diag(sqrt(T_h), sqrt(T_v)).
``pbc_overlap``  one filter cube crossed by two photons: each photon's V
                 amplitude is attenuated by sqrt(T_v) (H by sqrt(T_h)) and
                 the joint VV amplitude acquires a minus sign from
                 two-photon interference.  With T_h = 1, T_v = 1/3, followed
                 by a ``pbc`` (T_h = 1/3) on the second photon, the combined
                 effect is diag(sqrt(1/3), sqrt(1/3), 1/3, -1/3) — a
                 post-selected conditional-phase gate with an extra
                 polarization weighting of the first photon.
``pbs_expand``   polarization-to-path expansion |H> -> |H>|H'>,
                 |V> -> |V>|V'>; an isometry that adds one qubit.
``hwp``          half-wave plate at a given fast-axis angle (unitary).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, pi, sin, sqrt
from typing import Sequence

import numpy as np

from . import qmath as qm
from .qmath import StateVector
from .wires import PSI6_LABELS, build_psi4, build_psi6

#: Joint amplitude factors of the two-photon conditional-phase combination
#: (overlapping filter cube plus a T_h = 1/3 filter on the second photon),
#: in the (HH, HV, VH, VV) basis of (first photon, second photon).
CPHASE_DIAG = np.array(
    [sqrt(1.0 / 3.0), sqrt(1.0 / 3.0), 1.0 / 3.0, -1.0 / 3.0]
)

_KINDS = ("pbc", "pbc_overlap", "pbs_expand", "hwp")


@dataclass(frozen=True)
class OpticalElement:
    """One element of an optical preparation pipeline.

    ``qubit`` is the acted-on polarization qubit; ``partner`` is the second
    photon of a ``pbc_overlap``; ``new_label`` is the path qubit created by
    ``pbs_expand``; ``angle`` is the ``hwp`` fast-axis angle.
    """

    kind: str
    qubit: str
    t_h: float = 1.0
    t_v: float = 1.0
    partner: str | None = None
    new_label: str | None = None
    angle: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")
        for name, t in (("t_h", self.t_h), ("t_v", self.t_v)):
            if not 0.0 <= t <= 1.0:
                raise ValueError(f"{name}={t} outside [0, 1]")
        if self.kind == "pbc_overlap" and self.partner is None:
            raise ValueError("pbc_overlap requires a partner qubit")
        if self.kind == "pbs_expand" and self.new_label is None:
            raise ValueError("pbs_expand requires a new_label")

    def to_json_dict(self) -> dict:
        out: dict = {"kind": self.kind, "qubit": self.qubit}
        if self.kind in ("pbc", "pbc_overlap"):
            out["t_h"] = float(self.t_h)
            out["t_v"] = float(self.t_v)
        if self.kind == "pbc_overlap":
            out["partner"] = self.partner
        if self.kind == "pbs_expand":
            out["new_label"] = self.new_label
        if self.kind == "hwp":
            out["angle"] = float(self.angle)
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "OpticalElement":
        known = {"kind", "qubit", "t_h", "t_v", "partner", "new_label", "angle"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown element fields {sorted(extra)}")
        return cls(**data)


# ---------------------------------------------------------------------------
# Elementary transforms
# ---------------------------------------------------------------------------

def pbc_filter(
    state: StateVector, qubit: str, t_h: float, t_v: float
) -> tuple[StateVector, float]:
    """Polarization-dependent filter diag(sqrt(t_h), sqrt(t_v)) on one qubit.

    Returns the renormalized state and the post-selection probability (the
    squared norm ratio).  Raises if the filter annihilates the state.
    """
    for name, t in (("t_h", t_h), ("t_v", t_v)):
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"{name}={t} outside [0, 1]")
    filt = np.diag([sqrt(t_h), sqrt(t_v)]).astype(complex)
    raw = state.apply(filt, qubit)
    norm_in = state.norm
    if norm_in == 0.0:
        raise ValueError("input state has zero norm")
    prob = (raw.norm / norm_in) ** 2
    if prob <= 1e-300:
        raise ValueError("filter post-selection annihilated the state")
    return raw.normalized()[0], float(prob)


def pbc_overlap_filter(
    state: StateVector, qubit_a: str, qubit_b: str, t_h: float, t_v: float
) -> tuple[StateVector, float]:
    """One filter cube crossed by two photons.

    Each photon's amplitudes are filtered by diag(sqrt(t_h), sqrt(t_v)) and
    the joint VV amplitude flips sign (two-photon interference in the cube).
    """
    for name, t in (("t_h", t_h), ("t_v", t_v)):
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"{name}={t} outside [0, 1]")
    sh, sv = sqrt(t_h), sqrt(t_v)
    op = np.diag([sh * sh, sh * sv, sv * sh, -sv * sv]).astype(complex)
    raw = state.apply_two(op, qubit_a, qubit_b)
    norm_in = state.norm
    if norm_in == 0.0:
        raise ValueError("input state has zero norm")
    prob = (raw.norm / norm_in) ** 2
    if prob <= 1e-300:
        raise ValueError("filter post-selection annihilated the state")
    return raw.normalized()[0], float(prob)


def pbs_expand(state: StateVector, qubit: str, new_label: str) -> StateVector:
    """Split a polarization qubit over two paths: |H> -> |H>|H'>, |V> -> |V>|V'>.

    The new path qubit ``new_label`` is appended at the end of the register;
    the map is an isometry (norm and inner products preserved).
    """
    if new_label in state.labels:
        raise ValueError(f"label {new_label!r} already present")
    ax = state.labels.index(qubit) if qubit in state.labels else None
    if ax is None:
        raise KeyError(f"unknown qubit label {qubit!r}")
    n = state.n_qubits
    amps = state.amps.reshape([2] * n)
    expanded = np.zeros([2] * n + [2], dtype=complex)
    idx_h = [slice(None)] * n
    idx_h[ax] = 0
    expanded[tuple(idx_h) + (0,)] = amps[tuple(idx_h)]
    idx_v = [slice(None)] * n
    idx_v[ax] = 1
    expanded[tuple(idx_v) + (1,)] = amps[tuple(idx_v)]
    return StateVector(state.labels + (new_label,), expanded.reshape(-1))


def hwp(state: StateVector, qubit: str, angle: float) -> StateVector:
    """Half-wave plate with fast axis at ``angle``: a polarization reflection."""
    c2, s2 = cos(2 * angle), sin(2 * angle)
    jones = np.array([[c2, s2], [s2, -c2]], dtype=complex)
    return state.apply(jones, qubit)


def exchange_labels(state: StateVector, a: str, b: str) -> StateVector:
    """Swap the names of two register positions (physical path relabeling)."""
    if a not in state.labels or b not in state.labels:
        raise KeyError(f"labels {a!r}, {b!r} must both be present")
    renamed = tuple(b if l == a else a if l == b else l for l in state.labels)
    return StateVector(renamed, state.amps)


def apply_element(
    state: StateVector, element: OpticalElement
) -> tuple[StateVector, float]:
    """Apply one pipeline element; returns (state, post-selection probability)."""
    if element.kind == "pbc":
        return pbc_filter(state, element.qubit, element.t_h, element.t_v)
    if element.kind == "pbc_overlap":
        return pbc_overlap_filter(
            state, element.qubit, element.partner, element.t_h, element.t_v
        )
    if element.kind == "pbs_expand":
        return pbs_expand(state, element.qubit, element.new_label), 1.0
    if element.kind == "hwp":
        return hwp(state, element.qubit, element.angle), 1.0
    raise ValueError(f"unknown element kind {element.kind!r}")


def apply_pipeline(
    state: StateVector, elements: Sequence[OpticalElement]
) -> tuple[StateVector, float]:
    """Apply elements in order; probability is the product of element factors."""
    prob = 1.0
    for el in elements:
        state, p = apply_element(state, el)
        prob *= p
    return state, prob


def load_pipeline(data: Sequence[dict]) -> tuple[OpticalElement, ...]:
    """Deserialize an ordered element list from JSON-shaped dicts."""
    return tuple(OpticalElement.from_json_dict(d) for d in data)


# ---------------------------------------------------------------------------
# The resource-state preparation pipelines
# ---------------------------------------------------------------------------

def entangled_pair(label_a: str, label_b: str) -> StateVector:
    """The prepared two-photon input (|H>|P> + |V>|M>)/sqrt2."""
    h = StateVector.from_kets([(label_a, "H"), (label_b, "P")])
    v = StateVector.from_kets([(label_a, "V"), (label_b, "M")])
    return StateVector(h.labels, (h.amps + v.amps) / qm.SQRT2)


def weighting_transmissions(theta: float) -> tuple[float, float]:
    """Filter transmissions turning |P>/|M> weights into cos/sin weights.

    Returns (t_h, t_v) with max(t_h, t_v) = 1: the less-attenuated
    polarization passes unfiltered.
    """
    c, s = cos(theta), sin(theta)
    if not (c > 0 and s > 0):
        raise ValueError("theta must lie strictly inside (0, pi/2)")
    if s <= c:
        return 1.0, (s / c) ** 2
    return (c / s) ** 2, 1.0


def balance_transmissions(theta: float) -> tuple[float, float]:
    """First-photon filter completing the conditional-phase weighting.

    The conditional-phase combination weights the first photon by
    diag(cos(pi/6), sin(pi/6)) up to scale; this filter converts that into
    diag(cos(theta), sin(theta)).  At theta = pi/6 it is the identity and
    the element can be omitted.
    """
    c, s = cos(theta), sin(theta)
    if not (c > 0 and s > 0):
        raise ValueError("theta must lie strictly inside (0, pi/2)")
    f_h = min(1.0, c / (sqrt(3.0) * s))
    f_v = min(1.0, sqrt(3.0) * s / c)
    return f_h**2, f_v**2


def pipeline_elements(target: str, theta: float = pi / 6) -> tuple[OpticalElement, ...]:
    """The ordered element list preparing ``target`` ("psi4" or "psi6").

    The list starts from two entangled pairs on labels (1,2) and (3,4); for
    "psi6" the caller must also exchange labels 1 and 2 before the two
    ``pbs_expand`` elements (see ``methods_pipeline``), which is a reroute
    of outputs rather than an optical element.
    """
    t_h, t_v = weighting_transmissions(theta)
    b_h, b_v = balance_transmissions(theta)
    elements = [
        OpticalElement("pbc", "2", t_h=t_h, t_v=t_v),
        OpticalElement("pbc", "3", t_h=t_h, t_v=t_v),
        OpticalElement("pbc_overlap", "1", t_h=1.0, t_v=1.0 / 3.0, partner="4"),
        OpticalElement("pbc", "4", t_h=1.0 / 3.0, t_v=1.0),
        OpticalElement("pbc", "1", t_h=b_h, t_v=b_v),
    ]
    if target == "psi4":
        return tuple(elements)
    if target == "psi6":
        return tuple(
            elements
            + [
                OpticalElement("pbs_expand", "1", new_label="1p"),
                OpticalElement("pbs_expand", "3", new_label="3p"),
            ]
        )
    raise ValueError(f"unknown target {target!r} (expected 'psi4' or 'psi6')")


def methods_pipeline(
    target: str, theta: float = pi / 6
) -> tuple[StateVector, float]:
    """Run the full optical preparation and verify it against the builder.

    Returns the normalized output state (register ordered as the builder's)
    and the overall post-selection probability.  Raises if any stage
    annihilates the state or if the output fails to match the builder state
    (overlap modulus 1 within 1e-10).
    """
    state = entangled_pair("1", "2").tensor(entangled_pair("3", "4"))
    elements = pipeline_elements(target, theta)
    if target == "psi4":
        state, prob = apply_pipeline(state, elements)
        state = state.reorder(("1", "2", "3", "4"))
        reference = build_psi4(theta)
    else:
        # Optical elements up to the conditional phase, then the output
        # reroute (labels 1 and 2 exchange), then the path expansions.
        head, tail = elements[:5], elements[5:]
        state, prob = apply_pipeline(state, head)
        state = exchange_labels(state, "1", "2")
        state, p_tail = apply_pipeline(state, tail)
        prob *= p_tail
        state = state.reorder(PSI6_LABELS)
        reference = build_psi6(theta)
    if abs(qm.overlap_modulus(state, reference) - 1.0) > 1e-10:
        raise AssertionError("optical pipeline output does not match the builder")
    return state, float(prob)
