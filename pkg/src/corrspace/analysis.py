"""Correlation, entropy, and fidelity-witness diagnostics.

The six-qubit fidelity witness decomposes the target projector into 36
terms, each measurable in a single product setting of Pauli bases.  Two
variants of the term list exist: the literal tabulation (kept unmodified,
known defects and all, so its residual can be audited) and a corrected
variant (overall factor 1/2, five sign repairs, and four block repairs)
whose sum is the projector to rounding.  The decomposition is never
trusted silently — the residual against the directly-built projector is
always computed and reported.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import cos, pi, sin
from typing import Mapping, Sequence, Union

import numpy as np

from . import qmath as qm
from .noise_tomo import CountsTable, setting_kets
from .wires import build_psi6

State = Union[qm.StateVector, qm.DensityMatrix]

#: Qubit order used by witness settings strings (one letter per qubit).
WITNESS_ORDER = ("4", "3", "3p", "2", "1", "1p")

#: The 36 tabulated measurement settings (one per term), in WITNESS_ORDER.
TABULATED_SETTINGS = (
    "ZZZZZZ", "ZXXZZZ", "ZYYZZZ", "ZZZZXX", "ZXXZXX", "ZYYZXX",
    "ZZZZYY", "ZXXZYY", "ZYYZYY", "ZZZXZZ", "ZXXXZZ", "ZYYXZZ",
    "ZZZYXY", "ZXXYXY", "ZYYYXY", "ZZZYYX", "ZXXYYX", "ZYYYYX",
    "XZZZZZ", "XZZZXX", "XZZZYY", "XYXYZZ", "XYXXXY", "XYZXYX",
    "XXYYZZ", "XXYXXY", "XXYXYX", "YYXZZZ", "YYXZXX", "YYXZYY",
    "YXYZZZ", "YXYZXX", "YXYZYY", "YZZYZZ", "YZZXXY", "YZZXYX",
)

_LETTER_MATS = {"I": qm.I2, "X": qm.X, "Y": qm.Y, "Z": qm.Z}


# ---------------------------------------------------------------------------
# Two-point correlations
# ---------------------------------------------------------------------------

def _pauli_expectation(state: State, assignments: Mapping[str, str]) -> float:
    op = np.eye(2 ** len(state.labels), dtype=complex)
    for label, letter in assignments.items():
        op = op @ qm.embed(_LETTER_MATS[letter], state.labels, (label,))
    return state.expectation(op)


def two_point_correlation(state: State, i: str, j: str, a: str, b: str) -> float:
    """Connected correlator <a_i b_j> - <a_i><b_j> of two Pauli letters."""
    if i == j:
        raise ValueError("correlation requires two distinct qubits")
    for letter in (a, b):
        if letter not in ("X", "Y", "Z"):
            raise ValueError(f"unknown Pauli letter {letter!r}")
    joint = _pauli_expectation(state, {i: a, j: b})
    return joint - _pauli_expectation(state, {i: a}) * _pauli_expectation(state, {j: b})


def q_max(state: State, i: str, j: str) -> float:
    """Largest |two_point_correlation| over the nine Pauli letter pairs."""
    return max(
        abs(two_point_correlation(state, i, j, a, b))
        for a in ("X", "Y", "Z")
        for b in ("X", "Y", "Z")
    )


def linear_entropies(state: State) -> dict[str, float]:
    """Single-qubit linear entropy 2(1 - Tr rho_k^2) for every qubit."""
    return {
        label: qm.linear_entropy(qm.partial_trace(state, (label,)))
        for label in state.labels
    }


# ---------------------------------------------------------------------------
# Witness decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PauliWord:
    """A scalar multiple of a product of Pauli letters on named qubits."""

    labels: tuple[str, ...]
    letters: tuple[str, ...]
    coefficient: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "letters", tuple(self.letters))
        object.__setattr__(self, "coefficient", complex(self.coefficient))
        if len(self.labels) != len(self.letters):
            raise ValueError("one letter per label required")
        if any(l not in _LETTER_MATS for l in self.letters):
            raise ValueError("letters must be I, X, Y, or Z")
        if not np.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")

    def matrix(self) -> np.ndarray:
        out = np.array([[self.coefficient]], dtype=complex)
        for letter in self.letters:
            out = np.kron(out, _LETTER_MATS[letter])
        return out

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(
            lab for lab, let in zip(self.labels, self.letters) if let != "I"
        )


@dataclass(frozen=True)
class WitnessTerm:
    """One locally measurable term of the fidelity decomposition."""

    index: int
    words: tuple[PauliWord, ...]
    setting: str  # derived: the product basis this term is diagonal in

    def matrix(self) -> np.ndarray:
        return sum(w.matrix() for w in self.words)


@dataclass(frozen=True)
class SettingTable:
    """The measurement settings, one basis letter per qubit in WITNESS_ORDER."""

    entries: tuple[str, ...]
    qubit_order: tuple[str, ...] = WITNESS_ORDER

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        n = len(self.qubit_order)
        for e in self.entries:
            if len(e) != n or any(c not in "XYZ" for c in e):
                raise ValueError(f"bad setting string {e!r}")

    def __len__(self) -> int:
        return len(self.entries)


def witness_settings() -> SettingTable:
    """The 36 tabulated product-basis settings of the fidelity protocol."""
    return SettingTable(TABULATED_SETTINGS)


# Block helpers: every term is a product of per-qubit-group factors, each
# either a bare Pauli letter or a diagonal two-outcome block.  Diagonal
# blocks expand into I/Z words: a|0><0| + b|1><1| = (a+b)/2 I + (a-b)/2 Z,
# and a|00><00| + b|11><11| likewise over two qubits.

def _letter(label: str, letter: str) -> list[tuple[complex, dict[str, str]]]:
    return [(1.0 + 0j, {label: letter})]


def _single(label: str, a: complex, b: complex) -> list[tuple[complex, dict[str, str]]]:
    return [((a + b) / 2, {label: "I"}), ((a - b) / 2, {label: "Z"})]


def _pair(
    lab1: str, lab2: str, a: complex, b: complex
) -> list[tuple[complex, dict[str, str]]]:
    # a|00><00| + b|11><11| over (lab1, lab2)
    out = []
    for w1, l1 in ((0.5, "I"), (0.5, "Z")):
        for w2, l2 in ((0.5, "I"), (0.5, "Z")):
            minus = (0.5 if l1 == "I" else -0.5, 0.5 if l2 == "I" else -0.5)
            coeff = a * w1 * w2 + b * minus[0] * minus[1]
            out.append((coeff, {lab1: l1, lab2: l2}))
    return out


def _term_specs(theta: float, corrected: bool) -> list[tuple[float, list]]:
    """The 36 products (scalar, block list) of the fidelity decomposition."""
    c, s = cos(theta), sin(theta)
    c2, s2, cs = c * c, s * s, c * s
    half_cs = cs / 2.0
    half_c2s2 = c2 * s2 / 2.0

    def p33(sign: float = 1.0):
        return _pair("3", "3p", c2, sign * s2)

    def p11(sign: float = 1.0):
        return _pair("1", "1p", c2, sign * s2)

    def d2(a: float, b: float):
        return _single("2", a, b)

    L = _letter
    # The literal tabulation has nine defective terms.  The corrected variant
    # repairs them (assemble_witness adds the accompanying overall factor 1/2):
    #   term 2           - the (1,1p) block is c^2|00><00| - s^2|11><11|;
    #   terms 8,16,18,22 - the leading scalar carries a minus sign;
    #   terms 29-32      - the qubit-2 block is +/-(c^2|0><0| + s^2|1><1|),
    #                      i.e. the s^2 weight takes the c^2 weight's sign.
    fix = -1.0 if corrected else 1.0
    terms: list[tuple[float, list]] = [
        (1.0, [L("4", "I"), p33(), d2(c2, s2), p11()]),
        (cs, [L("4", "Z"), p33(), L("2", "X"), p11(fix)]),
        (half_cs, [L("4", "Z"), L("3", "X"), L("3p", "X"), d2(c2, s2), p11()]),
        (half_cs, [L("4", "I"), p33(), d2(-c2, s2), L("1", "Y"), L("1p", "Y")]),
        (half_cs, [L("4", "I"), p33(), d2(c2, -s2), L("1", "X"), L("1p", "X")]),
        (-half_cs, [L("4", "Z"), L("3", "Y"), L("3p", "Y"), d2(c2, s2), p11()]),
        (half_cs * cs, [L("4", "I"), L("3", "X"), L("3p", "X"), L("2", "X"), p11(-1.0)]),
        (fix * half_cs * cs, [L("4", "I"), L("3", "Y"), L("3p", "Y"), L("2", "X"), p11(-1.0)]),
        (half_c2s2, [L("4", "Z"), p33(), L("2", "Y"), L("1", "X"), L("1p", "Y")]),
        (half_c2s2, [L("4", "Z"), p33(), L("2", "Y"), L("1", "Y"), L("1p", "X")]),
        (half_cs * half_cs, [L("4", "Z"), L("3", "X"), L("3p", "X"), d2(c2, -s2), L("1", "X"), L("1p", "X")]),
        (half_cs * half_cs, [L("4", "Z"), L("3", "Y"), L("3p", "Y"), d2(-c2, s2), L("1", "X"), L("1p", "X")]),
        (half_cs * half_cs, [L("4", "Z"), L("3", "X"), L("3p", "X"), d2(-c2, s2), L("1", "Y"), L("1p", "Y")]),
        (half_cs * half_cs, [L("4", "Z"), L("3", "Y"), L("3p", "Y"), d2(c2, -s2), L("1", "Y"), L("1p", "Y")]),
        (half_cs * half_c2s2, [L("4", "I"), L("3", "X"), L("3p", "X"), L("2", "Y"), L("1", "X"), L("1p", "Y")]),
        (fix * half_cs * half_c2s2, [L("4", "I"), L("3", "Y"), L("3p", "Y"), L("2", "Y"), L("1", "X"), L("1p", "Y")]),
        (half_cs * half_c2s2, [L("4", "I"), L("3", "X"), L("3p", "X"), L("2", "Y"), L("1", "Y"), L("1p", "X")]),
        (fix * half_cs * half_c2s2, [L("4", "I"), L("3", "Y"), L("3p", "Y"), L("2", "Y"), L("1", "Y"), L("1p", "X")]),
        (1.0, [L("4", "X"), p33(-1.0), d2(c2, -s2), p11()]),
        (cs, [L("4", "Y"), p33(-1.0), L("2", "Y"), p11(-1.0)]),
        (half_cs, [L("4", "X"), p33(-1.0), d2(c2, s2), L("1", "X"), L("1p", "X")]),
        (fix * half_cs, [L("4", "X"), p33(-1.0), d2(c2, s2), L("1", "Y"), L("1p", "Y")]),
        (half_cs, [L("4", "Y"), L("3", "X"), L("3p", "Y"), d2(c2, -s2), p11()]),
        (half_cs, [L("4", "Y"), L("3", "Y"), L("3p", "X"), d2(c2, -s2), p11()]),
        (half_c2s2, [L("4", "Y"), _pair("3", "3p", -c2, s2), L("2", "X"), L("1", "X"), L("1p", "Y")]),
        (half_c2s2, [L("4", "Y"), _pair("3", "3p", -c2, s2), L("2", "X"), L("1", "Y"), L("1p", "X")]),
        (half_cs * cs, [L("4", "X"), L("3", "X"), L("3p", "Y"), L("2", "Y"), _pair("1", "1p", -c2, s2)]),
        (half_cs * cs, [L("4", "X"), L("3", "Y"), L("3p", "X"), L("2", "Y"), _pair("1", "1p", -c2, s2)]),
        (half_cs * half_cs, [L("4", "Y"), L("3", "Y"), L("3p", "X"), d2(-c2, fix * s2), L("1", "Y"), L("1p", "Y")]),
        (half_cs * half_cs, [L("4", "Y"), L("3", "Y"), L("3p", "X"), d2(c2, -fix * s2), L("1", "X"), L("1p", "X")]),
        (half_cs * half_cs, [L("4", "Y"), L("3", "X"), L("3p", "Y"), d2(c2, -fix * s2), L("1", "X"), L("1p", "X")]),
        (half_cs * half_cs, [L("4", "Y"), L("3", "X"), L("3p", "Y"), d2(-c2, fix * s2), L("1", "Y"), L("1p", "Y")]),
        (half_cs * half_c2s2, [L("4", "X"), L("3", "Y"), L("3p", "X"), L("2", "X"), L("1", "X"), L("1p", "Y")]),
        (half_cs * half_c2s2, [L("4", "X"), L("3", "Y"), L("3p", "X"), L("2", "X"), L("1", "Y"), L("1p", "X")]),
        (half_cs * half_c2s2, [L("4", "X"), L("3", "X"), L("3p", "Y"), L("2", "X"), L("1", "X"), L("1p", "Y")]),
        (half_cs * half_c2s2, [L("4", "X"), L("3", "X"), L("3p", "Y"), L("2", "X"), L("1", "Y"), L("1p", "X")]),
    ]
    if len(terms) != 36:
        raise AssertionError("expected 36 terms")
    return terms


def _expand_term(index: int, coeff: float, blocks: list) -> WitnessTerm:
    words: list[PauliWord] = []
    for combo in itertools.product(*blocks):
        w_coeff = complex(coeff)
        letters = {lab: "I" for lab in WITNESS_ORDER}
        for block_coeff, assignment in combo:
            w_coeff *= block_coeff
            letters.update(assignment)
        if abs(w_coeff) < 1e-300:
            continue
        words.append(
            PauliWord(WITNESS_ORDER, tuple(letters[l] for l in WITNESS_ORDER), w_coeff)
        )
    # Derived setting: Z wherever the term is diagonal, else its unique letter.
    setting = []
    for pos, lab in enumerate(WITNESS_ORDER):
        used = {w.letters[pos] for w in words} - {"I"}
        if used <= {"Z"}:
            setting.append("Z")
        elif len(used) == 1:
            setting.append(used.pop())
        else:
            raise AssertionError(f"term {index} mixes letters {used} on {lab}")
    return WitnessTerm(index, tuple(words), "".join(setting))


def witness_terms(theta: float = pi / 6, corrected: bool = False) -> tuple[WitnessTerm, ...]:
    """The 36 decomposition terms (literal transcription by default)."""
    return tuple(
        _expand_term(i + 1, coeff, blocks)
        for i, (coeff, blocks) in enumerate(_term_specs(theta, corrected))
    )


@dataclass(frozen=True)
class WitnessReport:
    """Sum of the decomposition terms and its residual diagnostics."""

    total: np.ndarray  # 64x64 operator on WITNESS_ORDER
    residual_maxabs: float
    residual_opnorm: float
    best_scale: float  # scalar minimizing ||scale*total - projector||_F
    corrected: bool
    term_expectations: tuple[float, ...]  # <psi6|M_i|psi6>
    derived_settings: tuple[str, ...]
    unmatched_tabulated: tuple[str, ...]
    unmatched_terms: tuple[int, ...]

    def to_json_dict(self) -> dict:
        return {
            "corrected": self.corrected,
            "residual_maxabs": float(self.residual_maxabs),
            "residual_opnorm": float(self.residual_opnorm),
            "best_scale": float(self.best_scale),
            "term_expectations": [float(v) for v in self.term_expectations],
            "derived_settings": list(self.derived_settings),
            "unmatched_tabulated_settings": list(self.unmatched_tabulated),
            "terms_without_tabulated_setting": list(self.unmatched_terms),
        }


def _projector(theta: float) -> np.ndarray:
    psi = build_psi6(theta).reorder(WITNESS_ORDER)
    return np.outer(psi.amps, np.conj(psi.amps))


def assemble_witness(theta: float = pi / 6, corrected: bool = False) -> WitnessReport:
    """Sum the 36 terms and report the residual against the target projector.

    With ``corrected=False`` the terms are the literal tabulation; its sum
    is twice the projector (a dropped factor 1/2) plus the nine term defects
    listed in ``_term_specs``, and all of that shows up in the residual.
    ``corrected=True`` applies the factor 1/2 and the term repairs, after
    which the residual is at rounding level.
    """
    terms = witness_terms(theta, corrected)
    total = sum(t.matrix() for t in terms)
    if corrected:
        total = total / 2.0
    proj = _projector(theta)
    delta = total - proj
    residual_maxabs = float(np.max(np.abs(delta)))
    residual_opnorm = float(np.linalg.norm(delta, 2))
    denom = float(np.real(np.vdot(total, total)))
    best_scale = float(np.real(np.vdot(total, proj)) / denom) if denom > 0 else 0.0
    psi = build_psi6(theta).reorder(WITNESS_ORDER)
    expectations = tuple(psi.expectation(t.matrix()) for t in terms)

    tabulated = list(TABULATED_SETTINGS)
    unmatched_terms = []
    for t in terms:
        if t.setting in tabulated:
            tabulated.remove(t.setting)
        else:
            unmatched_terms.append(t.index)
    return WitnessReport(
        total=total,
        residual_maxabs=residual_maxabs,
        residual_opnorm=residual_opnorm,
        best_scale=best_scale,
        corrected=corrected,
        term_expectations=expectations,
        derived_settings=tuple(t.setting for t in terms),
        unmatched_tabulated=tuple(tabulated),
        unmatched_terms=tuple(unmatched_terms),
    )


# ---------------------------------------------------------------------------
# Fidelity from per-setting measurement data
# ---------------------------------------------------------------------------

def exact_setting_cells(
    state: State, settings: Sequence[str] | None = None
) -> dict[str, np.ndarray]:
    """Exact outcome-cell probabilities per setting, keyed by setting string.

    The state is reordered to WITNESS_ORDER; cell index bits follow the
    setting string (first letter = most significant bit).
    """
    if settings is None:
        settings = sorted({t.setting for t in witness_terms()})
    reordered = state.reorder(WITNESS_ORDER)
    rho = reordered.to_density() if isinstance(reordered, qm.StateVector) else reordered
    out = {}
    for s in settings:
        kets = setting_kets(s)
        p = np.real(np.einsum("od,de,oe->o", np.conj(kets), rho.mat, kets))
        out[s] = np.clip(p, 0.0, None)
    return out


def counts_to_cells(counts: CountsTable) -> dict[str, np.ndarray]:
    """Normalize a counts table into per-setting relative frequencies."""
    if tuple(counts.labels) != WITNESS_ORDER:
        raise ValueError(f"counts table must be over qubits {WITNESS_ORDER}")
    out = {}
    for s, row in zip(counts.settings, counts.counts):
        total = row.sum()
        if total <= 0:
            raise ValueError(f"setting {s} has no counts")
        out[s] = row.astype(float) / total
    return out


def _word_expectation_from_cells(word: PauliWord, cells: np.ndarray) -> float:
    n = len(word.labels)
    value = 0.0
    for cell, p in enumerate(cells):
        parity = 1.0
        for pos in range(n):
            if word.letters[pos] != "I" and (cell >> (n - 1 - pos)) & 1:
                parity = -parity
        value += parity * p
    return value


def fidelity_from_settings(
    cell_data: Mapping[str, Sequence[float]],
    *,
    theta: float = pi / 6,
    corrected: bool = False,
) -> float:
    """Fidelity estimate assembled purely from per-setting outcome cells.

    ``cell_data`` maps each required setting string (WITNESS_ORDER letters)
    to its 2^6 outcome-cell relative frequencies.  Every term is evaluated
    from its own setting's cells via parity sums — exactly how the value is
    extracted from coincidence counts.  With exact cell probabilities this
    equals Tr(rho * sum M_i) up to rounding (i.e. the target fidelity plus
    the decomposition residual's contribution).
    """
    terms = witness_terms(theta, corrected)
    total = 0.0
    for term in terms:
        if term.setting not in cell_data:
            raise KeyError(f"missing setting {term.setting} for term {term.index}")
        cells = np.asarray(cell_data[term.setting], dtype=float)
        if cells.shape != (64,):
            raise ValueError(f"setting {term.setting}: expected 64 cells")
        total += sum(
            float(np.real(w.coefficient)) * _word_expectation_from_cells(w, cells)
            for w in term.words
        )
    if corrected:
        total /= 2.0
    return float(total)
