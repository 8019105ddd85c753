"""White-noise models, synthetic counts, and maximum-likelihood tomography.

Settings are strings of per-qubit Pauli letters (e.g. "ZXZY"), one letter
per register qubit; each setting yields 2^n outcome cells corresponding to
the +/- eigenstate products.  The default informationally (over-)complete
set is the full 3^n product grid, whose cells enumerate exactly the
6^n per-qubit projector combinations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import qmath as qm
from .measurement import pauli_basis

State = Union[qm.StateVector, qm.DensityMatrix]

_LETTERS = ("Z", "X", "Y")


def white_noise(
    state: qm.StateVector,
    fidelity_target: float | None = None,
    *,
    weight: float | None = None,
) -> qm.DensityMatrix:
    """Mix a pure state with the maximally mixed state.

    rho = w |psi><psi| + (1 - w) I / 2^n.  Specify either the mixing
    ``weight`` w directly or the desired ``fidelity_target``
    <psi|rho|psi> = w + (1 - w)/2^n, which must exceed the mixed floor
    1/2^n.
    """
    if (fidelity_target is None) == (weight is None):
        raise ValueError("provide exactly one of fidelity_target or weight")
    n = state.n_qubits
    dim = 2**n
    if weight is None:
        floor = 1.0 / dim
        if not floor < fidelity_target <= 1.0:
            raise ValueError(
                f"fidelity target must lie in ({floor:.6g}, 1] for {n} qubits"
            )
        weight = (dim * fidelity_target - 1.0) / (dim - 1.0)
    if not 0.0 <= weight <= 1.0:
        raise ValueError("mixing weight must lie in [0, 1]")
    psi, _ = state.normalized()
    mat = weight * np.outer(psi.amps, np.conj(psi.amps)) + (1.0 - weight) * np.eye(
        dim
    ) / dim
    return qm.DensityMatrix(state.labels, mat)


def product_settings(
    n_qubits: int, letters: Sequence[str] = _LETTERS
) -> tuple[str, ...]:
    """All product settings over the given letters (default 3^n grid)."""
    return tuple("".join(p) for p in itertools.product(letters, repeat=n_qubits))


def setting_kets(setting: str) -> np.ndarray:
    """(2^n, 2^n) array whose row o is the product ket of outcome cell o.

    Bit k of the cell index (MSB first, matching the setting string) selects
    eigenstate 0 (+1) or 1 (-1) of that qubit's letter.
    """
    bases = [pauli_basis(letter) for letter in setting]
    rows = np.ones((1, 1), dtype=complex)
    out = None
    for b in bases:
        pair = np.stack([b.ket0, b.ket1])  # (2, 2)
        if out is None:
            out = pair
        else:
            # kron over both the outcome index and the amplitude index
            out = np.einsum("oi,pj->opij", out, pair).reshape(
                out.shape[0] * 2, out.shape[1] * 2
            )
    return out


@dataclass(frozen=True)
class CountsTable:
    """Measurement records: one row of 2^n outcome-cell counts per setting."""

    labels: tuple[str, ...]
    settings: tuple[str, ...]
    counts: np.ndarray  # (n_settings, 2^n) nonnegative integers
    shots: int
    mode: str = "multinomial"

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "settings", tuple(self.settings))
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        n = len(self.labels)
        if any(len(s) != n for s in self.settings):
            raise ValueError("every setting must have one letter per qubit")
        if counts.shape != (len(self.settings), 2**n):
            raise ValueError("counts array shape does not match settings/register")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        if self.mode not in ("multinomial", "poisson"):
            raise ValueError("mode must be 'multinomial' or 'poisson'")
        if self.mode == "multinomial" and np.any(counts.sum(axis=1) != self.shots):
            raise ValueError("multinomial counts must sum to shots per setting")

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def to_json_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "settings": list(self.settings),
            "counts": self.counts.tolist(),
            "shots": int(self.shots),
            "mode": self.mode,
        }

    def to_csv_rows(self) -> list[tuple[str, int, int]]:
        """(setting, outcome-cell index, count) triples."""
        rows = []
        for s, row in zip(self.settings, self.counts):
            for o, c in enumerate(row):
                rows.append((s, o, int(c)))
        return rows

    @classmethod
    def from_json_dict(cls, data: dict) -> "CountsTable":
        """Inverse of :meth:`to_json_dict` (extra keys rejected)."""
        known = {"labels", "settings", "counts", "shots", "mode"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown counts fields {sorted(extra)}")
        return cls(
            labels=tuple(data["labels"]),
            settings=tuple(data["settings"]),
            counts=np.asarray(data["counts"], dtype=np.int64),
            shots=int(data["shots"]),
            mode=data.get("mode", "multinomial"),
        )


def exact_probabilities(rho: State, settings: Sequence[str]) -> np.ndarray:
    """Born probabilities of every outcome cell: shape (n_settings, 2^n)."""
    if isinstance(rho, qm.StateVector):
        rho = rho.to_density()
    out = np.empty((len(settings), 2**rho.n_qubits))
    for i, s in enumerate(settings):
        kets = setting_kets(s)
        out[i] = np.real(np.einsum("od,de,oe->o", np.conj(kets), rho.mat, kets))
    np.clip(out, 0.0, None, out=out)
    return out


def simulate_counts(
    rho: State,
    settings: Sequence[str] | None = None,
    shots: int = 1000,
    seed: int | None = None,
    mode: str = "multinomial",
    rng: np.random.Generator | None = None,
) -> CountsTable:
    """Draw synthetic outcome counts for each setting.

    multinomial mode draws a single multinomial of size ``shots`` per
    setting; poisson mode draws each cell independently with mean
    shots * p(cell).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    labels = rho.labels
    if settings is None:
        settings = product_settings(len(labels))
    if rng is None:
        rng = np.random.default_rng(seed)
    probs = exact_probabilities(rho, settings)
    counts = np.empty_like(probs, dtype=np.int64)
    for i, p in enumerate(probs):
        p = p / p.sum()
        if mode == "multinomial":
            counts[i] = rng.multinomial(shots, p)
        elif mode == "poisson":
            counts[i] = rng.poisson(shots * p)
        else:
            raise ValueError("mode must be 'multinomial' or 'poisson'")
    return CountsTable(labels, tuple(settings), counts, shots, mode)


@dataclass(frozen=True)
class ReconstructionResult:
    """Output of the maximum-likelihood reconstruction."""

    rho: qm.DensityMatrix
    log_likelihood: float
    iterations: int
    fidelity_to_target: float | None = None
    fidelity_sigma: float | None = None
    informationally_complete: bool = True

    def __post_init__(self) -> None:
        eigs = np.linalg.eigvalsh(self.rho.mat)
        if eigs.min() < -1e-10:
            raise ValueError("reconstructed state must be PSD within 1e-10")
        if abs(self.rho.trace - 1.0) > 1e-9:
            raise ValueError("reconstructed state must have unit trace within 1e-9")

    def to_json_dict(self) -> dict:
        return {
            "labels": list(self.rho.labels),
            "rho": [
                [[float(v.real), float(v.imag)] for v in row] for row in self.rho.mat
            ],
            "log_likelihood": float(self.log_likelihood),
            "iterations": int(self.iterations),
            "fidelity_to_target": None
            if self.fidelity_to_target is None
            else float(self.fidelity_to_target),
            "fidelity_sigma": None
            if self.fidelity_sigma is None
            else float(self.fidelity_sigma),
            "informationally_complete": bool(self.informationally_complete),
        }


def _measurement_matrix(counts: CountsTable) -> np.ndarray:
    """Stack all outcome-cell kets: shape (n_settings * 2^n, 2^n)."""
    blocks = [setting_kets(s) for s in counts.settings]
    return np.concatenate(blocks, axis=0)


def _informationally_complete(kets: np.ndarray, dim: int) -> bool:
    vecs = np.einsum("od,oe->ode", kets, np.conj(kets)).reshape(kets.shape[0], dim * dim)
    return np.linalg.matrix_rank(vecs, tol=1e-9) == dim * dim


def _log_likelihood(freq: np.ndarray, probs: np.ndarray, shots: int, mode: str) -> float:
    good = freq > 0
    ll = float(np.sum(freq[good] * np.log(probs[good])))
    if mode == "poisson":
        # cells enter independently: sum f log(mu) - mu with mu = shots * p
        ll = float(
            np.sum(freq[good] * np.log(shots * probs[good])) - shots * probs.sum()
        )
    return ll


def ml_reconstruct(
    counts: CountsTable,
    target: qm.StateVector | None = None,
    *,
    max_iters: int = 10_000,
    tol: float = 1e-9,
    dilution: float = 0.5,
    init: np.ndarray | None = None,
) -> ReconstructionResult:
    """Maximum-likelihood density matrix from outcome counts.

    Iterates the fixed-point update rho -> R rho R (R built from observed
    over predicted frequencies), falling back to a diluted step
    (I + lam R) rho (I + lam R) with shrinking lam whenever the full step
    would decrease the likelihood; accepted iterations are therefore
    monotone.  Stops when the likelihood gain drops below ``tol`` or after
    ``max_iters`` iterations.  The iterates are PSD by construction; the
    final matrix is eigenvalue-clipped at 0 and renormalized.  ``init``
    (default maximally mixed) must be a full-rank density matrix so the
    iteration can reach the global optimum.
    """
    dim = 2**counts.n_qubits
    kets = _measurement_matrix(counts)
    kets_c = np.conj(kets)
    freq = counts.counts.reshape(-1).astype(float)
    total = freq.sum()
    if total <= 0:
        raise ValueError("counts table is empty")
    complete = _informationally_complete(kets, dim)

    if init is None:
        rho = np.eye(dim, dtype=complex) / dim
    else:
        rho = np.asarray(init, dtype=complex)
        rho = rho / np.real(np.trace(rho))

    def probs_of(r: np.ndarray) -> np.ndarray:
        p = np.real(np.sum((kets_c @ r) * kets, axis=1))
        return np.clip(p, 1e-300, None)

    def r_operator(p: np.ndarray) -> np.ndarray:
        w = freq / (total * p)
        return (kets * w[:, None]).T @ kets_c

    p = probs_of(rho)
    ll = _log_likelihood(freq, p, counts.shots, counts.mode)
    iters = 0
    for iters in range(1, max_iters + 1):
        R = r_operator(p)
        cand = R @ rho @ R
        cand /= np.real(np.trace(cand))
        p_cand = probs_of(cand)
        ll_cand = _log_likelihood(freq, p_cand, counts.shots, counts.mode)
        if ll_cand < ll:
            lam = dilution
            improved = False
            while lam > 1e-6:
                G = (np.eye(dim) + lam * R) / (1.0 + lam)
                cand = G @ rho @ G.conj().T
                cand /= np.real(np.trace(cand))
                p_cand = probs_of(cand)
                ll_cand = _log_likelihood(freq, p_cand, counts.shots, counts.mode)
                if ll_cand >= ll:
                    improved = True
                    break
                lam *= 0.5
            if not improved:
                break
        gain = ll_cand - ll
        rho, p, ll = cand, p_cand, ll_cand
        if gain < tol:
            break

    # Defensive PSD clip (fixed-point iterates are already PSD up to rounding).
    vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    vals = np.clip(vals, 0.0, None)
    rho = (vecs * vals) @ vecs.conj().T
    rho /= np.real(np.trace(rho))
    dm = qm.DensityMatrix(counts.labels, rho)
    fid = None if target is None else qm.fidelity(dm, target)
    return ReconstructionResult(
        rho=dm,
        log_likelihood=ll,
        iterations=iters,
        fidelity_to_target=fid,
        informationally_complete=complete,
    )


def monte_carlo_error(
    counts: CountsTable,
    target: qm.StateVector,
    runs: int = 100,
    seed: int | None = None,
    *,
    max_iters: int = 10_000,
    tol: float = 1e-9,
) -> tuple[float, float]:
    """Poisson-resampled repetition of the whole reconstruction.

    Each run replaces every count cell by a Poisson draw with that cell's
    observed mean and reruns the reconstruction; returns the sample mean
    and standard deviation of the fidelity to ``target``.  Run seeds are
    derived deterministically from ``seed``.  Runs are warm-started from
    the point estimate (blended with a little of the identity to stay
    full rank), which leaves each run's optimum unchanged but saves most
    of the burn-in iterations.
    """
    if runs < 2:
        raise ValueError("runs must be >= 2")
    dim = 2**counts.n_qubits
    base = ml_reconstruct(counts, max_iters=max_iters, tol=tol)
    warm = 0.99 * base.rho.mat + 0.01 * np.eye(dim) / dim
    children = np.random.SeedSequence(seed).spawn(runs)
    fids = np.empty(runs)
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        resampled = CountsTable(
            counts.labels,
            counts.settings,
            rng.poisson(counts.counts),
            counts.shots,
            mode="poisson",
        )
        res = ml_reconstruct(
            resampled, target, max_iters=max_iters, tol=tol, init=warm
        )
        fids[i] = res.fidelity_to_target
    return float(fids.mean()), float(fids.std(ddof=1))
