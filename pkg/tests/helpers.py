"""Shared test utilities: random states and independent brute-force references.

The reference implementations here deliberately avoid the library's own
vectorized code paths (they loop over basis states and bits) so that tests
compare two genuinely different computations.
"""

from __future__ import annotations

import numpy as np

from corrspace import qmath as qm


def rand_state(labels, rng) -> qm.StateVector:
    """Haar-ish random pure state on the given labels."""
    n = len(labels)
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return qm.StateVector(tuple(labels), amps / np.linalg.norm(amps))


def rand_density(labels, rng) -> qm.DensityMatrix:
    """Random full-rank density matrix on the given labels."""
    d = 2 ** len(labels)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = a @ a.conj().T
    return qm.DensityMatrix(tuple(labels), m / np.real(np.trace(m)))


def rand_unitary(rng, dim: int = 2) -> np.ndarray:
    """Random unitary via QR of a complex Gaussian matrix."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def manual_embed(op: np.ndarray, labels, targets) -> np.ndarray:
    """Bit-by-bit reference for lifting an operator onto a full register."""
    labels = list(labels)
    n = len(labels)
    dim = 2**n
    t_pos = [labels.index(t) for t in targets]
    k = len(t_pos)
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - j)) & 1 for j in range(n)]
        t_in = 0
        for t in t_pos:
            t_in = (t_in << 1) | bits[t]
        for t_out in range(2**k):
            a = op[t_out, t_in]
            if a == 0:
                continue
            new_bits = bits.copy()
            for m, t in enumerate(t_pos):
                new_bits[t] = (t_out >> (k - 1 - m)) & 1
            row = 0
            for b in new_bits:
                row = (row << 1) | b
            out[row, col] += a
    return out


def brute_wire_amplitudes(wire) -> np.ndarray:
    """Sum over all outcome strings: amp[s1..sn] = <r| T[sn]...T[s1] |l>."""
    n = wire.n_sites
    amps = np.zeros(2**n, dtype=complex)
    for idx in range(2**n):
        bits = [(idx >> (n - 1 - k)) & 1 for k in range(n)]
        vec = wire.left.copy()
        for site, s in zip(wire.sites, bits):
            vec = site.matrix(s) @ vec
        amps[idx] = np.conj(wire.right) @ vec
    return amps


def overlap2(a: np.ndarray, b: np.ndarray) -> float:
    """Squared overlap of two unnormalized vectors."""
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    return abs(np.vdot(a / np.linalg.norm(a), b / np.linalg.norm(b))) ** 2
