"""White-noise models, synthetic counts, and ML tomography."""

import numpy as np
import pytest

from corrspace import qmath as qm
from corrspace.noise_tomo import (
    CountsTable,
    ReconstructionResult,
    exact_probabilities,
    ml_reconstruct,
    monte_carlo_error,
    product_settings,
    setting_kets,
    simulate_counts,
    white_noise,
)
from corrspace.wires import build_psi4, lambda34

TOL = 1e-12


# ---------------------------------------------------------------------------
# White-noise mixtures
# ---------------------------------------------------------------------------

def test_white_noise_by_fidelity_target():
    pure = lambda34()
    rho = white_noise(pure, 0.90)
    assert abs(rho.trace - 1.0) < TOL
    assert abs(qm.fidelity(rho, pure) - 0.90) < TOL
    w = (4 * 0.90 - 1) / 3
    direct = w * pure.to_density().mat + (1 - w) * np.eye(4) / 4
    assert np.allclose(rho.mat, direct, atol=1e-14)


def test_white_noise_by_weight():
    pure = lambda34()
    rho = white_noise(pure, weight=0.5)
    direct = 0.5 * pure.to_density().mat + 0.5 * np.eye(4) / 4
    assert np.allclose(rho.mat, direct, atol=1e-14)


def test_white_noise_limits_and_validation():
    pure = lambda34()
    assert np.allclose(white_noise(pure, 1.0).mat, pure.to_density().mat, atol=1e-14)
    assert np.allclose(white_noise(pure, weight=0.0).mat, np.eye(4) / 4, atol=1e-14)
    with pytest.raises(ValueError):
        white_noise(pure, 0.25)  # at the mixed floor
    with pytest.raises(ValueError):
        white_noise(pure, 0.9, weight=0.9)
    with pytest.raises(ValueError):
        white_noise(pure)
    with pytest.raises(ValueError):
        white_noise(pure, weight=1.5)


# ---------------------------------------------------------------------------
# Settings and outcome kets
# ---------------------------------------------------------------------------

def test_product_settings_grid():
    assert len(product_settings(4)) == 81
    assert len(product_settings(2)) == 9
    assert product_settings(2)[0] == "ZZ"
    assert product_settings(1, letters=("X",)) == ("X",)


def test_setting_kets_orthonormal_and_complete():
    for s in ("ZX", "YY", "XZ"):
        kets = setting_kets(s)
        assert np.allclose(kets @ kets.conj().T, np.eye(4), atol=TOL)
        comp = sum(np.outer(k, k.conj()) for k in kets)
        assert np.allclose(comp, np.eye(4), atol=TOL)


def test_setting_kets_bit_convention():
    # cell bits are MSB-first in the setting string: cell 1 of "ZX" is
    # (Z outcome 0) x (X outcome 1) = |0> x |->
    kets = setting_kets("ZX")
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    assert np.allclose(kets[1], np.kron(np.array([1, 0]), minus), atol=TOL)
    assert np.allclose(kets[2], np.kron(np.array([0, 1]), plus), atol=TOL)


def test_exact_probabilities_rows_normalized():
    p = exact_probabilities(build_psi4(), product_settings(4))
    assert p.shape == (81, 16)
    assert np.allclose(p.sum(axis=1), 1.0, atol=TOL)
    assert np.all(p >= 0)
    # pure-state and density-matrix paths agree
    p2 = exact_probabilities(build_psi4().to_density(), product_settings(4))
    assert np.allclose(p, p2, atol=TOL)


# ---------------------------------------------------------------------------
# Synthetic counts
# ---------------------------------------------------------------------------

def test_deterministic_state_gives_deterministic_counts():
    h = qm.StateVector(("a",), np.array([1, 0], dtype=complex))
    table = simulate_counts(h, ("Z",), shots=1000, seed=1)
    assert tuple(table.counts[0]) == (1000, 0)


def test_multinomial_rows_sum_to_shots():
    table = simulate_counts(lambda34(), shots=500, seed=2)
    assert table.settings == product_settings(2)  # default full grid
    assert np.all(table.counts.sum(axis=1) == 500)
    assert table.mode == "multinomial"


def test_counts_seed_determinism():
    a = simulate_counts(lambda34(), shots=1000, seed=9)
    b = simulate_counts(lambda34(), shots=1000, seed=9)
    assert np.array_equal(a.counts, b.counts)
    c = simulate_counts(lambda34(), shots=1000, rng=np.random.default_rng(9))
    assert np.array_equal(a.counts, c.counts)


def test_poisson_mode():
    table = simulate_counts(lambda34(), shots=1000, seed=3, mode="poisson")
    assert table.mode == "poisson"
    # row totals fluctuate around shots but are not pinned to it
    assert np.any(table.counts.sum(axis=1) != 1000)
    with pytest.raises(ValueError):
        simulate_counts(lambda34(), shots=10, seed=1, mode="gaussian")
    with pytest.raises(ValueError):
        simulate_counts(lambda34(), shots=0, seed=1)


def test_counts_table_validation():
    good = simulate_counts(lambda34(), ("ZZ", "XX"), shots=10, seed=4)
    assert good.n_qubits == 2
    with pytest.raises(ValueError):
        CountsTable(("a", "b"), ("ZZZ",), np.zeros((1, 4), dtype=int), 0)
    with pytest.raises(ValueError):
        CountsTable(("a", "b"), ("ZZ",), np.zeros((1, 8), dtype=int), 0)
    with pytest.raises(ValueError):
        CountsTable(("a", "b"), ("ZZ",), -np.ones((1, 4), dtype=int), 0)
    with pytest.raises(ValueError):
        CountsTable(("a", "b"), ("ZZ",), np.ones((1, 4), dtype=int), 4, mode="bogus")
    with pytest.raises(ValueError):
        CountsTable(("a", "b"), ("ZZ",), np.ones((1, 4), dtype=int), 5)


def test_counts_table_json_round_trip():
    table = simulate_counts(lambda34(), ("ZX", "YY"), shots=50, seed=6)
    data = table.to_json_dict()
    back = CountsTable.from_json_dict(data)
    assert back.labels == table.labels
    assert back.settings == table.settings
    assert np.array_equal(back.counts, table.counts)
    assert back.shots == table.shots and back.mode == table.mode
    data["surprise"] = 1
    with pytest.raises(ValueError):
        CountsTable.from_json_dict(data)


def test_counts_table_csv_rows():
    table = simulate_counts(lambda34(), ("ZZ",), shots=20, seed=7)
    rows = table.to_csv_rows()
    assert len(rows) == 4
    assert rows[0][0] == "ZZ" and [r[1] for r in rows] == [0, 1, 2, 3]
    assert sum(r[2] for r in rows) == 20


# ---------------------------------------------------------------------------
# Maximum-likelihood reconstruction
# ---------------------------------------------------------------------------

def test_reconstruct_two_qubit_noiseless():
    target = lambda34()
    table = simulate_counts(target, product_settings(2), shots=100_000, seed=11)
    res = ml_reconstruct(table, target)
    assert res.informationally_complete
    assert res.fidelity_to_target >= 0.99
    assert res.iterations >= 1
    assert abs(res.rho.trace - 1.0) < 1e-9


def test_reconstruct_flags_incomplete_settings():
    table = simulate_counts(lambda34(), ("ZZ", "ZX"), shots=1000, seed=3)
    res = ml_reconstruct(table)
    assert not res.informationally_complete
    assert res.fidelity_to_target is None


def test_reconstruct_maximally_mixed():
    mixed = qm.DensityMatrix(("a", "b"), np.eye(4) / 4)
    table = simulate_counts(mixed, product_settings(2), shots=100_000, seed=5)
    res = ml_reconstruct(table)
    eigs = np.linalg.eigvalsh(res.rho.mat)
    assert np.all(np.abs(eigs - 0.25) < 0.01)


def test_reconstruct_poisson_counts():
    target = lambda34()
    table = simulate_counts(
        target, product_settings(2), shots=20_000, seed=13, mode="poisson"
    )
    res = ml_reconstruct(table, target)
    assert res.fidelity_to_target >= 0.98


def test_reconstruct_white_noise_weight():
    rho = white_noise(lambda34(), weight=0.7)
    table = simulate_counts(rho, product_settings(2), shots=200_000, seed=14)
    res = ml_reconstruct(table, lambda34())
    want = 0.7 + (1 - 0.7) / 4
    assert abs(res.fidelity_to_target - want) < 0.01


def test_reconstruct_empty_counts_rejected():
    table = CountsTable(("a",), ("Z",), np.zeros((1, 2), dtype=int), 0)
    with pytest.raises(ValueError):
        ml_reconstruct(table)


def test_reconstruction_result_validation():
    not_psd = qm.DensityMatrix(("a", "b"), np.diag([1.5, -0.5, 0, 0]).astype(complex))
    with pytest.raises(ValueError):
        ReconstructionResult(rho=not_psd, log_likelihood=0.0, iterations=1)
    wrong_trace = qm.DensityMatrix(("a", "b"), np.eye(4, dtype=complex) / 2)
    with pytest.raises(ValueError):
        ReconstructionResult(rho=wrong_trace, log_likelihood=0.0, iterations=1)
    dm = qm.DensityMatrix(("a", "b"), np.eye(4) / 4)
    res = ReconstructionResult(rho=dm, log_likelihood=-1.0, iterations=3)
    d = res.to_json_dict()
    assert d["iterations"] == 3
    assert d["fidelity_to_target"] is None
    assert d["informationally_complete"] is True
    assert len(d["rho"]) == 4


# ---------------------------------------------------------------------------
# Monte Carlo error bars
# ---------------------------------------------------------------------------

def test_monte_carlo_error_deterministic_and_sane():
    target = lambda34()
    table = simulate_counts(target, product_settings(2), shots=5000, seed=15)
    mean, sigma = monte_carlo_error(table, target, runs=5, seed=30)
    assert 0.95 <= mean <= 1.0
    assert 0.0 <= sigma < 0.02
    again = monte_carlo_error(table, target, runs=5, seed=30)
    assert (mean, sigma) == again


def test_monte_carlo_requires_two_runs():
    table = simulate_counts(lambda34(), ("ZZ",), shots=10, seed=1)
    with pytest.raises(ValueError):
        monte_carlo_error(table, lambda34(), runs=1, seed=0)
