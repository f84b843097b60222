import numpy as np
import pytest

from qdecouple import designs as D
from qdecouple.linalg import op_norm, swap_operator, trace_norm

from oracles import haar_twirl_monte_carlo

PAULI = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0])]


def rand_op(d, rng):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


@pytest.fixture(scope="module")
def cliff1():
    return D.clifford_group(1)


@pytest.fixture(scope="module")
def cliff2():
    return D.clifford_group(2)


# ------------------------------------------------------------------- Haar

def test_haar_sample_basics():
    u = D.haar_sample(1, seed=0)
    assert u.shape == (1, 1) and abs(abs(u[0, 0]) - 1) < 1e-14
    assert np.array_equal(D.haar_sample(3, seed=4), D.haar_sample(3, seed=4))
    v = D.haar_sample(5, seed=1)
    assert np.abs(v.conj().T @ v - np.eye(5)).max() < 1e-12


def test_haar_first_moment():
    rng = np.random.default_rng(0)
    x = np.array([abs(D.haar_sample(2, rng)[0, 0]) ** 2 for _ in range(10 ** 4)])
    assert abs(x.mean() - 0.5) < 3 * x.std(ddof=1) / np.sqrt(x.size)


def test_haar_phase_of_diagonal_is_uniform():
    # without the R-phase correction, QR output has a biased first entry
    rng = np.random.default_rng(1)
    ph = np.array([np.angle(D.haar_sample(2, rng)[0, 0]) for _ in range(4000)])
    assert abs(np.mean(np.cos(ph))) < 3 / np.sqrt(2 * ph.size)
    assert abs(np.mean(np.sin(ph))) < 3 / np.sqrt(2 * ph.size)


def test_haar_twirl_examples():
    for d in (2, 3):
        f = swap_operator(d)
        assert np.abs(D.haar_twirl(f) - f).max() < 1e-12
        assert np.abs(D.haar_twirl(np.eye(d * d)) - np.eye(d * d)).max() < 1e-12
    assert np.allclose(D.haar_twirl(np.array([[2.5]])), [[2.5]])
    with pytest.raises(ValueError):
        D.haar_twirl(np.eye(3))


def test_haar_twirl_coefficients_solve_moment_system():
    # re-derive a, b from tr(aI + bF) = t, tr(F(aI + bF)) = f
    rng = np.random.default_rng(2)
    for d in (2, 3, 4):
        x = rand_op(d * d, rng)
        f_op = swap_operator(d)
        t, f = np.trace(x), np.trace(f_op @ x)
        a, b = np.linalg.solve([[d * d, d], [d, d * d]], [t, f])
        assert np.abs(D.haar_twirl(x) - (a * np.eye(d * d) + b * f_op)).max() < 1e-12


def test_haar_twirl_against_monte_carlo():
    rng = np.random.default_rng(3)
    x = rand_op(4, rng)
    mean, se_re, se_im = haar_twirl_monte_carlo(x, 2, 10 ** 5, seed=4)
    diff = mean - D.haar_twirl(x)
    z = np.concatenate([np.abs(diff.real) / se_re, np.abs(diff.imag) / se_im]).ravel()
    # 32 components at 3 SE; allow a single outlier
    assert np.sum(z > 3) <= 1
    assert z.max() < 4.5


def test_haar_twirl_idempotent_and_in_span():
    rng = np.random.default_rng(5)
    for d in (2, 3):
        basis = np.stack([np.eye(d * d).ravel(), swap_operator(d).ravel()], axis=1)
        for _ in range(10):
            y = D.haar_twirl(rand_op(d * d, rng))
            assert np.abs(D.haar_twirl(y) - y).max() < 1e-10
            coef = np.linalg.lstsq(basis, y.ravel(), rcond=None)[0]
            assert np.abs(basis @ coef - y.ravel()).max() < 1e-10


# ------------------------------------------------------------- ensembles

def test_ensemble_validation():
    with pytest.raises(ValueError):
        D.UnitaryEnsemble(np.array([0.5, 0.4]), np.stack([np.eye(2), np.eye(2)]))
    with pytest.raises(ValueError):
        D.UnitaryEnsemble(np.array([1.0]), np.array([[[1, 0], [0, 1.01]]]))


def test_ensemble_twirl_examples(cliff1):
    rng = np.random.default_rng(6)
    x = rand_op(4, rng)
    single = D.UnitaryEnsemble.uniform(np.eye(2)[None])
    assert np.abs(D.ensemble_twirl(single, x) - x).max() < 1e-14
    f = swap_operator(2)
    ens = D.haar_ensemble(2, 7, seed=1)
    assert np.abs(D.ensemble_twirl(ens, f) - f).max() < 1e-12
    assert np.abs(D.ensemble_twirl(cliff1, x) - D.haar_twirl(x)).max() < 1e-10
    assert np.abs(D.ensemble_twirl(cliff1, x, adjoint=True) - D.haar_twirl(x)).max() < 1e-10
    with pytest.raises(ValueError):
        D.ensemble_twirl(cliff1, np.eye(9))


def test_ensemble_twirl_trace_preserving():
    rng = np.random.default_rng(7)
    ens = D.random_circuit_ensemble(2, 3, 50, seed=2, gate="local_cnot")
    for _ in range(5):
        x = rand_op(16, rng)
        assert abs(np.trace(D.ensemble_twirl(ens, x)) - np.trace(x)) < 1e-10


def test_moment_superoperator_examples(cliff1):
    h = D.moment_superoperator("haar", 2)
    assert np.linalg.matrix_rank(h, tol=1e-9) == 2
    single = D.UnitaryEnsemble.uniform(np.eye(2)[None])
    assert np.abs(D.moment_superoperator(single) - np.eye(16)).max() < 1e-14
    assert np.abs(D.moment_superoperator(cliff1) - h).max() < 1e-10
    with pytest.raises(MemoryError):
        D.moment_superoperator("haar", 5)


def test_moment_superoperator_is_column_stacked_twirl():
    rng = np.random.default_rng(8)
    ens = D.haar_ensemble(2, 3, seed=3)
    x = rand_op(4, rng)
    s = D.moment_superoperator(ens)
    got = (s @ x.reshape(-1, order="F")).reshape(4, 4, order="F")
    assert np.abs(got - D.ensemble_twirl(ens, x)).max() < 1e-12
    sh = D.moment_superoperator("haar", 2)
    got = (sh @ x.reshape(-1, order="F")).reshape(4, 4, order="F")
    assert np.abs(got - D.haar_twirl(x)).max() < 1e-12


# ------------------------------------------------------------------ delta

def test_delta_examples(cliff1):
    est = D.delta_bounds(cliff1)
    assert est.upper <= 1e-9 and abs(est.lower - est.upper / 4) < 1e-15
    single = D.UnitaryEnsemble.uniform(np.eye(2)[None])
    assert D.delta_bounds(single).lower > 0.5
    with pytest.raises(ValueError):
        D.DeltaEstimate(0.5, 0.1)


def test_choi_of_identity_superoperator():
    # the identity channel has Choi operator |Omega><Omega|
    d = 3
    j = D.choi_of_superoperator(np.eye(d ** 4), d * d)
    om = np.eye(d * d).ravel() / d
    assert np.abs(j - np.outer(om, om)).max() < 1e-14
    assert trace_norm(j) == pytest.approx(1)


def test_is_exact_2design(cliff1):
    assert D.is_exact_2design(cliff1)
    assert not D.is_exact_2design(D.UnitaryEnsemble.uniform(np.eye(2)[None]))
    assert D.is_exact_2design(D.haar_ensemble(2, 10 ** 5, seed=9), tol=0.05)


def test_infinity_vs_diamond_bound():
    rng = np.random.default_rng(10)
    for ens in (D.haar_ensemble(2, 20, seed=11), D.random_circuit_ensemble(2, 1, 30, seed=12, gate="local_cnot")):
        est = D.delta_bounds(ens)
        d = ens.dim
        assert est.lower <= est.upper
        for _ in range(100):
            x = rand_op(d * d, rng)
            x = (x + x.conj().T) / 2
            x /= trace_norm(x)
            gap = op_norm(D.ensemble_twirl(ens, x) - D.haar_twirl(x))
            assert gap <= d * d * est.upper + 1e-9
            # the induced trace norm never exceeds the diamond norm
            assert trace_norm(D.ensemble_twirl(ens, x) - D.haar_twirl(x)) <= est.upper + 1e-9


def test_exact_design_has_zero_delta(cliff2):
    assert D.is_exact_2design(cliff2)
    assert D.delta_bounds(cliff2).upper <= 16 * 1e-9 + 1e-9


# ---------------------------------------------------------------- Clifford

def test_clifford_sizes(cliff1, cliff2):
    assert len(cliff1) == 24
    assert len(cliff2) == 11520
    with pytest.raises(ValueError):
        D.clifford_group(3)


def _is_pauli_up_to_phase(m, paulis):
    for p in paulis:
        c = np.trace(p.conj().T @ m) / p.shape[0]
        if abs(abs(c) - 1) < 1e-9:
            return True
    return False


@pytest.mark.parametrize("n", [1, 2])
def test_clifford_normalizes_paulis(n, cliff1, cliff2):
    ens = cliff1 if n == 1 else cliff2
    if n == 1:
        paulis, gens = PAULI, [PAULI[1], PAULI[3]]
    else:
        paulis = [np.kron(a, b) for a in PAULI for b in PAULI]
        gens = [np.kron(PAULI[1], PAULI[0]), np.kron(PAULI[3], PAULI[0]),
                np.kron(PAULI[0], PAULI[1]), np.kron(PAULI[0], PAULI[3])]
    units = ens.unitaries[::7] if n == 2 else ens.unitaries
    for u in units:
        for g in gens:
            assert _is_pauli_up_to_phase(u @ g @ u.conj().T, paulis)


def test_clifford_elements_distinct_modulo_phase(cliff1):
    u = cliff1.unitaries
    overlaps = np.abs(np.einsum("nij,mij->nm", u.conj(), u)) / 2
    np.fill_diagonal(overlaps, 0)
    assert overlaps.max() < 1 - 1e-9


# ----------------------------------------------------------------- circuits

def test_random_circuit_basics():
    with pytest.raises(ValueError):
        D.random_circuit_ensemble(2, 0, 5)
    with pytest.raises(ValueError):
        D.random_circuit_ensemble(1, 1, 5)
    a = D.random_circuit_ensemble(3, 2, 4, seed=5)
    b = D.random_circuit_ensemble(3, 2, 4, seed=5)
    assert np.array_equal(a.unitaries, b.unitaries)
    assert np.allclose(a.probs, 0.25)
    # depth 1 on two qubits is a single Haar gate: compare with the sampler directly
    c = D.random_circuit_ensemble(2, 1, 3, seed=6)
    rng = np.random.default_rng(6)
    assert np.allclose(c.unitaries[0], D.haar_sample(4, rng))


def test_local_cnot_depth_trend():
    wins = 0
    for seed in range(10):
        shallow = D.delta_bounds(D.random_circuit_ensemble(2, 2, 500, seed=seed, gate="local_cnot")).upper
        deep = D.delta_bounds(D.random_circuit_ensemble(2, 20, 500, seed=100 + seed, gate="local_cnot")).upper
        wins += deep < shallow
    assert wins >= 9


def test_local_cnot_trend_depth_one_to_ten():
    for seed in range(5):
        one = D.delta_bounds(D.random_circuit_ensemble(2, 1, 2000, seed=seed, gate="local_cnot")).upper
        ten = D.delta_bounds(D.random_circuit_ensemble(2, 10, 2000, seed=50 + seed, gate="local_cnot")).upper
        assert ten < one


def test_haar_gate_circuit_is_sampling_limited():
    # with Haar two-qubit gates the n = 2 circuit is Haar at any depth;
    # delta only reflects finite sampling and shrinks with the sample count
    small = D.delta_bounds(D.random_circuit_ensemble(2, 1, 200, seed=1)).lower
    large = D.delta_bounds(D.random_circuit_ensemble(2, 1, 5000, seed=2)).lower
    assert large < small


# -------------------------------------------------------------------- specs

def test_spec_round_trip(cliff1):
    ens = D.random_circuit_ensemble(2, 2, 5, seed=3, gate="local_cnot")
    again = D.ensemble_from_spec(ens.spec)
    assert np.array_equal(ens.unitaries, again.unitaries)
    explicit = D.ensemble_from_spec(D.ensemble_to_spec(ens))
    assert np.abs(explicit.unitaries - ens.unitaries).max() == 0
    assert np.allclose(explicit.probs, ens.probs)
    assert len(D.ensemble_from_spec({"kind": "clifford", "n_qubits": 1})) == 24
    h = D.ensemble_from_spec({"kind": "haar_samples", "dim": 2, "samples": 3, "seed": 1})
    assert np.array_equal(h.unitaries, D.haar_ensemble(2, 3, seed=1).unitaries)
    with pytest.raises(ValueError):
        D.ensemble_from_spec({"kind": "nope"})
