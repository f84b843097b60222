import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdecouple.linalg import SystemLayout, trace_norm
from qdecouple.states import (
    DensityOperator,
    PureState,
    gen_fidelity,
    gen_trace_distance,
    in_eps_ball,
    maximally_mixed,
    max_entangled,
    product_state,
    purified_distance,
    random_pure_tripartite,
    random_state,
)

KET0 = np.diag([1.0, 0.0])
KET1 = np.diag([0.0, 1.0])


def rand_subnormalized(d, rng):
    return random_state(d, rank=int(rng.integers(1, d + 1)), seed=rng).matrix * rng.uniform(0.05, 1.0)


def test_density_operator_validation():
    with pytest.raises(ValueError):
        DensityOperator(np.diag([0.7, 0.5]))
    with pytest.raises(ValueError):
        DensityOperator(np.diag([1.1, -0.1]))
    with pytest.raises(ValueError):
        DensityOperator(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        DensityOperator(np.eye(4) / 4, SystemLayout(("A", "B"), (2, 3)))
    rho = DensityOperator(np.eye(2) / 4)
    assert rho.trace == pytest.approx(0.5)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1


def test_pure_state_validation_and_permute():
    with pytest.raises(ValueError):
        PureState(np.array([1.0, 1.0]))
    psi = PureState(np.kron([1.0, 0.0], [0.0, 1.0]), SystemLayout(("A", "B"), (2, 2)))
    swapped = psi.permute(["B", "A"])
    assert np.allclose(swapped.vector, np.kron([0.0, 1.0], [1.0, 0.0]))
    assert swapped.layout.labels == ("B", "A")


def test_ptrace_labels():
    rho = product_state(maximally_mixed(2, "A"), DensityOperator(KET0, SystemLayout(("B",), (2,))))
    assert rho.layout.labels == ("A", "B")
    assert np.allclose(rho.ptrace("B").matrix, KET0)


def test_gen_trace_distance_examples():
    rho = random_state(3, seed=0)
    assert gen_trace_distance(rho, rho) == pytest.approx(0, abs=1e-12)
    assert gen_trace_distance(KET0, KET1) == pytest.approx(2)
    # ||rho/2||_1 + 1/2 evaluated directly
    expected = trace_norm(rho.matrix / 2) + 0.5
    assert gen_trace_distance(rho.matrix, rho.matrix / 2) == pytest.approx(expected)
    assert expected == pytest.approx(1)
    with pytest.raises(ValueError):
        gen_trace_distance(np.eye(2) / 2, np.eye(3) / 3)


def test_gen_fidelity_examples():
    rho = random_state(4, seed=1)
    assert gen_fidelity(rho, rho) == pytest.approx(1, abs=1e-9)
    assert gen_fidelity(KET0, KET1) == pytest.approx(0, abs=1e-12)
    assert gen_fidelity(KET0 / 2, KET0 / 2) == pytest.approx(0.5 + 0.5)
    with pytest.raises(ValueError):
        gen_fidelity(np.eye(2), KET0)


def test_purified_distance_examples():
    rho = random_state(2, seed=2)
    assert purified_distance(rho, rho) == pytest.approx(0, abs=1e-6)
    assert purified_distance(KET0, KET1) == pytest.approx(1)
    # pure qubit states with overlap 0.6
    a = np.array([1.0, 0.0])
    b = np.array([0.6, 0.8])
    assert purified_distance(np.outer(a, a), np.outer(b, b)) == pytest.approx(0.8)


def test_in_eps_ball_examples():
    rho = random_state(2, seed=3).matrix
    assert in_eps_ball(rho, rho, 0)
    assert not in_eps_ball(KET0, KET1, 0.5)
    with pytest.raises(ValueError):
        in_eps_ball(rho, rho, 1.5)


def test_in_eps_ball_boundary_inclusive():
    # depolarizing interpolation from a pure state; locate P = 0.3 by bisection
    psi = np.outer([1, 0], [1, 0]).astype(complex)

    def cand(t):
        return (1 - t) * psi + t * np.eye(2) / 2

    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = (lo + hi) / 2
        if purified_distance(cand(mid), psi) < 0.3:
            lo = mid
        else:
            hi = mid
    c = cand(lo)
    p = purified_distance(c, psi)
    assert abs(p - 0.3) < 1e-12
    assert in_eps_ball(c, psi, p)
    assert in_eps_ball(c, psi, 0.3)


def test_maximally_mixed():
    assert np.allclose(maximally_mixed(1).matrix, [[1]])
    assert np.allclose(maximally_mixed(2).matrix, np.diag([0.5, 0.5]))
    m4 = maximally_mixed(4)
    assert m4.trace == pytest.approx(1)
    assert m4.purity() == pytest.approx(0.25)


def test_random_state_rank_and_determinism():
    r1 = random_state(4, rank=1, seed=5)
    assert r1.purity() == pytest.approx(1, abs=1e-10)
    r3 = random_state(5, rank=3, seed=6)
    assert np.sum(np.linalg.eigvalsh(r3.matrix) > 1e-10) == 3
    assert np.array_equal(random_state(3, seed=9).matrix, random_state(3, seed=9).matrix)
    with pytest.raises(ValueError):
        random_state(3, rank=4)
    t1, t2 = random_pure_tripartite(2, 2, 3, seed=1), random_pure_tripartite(2, 2, 3, seed=1)
    assert np.array_equal(t1.vector, t2.vector)
    assert t1.layout.labels == ("A", "B", "R")


@pytest.mark.parametrize("d", [2, 3])
def test_hilbert_schmidt_mean_purity(d):
    rng = np.random.default_rng(10 + d)
    pur = np.array([random_state(d, seed=rng).purity() for _ in range(1000)])
    se = pur.std(ddof=1) / np.sqrt(pur.size)
    assert abs(pur.mean() - 2 * d / (d * d + 1)) < 3 * se


def test_distance_chain_and_ball_displacement():
    rng = np.random.default_rng(11)
    m1 = m2 = m3 = np.inf
    for _ in range(300):
        d = int(rng.integers(2, 5))
        a, b = rand_subnormalized(d, rng), rand_subnormalized(d, rng)
        t = gen_trace_distance(a, b)
        p = purified_distance(a, b)
        m1 = min(m1, p - t / 2)
        m2 = min(m2, np.sqrt(t) - p)
        m3 = min(m3, 2 * p - t)
    assert min(m1, m2, m3) >= -1e-9


def test_fidelity_symmetric_and_triangle():
    rng = np.random.default_rng(12)
    worst = np.inf
    for _ in range(200):
        a, b, c = (rand_subnormalized(3, rng) for _ in range(3))
        assert abs(gen_fidelity(a, b) - gen_fidelity(b, a)) < 1e-10
        worst = min(worst, purified_distance(a, b) + purified_distance(b, c) - purified_distance(a, c))
    assert worst >= -1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4))
def test_fidelity_range(seed, d):
    rng = np.random.default_rng(seed)
    a, b = rand_subnormalized(d, rng), rand_subnormalized(d, rng)
    f = gen_fidelity(a, b)
    assert -1e-12 <= f <= 1 + 1e-9
    assert 0 <= purified_distance(a, b) <= 1


def test_max_entangled_marginal():
    v = max_entangled(3)
    rho = DensityOperator(np.outer(v, v.conj()), SystemLayout(("A", "B"), (3, 3)))
    assert np.allclose(rho.ptrace("A").matrix, np.eye(3) / 3)
