import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wmcen import (ClusterState, Dataset, Hyperparams, PairwiseSystem, build_pairwise,
                   cluster_penalty, jaeckel_dispersion, majorizer_m, objective_l_dagger,
                   pairwise_dispersion, perturbed_l1, wilcoxon_dispersion)
from wmcen.oracle import GridSpec, grid_minimize_l_dagger

# frozen from an independent hand/closed-form evaluation
JAECKEL_013 = 2.598076211353316        # 0.75 * sqrt(12)
ONE_MINUS_LOG2 = 0.3068528194400547


def single_response(e):
    """Pairwise system whose residual differences at b = 0 are those of e."""
    e = np.asarray(e, dtype=float)
    n = e.size
    return build_pairwise(Dataset(np.zeros((n, 1)), e[:, None]))


def test_wilcoxon_enumeration():
    ps = single_response([0.0, 1.0, 3.0])
    assert wilcoxon_dispersion(ps, np.zeros((1, 1))) == 6.0


def test_wilcoxon_zero_at_interpolation(rng):
    x = rng.standard_normal((6, 2))
    b = rng.standard_normal((2, 1))
    ps = build_pairwise(Dataset(x, x @ b))
    assert wilcoxon_dispersion(ps, b) == pytest.approx(0.0, abs=1e-12)


def test_wilcoxon_additive_over_responses(rng):
    x = rng.standard_normal((6, 2))
    y = rng.standard_normal((6, 1))
    b = rng.standard_normal((2, 1))
    one = wilcoxon_dispersion(build_pairwise(Dataset(x, y)), b)
    two = wilcoxon_dispersion(build_pairwise(Dataset(x, np.hstack([y, y]))), np.hstack([b, b]))
    assert two == pytest.approx(2 * one, rel=1e-14)


def test_jaeckel_hand_value():
    assert jaeckel_dispersion([0.0, 1.0, 3.0]) == pytest.approx(JAECKEL_013, rel=1e-12)


def test_jaeckel_constant_is_zero():
    assert jaeckel_dispersion(np.full(5, 2.5)) == pytest.approx(0.0, abs=1e-12)


def test_jaeckel_needs_two():
    with pytest.raises(ValueError):
        jaeckel_dispersion([1.0])


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(2, 25),
              elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_jaeckel_negation_invariant(e):
    assert jaeckel_dispersion(-e) == pytest.approx(jaeckel_dispersion(e), rel=1e-9, abs=1e-9)


def test_rank_form_proportionality(rng):
    for n in range(3, 31):
        e = rng.standard_normal(n)
        ratio = pairwise_dispersion(e) / jaeckel_dispersion(e)
        assert ratio == pytest.approx(2 * (n + 1) / np.sqrt(12), rel=1e-10)


def test_perturbed_l1_examples():
    assert perturbed_l1(np.zeros((2, 2)), 1.0, 1e-6) == 0.0
    assert perturbed_l1(np.array([[1.0]]), 1.0, 1.0) == pytest.approx(ONE_MINUS_LOG2, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (3, 2), elements=st.floats(-50, 50, allow_nan=False)),
       st.floats(0.01, 10))
def test_perturbed_l1_below_l1(b, lam):
    val = perturbed_l1(b, lam, 1e-3)
    l1 = lam * np.abs(b).sum()
    if np.any(b != 0):
        assert val < l1
    else:
        assert val == 0.0


def test_perturbed_l1_limit(rng):
    b = rng.standard_normal((4, 3))
    l1 = np.abs(b).sum()
    eps = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8]
    vals = [perturbed_l1(b, 1.0, e) for e in eps]
    assert np.all(np.diff(vals) >= 0)
    gaps = l1 - np.array(vals)
    assert np.all(gaps >= 0) and gaps[-1] < 1e-5


def test_cluster_penalty_zero_cases(rng):
    x = rng.standard_normal((5, 2))
    b = rng.standard_normal((2, 3))
    same = ClusterState.from_labels([0, 1, 1], np.column_stack([b[:, 0], b[:, 1]]))
    b_same = b.copy()
    b_same[:, 2] = b[:, 1]
    assert cluster_penalty(x, b_same, same, 2.0) == 0.0
    assert cluster_penalty(x, b, same, 0.0) == 0.0
    singletons = ClusterState.from_labels([0, 1, 2], b)
    assert cluster_penalty(x, b, singletons, 5.0) == 0.0


def test_objective_at_zero(rng):
    d = Dataset(rng.standard_normal((6, 2)), rng.standard_normal((6, 2)))
    ps = build_pairwise(d)
    cs = ClusterState.from_labels([0, 0], np.zeros((2, 1)))
    br = objective_l_dagger(ps, d.x, np.zeros((2, 2)), cs, Hyperparams(0.3, 1.0, 1))
    assert br.total == pytest.approx(np.abs(ps.g).sum(), rel=1e-14)
    assert br.penalty_l1 == 0.0 and br.penalty_cluster == 0.0


def test_objective_total_is_sum(rng):
    d = Dataset(rng.standard_normal((6, 2)), rng.standard_normal((6, 3)))
    ps = build_pairwise(d)
    b = rng.standard_normal((2, 3))
    cs = ClusterState.from_labels([0, 1, 0], rng.standard_normal((2, 2)))
    br = objective_l_dagger(ps, d.x, b, cs, Hyperparams(0.3, 0.7, 2))
    assert br.total == br.loss + br.penalty_l1 + br.penalty_cluster


def test_objective_decreases_toward_oracle(rng):
    d = Dataset(rng.standard_normal((6, 2)), rng.standard_normal((6, 1)))
    ps = build_pairwise(d)
    hp = Hyperparams(0.1)
    cs = ClusterState.from_labels([0], np.zeros((2, 1)))
    b_star, _ = grid_minimize_l_dagger(ps, d.x, hp, cs, GridSpec(-2, 2, 0.05))
    vals = [objective_l_dagger(ps, d.x, t * b_star, cs, hp).total for t in (0, 0.25, 0.5, 1.0)]
    assert np.all(np.diff(vals) < 0)


def test_objective_location_invariant(rng):
    x = rng.standard_normal((7, 2))
    y = rng.standard_normal((7, 2))
    b = rng.standard_normal((2, 2))
    cs = ClusterState.from_labels([0, 1], b)
    hp = Hyperparams(0.5, 1.0, 2)
    a = objective_l_dagger(build_pairwise(Dataset(x, y)), x, b, cs, hp).total
    c = objective_l_dagger(build_pairwise(Dataset(x, y + [4.0, -2.0])), x, b, cs, hp).total
    assert c == pytest.approx(a, rel=1e-13)


def test_majorizer_single_pair_hand_example():
    # g = 1, r = 1, anchor 0: w = 1/2, so M = (1 - beta)^2 / 2 + 1/2
    ps = PairwiseSystem(np.array([[1.0]]), np.array([[1.0]]), np.array([[0, 1]]))
    cs = ClusterState.from_labels([0], np.zeros((1, 1)))
    hp = Hyperparams(1e-300)
    x = np.array([[1.0], [0.0]])
    for beta in np.linspace(-3, 3, 25):
        m = majorizer_m(ps, x, np.array([[beta]]), np.zeros((1, 1)), cs, hp)
        assert m == pytest.approx((1 - beta) ** 2 / 2 + 0.5, abs=1e-12)
        assert m >= abs(1 - beta) - 1e-12


def test_majorizer_tangent_and_dominating(rng):
    d = Dataset(rng.standard_normal((8, 3)), rng.standard_normal((8, 2)))
    ps = build_pairwise(d)
    cs = ClusterState.from_labels([0, 1], rng.standard_normal((3, 2)))
    hp = Hyperparams(0.4, 0.6, 2)
    anchor = rng.standard_normal((3, 2))
    at = objective_l_dagger(ps, d.x, anchor, cs, hp).total
    assert abs(majorizer_m(ps, d.x, anchor, anchor, cs, hp) - at) <= 1e-10 * max(1, at)
    for _ in range(50):
        probe = anchor + rng.standard_normal((3, 2))
        assert (majorizer_m(ps, d.x, probe, anchor, cs, hp)
                >= objective_l_dagger(ps, d.x, probe, cs, hp).total - 1e-10)
