import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgecache.content import PreferenceProfile
from edgecache.errors import ParameterError
from edgecache.hitmodel import (
    HitBreakdown,
    Placement,
    chr_user,
    hit_breakdown,
    make_objective,
    mc_hit_oracle,
    sigma,
)
from edgecache.phy import SuccessProbs
from edgecache.topology import NetworkParams, associate

from scenes import line_scene, random_eta, small_scene, uniform_profile

S_BRANCH = ("p_self", "p_d2d", "p_tagged_sbs", "p_neighbor_sbs", "p_mbs_via_sbs", "p_miss_s")
M_BRANCH = ("p_self", "p_d2d", "p_mbs_direct", "p_miss_m")


def branch_sum(hb, covered):
    d = hb.as_dict()
    return sum(d[k] for k in (S_BRANCH if covered else M_BRANCH))


def test_self_cached_content_is_a_self_hit():
    topo = line_scene()
    eta = np.full((topo.n_nodes, 1), 0.3)
    eta[0, 0] = 1.0
    hb = hit_breakdown(eta, topo, 0, 0)
    assert hb.p_self == 1.0
    assert all(v == 0.0 for k, v in hb.as_dict().items() if k != "p_self")


def test_single_neighbour_without_sbs_coverage():
    topo = associate([[0, 0], [10, 0]], [[900, 900]], [[300, 0]], NetworkParams(), [0])
    assert not topo.indicator_s[0]
    eta = np.zeros((topo.n_nodes, 1))
    eta[1, 0] = 0.5
    hb = hit_breakdown(eta, topo, 0, 0)
    assert hb.p_d2d == 0.5 and hb.p_mbs_direct == 0.0 and hb.p_miss_m == 0.5
    assert hb.p_tagged_sbs == hb.p_miss_s == 0.0


def test_empty_cache_with_coverage_misses():
    topo = line_scene()
    hb = hit_breakdown(np.zeros((topo.n_nodes, 3)), topo, 0, 2)
    assert hb.p_miss_s == 1.0
    assert hb.total() == 1.0 and hb.local_hit() == 0.0


def test_bad_content_and_requester():
    topo = line_scene()
    eta = np.zeros((topo.n_nodes, 2))
    with pytest.raises(ParameterError):
        hit_breakdown(eta, topo, 0, 2)
    with pytest.raises(ParameterError):
        hit_breakdown(eta, topo, 1, 0)


def test_hand_expanded_chr_two_contents():
    topo = line_scene()
    assert topo.d2d_neighbors[0].tolist() == [1]
    assert topo.tagged_sbs[0] == 0 and topo.sbs_neighbors[0].tolist() == [1]
    eta = np.array([
        [0.2, 0.1],   # requester
        [0.5, 0.4],   # D2D neighbour
        [0.9, 0.9],   # out of range user
        [0.3, 0.6],   # tagged sBS
        [0.7, 0.2],   # neighbour sBS
        [0.4, 0.8],   # MBS
    ])
    succ = SuccessProbs(0.9, 0.6, 0.3, 0.2, 0.5)
    prefs = PreferenceProfile.from_ranks([[1, 2]] * 3, [np.log2(3)] * 3)
    np.testing.assert_allclose(prefs.request_prob[0], [0.75, 0.25], atol=1e-15)

    expected = 0.0
    for k, rho in enumerate((0.75, 0.25)):
        e0, e1, eb, en, em = eta[[0, 1, 3, 4, 5], k]
        term = (e0
                + (1 - e0) * e1 * 0.9
                + (1 - e0) * (1 - e1) * eb * 0.6
                + (1 - e0) * (1 - e1) * (1 - eb) * en * 0.3
                + (1 - e0) * (1 - e1) * (1 - eb) * (1 - en) * em * 0.2)
        expected += rho * term
    got = chr_user(eta, topo, prefs, succ, 0)
    assert got == pytest.approx(expected, abs=1e-15)
    # single requester: sigma is its CHR
    assert sigma(eta, topo, prefs, succ) == pytest.approx(got, abs=1e-15)


def test_chr_extremes():
    topo = line_scene()
    prefs = uniform_profile(3, 1)
    ones = np.zeros((topo.n_nodes, 1))
    ones[0] = 1.0
    assert chr_user(ones, topo, prefs, SuccessProbs.constant(1.0), 0) == 1.0
    prefs = uniform_profile(3, 4)
    eta = np.full((topo.n_nodes, 4), 0.5)
    eta[0] = 0.0
    assert chr_user(eta, topo, prefs, SuccessProbs.constant(0.0), 0) == 0.0


def test_full_self_caching_gives_sigma_one():
    topo = small_scene(3)
    prefs = uniform_profile(topo.n_users, 2)
    eta = np.zeros((topo.n_nodes, 2))
    eta[: topo.n_users] = 1.0
    caps = topo.capacities(2, 4, 8)
    assert sigma(Placement(eta, caps), topo, prefs, SuccessProbs.constant(0.3)) == 1.0


def test_sigma_is_mean_of_user_chr():
    rng = np.random.default_rng(1)
    topo = small_scene(5)
    F = 4
    prefs = PreferenceProfile.from_ranks([rng.permutation(F) + 1 for _ in range(topo.n_users)],
                                         rng.uniform(0.1, 2.5, topo.n_users))
    succ = SuccessProbs(0.9, 0.5, 0.1, 0.05, 0.4)
    eta = random_eta(topo, F, rng)
    per_user = [chr_user(eta, topo, prefs, succ, u) for u in topo.requesters]
    assert sigma(eta, topo, prefs, succ) == pytest.approx(np.mean(per_user), abs=1e-14)
    assert all(0.0 <= c <= 1.0 for c in per_user)


def test_batched_objective_matches_single_evaluations():
    rng = np.random.default_rng(2)
    topo = small_scene(8)
    prefs = uniform_profile(topo.n_users, 3)
    succ = SuccessProbs(0.8, 0.4, 0.2, 0.1, 0.3)
    f = make_objective(topo, prefs, succ)
    batch = rng.uniform(0, 1, (5, topo.n_nodes, 3))
    np.testing.assert_allclose(f(batch), [f(b) for b in batch], atol=1e-15)


def test_malformed_success_probs_rejected():
    topo = line_scene()
    prefs = uniform_profile(3, 1)
    with pytest.raises(ParameterError):
        chr_user(np.zeros((topo.n_nodes, 1)), topo, prefs, (1, 1, 1, 1, 1), 0)
    with pytest.raises(ParameterError):
        SuccessProbs(1.2, 0.5, 0.5, 0.5, 0.5)


def test_zero_requesters_rejected():
    topo = associate([[0, 0]], [], [[5, 5]], NetworkParams(), [])
    with pytest.raises(ParameterError):
        sigma(np.zeros((topo.n_nodes, 1)), topo, uniform_profile(1, 1), SuccessProbs.constant(1))


def test_placement_checks_capacity():
    with pytest.raises(ParameterError):
        Placement([[0.6, 0.6]], [1])
    with pytest.raises(ParameterError):
        Placement([[1.1, 0.0]], [2])
    p = Placement([[0.5, 0.5 + 1e-10]], [1])
    assert not p.eta.flags.writeable


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 2**31 - 1))
def test_branch_normalization_property(scene_seed, seed):
    topo = small_scene(scene_seed % 50)
    rng = np.random.default_rng(seed)
    eta = random_eta(topo, 3, rng)
    # include exact zeros and ones
    eta[rng.random(eta.shape) < 0.2] = 0.0
    eta[rng.random(eta.shape) < 0.1] = 1.0
    for r, u in enumerate(topo.requesters):
        hb = hit_breakdown(eta, topo, u, int(rng.integers(3)))
        covered = bool(topo.indicator_s[r])
        assert abs(branch_sum(hb, covered) - 1.0) < 1e-12
        assert abs(hb.total() - 1.0) < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 49), st.integers(0, 2**31 - 1), st.floats(0.0, 1.0))
def test_total_hit_monotone_in_every_entry(scene_seed, seed, bump):
    topo = small_scene(scene_seed)
    rng = np.random.default_rng(seed)
    eta = random_eta(topo, 1, rng)
    row = int(rng.integers(topo.n_nodes))
    higher = eta.copy()
    higher[row, 0] = eta[row, 0] + bump * (1 - eta[row, 0])
    for u in topo.requesters:
        before = hit_breakdown(eta, topo, u, 0).local_hit()
        after = hit_breakdown(higher, topo, u, 0).local_hit()
        assert after >= before - 1e-15


@pytest.mark.parametrize("value", [0.0, 1.0])
def test_degenerate_oracle_is_exact(value):
    topo = small_scene(11)
    eta = np.full((topo.n_nodes, 1), value)
    for u in topo.requesters:
        assert mc_hit_oracle(eta, topo, u, 0, 1000, np.random.default_rng(0)) == hit_breakdown(eta, topo, u, 0)


def test_oracle_is_seeded():
    topo = small_scene(12)
    eta = random_eta(topo, 2, np.random.default_rng(0))
    u = topo.requesters[0]
    a = mc_hit_oracle(eta, topo, u, 1, 5000, np.random.default_rng(4))
    b = mc_hit_oracle(eta, topo, u, 1, 5000, np.random.default_rng(4))
    assert a == b
    with pytest.raises(ParameterError):
        mc_hit_oracle(eta, topo, u, 1, 0, np.random.default_rng(4))


def test_oracle_matches_analytic_breakdown():
    rng = np.random.default_rng(21)
    trials = 200_000
    for scene_seed in range(4):
        topo = small_scene(scene_seed)
        eta = random_eta(topo, 2, rng)
        for u in topo.requesters[:3]:
            exact = hit_breakdown(eta, topo, u, 1).as_dict()
            emp = mc_hit_oracle(eta, topo, u, 1, trials, rng).as_dict()
            for key, p in exact.items():
                se = np.sqrt(max(p * (1 - p), 1e-12) / trials)
                assert abs(emp[key] - p) <= 4 * se + 1e-12, (scene_seed, u, key)


def test_breakdown_is_a_dataclass_of_floats():
    hb = hit_breakdown(np.full((line_scene().n_nodes, 1), 0.5), line_scene(), 0, 0)
    assert isinstance(hb, HitBreakdown)
    assert set(hb.as_dict()) == set(S_BRANCH) | set(M_BRANCH) | {"p_mbs_direct"}
