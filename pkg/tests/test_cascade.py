import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cascadenet import (AttackPlan, GenParams, ParameterError, RngStream, ThresholdSpec, assign_thresholds,
                        attack_curve, generate, infection_set, infection_set_oracle, injury_set, select_attack)
from cascadenet.cascade import CSV_HEADER, default_k_max, format_curve_csv

from conftest import complete_graph, path_graph, plain, star_graph


def fixpoint(g, phi_of, s):
    """Textbook sweep: add any node whose infected-neighbour share reaches phi."""
    inf = set(s)
    changed = True
    while changed:
        changed = False
        for v in range(g.n):
            if v in inf or g.degree[v] == 0:
                continue
            hits = sum(1 for w in g.neighbors(v).tolist() if w in inf)
            if Fraction(hits, int(g.degree[v])) >= phi_of(v):
                inf.add(v)
                changed = True
    return inf


@st.composite
def cascade_case(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    extra = draw(st.lists(st.sampled_from(pairs), max_size=3)) if pairs else []
    g = plain(n, [p for p, k in zip(pairs, keep) if k] + extra)
    if draw(st.booleans()):
        spec = ThresholdSpec.uniform(Fraction(draw(st.integers(1, 12)), 12))
    else:
        spec = ThresholdSpec.parse("random")
    thr = assign_thresholds(g, spec, RngStream(draw(st.integers(0, 2**32)), 1))
    s = draw(st.sets(st.integers(0, n - 1)))
    return g, thr, s


# -- thresholds ------------------------------------------------------------------

def test_star_uniform_half_needs_two():
    thr = assign_thresholds(star_graph(4), ThresholdSpec.uniform("0.5"))
    assert thr.need[0] == 2
    assert thr.phi_of(0) == Fraction(1, 2)


def test_degree_one_random_threshold_is_one():
    g = path_graph(2)
    for seed in range(20):
        thr = assign_thresholds(g, "random", RngStream(seed, 0))
        assert thr.need.tolist() == [1, 1]
        assert thr.phi_of(0) == 1


def test_random_threshold_mean():
    g = star_graph(10)
    draws = [assign_thresholds(g, "random", RngStream(3, j)).need[0] for j in range(100_000)]
    assert abs(np.mean(draws) - 5.5) <= 0.05
    assert set(draws) == set(range(1, 11))


def test_isolated_node_has_unit_threshold():
    g = plain(3, [(1, 0)])
    thr = assign_thresholds(g, ThresholdSpec.uniform("0.1"))
    assert thr.phi_of(2) == 1
    assert infection_set(g, thr, {0, 1}).infected == {0, 1}


@pytest.mark.parametrize("text", ["uniform:0", "uniform:1.5", "uniform:-1", "bogus"])
def test_bad_threshold_specs(text):
    with pytest.raises(ParameterError):
        assign_thresholds(complete_graph(3), ThresholdSpec.parse(text))


def test_threshold_spec_text():
    assert str(ThresholdSpec.parse("uniform:0.25")) == "uniform:0.25"
    assert ThresholdSpec.parse("uniform:1/40").phi == Fraction(1, 40)
    assert str(ThresholdSpec.parse("random")) == "random"


def test_exact_rational_comparison():
    # 0.3 * 10 is 3.0000000000000004 in floating point; the rule must still hit 3
    g = star_graph(10)
    thr = assign_thresholds(g, ThresholdSpec.uniform("0.3"))
    assert thr.need[0] == 3
    assert infection_set(g, thr, {1, 2, 3}).infected >= {0}


# -- infection --------------------------------------------------------------------

def test_star_two_leaves_infect_everything():
    g = star_graph(4)
    res = infection_set(g, assign_thresholds(g, ThresholdSpec.uniform("0.5")), {1, 2})
    assert res.infected == set(range(5))
    assert res.round == {1: 0, 2: 0, 0: 1, 3: 2, 4: 2}
    assert res.trigger_count[0] == 2


def test_path_stops_below_threshold():
    g = path_graph(3)
    res = infection_set(g, assign_thresholds(g, ThresholdSpec.uniform("0.6")), {0})
    assert res.infected == {0}


def test_k4_low_threshold():
    g = complete_graph(4)
    thr = assign_thresholds(g, ThresholdSpec.uniform("0.3"))
    assert infection_set_oracle(g, thr, {0}) == set(range(4))
    assert infection_set(g, thr, {0}).infected == set(range(4))


def test_oracle_trivial_sets():
    g = complete_graph(5)
    thr = assign_thresholds(g, ThresholdSpec.uniform("0.5"))
    assert infection_set_oracle(g, thr, set()) == set()
    assert infection_set_oracle(g, thr, set(range(5))) == set(range(5))
    assert infection_set(g, thr, set()).infected == set()


def test_parallel_edges_count_with_multiplicity():
    g = plain(3, [(1, 0), (1, 0), (2, 1)])
    thr = assign_thresholds(g, ThresholdSpec.uniform("0.6"))
    # node 1 sees 2 of 3 incidences from node 0, then node 2 follows
    assert infection_set(g, thr, {0}).infected == {0, 1, 2}
    assert infection_set(g, thr, {2}).infected == {2}


def test_oracle_on_500_random_graphs():
    rng = np.random.default_rng(12)
    for trial in range(500):
        n = 12
        mask = rng.random(n * (n - 1) // 2) < rng.uniform(0.1, 0.7)
        pairs = [(i, j) for i in range(n) for j in range(i)]
        g = plain(n, [p for p, k in zip(pairs, mask) if k])
        thr = assign_thresholds(g, "random", RngStream(trial, 0))
        s = set(np.flatnonzero(rng.random(n) < 0.2).tolist())
        assert infection_set(g, thr, s).infected == infection_set_oracle(g, thr, s) == fixpoint(g, thr.phi_of, s)


@settings(max_examples=300)
@given(cascade_case())
def test_fast_matches_oracle(case):
    g, thr, s = case
    res = infection_set(g, thr, s)
    assert res.infected == infection_set_oracle(g, thr, s) == fixpoint(g, thr.phi_of, s)


@settings(max_examples=200)
@given(cascade_case())
def test_rounds_are_consistent(case):
    g, thr, s = case
    res = infection_set(g, thr, s)
    assert res.infected >= s
    rounds = res.round
    for v, r in rounds.items():
        if r == 0:
            assert v in s
            continue
        earlier = [w for w in g.neighbors(v).tolist() if w in rounds and rounds[w] < r]
        assert len(earlier) == res.trigger_count[v] >= thr.need[v]


@settings(max_examples=200)
@given(cascade_case(), st.data())
def test_monotone_in_seed_set(case, data):
    g, thr, s = case
    extra = data.draw(st.sets(st.integers(0, g.n - 1)))
    assert infection_set(g, thr, s).infected <= infection_set(g, thr, s | extra).infected


@settings(max_examples=200)
@given(cascade_case())
def test_phi_one_needs_every_neighbour(case):
    g, _, s = case
    thr = assign_thresholds(g, ThresholdSpec.uniform(1))
    res = infection_set(g, thr, s)
    for v in res.infected - s:
        assert all(w in res.infected for w in g.neighbors(v).tolist())


# -- injury -------------------------------------------------------------------------

def test_injury_examples():
    assert injury_set(path_graph(5), {2}) == {3, 4}
    assert injury_set(complete_graph(4), {0}) == set()
    assert injury_set(star_graph(6), {0}) == {2, 3, 4, 5, 6}


@settings(max_examples=100)
@given(cascade_case())
def test_injury_disjoint_from_removed(case):
    g, _, s = case
    inj = injury_set(g, s)
    assert not inj & s
    assert len(inj) + len(s) <= g.n


# -- attacks ------------------------------------------------------------------------

def test_select_attack_examples():
    assert select_attack(star_graph(5), AttackPlan("top_degree", 1)) == {0}
    assert select_attack(complete_graph(4), AttackPlan("top_degree", 2)) == {0, 1}
    assert select_attack(complete_graph(6), AttackPlan("random_uniform", 6), RngStream(1, 2)) == set(range(6))
    with pytest.raises(ParameterError):
        select_attack(complete_graph(4), AttackPlan("top_degree", 5))
    with pytest.raises(ParameterError):
        AttackPlan("smartest", 2)


def test_top_degree_sets_are_nested():
    g = generate(GenParams("pa", 300, d=3, master_seed=1))
    prev = frozenset()
    for k in range(1, 30):
        cur = select_attack(g, AttackPlan("top_degree", k))
        assert prev < cur
        assert min(g.degree[list(cur)]) >= max(np.delete(g.degree, list(cur)), default=0)
        prev = cur


def test_random_attack_is_uniform_ish():
    g = complete_graph(10)
    counts = np.zeros(10)
    for j in range(4000):
        for v in select_attack(g, AttackPlan("random_uniform", 3), RngStream(j, 0)):
            counts[v] += 1
    # each node is chosen with probability 3/10; 4 sigma band
    sigma = math.sqrt(4000 * 0.3 * 0.7)
    assert np.all(np.abs(counts - 1200) <= 4 * sigma)


# -- curves -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def er_graph():
    return generate(GenParams("er", 400, p=0.02, master_seed=3))


def test_curve_rows_and_header(er_graph):
    rows = attack_curve(er_graph, "top_degree", 12, "random", trials=5)
    assert [r.k for r in rows] == list(range(1, 13))
    assert all(r.infection_count >= r.k for r in rows)
    text = format_curve_csv(rows)
    assert text.splitlines()[0] == CSV_HEADER
    assert len(text.splitlines()) == 13
    assert text.splitlines()[1].startswith("1,top_degree,random,,5,max,")


def test_curve_max_dominates_mean(er_graph):
    mx = attack_curve(er_graph, "top_degree", 8, "random", trials=6, agg="max", master_seed=4)
    mean = attack_curve(er_graph, "top_degree", 8, "random", trials=6, agg="mean", master_seed=4)
    assert all(a.infection_count >= b.infection_count for a, b in zip(mx, mean))


def test_curve_uniform_monotone(er_graph):
    rows = attack_curve(er_graph, "top_degree", 40, "uniform:0.25")
    fr = [r.infection_fraction for r in rows]
    assert fr == sorted(fr)
    assert all(r.trials == 1 for r in rows)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["0.1", "0.2", "0.35", "0.5"]))
def test_curve_uniform_monotone_property(seed, phi):
    g = generate(GenParams("pa", 120, d=2, master_seed=seed))
    rows = attack_curve(g, "top_degree", 15, f"uniform:{phi}")
    fr = [r.infection_count for r in rows]
    assert fr == sorted(fr)


def test_curve_is_reproducible_and_thread_independent(er_graph):
    a = format_curve_csv(attack_curve(er_graph, "random_uniform", 10, "random", trials=4, master_seed=8))
    b = format_curve_csv(attack_curve(er_graph, "random_uniform", 10, "random", trials=4, master_seed=8, workers=3))
    c = format_curve_csv(attack_curve(er_graph, "random_uniform", 10, "random", trials=4, master_seed=9))
    assert a == b != c


def test_injury_only_curve(er_graph):
    rows = attack_curve(er_graph, "top_degree", 5, None)
    assert all(r.threshold_mode == "none" and r.infection_fraction is None for r in rows)
    removed = set()
    for r in rows:
        removed = select_attack(er_graph, AttackPlan("top_degree", r.k))
        assert r.injury_count == len(injury_set(er_graph, removed))


def test_curve_parameter_errors(er_graph):
    with pytest.raises(ParameterError):
        attack_curve(er_graph, "top_degree", 401, "random")
    with pytest.raises(ParameterError):
        attack_curve(er_graph, "top_degree", 3, "random", trials=0)
    with pytest.raises(ParameterError):
        attack_curve(er_graph, "top_degree", 3, "random", agg="median")


def test_default_k_max():
    assert default_k_max(10_000) == 47
