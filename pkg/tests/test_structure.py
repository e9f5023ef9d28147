import math
from fractions import Fraction

import numpy as np
import pytest

from cascadenet import (DomainError, GenParams, RngStream, ThresholdSpec, assign_thresholds, build_ipt,
                        classify_strong, communities, degree_priority, generate, infection_inclusion_audit,
                        infection_set, navigate, power_law_report, structure_report)
from cascadenet.graph import conductance
from cascadenet.rng import graph_stream
from cascadenet.structure import (degree_priority_table, fit_powerlaw_exponent, s_k, sampled_mean_distance)

import calibration as cal
from conftest import colored_graph, complete_graph


@pytest.fixture(scope="module")
def sec():
    return generate(GenParams("security", 4000, d=8, a=1.5, master_seed=21))


@pytest.fixture(scope="module")
def ovl():
    return generate(GenParams("overlap", 4000, d1=4, d2=4, a=1.5, master_seed=21))


def strong_toy(ext):
    """Seed 0 of degree 10 with ``ext`` external neighbours (other seeds)."""
    nodes = [(True, [i]) for i in range(ext + 1)]
    edges = [(i, j, "seed_rand") for i in range(1, ext + 1) for j in range(i)]
    first = len(nodes)
    nodes += [(False, [0])] * (10 - ext)
    edges += [(v, 0, "intra") for v in range(first, first + 10 - ext)]
    return colored_graph(nodes, edges)


# -- communities ---------------------------------------------------------------------

def test_communities_need_colors():
    with pytest.raises(DomainError):
        communities(complete_graph(4))
    with pytest.raises(DomainError):
        build_ipt(complete_graph(4))


def test_security_partition(sec):
    views = communities(sec)
    assert len(views) == int(sec.node_seed.sum())
    seen = np.zeros(sec.n, dtype=int)
    for cv in views:
        seen[list(cv.members)] += 1
        assert sec.node_seed[cv.seed] and cv.color == cv.seed
    assert (seen == 1).all()
    assert sum(cv.internal_edges for cv in views) + sum(cv.external_edges for cv in views) // 2 == sec.m


def test_overlap_membership(ovl):
    seen = np.zeros(ovl.n, dtype=int)
    for cv in communities(ovl):
        seen[list(cv.members)] += 1
    seeds = np.flatnonzero(ovl.node_seed)
    assert (seen[seeds[2:]] == 2).all()
    assert (seen[~ovl.node_seed] == 1).all()


def test_community_edge_counts_match_conductance(sec):
    for cv in communities(sec)[:40]:
        phi = conductance(sec, cv.members)
        vol = int(sec.degree[list(cv.members)].sum())
        assert phi == Fraction(cv.external_edges, min(vol, 2 * sec.m - vol))


# -- degree priority -------------------------------------------------------------------

def test_degree_priority_hand_graph():
    # colours: A = 0, B = 1, C = 2; v = 6 has 3 A, 2 B, 1 C neighbours
    nodes = [(True, [0]), (True, [1]), (True, [2]), (False, [0]), (False, [0]), (False, [1]), (False, [0])]
    edges = [(1, 0, "seed_rand"), (2, 0, "seed_pref"), (2, 1, "seed_rand"), (3, 0, "intra"), (4, 0, "intra"),
             (5, 1, "intra"), (6, 0, "intra"), (6, 3, "intra"), (6, 4, "intra"), (6, 1, "intra"),
             (6, 5, "intra"), (6, 2, "intra")]
    g = colored_graph(nodes, edges)
    dp = degree_priority(g, 6)
    assert dp.dp == (3, 2, 1) and dp.length == 3
    assert dp.colors == (0, 1, 2) and dp.first_color_is_own


def test_degree_priority_tie_prefers_older_color():
    nodes = [(True, [0]), (True, [1]), (False, [1]), (False, [0]), (False, [1])]
    edges = [(1, 0, "seed_rand"), (2, 1, "intra"), (3, 0, "intra"), (4, 1, "intra"), (4, 2, "intra"),
             (4, 0, "seed_pref"), (4, 3, "intra")]
    dp = degree_priority(colored_graph(nodes, edges), 4)
    assert dp.dp == (2, 2) and dp.colors == (0, 1)
    assert not dp.first_color_is_own


def test_two_color_neighbor_attribution():
    # node 2 carries colours (2, 0); node 3 is colour 0 and reaches it by an intra edge
    nodes = [(True, [0]), (True, [1]), (True, [2, 0]), (False, [0])]
    edges = [(1, 0, "seed_rand"), (2, 1, "seed_pref"), (2, 0, "over_cross"), (3, 2, "intra"), (3, 0, "intra")]
    g = colored_graph(nodes, edges, model="overlap")
    assert degree_priority(g, 3).dp == (2,)
    assert degree_priority(g, 1).colors == (0, 2)


def test_degree_priority_sums_and_table(sec, ovl):
    for g in (sec, ovl):
        table = degree_priority_table(g)
        for v in range(0, g.n, 7):
            dp = degree_priority(g, v)
            assert sum(dp.dp) == g.degree[v]
            assert list(dp.dp) == sorted(dp.dp, reverse=True)
            assert table.length[v] == dp.length
            assert table.d1[v] == dp.dp[0]
            assert table.d2[v] == (dp.dp[1] if dp.length > 1 else 0)


def test_degree_priority_bounds(sec):
    table = degree_priority_table(sec)
    non = ~sec.node_seed
    same = np.array([np.count_nonzero(sec.color1[sec.neighbors(v)] == sec.color1[v]) for v in range(sec.n)])
    assert (table.d1[non] == same[non]).all()
    assert (table.d2[non] <= 1).all()
    assert (table.d2[sec.node_seed] <= 8).all()


@pytest.mark.slow
def test_priority_length_is_logarithmic():
    g = generate(GenParams("security", cal.CAL_N, d=cal.CAL_D, a=cal.CAL_A, master_seed=0), graph_stream(0, 0))
    assert degree_priority_table(g).length.max() <= cal.PRIORITY_LENGTH_C * math.log(cal.CAL_N)


# -- power law ---------------------------------------------------------------------------

def test_s_k_closed_form():
    assert s_k(4, 4) == Fraction(1, 3)
    assert s_k(4, 5) == Fraction(4, 21)
    for d in (1, 3, 10):
        assert s_k(d, d) == Fraction(2, d + 2)
    # the limiting fractions sum to one
    assert abs(float(sum(s_k(4, k) for k in range(4, 20000))) - 1) < 1e-6


def test_fit_recovers_cubic_tail():
    # long enough that the CCDF is not bent by truncation within the fitted range
    k = np.arange(0, 100_000)
    hist = np.zeros(k.size, dtype=np.int64)
    hist[5:] = np.round(1e9 * k[5:].astype(float) ** -3).astype(np.int64)
    assert abs(fit_powerlaw_exponent(hist, 5) - 3) <= 0.1


def test_fit_degenerate_histogram():
    hist = np.zeros(20, dtype=np.int64)
    hist[7] = 1000
    with pytest.raises(DomainError):
        fit_powerlaw_exponent(hist, 7)


def test_power_law_report_on_pa():
    g = generate(GenParams("pa", 20_000, d=4, master_seed=1))
    rep = power_law_report(g, 30, d=4)
    assert int(rep.histogram.sum()) == g.n
    assert rep.s_table[4] == Fraction(1, 3)
    assert 2.5 <= rep.exponent <= 3.5


# -- infection priority tree ----------------------------------------------------------------

@pytest.mark.parametrize("model", ["sec", "ovl"])
def test_ipt_is_a_tree(model, request):
    g = request.getfixturevalue(model)
    ipt = build_ipt(g)
    assert len(ipt.edges()) == len(ipt.communities) - 1
    assert ipt.root == 0
    for p, c in ipt.edges():
        assert ipt.creation_time[p] < ipt.creation_time[c]
    for c in ipt.communities:
        hops, x = 0, c
        while ipt.parent[x] is not None:
            x = ipt.parent[x]
            hops += 1
        assert x == ipt.root and hops == ipt.depth[c]
    assert ipt.height == max(ipt.depth.values())


# -- strong communities ---------------------------------------------------------------------

def test_strong_examples():
    thr = ThresholdSpec.uniform("0.3")
    g2 = strong_toy(2)
    r2 = classify_strong(g2, assign_thresholds(g2, thr))
    assert g2.degree[0] == 10 and r2.external[0] == 2 and r2.strong[0]
    g3 = strong_toy(3)
    r3 = classify_strong(g3, assign_thresholds(g3, thr))
    assert g3.degree[0] == 10 and r3.external[0] == 3 and not r3.strong[0]


def test_strong_is_monotone_in_phi(sec):
    prev = None
    for phi in ("0.05", "0.1", "0.2", "0.3", "0.5", "0.8", "1"):
        rep = classify_strong(sec, assign_thresholds(sec, ThresholdSpec.uniform(phi)))
        if prev is not None:
            assert all(rep.strong[c] for c, s in prev.strong.items() if s)
            assert rep.vulnerable <= prev.vulnerable
        prev = rep


def test_strict_variant_is_stronger_requirement(sec):
    thr = assign_thresholds(sec, ThresholdSpec.uniform("0.5"))
    loose, strict = classify_strong(sec, thr), classify_strong(sec, thr, strict=True)
    assert all(loose.strong[c] for c, s in strict.strong.items() if s)


@pytest.mark.slow
def test_vulnerable_fraction_pinned():
    g = generate(GenParams("security", cal.CAL_N, d=cal.CAL_D, a=cal.CAL_A, master_seed=1), graph_stream(1, 0))
    rep = classify_strong(g, assign_thresholds(g, ThresholdSpec.uniform("0.2")))
    assert rep.vulnerable / len(rep.strong) >= cal.VULNERABLE_FRACTION_MIN


# -- navigation ------------------------------------------------------------------------------

def is_walk(g, path):
    edges = set(zip(g.edge_u.tolist(), g.edge_v.tolist()))
    return all((max(a, b), min(a, b)) in edges for a, b in zip(path, path[1:]))


def test_navigate_trivial(sec):
    assert navigate(sec, 17, 17) == [17]


def test_navigate_walks(sec, ovl):
    rng = RngStream(5, 0)
    for g in (sec, ovl):
        for _ in range(200):
            u, v = map(int, rng.np.integers(0, g.n, 2))
            path = navigate(g, u, v)
            assert path[0] == u and path[-1] == v
            assert is_walk(g, path)
            assert len(set(path)) == len(path)


def test_navigate_within_community(sec):
    rep = {c.color: c for c in structure_report(sec).communities}
    for cv in communities(sec)[:50]:
        members = sorted(cv.members)
        if len(members) < 2:
            continue
        u, v = members[-1], members[len(members) // 2]
        path = navigate(sec, u, v)
        assert set(path) <= cv.members
        assert len(path) - 1 <= rep[cv.color].diameter


def test_navigate_mean_is_logarithmic(sec):
    rng = RngStream(6, 0)
    lens = [len(navigate(sec, *map(int, rng.np.integers(0, sec.n, 2)))) - 1 for _ in range(500)]
    assert np.mean(lens) <= cal.NAV_MEAN_C * math.log(sec.n)


# -- reports ----------------------------------------------------------------------------------

def test_structure_report_toy():
    g = strong_toy(2)
    rows = {c.color: c for c in structure_report(g).communities}
    # community 0: 8 internal + 2 boundary edges, vol 18 against 4 outside
    assert rows[0].size == 9 and rows[0].internal_edges == 8 and rows[0].external_edges == 2
    assert rows[0].conductance == Fraction(2, 4)
    assert rows[0].diameter == 2
    assert rows[1].conductance == 1 and rows[1].diameter == 0


def test_structure_report_distances(sec):
    rep = structure_report(sec, sample_pairs=64, rng=RngStream(1, 0))
    assert 1 <= rep.mean_distance <= 3 * math.log(sec.n)
    assert rep.max_diameter() <= cal.MAX_DIAMETER
    assert sum(c.size for c in rep.communities) == sec.n


def test_sampled_distance_on_path():
    from conftest import path_graph
    g = path_graph(2)
    assert sampled_mean_distance(g, 10, RngStream(0, 0)) == 1


# -- infection-inclusion audit -------------------------------------------------------------------

def test_audit_trivial_cases(sec):
    thr = assign_thresholds(sec, "random", RngStream(1, 1))
    assert infection_inclusion_audit(sec, infection_set(sec, thr, set())) == []
    cv = max(communities(sec), key=lambda c: c.size)
    thr1 = assign_thresholds(sec, ThresholdSpec.uniform(1))
    res = infection_set(sec, thr1, set(cv.members) - {cv.seed})
    assert infection_inclusion_audit(sec, res) == []


def test_audit_seeded_attacks():
    runs = 0
    for gi in range(10):
        g = generate(GenParams("security", 10_000, d=10, a=1.5, master_seed=gi), graph_stream(gi, 0))
        for j in range(10):
            rng = RngStream(gi, 100 + j)
            k = int(rng.np.integers(1, 48))
            s = set(rng.np.choice(g.n, size=k, replace=False).tolist())
            res = infection_set(g, assign_thresholds(g, "random", rng), s)
            assert infection_inclusion_audit(g, res) == []
            runs += 1
    assert runs == 100


def test_audit_flags_overlap_cross_edges():
    g = generate(GenParams("overlap", 10_000, d1=5, d2=5, a=1.5, master_seed=3))
    thr = assign_thresholds(g, "random", RngStream(3, 1))
    order = np.argsort(-g.degree, kind="stable")[:47]
    bad = infection_inclusion_audit(g, infection_set(g, thr, set(order.tolist())))
    assert bad and {v.edge_kind for v in bad} <= {"over_cross", "intra", "seed_rand", "seed_pref"}
