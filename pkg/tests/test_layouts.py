import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete_graph, cycle_graph, grid_graph, path_graph, random_connected, star_graph
from graphlay.graph import Graph, all_pairs_bfs
from graphlay.layouts import (
    LayoutConvergenceWarning, TsnetOptions, align_layout, format_layout_csv, max_min_pivots,
    parse_layout_csv, pivot_mds, read_layout_csv, sgd_stress, tsnet_layout, write_layout_csv,
)
from graphlay.metrics import stress_metric
from graphlay.tsnet import TSNET, TSNET_STAR, default_perplexity, full_loss, joint_p


def _dists(x):
    return [np.linalg.norm(x[i] - x[j]) for i, j in itertools.combinations(range(len(x)), 2)]


# PivotMDS

def test_pivot_mds_p2_is_one_dimensional():
    x = pivot_mds(path_graph(2))
    assert x[0, 0] != x[1, 0]
    assert (x[:, 1] == 0).all()


def test_pivot_mds_grid_stress():
    g = grid_graph(5, 5)
    x = pivot_mds(g, num_pivots=25)
    assert stress_metric(x, all_pairs_bfs(g)) < 0.05


def test_pivot_mds_deterministic(rng):
    g = random_connected(30, rng)
    assert np.array_equal(pivot_mds(g, seed=3), pivot_mds(g, seed=3))


def test_pivot_mds_path_is_collinear_with_spacing():
    x = pivot_mds(path_graph(6))
    gaps = np.abs(np.diff(x[:, 0]))
    assert np.allclose(gaps, gaps[0], rtol=1e-6)
    assert np.abs(x[:, 1]).max() < 1e-6 * np.abs(x[:, 0]).max()


def test_pivot_mds_rejects_single_pivot():
    with pytest.raises(ValueError):
        pivot_mds(path_graph(4), num_pivots=1)


def test_pivot_mds_single_node():
    assert pivot_mds(Graph(1, ())).shape == (1, 2)


def test_max_min_pivots_are_farthest_first():
    pivots, cols = max_min_pivots(path_graph(9), 3, 4)
    assert pivots[0] == 4
    assert set(pivots[1:]) == {0, 8}
    assert cols.shape == (9, 3)


def test_max_min_pivots_stop_when_exhausted():
    pivots, _ = max_min_pivots(complete_graph(3), 10, 0)
    assert sorted(pivots) == [0, 1, 2]


# stress SGD

def test_sgd_p2_unit_distance():
    x = sgd_stress(path_graph(2), seed=1)
    assert np.linalg.norm(x[0] - x[1]) == pytest.approx(1.0, abs=0.01)


def test_sgd_k3_equilateral():
    x = sgd_stress(complete_graph(3), seed=2)
    assert np.allclose(_dists(x), 1.0, atol=0.05)


def test_sgd_deterministic(rng):
    g = random_connected(25, rng)
    assert np.array_equal(sgd_stress(g, seed=9), sgd_stress(g, seed=9))
    assert not np.array_equal(sgd_stress(g, seed=9), sgd_stress(g, seed=10))


def test_sgd_low_stress_on_cycle():
    g = cycle_graph(12)
    assert stress_metric(sgd_stress(g, seed=0), all_pairs_bfs(g)) < 0.05


def test_sgd_rejects_zero_iters():
    with pytest.raises(ValueError):
        sgd_stress(path_graph(3), iters=0)


@settings(max_examples=15)
@given(st.integers(3, 20), st.integers(0, 2 ** 31 - 1))
def test_sgd_outputs_finite(n, seed):
    g = random_connected(n, np.random.default_rng(seed))
    assert np.isfinite(sgd_stress(g, seed=seed)).all()


# tsNET

def test_tsnet_k3_near_equilateral():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LayoutConvergenceWarning)
        for sched in ("tsnet", "tsnet_star"):
            d = _dists(tsnet_layout(complete_graph(3), sched, seed=0))
            assert max(d) <= 1.05 * min(d)


@pytest.mark.parametrize("sched", ["tsnet", "tsnet_star"])
@pytest.mark.parametrize("seed", [0, 1, 42])
def test_tsnet_p3_stage2_window_monotone(sched, seed):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LayoutConvergenceWarning)
        _, hist = tsnet_layout(path_graph(3), sched, seed=seed, return_history=True)
    trace = hist[1]
    for t in range(len(trace) - 50):
        assert trace[t + 50] <= trace[t] + 1e-6


def test_tsnet_star_leaves_collinear_init():
    # PivotMDS of a path is exactly collinear; the result should not stay on a line
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LayoutConvergenceWarning)
        x = tsnet_layout(path_graph(3), "tsnet_star", seed=0)
    c = x - x.mean(axis=0)
    s = np.linalg.svd(c, compute_uv=False)
    assert s[1] > 1e-3 * s[0]


@pytest.mark.parametrize("sched", [TSNET, TSNET_STAR])
def test_tsnet_stage1_descent_property(rng, sched):
    opts = TsnetOptions(max_iter_stage1=300, max_iter_stage2=300)
    for _ in range(4):
        g = random_connected(int(rng.integers(5, 25)), rng)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LayoutConvergenceWarning)
            x, hist = tsnet_layout(g, sched, seed=int(rng.integers(100)), opts=opts,
                                   return_history=True)
        s1, s2 = hist
        assert min(s1) <= s1[0]
        p = joint_p(all_pairs_bfs(g), default_perplexity(g.num_nodes))
        assert full_loss(x, p, sched.stage2) == min(s2)


def test_tsnet_deterministic(rng):
    g = random_connected(12, rng)
    opts = TsnetOptions(max_iter_stage1=100, max_iter_stage2=100)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LayoutConvergenceWarning)
        a = tsnet_layout(g, "tsnet_star", seed=5, opts=opts)
        b = tsnet_layout(g, "tsnet_star", seed=5, opts=opts)
    assert np.array_equal(a, b)


def test_tsnet_warns_at_iteration_cap(rng):
    g = random_connected(15, rng)
    with pytest.warns(LayoutConvergenceWarning):
        x = tsnet_layout(g, "tsnet", seed=0, opts=TsnetOptions(max_iter_stage1=3, max_iter_stage2=3))
    assert np.isfinite(x).all()


def test_tsnet_accepts_dashed_name():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LayoutConvergenceWarning)
        x = tsnet_layout(star_graph(4), "tsnet-star", seed=0,
                         opts=TsnetOptions(max_iter_stage1=20, max_iter_stage2=20))
    assert x.shape == (5, 2)


# CSV

def test_layout_csv_round_trip(tmp_path, rng):
    x = rng.normal(size=(7, 2)) * 1e3
    ids = [f"n{i}" for i in range(7)]
    text = format_layout_csv(x, ids)
    assert text.splitlines()[0] == "node_id,x,y"
    got_ids, got = parse_layout_csv(text)
    assert got_ids == ids and np.array_equal(got, x)
    write_layout_csv(tmp_path / "l.csv", x, ids)
    assert np.array_equal(read_layout_csv(tmp_path / "l.csv")[1], x)


@pytest.mark.parametrize("text", ["a,b,c\n0,1,2\n", "node_id,x,y\n0,1\n", "node_id,x,y\n0,one,2\n", ""])
def test_layout_csv_errors(text):
    with pytest.raises(ValueError):
        parse_layout_csv(text)


def test_align_layout_reorders_and_reports_missing():
    g = path_graph(3)
    ids = list(g.node_ids)
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    out = align_layout(g, ids[::-1], pts[::-1])
    assert np.array_equal(out, pts)
    with pytest.raises(ValueError, match=ids[2]):
        align_layout(g, ids[:2], pts[:2])
