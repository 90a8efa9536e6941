import math
import time

import numpy as np
import pytest

from conftest import complete_graph, cycle_graph, path_graph, random_connected, star_graph
from graphlay import autodiff as ad
from graphlay.dnn2 import (
    EVAL_SEED, CapacityError, CheckpointError, FeatureScaler, ModelConfig, TrainConfig,
    batch_loss, build_features, evaluation_inputs, format_checkpoint, format_history_csv,
    forward, forward_tensor, graph_convolution, init_params, load_checkpoint, pad_and_permute,
    padded_graph_filters, parse_checkpoint, predict, real_filters, residual_block,
    save_checkpoint, train, unpermute,
)
from graphlay.graph import DisconnectedGraphError, Graph, all_pairs_bfs
from graphlay.tsnet import TSNET, TSNET_STAR, default_perplexity, full_loss, joint_p

TINY = ModelConfig(n_max=6, num_residual_blocks=1, features_per_layer=4, cheb_order_main=3,
                   cheb_order_tail=2, tail_layer_count=2, dense_head_widths=(5, 3, 2))


def fd_rel_error(f, values, grad, h=1e-6):
    worst = 0.0
    for idx in np.ndindex(values.shape):
        old = values[idx]
        values[idx] = old + h
        up = f()
        values[idx] = old - h
        down = f()
        values[idx] = old
        num = (up - down) / (2 * h)
        worst = max(worst, abs(num - grad[idx]) / max(abs(num), abs(grad[idx]), 1e-6))
    return worst


# config

def test_config_presets():
    d, f = ModelConfig.desk(), ModelConfig.full()
    assert (d.n_max, d.num_residual_blocks, d.features_per_layer) == (32, 4, 32)
    assert (f.n_max, f.num_residual_blocks) == (128, 16)
    assert d.num_convs == 13
    assert d.conv_orders() == [4] * 4 + [2] * 9
    assert f.conv_orders().count(2) == 9


@pytest.mark.parametrize("kw", [dict(n_max=1), dict(cheb_order_main=0), dict(variant="x"),
                                dict(dense_head_widths=(4, 4, 3)), dict(normalization="batch")])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        ModelConfig(**kw)


# features

def test_features_p2_plain():
    f = build_features(path_graph(2), "plain", seed=0, n_max=32)
    assert f.shape == (2, 2)
    assert np.array_equal(f[:, 0], [0.0, 1.0 / 31])
    assert ((f[:, 1] >= 0) & (f[:, 1] < 1)).all()


def test_features_star_width_and_range(rng):
    g = random_connected(12, rng)
    f = build_features(g, "star", seed=1, n_max=32)
    assert f.shape == (12, 4)
    assert f[:, 2:].min() == 0.0 and f[:, 2:].max() == 1.0


def test_features_star_use_corpus_scaler():
    g = cycle_graph(8)
    from graphlay.dnn2 import pivot_coordinates
    raw = pivot_coordinates(g)
    sc = FeatureScaler((-10.0, -10.0), (10.0, 10.0))
    f = build_features(g, "star", seed=0, n_max=32, scaler=sc)
    assert np.allclose(f[:, 2:], (raw + 10) / 20)


def test_features_deterministic(rng):
    g = random_connected(10, rng)
    assert np.array_equal(build_features(g, "star", 5), build_features(g, "star", 5))
    assert not np.array_equal(build_features(g, "plain", 5), build_features(g, "plain", 6))


def test_features_errors():
    with pytest.raises(CapacityError):
        build_features(path_graph(40), "plain", 0, n_max=32)
    with pytest.raises(DisconnectedGraphError):
        build_features(Graph(3, ((0, 1),)), "plain", 0)


# padding

def test_pad_p2_into_four():
    cfg = ModelConfig(n_max=4, num_residual_blocks=0, tail_layer_count=0)
    inp = pad_and_permute(path_graph(2), build_features(path_graph(2), "plain", 0, 4), cfg, seed=3)
    assert inp.mask.sum() == 2
    assert np.array_equal(inp.mask[inp.slots], [1, 1])
    fict = inp.mask == 0
    assert not inp.features[fict].any()


def test_pad_full_capacity_is_permutation(rng):
    cfg = ModelConfig(n_max=8, num_residual_blocks=0, tail_layer_count=0)
    g = random_connected(8, rng)
    inp = pad_and_permute(g, build_features(g, "plain", 0, 8), cfg, seed=1)
    assert inp.mask.all()
    assert sorted(inp.permutation.tolist()) == list(range(8))


def test_padded_filters_match_literal_padded_graph(rng):
    cfg = ModelConfig(n_max=16)
    for n in (2, 5, 11, 16):
        g = random_connected(n, rng)
        inp = pad_and_permute(g, build_features(g, "plain", 0, 16), cfg, seed=n)
        ref = padded_graph_filters(g, inp.slots, 16, cfg.max_order).dense()
        assert np.abs(inp.filters - ref).max() < 1e-12


def test_padded_filters_have_no_real_fictive_coupling(rng):
    g = random_connected(9, rng)
    cfg = ModelConfig(n_max=20)
    inp = pad_and_permute(g, build_features(g, "plain", 0, 20), cfg, seed=0)
    real = inp.mask == 1
    assert not inp.filters[:, real][:, :, ~real].any()
    assert not inp.filters[:, ~real][:, :, real].any()


def test_pad_capacity_error():
    with pytest.raises(CapacityError):
        pad_and_permute(path_graph(7), np.zeros((7, 2)), ModelConfig(n_max=6), seed=0)


def test_permutations_keep_real_feature_multiset(rng):
    g = random_connected(10, rng)
    feats = build_features(g, "plain", 0, 32)
    a = pad_and_permute(g, feats, ModelConfig(), seed=1)
    b = pad_and_permute(g, feats, ModelConfig(), seed=2)
    assert not np.array_equal(a.slots, b.slots)
    assert np.array_equal(unpermute(a.features, a), unpermute(b.features, b))


# graph convolution

def test_convolution_order0_identity(rng):
    x = rng.normal(size=(6, 3))
    filt = real_filters(cycle_graph(6), 2)
    assert np.array_equal(graph_convolution(x, filt, np.eye(3)).value, x)


def test_convolution_zero_theta(rng):
    x = rng.normal(size=(6, 3))
    out = graph_convolution(x, real_filters(cycle_graph(6), 2), np.zeros((9, 4))).value
    assert not out.any()


def test_convolution_matches_dense_oracles(rng):
    g = random_connected(10, rng)
    filt = real_filters(g, 4)
    x = rng.normal(size=(10, 3))
    theta = rng.normal(size=(15, 5))
    got = graph_convolution(x, filt, theta).value
    stacked = np.concatenate([filt[k] @ x for k in range(5)], axis=1) @ theta
    summed = sum(filt[k] @ x @ theta[3 * k:3 * (k + 1)] for k in range(5))
    assert np.abs(got - stacked).max() < 1e-10
    assert np.abs(got - summed).max() < 1e-10


def test_convolution_shape_errors(rng):
    filt = real_filters(cycle_graph(5), 2)
    with pytest.raises(ValueError):
        graph_convolution(rng.normal(size=(5, 3)), filt, np.zeros((10, 2)))
    with pytest.raises(ValueError):
        graph_convolution(rng.normal(size=(5, 2)), filt, np.zeros((8, 2)))


# residual block

def _block_setup(rng, n=5, n_max=8, f=4):
    g = random_connected(n, rng)
    cfg = ModelConfig(n_max=n_max, features_per_layer=f)
    inp = pad_and_permute(g, np.zeros((n, 2)), cfg, seed=0)
    x = np.zeros((n_max, f))
    x[inp.slots] = rng.normal(size=(n, f))
    return cfg, inp, x


def test_block_zero_weights_gives_relu(rng):
    cfg, inp, x = _block_setup(rng)
    z = np.zeros((4 * 5, 4))
    out = residual_block(x, inp.filters, {"theta0": z, "theta1": z, "theta2": z}, inp.mask, cfg).value
    assert np.array_equal(out, np.maximum(x, 0))


def test_block_fictive_rows_zero(rng):
    cfg, inp, x = _block_setup(rng)
    params = {f"theta{i}": rng.normal(size=(20, 4)) for i in range(3)}
    out = residual_block(x, inp.filters, params, inp.mask, cfg).value
    assert not out[inp.mask == 0].any()


def test_block_projection_shortcut(rng):
    cfg, inp, x = _block_setup(rng)
    params = {"theta0": rng.normal(size=(20, 6)), "theta1": rng.normal(size=(30, 6)),
              "theta2": rng.normal(size=(30, 6)), "proj": rng.normal(size=(4, 6))}
    out = residual_block(x, inp.filters, params, inp.mask, cfg).value
    assert out.shape == (8, 6)
    assert not out[inp.mask == 0].any()


def test_block_gradient_matches_fd(rng):
    cfg, inp, x = _block_setup(rng)
    thetas = [ad.Tensor(rng.normal(size=(20, 4)), requires_grad=True) for _ in range(3)]
    xt = ad.Tensor(x, requires_grad=True)
    r = rng.normal(size=(8, 4))

    def loss_fn():
        p = dict(zip(("theta0", "theta1", "theta2"), thetas))
        return ad.sum_all(ad.mul(residual_block(xt, inp.filters, p, inp.mask, cfg), r))

    with ad.Tape() as tape:
        loss = loss_fn()
    ad.backward(tape, loss)
    f = lambda: float(loss_fn().value)
    for t in thetas + [xt]:
        assert fd_rel_error(f, t.value, t.grad) < 1e-4


# full model

def _tiny_inputs(rng, count=3, variant="plain"):
    cfg = TINY if variant == "plain" else ModelConfig(**{**TINY.__dict__, "variant": "star"})
    graphs = [random_connected(int(rng.integers(3, 6)), rng) for _ in range(count)]
    inputs = evaluation_inputs(graphs, cfg)
    ps = [joint_p(all_pairs_bfs(g), default_perplexity(g.num_nodes, cfg.n_max)) for g in graphs]
    return cfg, graphs, inputs, ps


def test_forward_shape_mask_and_determinism(rng):
    cfg, _, inputs, _ = _tiny_inputs(rng)
    params = init_params(cfg, 0)
    a = forward_tensor(inputs, params, cfg).value
    b = forward_tensor(inputs, params, cfg).value
    assert a.shape == (3, 6, 2)
    assert a.tobytes() == b.tobytes()
    for out, inp in zip(a, inputs):
        assert not out[inp.mask == 0].any()
    assert np.array_equal(forward(inputs[1], params, cfg), a[1])


def test_end_to_end_gradient_matches_fd(rng):
    g = random_connected(5, rng)
    cfg = TINY
    inp = evaluation_inputs([g], cfg)[0]
    p = joint_p(all_pairs_bfs(g), default_perplexity(5, cfg.n_max))
    params = init_params(cfg, 3)

    def loss_value():
        return float(batch_loss(forward_tensor([inp], params, cfg), [inp], [p], TSNET.stage1).value)

    with ad.Tape() as tape:
        loss = batch_loss(forward_tensor([inp], params, cfg), [inp], [p], TSNET.stage1)
    ad.backward(tape, loss)
    for name in params.names():
        t = params[name]
        assert fd_rel_error(loss_value, t.value, t.grad) < 1e-4, name


def test_no_gradient_reaches_fictive_rows(rng):
    cfg, _, inputs, ps = _tiny_inputs(rng)
    params = init_params(cfg, 0)
    x = ad.Tensor(np.stack([i.features for i in inputs]), requires_grad=True)
    # run the first convolution directly from a differentiable feature tensor
    filters = np.stack([i.filters for i in inputs])
    mask = np.stack([i.mask for i in inputs])
    with ad.Tape() as tape:
        h = ad.mask_rows(ad.row_l2_normalize(
            graph_convolution(x, filters, params["conv0.theta"])), mask)
        h = ad.matmul(h, np.ones((4, 2)))
        out = ad.mask_rows(h, mask)
        loss = batch_loss(out, inputs, ps, TSNET.stage1)
    ad.backward(tape, loss)
    assert not x.grad[mask == 0].any()
    assert x.grad[mask == 1].any()


def test_batch_loss_is_mean_of_full_losses(rng):
    cfg, _, inputs, ps = _tiny_inputs(rng, count=4)
    out = forward_tensor(inputs, init_params(cfg, 1), cfg)
    for w in (TSNET.stage1, TSNET_STAR.stage1, TSNET.stage2):
        got = float(batch_loss(out, inputs, ps, w).value)
        want = np.mean([full_loss(unpermute(o, i), p, w) for o, i, p in zip(out.value, inputs, ps)])
        assert got == pytest.approx(want, rel=1e-9)


def test_single_graph_loss_is_bit_identical(rng):
    cfg, _, inputs, ps = _tiny_inputs(rng, count=1)
    out = forward_tensor(inputs, init_params(cfg, 1), cfg)
    got = float(batch_loss(out, inputs, ps, TSNET.stage1).value)
    assert got == full_loss(unpermute(out.value[0], inputs[0]), ps[0], TSNET.stage1)


def test_forward_time_is_size_independent(rng):
    cfg = ModelConfig.desk()
    params = init_params(cfg, 0)
    times = []
    for n in (4, 32):
        g = random_connected(n, rng)
        inp = evaluation_inputs([g], cfg)[0]
        forward(inp, params, cfg)
        runs = []
        for _ in range(5):
            t0 = time.perf_counter()
            forward(inp, params, cfg)
            runs.append(time.perf_counter() - t0)
        times.append(min(runs))
    assert max(times) < 2 * min(times)


# training

def _tiny_corpus(seed, count):
    rng = np.random.default_rng(seed)
    return [random_connected(int(rng.integers(3, 7)), rng) for _ in range(count)]


def test_train_is_deterministic():
    tr, va = _tiny_corpus(0, 6), _tiny_corpus(1, 2)
    tcfg = TrainConfig(epochs_stage1=2, epochs_stage2=2, batch_size=4)
    a, ha = train(TINY, tr, va, seed=4, tcfg=tcfg)
    b, hb = train(TINY, tr, va, seed=4, tcfg=tcfg)
    assert a.equals(b)
    assert format_history_csv(ha) == format_history_csv(hb)
    assert [(r.epoch, r.stage) for r in ha] == [(0, 1), (1, 1), (2, 1), (0, 2), (1, 2), (2, 2)]
    assert math.isnan(ha[0].train_loss)


def test_train_returns_best_validation_params():
    tr, va = _tiny_corpus(2, 8), _tiny_corpus(3, 3)
    params, hist = train(TINY, tr, va, seed=0,
                         tcfg=TrainConfig(epochs_stage1=5, epochs_stage2=0, batch_size=4))
    inputs = evaluation_inputs(va, TINY)
    ps = [joint_p(all_pairs_bfs(g), default_perplexity(g.num_nodes, TINY.n_max)) for g in va]
    from graphlay.dnn2 import dataset_loss
    got = dataset_loss(inputs, ps, params, TINY, TSNET.stage1)
    assert got == pytest.approx(min(r.val_loss for r in hist), rel=1e-12)


def test_train_star_variant_stores_scaler():
    cfg = ModelConfig(**{**TINY.__dict__, "variant": "star"})
    params, _ = train(cfg, _tiny_corpus(4, 4), _tiny_corpus(5, 2), seed=0,
                      tcfg=TrainConfig(epochs_stage1=1, epochs_stage2=0))
    assert params.scaler is not None
    assert predict(cycle_graph(5), params, cfg).shape == (5, 2)


def test_train_errors():
    with pytest.raises(ValueError):
        train(TINY, [], _tiny_corpus(0, 1))
    with pytest.raises(CapacityError):
        train(TINY, [path_graph(7)], [path_graph(3)])


# prediction and checkpoints

def test_predict_deterministic_and_capacity(rng):
    params = init_params(TINY, 0)
    g = star_graph(4)
    assert np.array_equal(predict(g, params, TINY), predict(g, params, TINY))
    assert predict(g, params, TINY, seed=EVAL_SEED).shape == (5, 2)
    with pytest.raises(CapacityError):
        predict(path_graph(7), params, TINY)


def test_checkpoint_round_trip(tmp_path):
    cfg = ModelConfig(**{**TINY.__dict__, "variant": "star"})
    params = init_params(cfg, 9)
    params.scaler = FeatureScaler((-1.5, -2.0), (1.25, 3.0))
    save_checkpoint(tmp_path / "m.ckpt", params, cfg)
    back, cfg2 = load_checkpoint(tmp_path / "m.ckpt")
    assert cfg2 == cfg
    assert back.equals(params)
    g = complete_graph(4)
    assert np.array_equal(predict(g, back, cfg2), predict(g, params, cfg))
    assert format_checkpoint(back, cfg2) == (tmp_path / "m.ckpt").read_text()


def test_checkpoint_version_mismatch():
    text = format_checkpoint(init_params(TINY, 0), TINY)
    with pytest.raises(CheckpointError, match="version"):
        parse_checkpoint(text.replace("graphlay-checkpoint 1", "graphlay-checkpoint 2", 1))


@pytest.mark.parametrize("mutate", [
    lambda t: "hello\n",
    lambda t: t.replace("param conv0.theta", "weird conv0.theta", 1),
    lambda t: t.rsplit("end", 1)[0],
    lambda t: t.replace('"features_per_layer": 4', '"features_per_layer": 5', 1),
])
def test_checkpoint_malformed(mutate):
    text = format_checkpoint(init_params(TINY, 0), TINY)
    with pytest.raises(CheckpointError):
        parse_checkpoint(mutate(text))
