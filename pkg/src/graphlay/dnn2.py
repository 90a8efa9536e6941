"""A residual Chebyshev graph-convolution network that learns to emit layouts
minimising the tsNET cost, trained with the two-stage weight schedule.

Every input graph is padded with isolated fictive nodes up to ``n_max`` and
its real nodes are scattered over randomly chosen slots, so one forward pass
always runs on tensors of the same shape. A row mask zeroes the fictive slots
after every convolution and at the output.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import autodiff as ad
from .graph import Graph, all_pairs_bfs, check_connected
from .layouts import pivot_mds
from .spectral import (
    ChebyshevFilters, chebyshev_filters, lambda_max, normalized_laplacian, rescaled_laplacian,
)
from .tsnet import SCHEDULES, JointP, LossWeights, default_perplexity, full_loss, joint_p, loss_gradient

CHECKPOINT_MAGIC = "graphlay-checkpoint"
CHECKPOINT_VERSION = 1
# evaluation inputs use permutations drawn from this seed so that every model
# sees the same permuted graphs
EVAL_SEED = 7_919


class CapacityError(ValueError):
    """The graph has more nodes than the model's ``n_max``."""


class CheckpointError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    n_max: int = 32
    num_residual_blocks: int = 4
    features_per_layer: int = 32
    cheb_order_main: int = 4
    cheb_order_tail: int = 2
    tail_layer_count: int = 9
    variant: str = "plain"
    dense_head_widths: tuple[int, int, int] = (64, 32, 2)
    normalization: str = "l2"

    def __post_init__(self):
        object.__setattr__(self, "dense_head_widths", tuple(int(w) for w in self.dense_head_widths))
        if self.n_max < 2:
            raise ValueError("n_max must be >= 2")
        if self.cheb_order_main < 1 or self.cheb_order_tail < 1:
            raise ValueError("Chebyshev orders must be >= 1")
        if self.num_residual_blocks < 0 or self.features_per_layer < 1 or self.tail_layer_count < 0:
            raise ValueError("block count, width and tail count must be non-negative")
        if self.variant not in ("plain", "star"):
            raise ValueError(f"variant must be 'plain' or 'star', got {self.variant!r}")
        if len(self.dense_head_widths) != 3 or self.dense_head_widths[-1] != 2:
            raise ValueError("dense_head_widths must have three entries ending in 2")
        if self.normalization not in ("l2", "layer"):
            raise ValueError("normalization must be 'l2' or 'layer'")

    @classmethod
    def desk(cls, **kw) -> "ModelConfig":
        return cls(**kw)

    @classmethod
    def full(cls, **kw) -> "ModelConfig":
        base = dict(n_max=128, num_residual_blocks=16, features_per_layer=64)
        base.update(kw)
        return cls(**base)

    @property
    def in_features(self) -> int:
        return 2 if self.variant == "plain" else 4

    @property
    def num_convs(self) -> int:
        return 1 + 3 * self.num_residual_blocks

    @property
    def max_order(self) -> int:
        return max(self.conv_orders())

    def conv_orders(self) -> list[int]:
        total = self.num_convs
        return [self.cheb_order_tail if c >= total - self.tail_layer_count else self.cheb_order_main
                for c in range(total)]


# ---------------------------------------------------------------- features

@dataclass(frozen=True)
class FeatureScaler:
    """Min/max of the PivotMDS columns over a training corpus."""

    lo: tuple[float, float]
    hi: tuple[float, float]

    @classmethod
    def fit(cls, coords: Sequence[np.ndarray]) -> "FeatureScaler":
        allc = np.concatenate([np.asarray(c, dtype=float) for c in coords])
        return cls(tuple(allc.min(axis=0).tolist()), tuple(allc.max(axis=0).tolist()))

    def apply(self, c: np.ndarray) -> np.ndarray:
        lo, hi = np.array(self.lo), np.array(self.hi)
        span = np.where(hi > lo, hi - lo, 1.0)
        return (c - lo) / span


def _minmax(c: np.ndarray) -> np.ndarray:
    lo, hi = c.min(axis=0), c.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return (c - lo) / span


def pivot_coordinates(g: Graph, seed: int = 0) -> np.ndarray:
    if g.num_nodes < 2:
        return np.zeros((g.num_nodes, 2))
    return pivot_mds(g, seed=seed)


def build_features(g: Graph, variant: str, seed, n_max: int = 32,
                   scaler: FeatureScaler | None = None, pivots: np.ndarray | None = None) -> np.ndarray:
    """Node features: scaled index, a uniform random value and, for ``star``, PivotMDS.

    The PivotMDS columns are rescaled with ``scaler`` (corpus statistics) when
    given and per graph otherwise. ``pivots`` lets callers pass cached raw
    PivotMDS coordinates.
    """
    check_connected(g)
    n = g.num_nodes
    if n > n_max:
        raise CapacityError(f"graph has {n} nodes but n_max is {n_max}")
    rng = np.random.default_rng(seed)
    cols = [np.arange(n) / (n_max - 1), rng.random(n)]
    feats = np.column_stack(cols)
    if variant == "star":
        raw = pivot_coordinates(g) if pivots is None else np.asarray(pivots, dtype=float)
        scaled = scaler.apply(raw) if scaler is not None else _minmax(raw)
        feats = np.column_stack([feats, scaled])
    elif variant != "plain":
        raise ValueError(f"unknown variant {variant!r}")
    return feats


# ---------------------------------------------------------------- padding

@dataclass(frozen=True)
class PaddedInput:
    features: np.ndarray      # n_max x F, fictive rows zero
    mask: np.ndarray          # n_max, 1.0 at real slots
    filters: np.ndarray       # (K+1) x n_max x n_max dense Chebyshev filters
    permutation: np.ndarray   # permutation[i] = slot of node i; entries past real_count are fictive
    real_count: int

    @property
    def slots(self) -> np.ndarray:
        return self.permutation[: self.real_count]


def real_filters(g: Graph, k_order: int) -> np.ndarray:
    """Dense Chebyshev filters of the unpadded graph, (K+1) x N x N."""
    n = g.num_nodes
    if n == 1:
        return np.stack([np.full((1, 1), (-1.0) ** k) for k in range(k_order + 1)])
    lap = normalized_laplacian(g)
    return chebyshev_filters(rescaled_laplacian(lap, lambda_max(lap)), k_order).dense()


def padded_graph_filters(g: Graph, slots: Sequence[int], n_max: int, k_order: int) -> ChebyshevFilters:
    """Filters computed literally on the padded graph (reference path).

    The largest Laplacian eigenvalue is taken from the real graph; the padded
    spectrum only adds zeros so the value is the same.
    """
    slots = [int(s) for s in slots]
    pg = Graph(n_max, tuple((slots[u], slots[v]) for u, v in g.edges))
    lap = normalized_laplacian(pg, allow_isolated=True)
    lam = lambda_max(normalized_laplacian(g)) if g.num_nodes > 1 else 2.0
    return chebyshev_filters(rescaled_laplacian(lap, lam), k_order)


def _embed(filters: np.ndarray, slots: np.ndarray, n_max: int) -> np.ndarray:
    k1 = filters.shape[0]
    out = np.zeros((k1, n_max, n_max))
    fict = np.setdiff1d(np.arange(n_max), slots)
    for k in range(k1):
        # an isolated node has L~ = -1, so T_k = (-1)^k on its diagonal
        out[k, fict, fict] = (-1.0) ** k
    out[:, slots[:, None], slots[None, :]] = filters
    return out


def pad_and_permute(g: Graph, feats: np.ndarray, cfg: ModelConfig, seed,
                    filters: np.ndarray | None = None) -> PaddedInput:
    n = g.num_nodes
    if n > cfg.n_max:
        raise CapacityError(f"graph has {n} nodes but n_max is {cfg.n_max}")
    feats = np.asarray(feats, dtype=float)
    if feats.shape[0] != n:
        raise ValueError("feature rows do not match node count")
    perm = np.random.default_rng(seed).permutation(cfg.n_max)
    slots = perm[:n]
    x = np.zeros((cfg.n_max, feats.shape[1]))
    x[slots] = feats
    mask = np.zeros(cfg.n_max)
    mask[slots] = 1.0
    if filters is None:
        filters = real_filters(g, cfg.max_order)
    return PaddedInput(x, mask, _embed(filters, slots, cfg.n_max), perm, n)


# ---------------------------------------------------------------- parameters

@dataclass
class ModelParams:
    tensors: dict[str, ad.Tensor]
    scaler: FeatureScaler | None = None

    def __getitem__(self, name: str) -> ad.Tensor:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def names(self) -> list[str]:
        return list(self.tensors)

    def values(self) -> list[ad.Tensor]:
        return list(self.tensors.values())

    def copy(self) -> "ModelParams":
        return ModelParams({k: ad.Tensor(t.value.copy(), requires_grad=True)
                            for k, t in self.tensors.items()}, self.scaler)

    def count(self) -> int:
        return sum(t.value.size for t in self.tensors.values())

    def equals(self, other: "ModelParams") -> bool:
        return (self.names() == other.names() and self.scaler == other.scaler
                and all(np.array_equal(self[k].value, other[k].value) for k in self.tensors))


def _glorot(rng, fan_in: int, fan_out: int) -> np.ndarray:
    lim = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, size=(fan_in, fan_out))


def init_params(cfg: ModelConfig, seed=0) -> ModelParams:
    rng = np.random.default_rng(seed)
    f = cfg.features_per_layer
    t: dict[str, np.ndarray] = {}
    orders = cfg.conv_orders()
    widths_in = [cfg.in_features] + [f] * (cfg.num_convs - 1)
    for c, (k, w_in) in enumerate(zip(orders, widths_in)):
        t[f"conv{c}.theta"] = _glorot(rng, w_in * (k + 1), f)
    prev = f
    for h, width in enumerate(cfg.dense_head_widths):
        t[f"head{h}.w"] = _glorot(rng, prev, width)
        t[f"head{h}.b"] = np.zeros(width)
        prev = width
    return ModelParams({k: ad.Tensor(v, requires_grad=True) for k, v in t.items()})


# ---------------------------------------------------------------- model

def graph_convolution(x, filters, theta) -> ad.Tensor:
    """``concat_k(T_k X) @ theta`` where the order K is read off theta's shape.

    ``filters`` is a ChebyshevFilters object or a dense array whose third
    to last axis indexes k (batched inputs carry a leading batch axis).
    """
    if isinstance(filters, ChebyshevFilters):
        filters = filters.dense()
    xv = x.value if isinstance(x, ad.Tensor) else np.asarray(x)
    tv = theta.value if isinstance(theta, ad.Tensor) else np.asarray(theta)
    f = xv.shape[-1]
    if tv.ndim != 2 or tv.shape[0] % f:
        raise ValueError(f"theta shape {tv.shape} incompatible with {f} input features")
    k1 = tv.shape[0] // f
    if k1 > filters.shape[-3]:
        raise ValueError(f"theta needs order {k1 - 1} but only {filters.shape[-3] - 1} available")
    parts = [x if k == 0 else ad.matmul(np.take(filters, k, axis=-3), x) for k in range(k1)]
    z = parts[0] if k1 == 1 else ad.concat(parts, axis=-1)
    return ad.matmul(z, theta)


def _normalize(z, cfg: ModelConfig):
    return ad.row_l2_normalize(z) if cfg.normalization == "l2" else ad.layer_normalize(z)


def _conv_unit(x, filters, theta, mask, cfg: ModelConfig):
    return ad.mask_rows(_normalize(graph_convolution(x, filters, theta), cfg), mask)


def residual_block(x, filters, params: dict, mask, cfg: ModelConfig) -> ad.Tensor:
    """Three masked, normalized convolutions with a shortcut around them.

    ``params`` holds ``theta0..theta2`` and, when the block changes width, a
    ``proj`` order-0 kernel for the shortcut.
    """
    y = ad.relu(_conv_unit(x, filters, params["theta0"], mask, cfg))
    y = ad.relu(_conv_unit(y, filters, params["theta1"], mask, cfg))
    y = _conv_unit(y, filters, params["theta2"], mask, cfg)
    short = ad.mask_rows(ad.matmul(x, params["proj"]), mask) if "proj" in params else x
    return ad.mask_rows(ad.relu(ad.add(y, short)), mask)


def _stack_inputs(inputs: Sequence[PaddedInput]):
    return (np.stack([p.features for p in inputs]), np.stack([p.mask for p in inputs]),
            np.stack([p.filters for p in inputs]))


def forward_tensor(inputs: Sequence[PaddedInput], params: ModelParams, cfg: ModelConfig) -> ad.Tensor:
    """Batched forward pass; returns a B x n_max x 2 tensor with zero fictive rows."""
    x, mask, filters = _stack_inputs(inputs)
    if x.shape[-1] != cfg.in_features:
        raise ValueError(f"inputs have {x.shape[-1]} features, config expects {cfg.in_features}")
    h = ad.relu(_conv_unit(x, filters, params["conv0.theta"], mask, cfg))
    for b in range(cfg.num_residual_blocks):
        c = 1 + 3 * b
        block = {f"theta{i}": params[f"conv{c + i}.theta"] for i in range(3)}
        if f"block{b}.proj" in params:
            block["proj"] = params[f"block{b}.proj"]
        h = residual_block(h, filters, block, mask, cfg)
    for i in range(3):
        h = ad.add(ad.matmul(h, params[f"head{i}.w"]), params[f"head{i}.b"])
        if i < 2:
            h = ad.relu(h)
    return ad.mask_rows(h, mask)


def forward(inp: PaddedInput, params: ModelParams, cfg: ModelConfig) -> np.ndarray:
    """n_max x 2 output for one padded input (fictive rows zero)."""
    return forward_tensor([inp], params, cfg).value[0]


def unpermute(out: np.ndarray, inp: PaddedInput) -> np.ndarray:
    return np.array(out[inp.slots])


# ---------------------------------------------------------------- loss

def tsnet_loss_op(x: ad.Tensor, p: JointP | np.ndarray, w: LossWeights) -> ad.Tensor:
    """The tsNET cost as a tape op; value and gradient come from the objective module."""
    xv = x.value
    val = full_loss(xv, p, w)
    return ad.custom(np.array(val), lambda g: (g * loss_gradient(xv, p, w),), x)


def batch_loss(out: ad.Tensor, inputs: Sequence[PaddedInput], ps: Sequence, w: LossWeights) -> ad.Tensor:
    """Mean over the batch of per-graph losses on the real-node rows."""
    total = None
    for b, (inp, p) in enumerate(zip(inputs, ps)):
        lb = tsnet_loss_op(ad.take(out, (b, inp.slots)), p, w)
        total = lb if total is None else ad.add(total, lb)
    return ad.mul(total, 1.0 / len(inputs))


# ---------------------------------------------------------------- training

@dataclass(frozen=True)
class TrainConfig:
    epochs_stage1: int = 200
    epochs_stage2: int = 200
    patience: int = 20
    batch_size: int = 32
    lr: float = 1e-3
    seed: int = 0
    # draw fresh random features and permutations every epoch instead of once
    resample_inputs: bool = True


@dataclass(frozen=True)
class HistoryRow:
    epoch: int
    stage: int
    train_loss: float
    val_loss: float


@dataclass
class _Prepared:
    graph: Graph
    p: JointP
    filters: np.ndarray
    pivots: np.ndarray | None


def _graph_key(g: Graph) -> tuple:
    return (g.num_nodes, g.edges)


class _Cache:
    """Per-graph p distributions, filters and PivotMDS, computed once."""

    def __init__(self, cfg: ModelConfig):
        self.cfg = cfg
        self.store: dict[tuple, _Prepared] = {}

    def get(self, g: Graph) -> _Prepared:
        key = _graph_key(g)
        hit = self.store.get(key)
        if hit is None:
            check_connected(g)
            if g.num_nodes > self.cfg.n_max:
                raise CapacityError(f"graph has {g.num_nodes} nodes but n_max is {self.cfg.n_max}")
            if g.num_nodes < 2:
                raise ValueError("training graphs need at least two nodes")
            d = all_pairs_bfs(g)
            p = joint_p(d, default_perplexity(g.num_nodes, self.cfg.n_max))
            piv = pivot_coordinates(g, 0) if self.cfg.variant == "star" else None
            hit = _Prepared(g, p, real_filters(g, self.cfg.max_order), piv)
            self.store[key] = hit
        return hit


def _make_input(prep: _Prepared, cfg: ModelConfig, scaler, seed) -> PaddedInput:
    fs, ps = np.random.SeedSequence(seed).spawn(2)
    feats = build_features(prep.graph, cfg.variant, fs, cfg.n_max, scaler, prep.pivots)
    return pad_and_permute(prep.graph, feats, cfg, ps, prep.filters)


def evaluation_inputs(graphs: Sequence[Graph], cfg: ModelConfig, scaler=None,
                      cache: _Cache | None = None) -> list[PaddedInput]:
    """Padded inputs with permutations fixed by a global seed."""
    cache = cache or _Cache(cfg)
    return [_make_input(cache.get(g), cfg, scaler, [EVAL_SEED, i]) for i, g in enumerate(graphs)]


def dataset_loss(inputs: Sequence[PaddedInput], ps: Sequence, params: ModelParams, cfg: ModelConfig,
                 w: LossWeights, batch_size: int = 32) -> float:
    """Mean per-graph loss over a dataset (no tape)."""
    total = 0.0
    for s in range(0, len(inputs), batch_size):
        chunk = inputs[s:s + batch_size]
        out = forward_tensor(chunk, params, cfg)
        total += batch_loss(out, chunk, ps[s:s + batch_size], w).value.item() * len(chunk)
    return total / len(inputs)


def train(cfg: ModelConfig, train_set: Sequence[Graph], val_set: Sequence[Graph], seed: int = 0,
          tcfg: TrainConfig | None = None, init: ModelParams | None = None,
          log: Callable[[HistoryRow], None] | None = None) -> tuple[ModelParams, list[HistoryRow]]:
    """Two-stage Adam training with early stopping on validation loss.

    Row ``epoch = 0`` of each stage holds the loss before any update. The
    optimizer state is reset between stages and each stage resumes from the
    best parameters of the previous one. ``init`` warm-starts from a checkpoint.
    """
    tcfg = tcfg or TrainConfig(seed=seed)
    if not train_set or not val_set:
        raise ValueError("training and validation sets must be nonempty")
    cache = _Cache(cfg)
    train_prep = [cache.get(g) for g in train_set]
    val_prep = [cache.get(g) for g in val_set]
    scaler = None
    if cfg.variant == "star":
        scaler = init.scaler if init is not None and init.scaler is not None else \
            FeatureScaler.fit([p.pivots for p in train_prep])
    params = init.copy() if init is not None else init_params(cfg, [seed, 1])
    params.scaler = scaler
    val_inputs = [_make_input(p, cfg, scaler, [EVAL_SEED, i]) for i, p in enumerate(val_prep)]
    val_ps = [p.p for p in val_prep]
    fixed = None if tcfg.resample_inputs else [
        _make_input(p, cfg, scaler, [seed, 0, i]) for i, p in enumerate(train_prep)]
    sched = SCHEDULES["tsnet" if cfg.variant == "plain" else "tsnet_star"]
    stages = [(1, sched.stage1, tcfg.epochs_stage1), (2, sched.stage2, tcfg.epochs_stage2)]
    history: list[HistoryRow] = []
    rng = np.random.default_rng([seed, 2])
    for stage, w, epochs in stages:
        if stage == 2 and epochs == 0:
            break
        # a fresh optimizer per stage resets the moment estimates
        opt = ad.Adam(params.values(), lr=tcfg.lr)
        best = dataset_loss(val_inputs, val_ps, params, cfg, w, tcfg.batch_size)
        best_params = params.copy()
        row = HistoryRow(0, stage, math.nan, best)
        history.append(row)
        if log:
            log(row)
        stale = 0
        for epoch in range(1, epochs + 1):
            order = rng.permutation(len(train_prep))
            if fixed is None:
                inputs = [_make_input(train_prep[i], cfg, scaler, [seed, stage, epoch, int(i)])
                          for i in order]
            else:
                inputs = [fixed[i] for i in order]
            run = 0.0
            for s in range(0, len(order), tcfg.batch_size):
                idx = order[s:s + tcfg.batch_size]
                chunk = inputs[s:s + tcfg.batch_size]
                with ad.Tape() as tape:
                    out = forward_tensor(chunk, params, cfg)
                    loss = batch_loss(out, chunk, [train_prep[i].p for i in idx], w)
                ad.backward(tape, loss)
                opt.step()
                run += loss.value.item() * len(idx)
            val = dataset_loss(val_inputs, val_ps, params, cfg, w, tcfg.batch_size)
            row = HistoryRow(epoch, stage, run / len(order), val)
            history.append(row)
            if log:
                log(row)
            if val < best:
                best, best_params, stale = val, params.copy(), 0
            else:
                stale += 1
                if stale >= tcfg.patience:
                    break
        params = best_params
    return params, history


def format_history_csv(rows: Sequence[HistoryRow]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["epoch", "stage", "train_loss", "val_loss"])
    for r in rows:
        wr.writerow([r.epoch, r.stage, repr(r.train_loss), repr(r.val_loss)])
    return buf.getvalue()


# ---------------------------------------------------------------- prediction

def predict(g: Graph, params: ModelParams, cfg: ModelConfig, seed=EVAL_SEED) -> np.ndarray:
    """Layout for ``g`` in its own node order."""
    if g.num_nodes > cfg.n_max:
        raise CapacityError(f"graph has {g.num_nodes} nodes but n_max is {cfg.n_max}")
    check_connected(g)
    if g.num_nodes == 1:
        return np.zeros((1, 2))
    piv = pivot_coordinates(g, 0) if cfg.variant == "star" else None
    prep = _Prepared(g, None, real_filters(g, cfg.max_order), piv)
    inp = _make_input(prep, cfg, params.scaler, seed)
    return unpermute(forward(inp, params, cfg), inp)


# ---------------------------------------------------------------- checkpoints

def format_checkpoint(params: ModelParams, cfg: ModelConfig) -> str:
    lines = [f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}",
             "config " + json.dumps(asdict(cfg), sort_keys=True)]
    sc = params.scaler
    lines.append("scaler " + ("none" if sc is None else json.dumps({"lo": sc.lo, "hi": sc.hi})))
    for name, t in params.tensors.items():
        v = t.value
        lines.append(f"param {name} {' '.join(str(s) for s in v.shape)}".rstrip())
        lines.append(" ".join(repr(float(a)) for a in v.ravel()))
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_checkpoint(text: str) -> tuple[ModelParams, ModelConfig]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(CHECKPOINT_MAGIC + " "):
        raise CheckpointError("not a graphlay checkpoint")
    try:
        version = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise CheckpointError("unreadable checkpoint version") from None
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"checkpoint version {version} unsupported (expected {CHECKPOINT_VERSION})")
    try:
        cfg = ModelConfig(**json.loads(lines[1].removeprefix("config ")))
        sc_text = lines[2].removeprefix("scaler ")
        scaler = None
        if sc_text != "none":
            sc = json.loads(sc_text)
            scaler = FeatureScaler(tuple(sc["lo"]), tuple(sc["hi"]))
        tensors: dict[str, ad.Tensor] = {}
        i = 3
        while lines[i] != "end":
            head = lines[i].split()
            if head[0] != "param":
                raise CheckpointError(f"line {i + 1}: expected 'param'")
            shape = tuple(int(s) for s in head[2:])
            vals = np.array([float(a) for a in lines[i + 1].split()], dtype=np.float64)
            tensors[head[1]] = ad.Tensor(vals.reshape(shape), requires_grad=True)
            i += 2
    except CheckpointError:
        raise
    except (IndexError, ValueError, KeyError, TypeError) as exc:
        raise CheckpointError(f"malformed checkpoint: {exc}") from None
    params = ModelParams(tensors, scaler)
    expected = init_params(cfg)
    if params.names() != expected.names() or any(
            params[k].shape != expected[k].shape for k in expected.names()):
        raise CheckpointError("checkpoint parameters do not match its config")
    return params, cfg


def save_checkpoint(path: str | Path, params: ModelParams, cfg: ModelConfig) -> None:
    Path(path).write_text(format_checkpoint(params, cfg), encoding="utf-8")


def load_checkpoint(path: str | Path) -> tuple[ModelParams, ModelConfig]:
    return parse_checkpoint(Path(path).read_text(encoding="utf-8"))
