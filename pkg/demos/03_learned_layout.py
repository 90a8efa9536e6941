"""Train a small graph-convolution layout model and use it on unseen graphs.

    python3 demos/03_learned_layout.py

Uses a reduced model (n_max 16, one residual block) so it finishes in
well under a minute; the desk configuration is ``ModelConfig.desk()``.
"""
import warnings

import numpy as np

from graphlay import dnn2
from graphlay.bench import generate_random_connected
from graphlay.metrics import neighborhood_preservation_metric


def corpus(count, seed):
    rng = np.random.default_rng(seed)
    return [generate_random_connected(int(n), seed * 1000 + i)
            for i, n in enumerate(rng.integers(5, 17, size=count))]


def main():
    cfg = dnn2.ModelConfig(n_max=16, num_residual_blocks=1, features_per_layer=16,
                           tail_layer_count=2, variant="star")
    train, val, test = corpus(60, 1), corpus(15, 2), corpus(15, 3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        params, hist = dnn2.train(cfg, train, val, seed=0,
                                  tcfg=dnn2.TrainConfig(epochs_stage1=15, epochs_stage2=5, batch_size=8))
    for row in hist:
        if row.epoch % 5 == 0:
            print(f"stage {row.stage} epoch {row.epoch:2d}  val loss {row.val_loss:.4f}")
    model = [neighborhood_preservation_metric(dnn2.predict(g, params, cfg), g) for g in test]
    rand = [neighborhood_preservation_metric(np.random.default_rng(i).random((g.num_nodes, 2)), g)
            for i, g in enumerate(test)]
    # lower is better: 0 means every graph neighbourhood is kept in the drawing
    print(f"neighbourhood preservation: model {np.mean(model):.3f}, random {np.mean(rand):.3f}")
    text = dnn2.format_checkpoint(params, cfg)
    back, _ = dnn2.parse_checkpoint(text)
    same = np.array_equal(dnn2.predict(test[0], back, cfg), dnn2.predict(test[0], params, cfg))
    print(f"checkpoint is {len(text)} bytes; reload reproduces predictions: {same}")


if __name__ == "__main__":
    main()
