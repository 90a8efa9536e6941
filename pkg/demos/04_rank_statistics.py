"""Kruskal-Wallis with Conover-Iman post-hoc comparisons on made-up scores.

    python3 demos/04_rank_statistics.py
"""
import numpy as np

from graphlay.stats import compare


def main():
    rng = np.random.default_rng(0)
    names = ("fast", "careful", "random")
    groups = [rng.normal(0.10, 0.03, 40), rng.normal(0.07, 0.03, 40), rng.normal(0.30, 0.08, 40)]
    res = compare("stress", names, groups)
    print(f"H = {res.h:.2f}, p = {res.p_omnibus:.2e}")
    for i, a in enumerate(names):
        print(" ".join(f"{res.pairwise_p[i, j]:9.2e}" for j in range(len(names))), a)
    means = [g.mean() for g in groups]
    best = res.best_significant(means)
    # a method is highlighted only if it has the lowest mean and beats every other one
    print("highlighted:", names[best] if best is not None else "none")
    res2 = compare("stress", names[:2], [groups[1], groups[1] + 0.001])
    print("near-identical pair highlighted:", res2.best_significant([means[1], means[1] + 0.001]))


if __name__ == "__main__":
    main()
