"""Benchmark PivotMDS against SGD stress layout on a sparse random corpus.

    python3 demos/02_benchmark.py

Shows the mean metric table and whether the rank test singles out a winner.
"""
from graphlay.bench import format_summary_md, generate_corpus, run_benchmark


def main():
    # sparse trees with a few extra edges look like the Rome graphs in density
    corpus = generate_corpus(range(20, 60, 4), 5, seed=1, generator="sparse")
    print(f"{len(corpus)} graphs, sizes 20..56")
    report = run_benchmark(["pivotmds", "sgd"], corpus, seed=0)
    print(format_summary_md(report))
    st = report.stats["stress"]
    print(f"Kruskal-Wallis on stress: H = {st.h:.2f}, p = {st.p_omnibus:.2e}")
    print(f"Conover-Iman pivotmds vs sgd: p = {st.pairwise_p[0, 1]:.2e}")
    print("best significant on stress:", report.best_significant("stress"))


if __name__ == "__main__":
    main()
