"""Time index construction and conjunction queries at configurable scale."""

import argparse
import math
import time

import numpy as np

from nanoscope import GeneratorConfig, InterestCountModel, generate_population
from nanoscope.engine import AudienceQuery, InvertedIndex


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--users", type=int, default=1_000_000)
    parser.add_argument("--interests", type=int, default=50_000)
    parser.add_argument("--queries", type=int, default=10_000)
    parser.add_argument("--query-size", type=int, default=25)
    parser.add_argument("--warmup", type=int, default=100)
    parser.add_argument("--seed", type=int, default=21)
    args = parser.parse_args()

    config = GeneratorConfig(
        n_users=args.users,
        n_interests=args.interests,
        popularity_exponent=1.0,
        interests_per_user=InterestCountModel(
            mu=math.log(20.0), sigma=0.91, min_count=1,
            max_count=min(1000, args.interests),
        ),
        seed=args.seed,
    )
    t0 = time.perf_counter()
    pop = generate_population(config)
    t1 = time.perf_counter()
    index = InvertedIndex.build(pop)
    t2 = time.perf_counter()
    print(f"generate: {t1 - t0:.1f}s ({pop.indices.size} postings)")
    print(f"index build: {t2 - t1:.1f}s")

    rng = np.random.default_rng(args.seed)
    ids = pop.catalog.interest_ids
    queries = [
        AudienceQuery(frozenset(
            int(i) for i in rng.choice(ids, size=args.query_size, replace=False)
        ))
        for _ in range(args.queries + args.warmup)
    ]
    latencies = []
    for i, query in enumerate(queries):
        start = time.perf_counter()
        index.audience_size(query)
        stop = time.perf_counter()
        if i >= args.warmup:
            latencies.append((stop - start) * 1000.0)
    latencies.sort()
    median = latencies[len(latencies) // 2]
    p99 = latencies[math.ceil(0.99 * len(latencies)) - 1]
    print(f"{len(latencies)} queries of {args.query_size} interests: "
          f"median {median:.3f} ms, p99 {p99:.3f} ms, max {latencies[-1]:.3f} ms")


if __name__ == "__main__":
    main()
