#!/usr/bin/env python3
"""Accuracy-versus-effort benchmark of the five area samplers.

Runs every method over a range of truncation orders N at h=1 with random
increments, then prints |sample variance - 0.25| against metered uniform
draws and CPU time.  The per-row Monte-Carlo noise floor scales like
0.25*sqrt(2/count); rows below roughly three times that are dominated by
simulation noise rather than truncation error.
"""

import argparse
from pathlib import Path

from levyarea import bench
from levyarea.area import Method
from levyarea.cli import load_tables, table_filename

DEFAULT_N = {
    Method.LEVY_FOURIER: [1, 2, 4, 8, 16, 32, 64],
    Method.RW_LAPLACE: [1, 2, 4, 8, 16, 32, 64],
    Method.LOGISTIC: [0, 2, 4, 6, 8, 10, 12],
    Method.LOGISTIC_NORMAL: [0, 2, 4, 6, 8, 10, 12],
    Method.EXP_PRODUCT: [0, 2, 4, 6, 8, 10, 12],
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tail", action=argparse.BooleanOptionalAction, default=True)
    ap.add_argument("--tables", type=Path, default=Path("tables"))
    ap.add_argument("--out", type=Path, default=Path("benchmark.csv"))
    args = ap.parse_args()

    have_tables = all(
        (args.tables / table_filename(p)).exists() for p in (100, 1000, 10_000, 100_000)
    )
    tables = load_tables(args.tables) if have_tables else None
    if tables is None:
        print(f"no tables under {args.tables}; skipping exp_product "
              f"(build them with scripts/build_tables.py)")

    noise_floor = 0.25 * (2.0 / args.count) ** 0.5
    print(f"count={args.count}  approximate noise floor ~{noise_floor:.2e}")
    rows = []
    for method, n_values in DEFAULT_N.items():
        if method is Method.EXP_PRODUCT and tables is None:
            continue
        for row in bench.run_benchmark(
            [method], n_values, args.count, args.seed, tail=args.tail, tables=tables
        ):
            rows.append(row)
            print(
                f"{row.method:16s} N={row.N:<3d} |err|={row.abs_error:.3e} "
                f"uniforms/sample={row.uniform_draws_total / row.count:10.1f} "
                f"cpu={row.cpu_seconds:6.2f}s"
            )

    with open(args.out, "w") as f:
        f.write(
            "method,N,threshold,tail,h,count,seed,sample_variance,true_variance,"
            "abs_error,cpu_seconds,uniform_draws_total,shards\n"
        )
        for r in rows:
            f.write(
                f"{r.method},{r.N},{r.threshold},{r.tail},{r.h!r},{r.count},{r.seed},"
                f"{r.sample_variance!r},{r.true_variance!r},{r.abs_error!r},"
                f"{r.cpu_seconds!r},{r.uniform_draws_total},{r.shards}\n"
            )
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
