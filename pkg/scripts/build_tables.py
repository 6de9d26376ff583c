#!/usr/bin/env python3
"""Build the four standard inverse-CDF tables (P = 10^2..10^5).

Full-fidelity tables use 10^6+1 quantile points; pass --desk for the faster
10^5+1 variant used by the test suite.
"""

import argparse
import time
from pathlib import Path

from levyarea import logprodexp as lp
from levyarea.area import TABLE_P_VALUES
from levyarea.cli import table_filename


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("tables"))
    ap.add_argument("--desk", action="store_true", help="10^5+1 points instead of 10^6+1")
    ap.add_argument(
        "--endpoint-mode", choices=["paper", "extrapolated"], default="paper"
    )
    args = ap.parse_args()

    grid_points = 10**5 + 1 if args.desk else 10**6 + 1
    args.out.mkdir(parents=True, exist_ok=True)
    for P in TABLE_P_VALUES:
        t0 = time.perf_counter()
        grid = lp.default_grid(P, grid_points=grid_points)
        table = lp.build_table(P, grid, endpoint_mode=args.endpoint_mode)
        dest = args.out / table_filename(P)
        lp.write_table(table, dest)
        print(f"P={P:>6}: {dest} (M={table.M}) in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
