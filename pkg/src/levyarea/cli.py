"""Command-line front end.

Verbs:

* ``levyarea tables build``  -- construct inverse-CDF table files
* ``levyarea sample``        -- emit per-sample CSV for one method
* ``levyarea bench``         -- accuracy-versus-effort benchmark CSV
* ``levyarea density``       -- evaluate a density engine over a grid

CSV output is comma-separated with a header row, floats printed as shortest
round-trip decimals, lines newline-terminated.
"""

from __future__ import annotations

import csv
from pathlib import Path

import click
import numpy as np

from . import bench as bench_mod
from . import logprodexp as lp
from .area import TABLE_P_VALUES, ConfigurationError, Method, MethodConfig
from .specfun import ConvergenceError

_METHOD_NAMES = [m.value for m in Method]


def table_filename(P: int) -> str:
    return f"lpedinv_{P}.txt"


def load_tables(directory) -> dict[int, lp.InverseCdfTable]:
    """Load the four standard-P tables from a directory built by
    ``tables build``; missing or malformed files raise ConfigurationError."""
    directory = Path(directory)
    tables = {}
    for P in TABLE_P_VALUES:
        path = directory / table_filename(P)
        if not path.exists():
            raise ConfigurationError(f"missing table file {path}")
        try:
            table = lp.read_table(path)
        except lp.TableFormatError as exc:
            raise ConfigurationError(f"bad table file {path}: {exc}") from exc
        if table.P != P:
            raise ConfigurationError(f"{path} holds P={table.P}, expected {P}")
        tables[P] = table
    return tables


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _parse_int_list(text: str, what: str) -> list[int]:
    """Accept comma lists ('0,2,4') and inclusive ranges ('0-8')."""
    text = text.strip()
    try:
        if "-" in text and not text.lstrip().startswith("-"):
            lo, hi = text.split("-", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise ValueError
            return list(range(lo_i, hi_i + 1))
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise click.UsageError(f"cannot parse {what} list {text!r}") from None


@click.group()
def main() -> None:
    """Conditioned Levy-area sampling and benchmarking."""


@main.group()
def tables() -> None:
    """Inverse-CDF table construction."""


@tables.command("build")
@click.option(
    "--P",
    "p_list",
    default="100,1000,10000,100000",
    show_default=True,
    help="Comma-separated table sizes to build.",
)
@click.option(
    "--grid",
    "grid_points",
    type=int,
    default=10**6 + 1,
    show_default=True,
    help="Number of quantile entries per table.",
)
@click.option(
    "--endpoint-mode",
    type=click.Choice(["paper", "extrapolated"]),
    default="paper",
    show_default=True,
)
@click.option(
    "--out",
    "out_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("tables"),
    show_default=True,
)
def tables_build(p_list: str, grid_points: int, endpoint_mode: str, out_dir: Path):
    """Build one quantile-table file per P (idempotent: same inputs give
    byte-identical files)."""
    p_values = _parse_int_list(p_list, "--P")
    if grid_points < 3:
        raise click.UsageError("--grid must be at least 3")
    out_dir.mkdir(parents=True, exist_ok=True)
    for P in p_values:
        try:
            grid = lp.default_grid(P, grid_points=grid_points)
            table = lp.build_table(P, grid, endpoint_mode=endpoint_mode)
        except ValueError as exc:
            raise click.UsageError(f"P={P}: {exc}") from exc
        dest = out_dir / table_filename(P)
        try:
            lp.write_table(table, dest)
        except OSError as exc:
            raise click.ClickException(f"cannot write {dest}: {exc}") from exc
        click.echo(f"wrote {dest} (M={table.M}, endpoint_mode={endpoint_mode})")


def _parse_increments(text: str):
    if text == "random":
        return None
    if text.startswith("fixed:"):
        body = text[len("fixed:") :]
        parts = body.split(",")
        if len(parts) == 2:
            try:
                return (float(parts[0]), float(parts[1]))
            except ValueError:
                pass
    raise click.UsageError(
        f"--increments must be 'random' or 'fixed:<dW1>,<dW2>', got {text!r}"
    )


@main.command()
@click.option("--method", type=click.Choice(_METHOD_NAMES), required=True)
@click.option("--N", "n_order", type=int, default=8, show_default=True)
@click.option("--threshold", type=int, default=100, show_default=True)
@click.option("--tail/--no-tail", default=True, show_default=True)
@click.option("--h", "h", type=float, default=1.0, show_default=True)
@click.option("--count", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--increments",
    default="random",
    show_default=True,
    help="'random' or 'fixed:<dW1>,<dW2>'.",
)
@click.option(
    "--tables",
    "tables_dir",
    type=click.Path(path_type=Path),
    default=None,
    help="Directory of table files (exp_product only).",
)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def sample(method, n_order, threshold, tail, h, count, seed, increments, tables_dir, out):
    """Generate samples; CSV columns dW1,dW2,a_sq,area,uniforms.

    The uniforms column counts draws consumed by the area sample itself;
    random increments cost two further uniforms each.
    """
    inc = _parse_increments(increments)
    if h <= 0.0:
        raise click.UsageError("--h must be positive")
    if count < 1:
        raise click.UsageError("--count must be positive")
    method_e = Method(method)
    tables = None
    if method_e is Method.EXP_PRODUCT:
        if tables_dir is None:
            raise click.ClickException(
                "exp_product needs --tables <dir>; build one with 'tables build'"
            )
        try:
            tables = load_tables(tables_dir)
        except ConfigurationError as exc:
            raise click.ClickException(str(exc)) from exc
    cfg = MethodConfig(
        method=method_e, N=n_order, threshold=threshold, tail=tail, tables=tables
    )
    try:
        batch = bench_mod.run_samples(cfg, h, count, seed, increments=inc)
    except (ValueError, ConfigurationError) as exc:
        raise click.ClickException(str(exc)) from exc
    a_sq = batch.a_sq
    rows = zip(batch.dW1, batch.dW2, a_sq, batch.values, batch.uniforms)
    _write_csv(out, ["dW1", "dW2", "a_sq", "area", "uniforms"], rows)
    click.echo(f"wrote {count} samples to {out}")


@main.command()
@click.option(
    "--methods",
    default=",".join(_METHOD_NAMES),
    show_default=True,
    help="Comma-separated method names.",
)
@click.option(
    "--N",
    "n_spec",
    default="0-10",
    show_default=True,
    help="Truncation orders: comma list ('0,2,4') or range ('0-10').",
)
@click.option("--count", type=int, default=10**6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threshold", type=int, default=100, show_default=True)
@click.option("--tail/--no-tail", default=True, show_default=True)
@click.option(
    "--tables",
    "tables_dir",
    type=click.Path(path_type=Path),
    default=None,
)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def bench(methods, n_spec, count, seed, threshold, tail, tables_dir, out):
    """Accuracy-versus-effort benchmark at h=1 with random increments.

    One CSV row per (method, N); |sample variance - 0.25| against metered
    uniform draws.  The Monte-Carlo noise floor for the error column scales
    like 0.25*sqrt(2/count).
    """
    if count < 10**4:
        raise click.UsageError("--count must be at least 10^4")
    method_names = [tok.strip() for tok in methods.split(",") if tok.strip()]
    bad = [m for m in method_names if m not in _METHOD_NAMES]
    if bad:
        raise click.UsageError(f"unknown method(s): {', '.join(bad)}")
    n_values = _parse_int_list(n_spec, "--N")
    tables = None
    if Method.EXP_PRODUCT.value in method_names:
        if tables_dir is None:
            raise click.ClickException("benchmarking exp_product needs --tables <dir>")
        try:
            tables = load_tables(tables_dir)
        except ConfigurationError as exc:
            raise click.ClickException(str(exc)) from exc
    rows = []
    for name in method_names:
        method_n = [n for n in n_values if n >= 1] if name in (
            Method.LEVY_FOURIER.value,
            Method.RW_LAPLACE.value,
        ) else n_values
        for row in bench_mod.run_benchmark(
            [name], method_n, count, seed, threshold=threshold, tail=tail, tables=tables
        ):
            rows.append(row)
            click.echo(
                f"{row.method} N={row.N}: |err|={row.abs_error:.3e} "
                f"uniforms/sample={row.uniform_draws_total / row.count:.1f} "
                f"cpu={row.cpu_seconds:.2f}s"
            )
    header = [
        "method",
        "N",
        "threshold",
        "tail",
        "h",
        "count",
        "seed",
        "sample_variance",
        "true_variance",
        "abs_error",
        "cpu_seconds",
        "uniform_draws_total",
        "shards",
    ]
    _write_csv(
        out,
        header,
        (
            [
                r.method,
                r.N,
                r.threshold,
                r.tail,
                r.h,
                r.count,
                r.seed,
                r.sample_variance,
                r.true_variance,
                r.abs_error,
                r.cpu_seconds,
                r.uniform_draws_total,
                r.shards,
            ]
            for r in rows
        ),
    )
    click.echo(f"wrote {len(rows)} rows to {out}")


@main.command()
@click.option("--P", "p_value", type=int, required=True)
@click.option(
    "--engine",
    type=click.Choice(["asymptotic", "series", "large-x"]),
    default="asymptotic",
    show_default=True,
)
@click.option("--x-min", type=float, default=None, help="Default: mean - 8 sigma (series: -8).")
@click.option("--x-max", type=float, default=None, help="Default: mean + 8 sigma (series: 2).")
@click.option("--points", type=int, default=401, show_default=True)
@click.option("--n-terms", type=int, default=200, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def density(p_value, engine, x_min, x_max, points, n_terms, out):
    """Evaluate one density engine over a grid; CSV columns x,density."""
    if points < 2:
        raise click.UsageError("--points must be at least 2")
    if x_min is None or x_max is None:
        if engine == "series":
            lo, hi = -8.0, 2.0
        else:
            mu, sd = lp.lped_mean(p_value), lp.lped_sigma(p_value)
            lo, hi = mu - 8.0 * sd, mu + 8.0 * sd
        x_min = lo if x_min is None else x_min
        x_max = hi if x_max is None else x_max
    if not x_min < x_max:
        raise click.UsageError("--x-min must be below --x-max")
    xs = np.linspace(x_min, x_max, points)
    try:
        if engine == "asymptotic":
            ys = lp.density_asymptotic(p_value, xs)
        elif engine == "large-x":
            ys = lp.density_large_x(p_value, xs)
        else:
            ys = np.array([lp.density_series(p_value, x, n_terms) for x in xs])
    except (ValueError, ConvergenceError) as exc:
        raise click.ClickException(f"{engine} engine: {exc}") from exc
    _write_csv(out, ["x", "density"], zip(xs, ys))
    click.echo(f"wrote {points} density values to {out}")


if __name__ == "__main__":  # pragma: no cover
    main()
