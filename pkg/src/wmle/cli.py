"""Command-line front end.

Subcommands
-----------
mean      evaluate a Holder, Lehmer or generalized f-mean of given values
fit       estimate a family's parameters from data under a weight policy
sweep     grid of mean-order fits over election proportions, CSV and SVG out
vweights  value-selection weight curves of the two mean families, CSV out
ingest    parse a returns file and emit the per-cycle proportion matrix

Exit codes: 0 success, 2 domain/configuration error, 3 solver failure,
4 I/O error.  All CSV output is deterministic: identical inputs and flags
produce byte-identical files.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import means, mwle, pipeline, svg
from .errors import (
    AggregationError,
    ConfigError,
    DomainError,
    NumericError,
    SchemaError,
    SolverError,
)
from .families import gaussian_known_variance_model, weibull_model

__all__ = ["SweepTable", "run_sweep", "parse_grid", "main"]

_SWEEP_HEADER = "order,lambda_dem,lambda_rep,lambda_oth"
_PARTY_LABELS = ("dem", "rep", "oth")

#: Default sweep grids: the estimator order for the lehmer mode may span
#: negatives; the holder mode's order is a Weibull shape and must stay > 0.
DEFAULT_GRIDS = {"lehmer": "-3:4:0.1", "holder": "0.1:6:0.1"}


def parse_grid(spec: str) -> np.ndarray:
    """Parse ``start:stop:step`` into an ascending inclusive grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be start:stop:step, got {spec!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"grid values must be numbers: {spec!r}") from exc
    if not all(map(math.isfinite, (start, stop, step))):
        raise ConfigError(f"grid values must be finite: {spec!r}")
    if step <= 0:
        raise ConfigError(f"grid step must be positive, got {step}")
    if stop < start:
        raise ConfigError(f"grid stop {stop} is below start {start}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.array([start + i * step for i in range(count)])


@dataclass
class SweepTable:
    """Estimates (lambda_dem, lambda_rep, lambda_oth) along an order grid.

    Gap rows (orders where the solver failed) hold NaN in ``estimates`` and
    a reason in ``gaps``; the run always continues past them.
    """

    parameter: str  # "beta" for the lehmer mode, "k" for the holder mode
    orders: np.ndarray
    estimates: np.ndarray  # (len(orders), 3)
    gaps: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = [_SWEEP_HEADER]
        for order, row in zip(self.orders, self.estimates):
            if np.all(np.isfinite(row)):
                cells = ",".join(repr(float(v)) for v in row)
            else:
                cells = ",,"
            lines.append(f"{repr(float(order))},{cells}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, parameter: str = "") -> "SweepTable":
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines or lines[0].strip() != _SWEEP_HEADER:
            raise SchemaError(f"sweep CSV must start with header {_SWEEP_HEADER!r}")
        orders = []
        rows = []
        gaps = {}
        for line in lines[1:]:
            cells = line.split(",")
            if len(cells) != 4:
                raise SchemaError(f"malformed sweep row: {line!r}")
            order = float(cells[0])
            orders.append(order)
            if any(cell.strip() == "" for cell in cells[1:]):
                rows.append([math.nan] * 3)
                gaps[order] = "gap"
            else:
                rows.append([float(c) for c in cells[1:]])
        return cls(
            parameter=parameter,
            orders=np.asarray(orders, dtype=float),
            estimates=np.asarray(rows, dtype=float),
            gaps=gaps,
        )


def validate_sweep_table(table: SweepTable) -> None:
    """Enforce the table invariants before anything gets written.

    The grid must be strictly ascending, every non-gap estimate finite and
    positive, and each estimate column non-decreasing along the grid (the
    underlying means are monotone in their order; a small relative slack
    absorbs float rounding).
    """
    orders = table.orders
    if orders.size == 0:
        raise DomainError("sweep produced an empty grid")
    if np.any(np.diff(orders) <= 0):
        raise DomainError("sweep grid must be strictly ascending")
    good = np.all(np.isfinite(table.estimates), axis=1)
    rows = table.estimates[good]
    if rows.size and (not np.all(np.isfinite(rows)) or np.any(rows <= 0)):
        raise DomainError("sweep estimates must be finite and positive")
    for col in range(rows.shape[1] if rows.size else 0):
        column = rows[:, col]
        drops = np.diff(column) < -1e-9 * np.maximum(1.0, np.abs(column[:-1]))
        if np.any(drops):
            where = int(np.nonzero(drops)[0][0])
            raise DomainError(
                f"estimate column {col} decreases along the grid near row {where}; "
                "sweep table invariant violated"
            )


def run_sweep(matrix: pipeline.ProportionMatrix, mode: str, grid: np.ndarray) -> SweepTable:
    """One fit per grid order per party column.

    ``lehmer`` fits unit-shape Weibull components under the Lehmer weight
    policy of that order; ``holder`` fits Weibull components whose common
    shape is the order itself under unit weights.  Solver failures are
    recorded as gaps and the sweep continues.
    """
    if mode not in ("lehmer", "holder"):
        raise ConfigError(f"sweep mode must be 'lehmer' or 'holder', got {mode!r}")
    if mode == "holder" and np.any(grid <= 0):
        raise ConfigError("the holder sweep needs a strictly positive order grid")
    observations = matrix.values
    estimates = np.full((grid.size, 3), math.nan)
    gaps: dict = {}
    unit_shape_model = weibull_model(np.ones(3)) if mode == "lehmer" else None
    for i, order in enumerate(grid):
        try:
            if mode == "lehmer":
                policy = mwle.WeightPolicy.lehmer(np.full(3, order))
                result = mwle.fit(unit_shape_model, observations, policy, minimality_samples=0)
            else:
                model = weibull_model(np.full(3, order))
                policy = mwle.WeightPolicy.holder()
                result = mwle.fit(model, observations, policy, minimality_samples=0)
            estimates[i] = result.theta_hat
        except (SolverError, DomainError) as exc:
            gaps[float(order)] = str(exc)
    table = SweepTable(
        parameter="beta" if mode == "lehmer" else "k",
        orders=grid,
        estimates=estimates,
        gaps=gaps,
    )
    validate_sweep_table(table)
    return table


# --------------------------------------------------------------------- #
# Argument helpers
# --------------------------------------------------------------------- #


def _parse_order(text: str) -> float:
    lowered = text.strip().lower()
    if lowered in ("inf", "+inf", "infinity"):
        return math.inf
    if lowered in ("-inf", "-infinity"):
        return -math.inf
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"invalid order {text!r}; expected a number or inf/-inf") from None


def _parse_float_list(text: str, flag: str) -> np.ndarray:
    try:
        return np.array([float(part) for part in text.split(",") if part.strip() != ""])
    except ValueError:
        raise ConfigError(f"{flag} expects a comma-separated list of numbers, got {text!r}") from None


_F_TRANSFORMS = {
    "identity": (lambda v: v, lambda v: v),
    "log": (math.log, math.exp),
    "square": (lambda v: v * v, math.sqrt),
}


def _load_numeric_matrix(path: str) -> np.ndarray:
    """Read a numeric CSV for `fit`.

    A header row is skipped if its fields are not numeric; the ingest
    output format (year,dem,rep,other) additionally drops the year column.
    """
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line.strip() for line in handle if line.strip()]
    if not lines:
        raise DomainError(f"{path}: no data rows")
    start = 0
    drop_first_column = False
    first = lines[0].split(",")
    try:
        [float(cell) for cell in first]
    except ValueError:
        start = 1
        if [cell.strip() for cell in first] == ["year", "dem", "rep", "other"]:
            drop_first_column = True
    rows = []
    for line in lines[start:]:
        cells = line.split(",")
        if drop_first_column:
            cells = cells[1:]
        try:
            rows.append([float(cell) for cell in cells])
        except ValueError:
            raise DomainError(f"{path}: non-numeric cell in row {line!r}") from None
    matrix = np.asarray(rows, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise DomainError(f"{path}: expected a rectangular numeric table")
    return matrix


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


# --------------------------------------------------------------------- #
# Subcommands
# --------------------------------------------------------------------- #


def _cmd_mean(args) -> int:
    values = np.asarray(args.values, dtype=float)
    weights = _parse_float_list(args.weights, "--weights") if args.weights else None
    if args.kind == "f":
        f, f_inverse = _F_TRANSFORMS[args.transform]
        result = means.f_mean(f, f_inverse, values)
    else:
        if args.alpha is None:
            raise ConfigError(f"--alpha is required for the {args.kind} mean")
        order = _parse_order(args.alpha)
        if args.kind == "holder":
            result = means.holder_mean(order, values, weights)
        else:
            result = means.lehmer_mean(order, values, weights)
    print(repr(float(result)))
    return 0


def _build_family(args):
    if args.family == "weibull":
        shapes = _parse_float_list(args.shapes, "--shapes")
        return weibull_model(shapes)
    sigma = _parse_float_list(args.sigma, "--sigma")
    return gaussian_known_variance_model(sigma)


def _build_policy(args, n_columns: int) -> mwle.WeightPolicy:
    if args.policy == "holder":
        return mwle.WeightPolicy.holder()
    if args.beta is None:
        raise ConfigError("--beta is required for the lehmer policy")
    beta = _parse_float_list(args.beta, "--beta")
    if beta.size == 1 and n_columns > 1:
        beta = np.full(n_columns, beta[0])
    return mwle.WeightPolicy.lehmer(beta)


def _cmd_fit(args) -> int:
    if args.values:
        observations = np.asarray(args.values, dtype=float).reshape(-1, 1)
    elif args.data:
        observations = _load_numeric_matrix(args.data)
    else:
        raise ConfigError("fit needs data: positional values or --data PATH")
    model = _build_family(args)
    policy = _build_policy(args, observations.shape[1])
    result = mwle.fit(model, observations, policy, seed=args.seed)
    diag = result.diagnostics

    if args.format == "csv":
        lines = ["key,value"]
        for j, v in enumerate(result.theta_hat, start=1):
            lines.append(f"theta_{j},{repr(float(v))}")
        for j, v in enumerate(result.eta_hat, start=1):
            lines.append(f"eta_{j},{repr(float(v))}")
        for j, v in enumerate(result.target, start=1):
            lines.append(f"target_{j},{repr(float(v))}")
        lines.append(f"iterations,{diag.iterations}")
        lines.append(f"residual_norm,{repr(diag.residual_norm)}")
        lines.append(f"hessian_smallest,{repr(diag.hessian_smallest)}")
        lines.append(f"hessian_largest,{repr(diag.hessian_largest)}")
        minimal = "" if diag.minimality is None else str(diag.minimality.minimal).lower()
        lines.append(f"minimal,{minimal}")
        print("\n".join(lines))
        return 0

    print(f"model:            {model.name}")
    print(f"policy:           {policy.kind}")
    print(f"theta_hat:        {np.array2string(result.theta_hat, precision=12)}")
    print(f"eta_hat:          {np.array2string(result.eta_hat, precision=12)}")
    print(f"moment target:    {np.array2string(result.target, precision=12)}")
    print(f"solver:           {diag.solve_method}, {diag.iterations} iterations, "
          f"residual {diag.residual_norm:.3e}")
    print(f"hessian eigens:   [{diag.hessian_smallest:.6g}, {diag.hessian_largest:.6g}]")
    if diag.minimality is not None:
        verdict = "minimal" if diag.minimality.minimal else "degenerate"
        print(f"minimality:       {verdict} "
              f"(smallest/largest stat eigenvalue {diag.minimality.smallest_eigenvalue:.3e}"
              f"/{diag.minimality.largest_eigenvalue:.3e})")
    return 0


def _ingest_matrix(args) -> tuple[pipeline.ProportionMatrix, pipeline.LoadResult]:
    config = pipeline.SchemaConfig.from_file(args.config) if args.config else pipeline.SchemaConfig()
    loaded = pipeline.load_returns(args.data, config)
    if loaded.rejects:
        print(f"note: {len(loaded.rejects)} row(s) rejected during parsing", file=sys.stderr)
    return pipeline.aggregate(loaded.rows), loaded


def _cmd_sweep(args) -> int:
    matrix, _ = _ingest_matrix(args)
    grid = parse_grid(args.grid if args.grid else DEFAULT_GRIDS[args.mode])
    table = run_sweep(matrix, args.mode, grid)
    _write_text(args.out, table.to_csv())
    if table.gaps:
        print(f"note: {len(table.gaps)} grid point(s) failed and were recorded as gaps",
              file=sys.stderr)
    if args.svg:
        chart = svg.render_line_chart(
            table.orders,
            {
                "lambda_dem": table.estimates[:, 0],
                "lambda_rep": table.estimates[:, 1],
                "lambda_oth": table.estimates[:, 2],
            },
            title=f"Scale estimates vs {table.parameter} ({args.mode} sweep)",
            x_label=table.parameter,
            y_label="estimated scale",
        )
        _write_text(args.svg, chart)
    return 0


def _cmd_vweights(args) -> int:
    pair = args.values if args.values else [0.6, 2.0]
    if len(pair) != 2:
        raise ConfigError(f"vweights expects exactly two values, got {len(pair)}")
    a, b = (float(v) for v in pair)
    if a <= 0 or b <= 0:
        raise ConfigError("vweights values must be strictly positive")
    grid = parse_grid(args.grid)
    lines = ["alpha,vl_first,vl_second,vh_first,vh_second"]
    sample = np.array([a, b])
    for alpha in grid:
        # The curves are indexed by the exponent applied to the value
        # itself, i.e. the weights of the mean of order alpha + 1.
        vl = means.v_weights("lehmer", alpha + 1.0, sample)
        vh = means.v_weights("holder", alpha + 1.0, sample)
        cells = [repr(float(alpha))] + [repr(float(v)) for v in (*vl, *vh)]
        lines.append(",".join(cells))
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_ingest(args) -> int:
    matrix, loaded = _ingest_matrix(args)
    _write_text(args.out, matrix.to_csv())
    if args.rejects:
        lines = ["line,reason"]
        for reject in loaded.rejects:
            reason = reject.reason.replace('"', "'")
            lines.append(f'{reject.line_number},"{reason}"')
        _write_text(args.rejects, "\n".join(lines) + "\n")
    print(f"note: {matrix.n_cycles} cycle(s) aggregated", file=sys.stderr)
    return 0


# --------------------------------------------------------------------- #
# Parser and entry point
# --------------------------------------------------------------------- #


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wmle",
        description="Mean families and maximum weighted likelihood estimation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_mean = sub.add_parser("mean", help="evaluate a mean of the given values")
    p_mean.add_argument("--kind", choices=("holder", "lehmer", "f"), required=True)
    p_mean.add_argument("--alpha", help="mean order; inf and -inf are accepted")
    p_mean.add_argument("--weights", help="comma-separated positive weights")
    p_mean.add_argument("--transform", choices=sorted(_F_TRANSFORMS), default="log",
                        help="transform pair for the f kind (default: log)")
    p_mean.add_argument("values", nargs="+", type=float)
    p_mean.set_defaults(func=_cmd_mean)

    p_fit = sub.add_parser("fit", help="fit a family under a weight policy")
    p_fit.add_argument("--family", choices=("weibull", "gaussian"), default="weibull")
    p_fit.add_argument("--shapes", default="1", help="comma-separated Weibull shapes")
    p_fit.add_argument("--sigma", default="1", help="comma-separated Gaussian sigmas")
    p_fit.add_argument("--policy", choices=("holder", "lehmer"), default="holder")
    p_fit.add_argument("--beta", help="comma-separated lehmer exponents (scalar broadcasts)")
    p_fit.add_argument("--data", help="numeric CSV of observations (columns = components)")
    p_fit.add_argument("--format", choices=("text", "csv"), default="text")
    p_fit.add_argument("--seed", type=int, default=0, help="seed for sampling diagnostics")
    p_fit.add_argument("values", nargs="*", type=float,
                       help="single-column observations given inline")
    p_fit.set_defaults(func=_cmd_fit)

    p_sweep = sub.add_parser("sweep", help="sweep mean orders over election data")
    p_sweep.add_argument("--data", required=True, help="statewide returns file")
    p_sweep.add_argument("--mode", choices=("lehmer", "holder"), required=True)
    p_sweep.add_argument("--grid", help="start:stop:step, inclusive; use --grid=-3:4:0.1 for a negative start (default depends on mode)")
    p_sweep.add_argument("--config", help="schema config file (key=value lines)")
    p_sweep.add_argument("--out", help="sweep CSV path (default: stdout)")
    p_sweep.add_argument("--svg", help="also render the curves to this SVG path")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_vw = sub.add_parser("vweights", help="value-selection weight curves of a pair")
    p_vw.add_argument("--grid", default="-4:6:0.1", help="value-exponent grid start:stop:step (use --grid=... for a negative start)")
    p_vw.add_argument("--out", help="CSV path (default: stdout)")
    p_vw.add_argument("values", nargs="*", type=float, help="two positive values (default 0.6 2)")
    p_vw.set_defaults(func=_cmd_vweights)

    p_ing = sub.add_parser("ingest", help="returns file -> proportion matrix CSV")
    p_ing.add_argument("--data", required=True, help="statewide returns file")
    p_ing.add_argument("--config", help="schema config file (key=value lines)")
    p_ing.add_argument("--out", help="proportions CSV path (default: stdout)")
    p_ing.add_argument("--rejects", help="write the rejects report to this path")
    p_ing.set_defaults(func=_cmd_ingest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except (DomainError, NumericError, ConfigError, SchemaError, AggregationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
