"""Command line interface.

Subcommands mirror the library layers: validate, spectral, kernels,
covariance, kacrice, theorem1, montecarlo.  Every run writes one data file
(CSV with 17 significant digits, or JSON) plus a RunManifest JSON next to
it; --plot additionally renders a matplotlib figure alongside the data.

Exit codes: 0 success, 1 usage error, 2 hypothesis failure, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import __version__
from .correlation import CorrelationModel, validate_hypotheses
from .errors import (ConsistencyError, DegenerateModelError, DomainError,
                     EmbeddingError, FactorizationError, QuadratureError)
from . import kacrice
from . import kernels as kernels_mod
from . import sampler
from .covariance import moments
from .correlation import spectral_density
from .quadrature import QuadratureConfig

import numpy as np

TWO_PI = 2.0 * math.pi
_GRID_MARGIN = 1e-3

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_HYPOTHESIS = 2
EXIT_NUMERICAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we map usage to 1
        raise _UsageError(message)


@dataclasses.dataclass(frozen=True)
class RunManifest:
    """Provenance record written alongside every data file."""

    command: str
    model: str
    params: dict
    seed: int | None
    outputs: tuple[str, ...]
    tool_version: str
    timestamp: str

    def to_dict(self) -> dict:
        record = dataclasses.asdict(self)
        record["outputs"] = list(self.outputs)
        return record

    @classmethod
    def from_dict(cls, record: Mapping) -> "RunManifest":
        return cls(command=record["command"], model=record["model"],
                   params=dict(record["params"]),
                   seed=record["seed"],
                   outputs=tuple(record["outputs"]),
                   tool_version=record["tool_version"],
                   timestamp=record["timestamp"])


def _fmt_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_csv(path: str | None, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt_value(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_json(path: str | None, payload: Any) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_table(path: str | None, fmt: str, header: Sequence[str],
                 rows: Sequence[Sequence[Any]]) -> None:
    if fmt == "csv":
        _write_csv(path, header, rows)
    else:
        payload = [dict(zip(header, row)) for row in rows]
        _write_json(path, payload)


def _write_manifest(command: str, models: Sequence[CorrelationModel],
                    seed: int | None, outputs: Sequence[str]) -> str | None:
    if not outputs:
        return None
    if len(models) == 1:
        model_label = models[0].label
        params = models[0].to_config()["params"]
    else:
        model_label = "+".join(m.label for m in models)
        params = {"models": [m.to_config() for m in models]}
    manifest = RunManifest(
        command=command,
        model=model_label,
        params=params,
        seed=seed,
        outputs=tuple(outputs),
        tool_version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )
    path = outputs[0] + ".manifest.json"
    _write_json(path, manifest.to_dict())
    return path


def _parse_params(raw: Any) -> dict:
    if raw is None:
        return {}
    if isinstance(raw, Mapping):
        return dict(raw)
    try:
        parsed = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise _UsageError(f"--params must be a JSON object: {exc}") from exc
    if not isinstance(parsed, dict):
        raise _UsageError("--params must be a JSON object")
    return parsed


def _build_models(merged: Mapping, default_models: list[dict]) -> list[CorrelationModel]:
    names = merged.get("model")
    params = merged.get("params")
    if names is None:
        return [CorrelationModel.from_config(cfg) for cfg in default_models]
    names = names if isinstance(names, list) else [names]
    params = [] if params is None else (params if isinstance(params, list) else [params])
    if len(params) > len(names):
        raise _UsageError("more --params than --model entries")
    params = params + [None] * (len(names) - len(params))
    models = []
    for name, p in zip(names, params):
        models.append(CorrelationModel.from_config(
            {"kind": name, "params": _parse_params(p)}))
    return models


def _parse_interval(raw: Any) -> tuple[float, float]:
    if isinstance(raw, (list, tuple)) and len(raw) == 2:
        return float(raw[0]), float(raw[1])
    parts = str(raw).split(":")
    if len(parts) != 2:
        raise _UsageError("interval must look like LO:HI")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise _UsageError(f"bad interval {raw!r}") from exc


def _as_int_list(raw: Any) -> list[int]:
    if isinstance(raw, list):
        return [int(v) for v in raw]
    return [int(raw)]


def _resolve_out(merged: Mapping, command: str, fmt: str) -> str | None:
    out = merged.get("out")
    if out == "-":
        return None
    if out is None:
        return f"{command}.{fmt}"
    return str(out)


def _plot_path(out: str) -> str:
    return str(Path(out).with_suffix(".png"))


def _interior_grid(points: int) -> np.ndarray:
    return np.linspace(_GRID_MARGIN, TWO_PI - _GRID_MARGIN, points)


# ---------------------------------------------------------------- commands

_DEFAULT_SPECTRAL_MODELS = [
    {"kind": "fgn", "params": {"H": 0.6}},
    {"kind": "fgn", "params": {"H": 0.75}},
    {"kind": "fgn", "params": {"H": 0.9}},
]


def _cmd_validate(merged: Mapping) -> int:
    models = _build_models(merged, [{"kind": "iid", "params": {}}])
    if len(models) != 1:
        raise _UsageError("validate takes exactly one model")
    model = models[0]
    report = validate_hypotheses(model, grid_points=int(merged.get("grid_points", 4096)))
    out = _resolve_out(merged, "validate", "json")
    payload = {
        "model": model.label,
        "config": model.to_config(),
        "l1_norm": report.l1_norm,
        "infimum": report.infimum,
        "argmin": report.argmin,
        "grid_points": report.grid_points,
        "passes": report.passes,
    }
    _write_json(out, payload)
    if out is not None:
        _write_manifest("validate", models, merged.get("seed"), [out])
    return EXIT_OK if report.passes else EXIT_HYPOTHESIS


def _cmd_spectral(merged: Mapping) -> int:
    models = _build_models(merged, _DEFAULT_SPECTRAL_MODELS)
    points = int(merged.get("points", 2048))
    if points < 2:
        raise _UsageError("--points must be at least 2")
    grid = _interior_grid(points)
    columns = {m.label: np.atleast_1d(spectral_density(m, grid)) for m in models}
    fmt = merged.get("format", "csv")
    out = _resolve_out(merged, "spectral", fmt)
    header = ["x"] + list(columns)
    rows = [[float(x)] + [float(col[i]) for col in columns.values()]
            for i, x in enumerate(grid)]
    _write_table(out, fmt, header, rows)
    outputs = [out] if out else []
    if out and merged.get("plot"):
        from . import plotting
        figure = _plot_path(out)
        logy = all(col.min() > 0 for col in columns.values())
        plotting.save_curves(figure, grid, columns, "spectral densities",
                             "x", "density", logy=logy)
        outputs.append(figure)
    if out:
        _write_manifest("spectral", models, merged.get("seed"), outputs)
    return EXIT_OK


def _cmd_kernels(merged: Mapping) -> int:
    degrees = _as_int_list(merged.get("n", [2, 5, 10, 20]))
    points = int(merged.get("points", 2048))
    with_fejer = bool(merged.get("with_fejer", False))
    grid = _interior_grid(points)
    columns: dict[str, np.ndarray] = {}
    for n in degrees:
        columns[f"second_moment_n{n}"] = np.atleast_1d(
            kernels_mod.second_moment_kernel(n, grid))
    if with_fejer:
        for n in degrees:
            columns[f"fejer_n{n}"] = np.atleast_1d(kernels_mod.fejer(n, grid))
            columns[f"fejer_deriv_n{n}"] = np.atleast_1d(
                kernels_mod.fejer_derivative(n, grid))
    fmt = merged.get("format", "csv")
    out = _resolve_out(merged, "kernels", fmt)
    header = ["x"] + list(columns)
    rows = [[float(x)] + [float(col[i]) for col in columns.values()]
            for i, x in enumerate(grid)]
    _write_table(out, fmt, header, rows)
    outputs = [out] if out else []
    if out and merged.get("plot"):
        from . import plotting
        figure = _plot_path(out)
        plotting.save_curves(figure, grid, columns, "smoothing kernels",
                             "x", "kernel value")
        outputs.append(figure)
    if out:
        _write_manifest("kernels", [CorrelationModel.iid()], merged.get("seed"),
                        outputs)
    return EXIT_OK


def _cmd_covariance(merged: Mapping) -> int:
    models = _build_models(merged, [{"kind": "iid", "params": {}}])
    if len(models) != 1:
        raise _UsageError("covariance takes exactly one model")
    model = models[0]
    degrees = _as_int_list(merged.get("n", [64]))
    if len(degrees) != 1:
        raise _UsageError("covariance takes exactly one degree")
    n = degrees[0]
    points = int(merged.get("points", 512))
    grid = np.linspace(0.0, TWO_PI, points)
    var, dvar, cov = moments(model, n, grid)
    fmt = merged.get("format", "csv")
    out = _resolve_out(merged, "covariance", fmt)
    header = ["t", "var_f", "var_fprime", "cov_cross"]
    rows = [[float(grid[i]), float(var[i]), float(dvar[i]), float(cov[i])]
            for i in range(points)]
    _write_table(out, fmt, header, rows)
    outputs = [out] if out else []
    if out and merged.get("plot"):
        from . import plotting
        figure = _plot_path(out)
        plotting.save_curves(figure, grid,
                             {"var_f": var, "var_fprime": dvar, "cov_cross": cov},
                             f"covariance structure, {model.label}, n={n}",
                             "t", "moment")
        outputs.append(figure)
    if out:
        _write_manifest("covariance", models, merged.get("seed"), outputs)
    return EXIT_OK


def _quad_from(merged: Mapping) -> QuadratureConfig | None:
    rel_tol = merged.get("rel_tol")
    if rel_tol is None:
        return None
    base = kacrice.DEFAULT_QUAD
    return QuadratureConfig(panels=base.panels,
                            points_per_panel=base.points_per_panel,
                            grading=base.grading,
                            max_refinements=base.max_refinements,
                            rel_tol=float(rel_tol))


def _cmd_kacrice(merged: Mapping) -> int:
    models = _build_models(merged, [{"kind": "iid", "params": {}}])
    if len(models) != 1:
        raise _UsageError("kacrice takes exactly one model")
    model = models[0]
    degrees = _as_int_list(merged.get("n", [100]))
    interval = _parse_interval(merged.get("interval", f"0:{TWO_PI}"))
    quad = _quad_from(merged)
    fmt = merged.get("format", "csv")
    out = _resolve_out(merged, "kacrice", fmt)
    header = ["n", "interval", "value", "error_estimate", "value_over_n"]
    rows = []
    for n in degrees:
        est = kacrice.expected_zeros(model, n, interval, quad)
        rows.append([n, f"{interval[0]:.12g}:{interval[1]:.12g}",
                     est.value, est.error_estimate, est.value / n])
    _write_table(out, fmt, header, rows)
    outputs = [out] if out else []
    if out and merged.get("plot") and len(rows) > 1:
        from . import plotting
        figure = _plot_path(out)
        plotting.save_ratio_plot(figure, degrees, [r[4] for r in rows],
                                 kacrice.LIMIT_RATIO,
                                 f"kac-rice counts, {model.label}")
        outputs.append(figure)
    if out:
        _write_manifest("kacrice", models, merged.get("seed"), outputs)
    return EXIT_OK


def _cmd_theorem1(merged: Mapping) -> int:
    models = _build_models(merged, [{"kind": "iid", "params": {}}])
    if len(models) != 1:
        raise _UsageError("theorem1 takes exactly one model")
    model = models[0]
    degrees = _as_int_list(merged.get("n", [100, 400, 1600]))
    interval = _parse_interval(merged.get("interval", f"0:{TWO_PI}"))
    quad = _quad_from(merged)
    with_mc = bool(merged.get("montecarlo", False))
    trials = int(merged.get("trials", 400))
    seed = int(merged.get("seed", 0))
    workers = int(merged.get("threads", 1))
    table = kacrice.normalized_limit_table(model, degrees, interval, quad)
    header = ["n", "value", "error_estimate", "ratio", "deviation"]
    if with_mc:
        header += ["mc_mean", "mc_std_error"]
    rows = []
    for row in table:
        record = [row.n, row.value, row.error_estimate, row.ratio,
                  abs(row.ratio - kacrice.LIMIT_RATIO)]
        if with_mc:
            mean, std_error = sampler.monte_carlo_zero_mean(
                model, row.n, trials, interval, seed=seed, workers=workers)
            record += [mean, std_error]
        rows.append(record)
    fmt = merged.get("format", "csv")
    out = _resolve_out(merged, "theorem1", fmt)
    _write_table(out, fmt, header, rows)
    outputs = [out] if out else []
    if out and merged.get("plot"):
        from . import plotting
        figure = _plot_path(out)
        plotting.save_ratio_plot(figure, [r[0] for r in rows], [r[3] for r in rows],
                                 kacrice.LIMIT_RATIO,
                                 f"normalized zero count, {model.label}")
        outputs.append(figure)
    if out:
        _write_manifest("theorem1", models, seed if with_mc else merged.get("seed"),
                        outputs)
    return EXIT_OK


def _cmd_montecarlo(merged: Mapping) -> int:
    models = _build_models(merged, [{"kind": "iid", "params": {}}])
    if len(models) != 1:
        raise _UsageError("montecarlo takes exactly one model")
    model = models[0]
    degrees = _as_int_list(merged.get("n", [64]))
    if len(degrees) != 1:
        raise _UsageError("montecarlo takes exactly one degree")
    n = degrees[0]
    trials = int(merged.get("trials", 1000))
    interval = _parse_interval(merged.get("interval", f"0:{TWO_PI}"))
    seed = int(merged.get("seed", 0))
    workers = int(merged.get("threads", 1))
    oversampling = int(merged.get("oversampling", 16))
    config = sampler.RootCountConfig(oversampling=oversampling)
    compare = bool(merged.get("compare", False))
    mean, std_error = sampler.monte_carlo_zero_mean(
        model, n, trials, interval, seed=seed, config=config, workers=workers)
    header = ["model", "n", "trials", "mean", "std_error"]
    row: list[Any] = [model.label, n, trials, mean, std_error]
    if compare:
        est = kacrice.expected_zeros(model, n, interval)
        header += ["kacrice_value", "kacrice_error_estimate", "sigma_distance"]
        sigma = abs(mean - est.value) / std_error if std_error > 0 else 0.0
        row += [est.value, est.error_estimate, sigma]
    fmt = merged.get("format", "csv")
    out = _resolve_out(merged, "montecarlo", fmt)
    _write_table(out, fmt, header, [row])
    outputs = [out] if out else []
    if out and merged.get("plot"):
        from . import plotting
        figure = _plot_path(out)
        references = [row[5]] if compare else None
        plotting.save_errorbar(figure, [f"{model.label} n={n}"], [mean],
                               [3.0 * std_error], references,
                               "monte carlo zero count (3 standard errors)",
                               "mean zeros")
        outputs.append(figure)
    if out:
        _write_manifest("montecarlo", models, seed, outputs)
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "spectral": _cmd_spectral,
    "kernels": _cmd_kernels,
    "covariance": _cmd_covariance,
    "kacrice": _cmd_kacrice,
    "theorem1": _cmd_theorem1,
    "montecarlo": _cmd_montecarlo,
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="trigzeros",
                     description="Expected zeros of random trigonometric "
                                 "polynomials with correlated coefficients")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")
    S = argparse.SUPPRESS

    def add_common(p: _Parser) -> None:
        p.add_argument("--out", default=S, help="output path, or - for stdout")
        p.add_argument("--format", default=S, choices=("csv", "json"))
        p.add_argument("--seed", type=int, default=S)
        p.add_argument("--threads", type=int, default=S)
        p.add_argument("--config", default=S, help="JSON file with defaults "
                       "for any flag; command line wins")
        p.add_argument("--plot", action="store_true", default=S,
                       help="render a matplotlib figure beside the data file")

    def add_model(p: _Parser, repeatable: bool) -> None:
        action = "append" if repeatable else None
        p.add_argument("--model", default=S, action=action,
                       help="iid | geometric | fgn | tabulated")
        p.add_argument("--params", default=S, action=action,
                       help='model parameters as JSON, e.g. {"H": 0.75}')

    p = sub.add_parser("validate", help="check the spectral hypotheses")
    add_common(p)
    add_model(p, repeatable=False)
    p.add_argument("--grid-points", dest="grid_points", type=int, default=S)

    p = sub.add_parser("spectral", help="tabulate spectral densities")
    add_common(p)
    add_model(p, repeatable=True)
    p.add_argument("--points", type=int, default=S)

    p = sub.add_parser("kernels", help="tabulate smoothing kernels")
    add_common(p)
    p.add_argument("--n", type=int, action="append", default=S)
    p.add_argument("--points", type=int, default=S)
    p.add_argument("--with-fejer", dest="with_fejer", action="store_true", default=S)

    p = sub.add_parser("covariance", help="tabulate the pointwise moments")
    add_common(p)
    add_model(p, repeatable=False)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--points", type=int, default=S)

    p = sub.add_parser("kacrice", help="expected zeros by quadrature")
    add_common(p)
    add_model(p, repeatable=False)
    p.add_argument("--n", type=int, action="append", default=S)
    p.add_argument("--interval", default=S, help="LO:HI inside [0, 2*pi]")
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=S)

    p = sub.add_parser("theorem1", help="normalized counts against the limit")
    add_common(p)
    add_model(p, repeatable=False)
    p.add_argument("--n", type=int, action="append", default=S)
    p.add_argument("--interval", default=S)
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=S)
    p.add_argument("--montecarlo", action="store_true", default=S,
                   help="add a Monte Carlo cross-check column")
    p.add_argument("--trials", type=int, default=S)

    p = sub.add_parser("montecarlo", help="simulate zero counts")
    add_common(p)
    add_model(p, repeatable=False)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--interval", default=S)
    p.add_argument("--oversampling", type=int, default=S)
    p.add_argument("--compare", action="store_true", default=S,
                   help="add the Kac-Rice value for comparison")

    return parser


def _merge_settings(provided: dict) -> dict:
    merged = dict(provided)
    config_path = merged.pop("config", None)
    if config_path is not None:
        try:
            file_settings = json.loads(Path(config_path).read_text())
        except FileNotFoundError as exc:
            raise _UsageError(f"config file not found: {config_path}") from exc
        except json.JSONDecodeError as exc:
            raise _UsageError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_settings, dict):
            raise _UsageError("config file must hold a JSON object")
        for key, value in file_settings.items():
            merged.setdefault(key.replace("-", "_"), value)
    return merged


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        namespace = parser.parse_args(argv)
        provided = vars(namespace)
        command = provided.pop("command", None)
        if command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        merged = _merge_settings(provided)
        return _COMMANDS[command](merged)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureError as exc:
        print(f"error: {exc} (best estimate {exc.estimate:.12g})", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConsistencyError, DegenerateModelError, EmbeddingError,
            FactorizationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
