"""Command-line interface: graph generation, EC scans, searches, attacks,
and the three experiment harnesses, all emitting CSV.

Flags may also be supplied through a plain key=value config file via
--config; explicit flags win over config values. Exit codes: 0 success,
1 runtime failure (diagnostics on stderr), 2 usage error.
"""

import argparse
import secrets
import sys
from typing import Optional, Sequence

from .attack import CSV_COLUMNS, default_t_pen, evaluate_attack, report_row
from .exceptional import find_ec_within_distance
from .graphs import (
    MODELS,
    EdgeListParseError,
    ModelParams,
    generate_graph,
    read_edge_list,
    write_edge_list,
)
from .experiments import (
    ExperimentConfig,
    default_workers,
    expand_grid,
    read_fig2_csv,
    run_fig1,
    run_fig2,
    run_fig3,
    write_fig1_csv,
    write_fig2_csv,
    write_fig3_csv,
)


def _load_config(path: str) -> dict[str, str]:
    """Parse a key=value config file; '#' starts a comment."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


class _Options:
    """Flag/config/default resolution: explicit flags win over config values."""

    def __init__(self, args: argparse.Namespace, config: dict[str, str]):
        self._args = args
        self._config = config

    def get(self, name: str, default=None, convert=str):
        flag = getattr(self._args, name.replace("-", "_"), None)
        if flag is not None:
            return flag
        if name in self._config:
            return convert(self._config[name])
        return default

    def require(self, name: str, convert=str):
        value = self.get(name, None, convert)
        if value is None:
            raise ValueError(f"missing required option --{name}")
        return value


def _parse_models(raw: str) -> tuple[str, ...]:
    models = tuple(m.strip() for m in raw.split(",") if m.strip())
    unknown = set(models) - set(MODELS)
    if unknown:
        raise ValueError(f"unknown models {sorted(unknown)}; expected among {MODELS}")
    return models


def _parse_vertices(raw: str) -> tuple[int, ...]:
    return tuple(int(v) for v in raw.split(",") if v.strip())


def _parse_orders(raw: str) -> tuple[int, ...]:
    return tuple(int(v) for v in raw.split(",") if v.strip())


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key=value file supplying defaults for any flag")
    sub.add_argument("--seed", type=int, help="root RNG seed (generated and printed if omitted)")
    sub.add_argument("--out", help="output path (stdout for scan/search/attack if omitted)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwattack",
        description="Szegedy spatial-search simulation and exceptional-configuration attacks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="draw one random graph and write its edge list")
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float, help="ER edge probability (default 2 ln(n)/n)")
    p.add_argument("--k", type=int, help="WS initial degree (default even ceil(2 ln n))")
    p.add_argument("--beta", type=float, help="WS rewiring probability (default 0.5)")
    p.add_argument("--m0", type=int, help="BA attachment count (default 3)")
    _add_common(p)

    p = sub.add_parser("scan-ec", help="list exceptional configurations at a vertex")
    p.add_argument("--in", dest="infile", help="edge-list file")
    p.add_argument("--vertex", type=int)
    p.add_argument("--orders", type=_parse_orders, help="comma list among 2,3 (default 2,3)")
    p.add_argument("--distance", type=int, choices=(1, 2), help="hop-distance cap (default none)")
    _add_common(p)

    p = sub.add_parser("search", help="success-probability trace of the search walk")
    p.add_argument("--in", dest="infile", help="edge-list file")
    p.add_argument("--marked", type=_parse_vertices, help="comma list of marked vertices")
    p.add_argument("--t-max", type=int, dest="t_max")
    _add_common(p)

    p = sub.add_parser("attack", help="attack one marked vertex with a random EC")
    p.add_argument("--in", dest="infile", help="edge-list file")
    p.add_argument("--marked", type=int, help="the single originally marked vertex")
    p.add_argument("--orders", type=_parse_orders, help="comma list among 2,3 (default 2)")
    p.add_argument("--distance", type=int, choices=(1, 2), help="hop-distance cap (default none)")
    p.add_argument("--t-pen", type=int, dest="t_pen", help="penalty steps (default ceil(ln n))")
    _add_common(p)

    for name, extra in (("fig1", "EC-formation probabilities"),
                        ("fig2", "attack and strong-attack efficiencies"),
                        ("fig3", "complexity-exponent regressions")):
        p = sub.add_parser(name, help=extra)
        p.add_argument("--model", type=_parse_models, help="comma list among er,ws,ba (default all)")
        p.add_argument("--n", type=int, help="single graph order (shorthand grid)")
        p.add_argument("--n-grid", dest="n_grid", help="start:stop:step, stop inclusive")
        p.add_argument("--samples", type=int, help="samples per (model, n)")
        p.add_argument("--workers", type=int, help=f"process count (default ${'{'}QWATTACK_WORKERS{'}'} or 1)")
        if name != "fig1":
            p.add_argument("--t-pen", type=int, dest="t_pen", help="penalty steps (default ceil(ln n))")
        if name == "fig3":
            p.add_argument("--in", dest="infile", help="existing fig2 CSV to regress instead of re-running")
            p.add_argument("--samples-out", dest="samples_out", help="also write the underlying fig2 CSV here")
        _add_common(p)

    return parser


def _resolve_seed(opts: _Options) -> int:
    seed = opts.get("seed", None, int)
    if seed is None:
        seed = secrets.randbits(32)
        print(f"seed: {seed}", file=sys.stderr)
    return seed


def _open_out(opts: _Options):
    path = opts.get("out")
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="ascii", newline="\n"), True


def _cmd_generate(opts: _Options) -> int:
    model = opts.require("model")
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    n = opts.require("n", int)
    seed = _resolve_seed(opts)
    params = ModelParams(
        model=model,
        er_p=opts.get("p", None, float),
        ws_k=opts.get("k", None, int),
        ws_beta=opts.get("beta", 0.5, float),
        ba_m0=opts.get("m0", 3, int),
    )
    graph = generate_graph(params, n, seed=seed)
    out = opts.require("out")
    write_edge_list(graph, out)
    print(f"wrote {model} graph n={graph.n} edges={graph.num_edges} to {out}", file=sys.stderr)
    return 0


def _cmd_scan_ec(opts: _Options) -> int:
    graph = read_edge_list(opts.require("infile"))
    vertex = opts.require("vertex", int)
    if not 0 <= vertex < graph.n:
        raise ValueError(f"vertex {vertex} out of range for n={graph.n}")
    orders = opts.get("orders", (2, 3), _parse_orders)
    distance = opts.get("distance", None, int)
    configs = find_ec_within_distance(graph, vertex, distance, orders)
    fh, close = _open_out(opts)
    try:
        fh.write("anchor,kind,vertices\n")
        for ec in configs:
            fh.write(f"{ec.anchor},{ec.kind.value},{';'.join(str(v) for v in ec.vertices)}\n")
    finally:
        if close:
            fh.close()
    return 0


def _cmd_search(opts: _Options) -> int:
    from .szegedy import probability_trace

    graph = read_edge_list(opts.require("infile"))
    marked = opts.require("marked", _parse_vertices)
    t_max = opts.require("t-max", int)
    trace = probability_trace(graph, marked, t_max)
    fh, close = _open_out(opts)
    try:
        fh.write("t,probability\n")
        for t, p in enumerate(trace):
            fh.write(f"{t},{float(p)!r}\n")
    finally:
        if close:
            fh.close()
    return 0


def _cmd_attack(opts: _Options) -> int:
    import numpy as np

    graph = read_edge_list(opts.require("infile"))
    anchor = opts.require("marked", int)
    if not 0 <= anchor < graph.n:
        raise ValueError(f"vertex {anchor} out of range for n={graph.n}")
    seed = _resolve_seed(opts)
    orders = opts.get("orders", (2,), _parse_orders)
    distance = opts.get("distance", None, int)
    t_pen = opts.get("t-pen", default_t_pen(graph.n), int)
    configs = find_ec_within_distance(graph, anchor, distance, orders)
    if not configs:
        raise ValueError(
            f"no exceptional configuration of orders {sorted(orders)} containing vertex {anchor}"
        )
    rng = np.random.default_rng(seed)
    ec = configs[int(rng.integers(len(configs)))]
    report = evaluate_attack(graph, {anchor}, ec, t_pen, model="file", seed=seed)
    fh, close = _open_out(opts)
    try:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        fh.write(",".join(report_row(report)) + "\n")
    finally:
        if close:
            fh.close()
    return 0


def _experiment_config(name: str, opts: _Options) -> ExperimentConfig:
    single_n = opts.get("n", None, int)
    grid_raw = opts.get("n-grid", None)
    if single_n is not None and grid_raw is not None:
        raise ValueError("give either --n or --n-grid, not both")
    if single_n is not None:
        grid = (single_n,)
    elif grid_raw is not None:
        grid = expand_grid(grid_raw)
    else:
        grid = ()
    default_samples = 50 if name == "fig1" else 20
    return ExperimentConfig(
        experiment=name,
        models=opts.get("model", MODELS, _parse_models),
        n_grid=grid,
        samples_per_n=opts.get("samples", default_samples, int),
        t_pen=opts.get("t-pen", None, int),
        root_seed=_resolve_seed(opts),
        workers=opts.get("workers", default_workers(), int),
        er_p=opts.get("p", None, float),
        ws_k=opts.get("k", None, int),
        ws_beta=opts.get("beta", 0.5, float),
        ba_m0=opts.get("m0", 3, int),
    )


def _cmd_fig1(opts: _Options) -> int:
    config = _experiment_config("fig1", opts)
    rows = run_fig1(config)
    out = opts.require("out")
    write_fig1_csv(rows, out)
    regens = sum(r.regens for r in rows) // max(1, len(config.panels))
    print(f"fig1: {len(rows)} rows to {out} (graph regenerations: {regens})", file=sys.stderr)
    return 0


def _cmd_fig2(opts: _Options) -> int:
    config = _experiment_config("fig2", opts)
    reports = run_fig2(config)
    out = opts.require("out")
    write_fig2_csv(reports, out)
    regens = sum(r.graph_regens for r in reports)
    retries = sum(r.anchor_retries for r in reports)
    print(
        f"fig2: {len(reports)} rows to {out} "
        f"(graph regenerations: {regens}, anchor retries: {retries})",
        file=sys.stderr,
    )
    return 0


def _cmd_fig3(opts: _Options) -> int:
    config = _experiment_config("fig3", opts)
    infile = opts.get("infile")
    reports = read_fig2_csv(infile) if infile else None
    labeled, reports = run_fig3(config, reports)
    out = opts.require("out")
    write_fig3_csv(labeled, out)
    samples_out = opts.get("samples-out")
    if samples_out:
        write_fig2_csv(reports, samples_out)
    for model, variant, res in labeled:
        print(f"fig3: {model} {variant}: alpha={res.alpha:.4f} (rse {res.rse:.4f})", file=sys.stderr)
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "scan-ec": _cmd_scan_ec,
    "search": _cmd_search,
    "attack": _cmd_attack,
    "fig1": _cmd_fig1,
    "fig2": _cmd_fig2,
    "fig3": _cmd_fig3,
}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(sys.argv[1:]) if argv is None else list(argv))
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    config = {}
    if getattr(args, "config", None):
        try:
            config = _load_config(args.config)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    opts = _Options(args, config)
    try:
        return _COMMANDS[args.command](opts)
    except (ValueError, OSError, RuntimeError, ArithmeticError, EdgeListParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
