"""Command-line harness.

Subcommands: solve (raw QUBO file), simulate (one trace, one policy),
compare (report table over traces x policies), convert-trace (raw mobile log
to canonical format), oracle (offline optimum).  A JSON config file
(--config or $QUBOSTREAM_CONFIG) supplies defaults; explicit flags win.

Exit codes: 0 success, 2 configuration error, 3 trace parse error,
4 capacity/infeasibility error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

from . import abr, anneal, harness, policies, qubo, sim, traces
from .errors import CapacityError, ConfigError, ForecastError, PredictionError, TraceParseError
from .ladder import make_ladder, DEFAULT_LEVELS_KBPS

CONFIG_ENV_VAR = "QUBOSTREAM_CONFIG"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRACE = 3
EXIT_CAPACITY = 4


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        file_defaults = _load_config_file(argv)
        if file_defaults:
            parser.set_defaults(**file_defaults)
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TraceParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRACE
    except (CapacityError, ForecastError, PredictionError, sim.SimulationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubostream",
        description="QUBO-based adaptive bitrate control and trace-driven evaluation",
    )
    parser.add_argument("--config", help="JSON config file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    solver = argparse.ArgumentParser(add_help=False)
    g = solver.add_argument_group("annealer")
    g.add_argument("--sweeps", type=int, default=2000)
    g.add_argument("--restarts", type=int, default=8)
    g.add_argument("--t-initial", type=float, default=None)
    g.add_argument("--t-final", type=float, default=None)
    g.add_argument("--offset-step", type=float, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--backend", choices=["native", "python"], default=None)

    session = argparse.ArgumentParser(add_help=False)
    g = session.add_argument_group("session")
    g.add_argument("--ladder-kbps", default=",".join(str(int(b)) for b in DEFAULT_LEVELS_KBPS))
    g.add_argument("--quality-map", choices=["linear", "log"], default="linear")
    g.add_argument("--segments", type=int, default=None, help="default: one trace pass")
    g.add_argument("--segment-duration", type=float, default=4.0)
    g.add_argument("--buffer-cap", type=float, default=60.0)
    g.add_argument("--qoe-w", type=float, default=4.3)

    abrgrp = argparse.ArgumentParser(add_help=False)
    g = abrgrp.add_argument_group("qubo policy")
    g.add_argument("--quality-weight", type=float, default=1.0)
    g.add_argument("--switch-weight", type=float, default=1.0)
    g.add_argument("--onehot-weight", type=float, default=None)
    g.add_argument("--rebuffer-weight", type=float, default=None)
    g.add_argument("--slack-bits", type=int, default=8)
    g.add_argument("--window", type=int, default=5)
    g.add_argument("--refine-iterations", type=int, default=2)
    g.add_argument("--qubo-solver", choices=["exact", "sa"], default="exact")
    g.add_argument(
        "--full-horizon-mode", choices=["exact", "enumerate", "sa"], default="exact"
    )
    g = abrgrp.add_argument_group("baseline policies")
    g.add_argument("--bba-reservoir", type=float, default=5.0)
    g.add_argument("--bba-cushion", type=float, default=10.0)
    g.add_argument("--mpc-lookahead", type=int, default=5)
    g.add_argument("--rate-safety", type=float, default=0.9)

    p = sub.add_parser("solve", parents=[solver], help="minimize a QUBO text file")
    p.add_argument("qubo_file")
    p.add_argument("--method", choices=["sa", "exhaustive"], default="sa")
    p.add_argument("--json", action="store_true", dest="as_json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser(
        "simulate", parents=[session, abrgrp, solver], help="one trace, one policy"
    )
    p.add_argument("--trace", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--out-prefix", help="write PREFIX.csv and PREFIX.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "compare", parents=[session, abrgrp, solver], help="policies x traces table"
    )
    p.add_argument("--trace", action="append", required=True, dest="trace_paths")
    p.add_argument("--policies", default="bba,mpc,qubo,rate")
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--logs-dir", help="also write per-cell session logs here")
    p.add_argument(
        "--timings",
        action="store_true",
        help="include wall-clock solve_ms (output no longer reproducible)",
    )
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("convert-trace", help="raw mobile log -> canonical trace")
    p.add_argument("raw_file")
    p.add_argument("out_file")
    p.add_argument("--ts-col", type=int, default=0)
    p.add_argument("--bytes-col", type=int, default=1)
    p.add_argument("--interval-ms", type=float, default=1000.0)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("oracle", parents=[session], help="offline optimal plan")
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_oracle)

    return parser


def _load_config_file(argv) -> dict:
    path = None
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif arg.startswith("--config="):
            path = arg.split("=", 1)[1]
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must contain a JSON object")
    return {key.replace("-", "_"): value for key, value in data.items()}


def _ladder(args):
    try:
        levels = [float(tok) for tok in str(args.ladder_kbps).split(",") if tok.strip()]
        return make_ladder(levels, args.quality_map)
    except ValueError as exc:
        raise ConfigError(f"bad ladder: {exc}") from exc


def _sa_params(args) -> anneal.SaParams:
    try:
        params = anneal.SaParams(
            sweeps=args.sweeps,
            restarts=args.restarts,
            t_initial=args.t_initial,
            t_final=args.t_final,
            dynamic_offset_step=args.offset_step,
            seed=args.seed,
        )
        params.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return params


def _abr_config(args) -> abr.AbrQuboConfig:
    try:
        cfg = abr.AbrQuboConfig(
            quality_weight=args.quality_weight,
            switch_weight=args.switch_weight,
            onehot_weight=args.onehot_weight,
            rebuffer_weight=args.rebuffer_weight,
            slack_bits=args.slack_bits,
            window=args.window,
            refine_iterations=args.refine_iterations,
        )
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _experiment(args, trace_items) -> harness.ExperimentConfig:
    names = [name.strip() for name in args.policies.split(",") if name.strip()]
    for name in names:
        if name not in policies.POLICY_NAMES:
            raise ConfigError(
                f"unknown policy {name!r}; valid names: {', '.join(policies.POLICY_NAMES)}"
            )
    try:
        bba = policies.BbaParams(reservoir=args.bba_reservoir, cushion=args.bba_cushion)
        mpc = policies.MpcParams(lookahead=args.mpc_lookahead, rebuffer_weight=args.qoe_w)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return harness.ExperimentConfig(
        traces=trace_items,
        policies=names,
        ladder=_ladder(args),
        num_segments=args.segments,
        segment_duration=args.segment_duration,
        buffer_cap=args.buffer_cap,
        qoe_w=args.qoe_w,
        abr=_abr_config(args),
        sa=_sa_params(args),
        bba=bba,
        mpc=mpc,
        rate_safety=args.rate_safety,
        qubo_solver=args.qubo_solver,
        full_horizon_mode=args.full_horizon_mode,
        seed=args.seed,
        timings=getattr(args, "timings", False),
    )


def _trace_label(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def cmd_solve(args) -> int:
    try:
        with open(args.qubo_file, encoding="utf-8") as fh:
            model = qubo.read_qubo_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read QUBO file: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad QUBO file: {exc}") from exc
    if args.method == "exhaustive":
        result = anneal.solve_exhaustive(model)
    else:
        result = anneal.solve_sa(model, _sa_params(args), backend=args.backend)
    if args.as_json:
        print(
            json.dumps(
                {
                    "energy": result.energy,
                    "assignment": "".join(str(b) for b in result.assignment),
                    "restarts_used": result.restarts_used,
                    "sweeps_used": result.sweeps_used,
                    "seed": result.seed,
                },
                sort_keys=True,
            )
        )
    else:
        print(f"energy {result.energy!r}")
        print(f"assignment {''.join(str(b) for b in result.assignment)}")
        print(f"restarts {result.restarts_used} sweeps {result.sweeps_used} seed {result.seed}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    trace = traces.load_trace(args.trace)
    config = _experiment(args, [(_trace_label(args.trace), trace)])
    if args.policy not in policies.POLICY_NAMES:
        raise ConfigError(
            f"unknown policy {args.policy!r}; valid names: {', '.join(policies.POLICY_NAMES)}"
        )
    config.policies = [args.policy]
    _, log, report = harness.run_cell(config, _trace_label(args.trace), trace, args.policy)
    if args.out_prefix:
        with open(args.out_prefix + ".csv", "w", encoding="utf-8") as fh:
            fh.write(sim.session_csv(log))
        with open(args.out_prefix + ".json", "w", encoding="utf-8") as fh:
            fh.write(sim.session_json(log, report))
    else:
        sys.stdout.write(sim.session_json(log, report))
    return EXIT_OK


def cmd_compare(args) -> int:
    trace_items = []
    for path in args.trace_paths:
        trace_items.append((_trace_label(path), traces.load_trace(path)))
    config = _experiment(args, trace_items)
    sink = harness.write_session_logs(args.logs_dir) if args.logs_dir else None
    rows = harness.run_compare(config, log_sink=sink)
    text = harness.rows_to_csv(rows) if args.format == "csv" else harness.rows_to_json(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_convert(args) -> int:
    try:
        with open(args.raw_file, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read raw log: {exc}") from exc
    trace = traces.convert_hsdpa(
        raw, ts_col=args.ts_col, bytes_col=args.bytes_col, interval_ms=args.interval_ms
    )
    with open(args.out_file, "w", encoding="utf-8") as fh:
        fh.write(traces.serialize_trace(trace))
    print(f"wrote {len(trace.samples)} samples spanning {trace.total_duration:.1f} s")
    return EXIT_OK


def cmd_oracle(args) -> int:
    trace = traces.load_trace(args.trace)
    session = sim.SessionConfig(
        ladder=_ladder(args),
        num_segments=args.segments,
        segment_duration=args.segment_duration,
        buffer_cap=args.buffer_cap,
        qoe_w=args.qoe_w,
    )
    plan, report = policies.offline_optimal(trace, session.ladder, session)
    print(
        json.dumps(
            {"plan": plan, "qoe": asdict(report)},
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
