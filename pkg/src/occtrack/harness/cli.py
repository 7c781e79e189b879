"""Command-line entry point: ``occtrack run`` and ``occtrack analyze``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .analysis import coverage_csv, export_coverage, export_events, export_sankey, run_batch, sankey_csv
from .config import ConfigError, RunConfig, load_run, load_scenario, parse_scenario
from .trace import load_traces

OUT_ENV = "OCCTRACK_OUT"
ALG = {"sma": "sma_nbo", "dec": "dec_pomdp"}

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

log = logging.getLogger("occtrack")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="occtrack", description="Occlusion-aware multi-UAV tracking simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run a Monte Carlo batch and write one trace per trial")
    r.add_argument("--scenario", required=True, help="scenario JSON path or bundled scenario name")
    r.add_argument("--alg", choices=sorted(ALG), required=True)
    r.add_argument("--horizon", type=int, required=True)
    r.add_argument("--occlusion", choices=["apriori", "dynamic", "none"], required=True)
    r.add_argument("--trials", type=int, default=40)
    r.add_argument("--seed", type=int, default=0, help="base seed; trial i uses seed+i")
    r.add_argument("--out", default=None, help=f"output directory (default: ${OUT_ENV}, else ./runs/<scenario>)")
    r.add_argument("--config", default=None, help="run-config JSON with remaining settings (PSO, gamma, JPDA, ...)")
    r.add_argument("--workers", type=int, default=1)

    a = sub.add_parser("analyze", help="summarise a directory of traces")
    a.add_argument("--traces", required=True)
    a.add_argument("--emit", choices=["sankey", "coverage", "events"], required=True)
    a.add_argument("--format", choices=["json", "csv"], default=None, help="default: csv for coverage, json otherwise")
    a.add_argument("--out", default=None, help="write to this file instead of stdout")
    return p


def _run_config(args) -> RunConfig:
    base = load_run(args.config) if args.config else RunConfig()
    data = base.model_dump()
    data.update(alg=ALG[args.alg], H=args.horizon, occlusion_mode=args.occlusion, trials=args.trials, base_seed=args.seed)
    try:
        return RunConfig.model_validate(data)
    except ValueError as exc:
        raise ConfigError(f"invalid run settings: {exc}") from exc


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    run = _run_config(args)
    out = Path(args.out or os.environ.get(OUT_ENV) or Path("runs") / sc.name)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenario.json").write_text(json.dumps(sc.model_dump(mode="json"), indent=2, sort_keys=True))
    (out / "run.json").write_text(json.dumps(run.model_dump(mode="json"), indent=2, sort_keys=True))

    def progress(tr):
        tr.save(out)
        log.info("trial seed=%d %s", tr.seed, "FAILED" if tr.failed else "ok")

    result = run_batch(sc, run, workers=args.workers, progress=progress)
    (out / "summary.json").write_text(json.dumps(result.aggregates, indent=2, sort_keys=True))
    failed = [t for t in result.traces if t.failed]
    print(f"wrote {len(result.traces)} traces to {out}")
    if failed:
        for t in failed:
            print(f"trial {t.seed} failed: {t.error}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


def cmd_analyze(args) -> int:
    traces = load_traces(args.traces)
    sc = parse_scenario(traces[0].scenario, f"{args.traces} (embedded)")
    if any(t.scenario != traces[0].scenario for t in traces):
        raise ConfigError(f"traces in {args.traces} come from different scenarios")
    fmt = args.format or ("csv" if args.emit == "coverage" else "json")
    if args.emit == "sankey":
        flow = export_sankey(traces, sc)
        text = sankey_csv(flow) if fmt == "csv" else json.dumps(flow, indent=2)
    elif args.emit == "coverage":
        cov = export_coverage(traces, sc)
        text = coverage_csv(cov) if fmt == "csv" else json.dumps(cov, indent=2)
    else:
        events = export_events(traces, sc)
        if fmt == "csv":
            raise ConfigError("events are emitted as JSON only")
        text = json.dumps(events, indent=2)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return cmd_run(args) if args.cmd == "run" else cmd_analyze(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
