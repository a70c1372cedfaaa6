"""Command-line entry point: replay, simulate, report, feedback."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import EngineConfig
from .context_risk import Tier
from .engine import (
    DynamicEngine,
    Judgment,
    StaticEngine,
    Verdict,
    adjust_thresholds,
    read_audit,
    replay,
)
from .errors import NumericalError, UnknownEventError, ValidationError, ZtsegError
from .events import serialize_events
from .simharness import GroundTruth, ScenarioSpec, compare, evaluate, generate_scenario, timed_replay

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

ENGINES = {"dynamic": DynamicEngine, "static": StaticEngine}


def _load_config(path: str | None) -> EngineConfig:
    return EngineConfig.load(path) if path else EngineConfig()


def _write_lines(path: Path, lines) -> None:
    path.write_bytes("".join(line + "\n" for line in lines).encode("utf-8"))


def cmd_replay(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    engine = ENGINES[args.engine](config)
    with open(args.events, "rb") as fh:
        result = replay(engine, fh)
    Path(args.audit_out).write_bytes(result.audit_bytes())
    if args.baselines_out and isinstance(engine, DynamicEngine):
        _write_lines(Path(args.baselines_out), (json.dumps(r, separators=(",", ":")) for r in engine.baseline_records()))
    if args.graph_out and isinstance(engine, DynamicEngine):
        Path(args.graph_out).write_text(json.dumps(engine.graph.snapshot(engine.pseudonymize), indent=1) + "\n")
    print(f"replayed {result.events} events -> {args.audit_out}")
    return EXIT_OK


def _load_scenario(path: str | None, seed: int | None) -> ScenarioSpec:
    spec = ScenarioSpec()
    if path:
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise ValidationError(f"{path}: scenario must be a JSON object")
        try:
            spec = ScenarioSpec.from_dict(obj)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: {exc}") from None
    if seed is not None:
        spec = replace(spec, seed=seed)
    try:
        spec.validate()
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    return spec


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = _load_scenario(args.scenario, args.seed)
    base = _load_config(args.config)
    intel = spec.intel_feed()
    context = replace(
        base.context,
        watchlist=tuple(dict.fromkeys(base.context.watchlist + tuple(intel["watchlist"]))),
        blocklist=tuple(dict.fromkeys(base.context.blocklist + tuple(intel["blocklist"]))),
    )
    config = replace(base, context=context)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario = generate_scenario(spec)
    (out / "events.jsonl").write_bytes(serialize_events(scenario.events))
    (out / "scenario.json").write_text(json.dumps(spec.to_dict(), indent=2) + "\n")
    config.dump(out / "config.json")

    metrics = {}
    for name, cls in ENGINES.items():
        engine = cls(config)
        audit, throughput = timed_replay(engine, scenario.events)
        _write_lines(out / f"audit_{name}.jsonl", (r.to_json() for r in audit))
        truth = scenario.truth.pseudonymized(engine.pseudonymize)
        metrics[name] = evaluate(audit, truth, throughput)
    (out / "truth.jsonl").write_bytes(scenario.truth.to_jsonl(engine.pseudonymize))

    report = compare(metrics["dynamic"], metrics["static"])
    text = report.render_text()
    (out / "report.txt").write_text(text)
    (out / "report.json").write_text(report.to_json() + "\n")
    print(f"{len(scenario.events)} events, {spec.n_benign + spec.n_compromised} identities -> {out}")
    print(text, end="")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    with open(args.truth, "rb") as fh:
        truth = GroundTruth.from_jsonl(fh)
    with open(args.audit, "rb") as fh:
        metrics = evaluate(read_audit(fh), truth)
    if args.static_audit:
        with open(args.static_audit, "rb") as fh:
            static = evaluate(read_audit(fh), truth)
        report = compare(metrics, static)
        print(report.render_text(), end="")
        if args.json_out:
            Path(args.json_out).write_text(report.to_json() + "\n")
    else:
        print(json.dumps(metrics.to_dict(), indent=2, sort_keys=True))
        if args.json_out:
            Path(args.json_out).write_text(json.dumps(metrics.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _read_verdicts(path: str) -> list[Verdict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(Verdict.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise ValidationError(f"{path}:{n}: bad verdict: {exc}") from None
    return out


def cmd_feedback(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    with open(args.audit, "rb") as fh:
        tiers = {r.event_id: Tier.from_label(r.tier) for r in read_audit(fh)}
    thresholds = config.thresholds
    for v in _read_verdicts(args.verdicts):
        tier = tiers.get(v.event_id)
        if tier is None:
            if v.judgment is not Judgment.MISSED_THREAT:
                raise UnknownEventError(f"verdict names unknown event {v.event_id!r}")
            tier = Tier.ALLOW
        thresholds = adjust_thresholds(thresholds, v.judgment, tier, config.feedback_rate)
    replace(config, thresholds=thresholds).dump(args.config_out)
    t = thresholds
    print(f"thresholds stepup={t.stepup!r} restrict={t.restrict!r} quarantine={t.quarantine!r} -> {args.config_out}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors; exit 2 is reserved for numerical failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ztseg", description="Risk-scored access decisions over identity event logs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("replay", help="score an event log and write the audit trail")
    p.add_argument("--events", required=True)
    p.add_argument("--config", help="engine config JSON (defaults if omitted)")
    p.add_argument("--audit-out", required=True)
    p.add_argument("--engine", choices=sorted(ENGINES), default="dynamic")
    p.add_argument("--baselines-out")
    p.add_argument("--graph-out")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("simulate", help="generate a scenario and compare both engines on it")
    p.add_argument("--scenario", help="scenario spec JSON (defaults if omitted)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", help="base engine config; scenario intel is merged in")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="metrics for an audit against ground truth")
    p.add_argument("--audit", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--static-audit", help="second audit to compare against")
    p.add_argument("--json-out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("feedback", help="adapt thresholds from analyst verdicts")
    p.add_argument("--audit", required=True)
    p.add_argument("--verdicts", required=True)
    p.add_argument("--config", help="config to adapt (defaults if omitted)")
    p.add_argument("--config-out", required=True)
    p.set_defaults(func=cmd_feedback)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NumericalError, ArithmeticError) as exc:
        print(f"ztseg: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ZtsegError, ValueError, KeyError, OSError) as exc:
        print(f"ztseg: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
