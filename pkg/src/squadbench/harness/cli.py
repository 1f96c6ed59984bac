"""Command line: run evaluations, serve episodes, report, replay, validate."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from squadbench.engine.tasks import ConfigError, load_task_spec, parse_task_spec
from squadbench.harness.agents import HttpAgent, SubprocessAgent
from squadbench.harness.episode import REGIMES
from squadbench.harness.evaluation import EvaluationReport, TaskRow, run_evaluation
from squadbench.harness.policies import AutoBattlePolicy, RandomPolicy
from squadbench.harness.report import emit_report, text_table
from squadbench.harness.steplog import ReplayMismatch, read_log, replay_log
from squadbench.harness.service import serve

LOG_DIR_ENV = "SQUADBENCH_LOG_DIR"


def _parse_tasks(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _make_agent(spec_text: str, seed: int):
    if spec_text == "random":
        return RandomPolicy(seed=seed)
    if spec_text == "autobattle":
        return AutoBattlePolicy()
    if spec_text.startswith("cmd:"):
        return SubprocessAgent(spec_text[len("cmd:"):].split())
    if spec_text.startswith("http://") or spec_text.startswith("https://"):
        return HttpAgent(spec_text)
    raise SystemExit(
        f"unknown agent '{spec_text}' (use random, autobattle, cmd:..., or an http URL)"
    )


def cmd_run(args) -> int:
    tasks = _parse_tasks(args.tasks)
    specs = [load_task_spec(t) for t in tasks]
    agent = _make_agent(args.agent, args.seed_base)
    log_dir = args.log_dir or os.environ.get(LOG_DIR_ENV)
    report = run_evaluation(
        specs,
        agent,
        args.regime,
        trials=args.trials,
        seed_base=args.seed_base,
        log_dir=log_dir,
    )
    sys.stdout.write(text_table(report))
    if args.out:
        paths = emit_report([report], args.out, figures=not args.no_figures)
        sys.stdout.write(f"report written to {args.out}\n")
        for key, value in paths.items():
            sys.stdout.write(f"  {key}: {value}\n")
    if hasattr(agent, "close"):
        agent.close()
    return 0


def cmd_serve(args) -> int:
    log_dir = args.log_dir or os.environ.get(LOG_DIR_ENV)
    server = serve(args.address, args.port, log_dir=log_dir, ui_dir=args.ui)
    sys.stdout.write(f"serving on http://{args.address}:{args.port}/\n")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def _rows_from_logs(log_dir: Path) -> list[EvaluationReport]:
    """Rebuild per-(agent, regime) reports from raw episode logs."""
    from collections import defaultdict

    from squadbench.harness.episode import EpisodeResult
    from squadbench.metrics import FamilyScore

    episodes: dict[tuple[str, str], dict[int, list[EpisodeResult]]] = defaultdict(
        lambda: defaultdict(list)
    )
    for path in sorted(log_dir.glob("*.jsonl")):
        records = read_log(path)
        header = records[0] if records else {}
        result = next((r for r in records if r.get("type") == "result"), None)
        if not result or header.get("type") != "header":
            continue
        score = FamilyScore(**{
            k: (math.inf if v == "inf" else v)
            for k, v in result["score"].items()
        })
        t_steps = result["t_steps"]
        episode = EpisodeResult(
            task_id=result["task_id"],
            regime=result["regime"],
            seed=result["seed"],
            agent_id=result["agent_id"],
            outcome=result["outcome"],
            abort_reason=result.get("abort_reason"),
            t_steps=math.inf if t_steps == "inf" else float(t_steps),
            av_used=result["av_used"],
            score=score,
            reward_total=result["reward_total"],
            r_scaled=result["r_scaled"],
            exchanges=result["exchanges"],
            final_digest=result["final_digest"],
            log_path=str(path),
            ask=result.get("ask"),
        )
        episodes[(episode.agent_id, episode.regime)][episode.task_id].append(episode)

    from squadbench.harness.evaluation import aggregate_task

    reports = []
    for (agent_id, regime), by_task in sorted(episodes.items()):
        rows: list[TaskRow] = []
        for task_id in sorted(by_task):
            spec = load_task_spec(task_id)
            results = sorted(by_task[task_id], key=lambda r: r.seed)
            rows.append(aggregate_task(results, spec, regime, agent_id))
        reports.append(
            EvaluationReport(
                agent_id=agent_id,
                regime=regime,
                trials=max(len(v) for v in by_task.values()),
                seed_base=min(r.seed for v in by_task.values() for r in v),
                rows=rows,
            )
        )
    return reports


def cmd_report(args) -> int:
    log_dir = Path(args.logs or os.environ.get(LOG_DIR_ENV) or ".")
    reports = _rows_from_logs(log_dir)
    if not reports:
        sys.stderr.write(f"no episode logs found under {log_dir}\n")
        return 1
    for report in reports:
        sys.stdout.write(text_table(report) + "\n")
    paths = emit_report(reports, args.out, figures=not args.no_figures)
    for key, value in paths.items():
        sys.stdout.write(f"{key}: {value}\n")
    return 0


def cmd_replay(args) -> int:
    status = 0
    for path in args.logs:
        try:
            digest = replay_log(path)
            recorded = next(
                (r.get("final_digest") for r in read_log(path) if r.get("type") == "result"),
                None,
            )
            marker = "ok" if recorded in (None, digest) else "MISMATCH"
            if marker != "ok":
                status = 1
            sys.stdout.write(f"{path}: {digest} {marker}\n")
        except (ReplayMismatch, ConfigError, OSError, KeyError) as exc:
            sys.stdout.write(f"{path}: replay failed: {exc}\n")
            status = 1
    return status


def cmd_validate(args) -> int:
    status = 0
    for path in args.specs:
        try:
            if path.isdigit():
                spec = load_task_spec(int(path))
            else:
                spec = parse_task_spec(json.loads(Path(path).read_text()), path)
            sys.stdout.write(
                f"{path}: ok (task {spec.task_id} '{spec.name}' family={spec.family})\n"
            )
        except (ConfigError, OSError, json.JSONDecodeError) as exc:
            sys.stdout.write(f"{path}: INVALID: {exc}\n")
            status = 1
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squadbench",
        description="Deterministic squad-combat simulator and agent evaluation harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an evaluation")
    run.add_argument("--tasks", default="1-8", help="task ids, e.g. 1,3 or 1-8")
    run.add_argument("--regime", choices=REGIMES, default="ta")
    run.add_argument("--agent", default="random",
                     help="random | autobattle | cmd:<command> | http(s)://agent-url")
    run.add_argument("--trials", type=int, default=8)
    run.add_argument("--seed-base", type=int, default=0)
    run.add_argument("--log-dir", default=None, help=f"episode log dir (or ${LOG_DIR_ENV})")
    run.add_argument("--out", default=None, help="also emit report files to this dir")
    run.add_argument("--no-figures", action="store_true")
    run.set_defaults(fn=cmd_run)

    srv = sub.add_parser("serve", help="serve episodes over HTTP")
    srv.add_argument("--address", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8123)
    srv.add_argument("--log-dir", default=None)
    srv.add_argument("--ui", default=None, help="directory of built UI assets to serve")
    srv.set_defaults(fn=cmd_serve)

    rep = sub.add_parser("report", help="aggregate episode logs into tables and figures")
    rep.add_argument("--logs", default=None, help=f"episode log dir (or ${LOG_DIR_ENV})")
    rep.add_argument("--out", default="report_out")
    rep.add_argument("--no-figures", action="store_true")
    rep.set_defaults(fn=cmd_report)

    rpl = sub.add_parser("replay", help="replay step logs and verify digests")
    rpl.add_argument("logs", nargs="+")
    rpl.set_defaults(fn=cmd_replay)

    val = sub.add_parser("validate", help="lint task spec files")
    val.add_argument("specs", nargs="+", help="task ids or JSON paths")
    val.set_defaults(fn=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
