"""Command-line front end: one subcommand per experiment.

Runs in-process by default; --server URL sends the same request to a running
`qcrypt.service` instead.  Exit codes: 0 when the success rate meets the
experiment's threshold, 1 when it does not, 2 for usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import urllib.error
import urllib.request
from typing import Optional, Sequence

from . import experiments as E
from .errors import DomainError
from .models import ExperimentReport


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed (u64)")
    common.add_argument("--trials", type=int, default=1)
    common.add_argument("--jobs", type=int, default=1, help="trials run concurrently")
    common.add_argument("--out", help="write the JSON report here")
    common.add_argument("--format", choices=["json", "table"], default="table",
                        help="what goes to standard output")
    common.add_argument("--timing", action="store_true", help="keep wall_time in the JSON report")
    common.add_argument("--server", help="base URL of a running qcrypt service")

    parser = argparse.ArgumentParser(prog="qcrypt", description="seeded attack experiments")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, exp in E.EXPERIMENTS.items():
        p = sub.add_parser(name, parents=[common], help=exp.help, description=exp.help)
        for key, default in exp.defaults.items():
            if isinstance(default, bool):
                p.add_argument(_flag(key), dest=key, action="store_true", default=default)
            else:
                p.add_argument(_flag(key), dest=key, type=type(default), default=default,
                               choices=exp.choices.get(key))
    return parser


def _remote(base: str, name: str, body: dict) -> ExperimentReport:
    req = urllib.request.Request(f"{base.rstrip('/')}/experiments/{name}",
                                 data=json.dumps(body).encode(),
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            return ExperimentReport.model_validate(json.load(resp))
    except urllib.error.HTTPError as exc:
        if exc.code in (404, 422):
            raise DomainError(json.load(exc).get("detail", str(exc))) from None
        raise


def format_table(report: ExperimentReport) -> str:
    lo, hi = report.confidence_interval
    thr = "n/a" if report.threshold is None else f"{report.threshold:g}"
    rows = [
        ("experiment", report.name),
        ("parameters", " ".join(f"{k}={v}" for k, v in report.parameters.items())),
        ("seed", report.seed),
        ("successes", f"{report.successes}/{report.trials}"),
        ("success rate", f"{report.success_rate:.4f}  (95% CI {lo:.3f} .. {hi:.3f})"),
        ("threshold", f"{thr}  {report.threshold_note}"),
        ("algorithm failures", str(report.algorithm_failures)),
        ("verdict", "PASS" if report.meets_threshold else "FAIL"),
    ]
    if report.wall_time is not None:
        rows.append(("wall time", f"{report.wall_time:.2f} s"))
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    exp = E.EXPERIMENTS[args.command]
    params = {k: getattr(args, k) for k in exp.defaults}
    try:
        if args.server:
            body = {"params": params, "seed": args.seed, "trials": args.trials, "jobs": args.jobs}
            report = _remote(args.server, args.command, body)
        else:
            report = E.run(args.command, params, args.seed, args.trials, args.jobs)
    except DomainError as exc:
        parser.print_usage(sys.stderr)
        print(f"qcrypt {args.command}: error: {exc}", file=sys.stderr)
        return 2
    text = E.report_json(report, timing=args.timing)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text if args.format == "json" else format_table(report))
    return 0 if report.meets_threshold else 1


if __name__ == "__main__":
    sys.exit(main())
