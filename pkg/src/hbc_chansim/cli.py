"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data or config error, 3 safety violation.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field

from . import analysis, calibrate, campaign
from .errors import HBCError, InvalidConfig, SafetyViolation
from .svg import render_gain_chart

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SAFETY = 3


class UsageError(Exception):
    pass


class _HelpShown(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")

    def exit(self, status=0, message=None):
        if message:
            sys.stderr.write(message)
        if status == 0:
            raise _HelpShown
        raise UsageError(message or f"{self.prog}: exited with status {status}")


@dataclass
class CommandPlan:
    command: str
    paths: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hbc-chansim", description="Capacitive body-channel simulator and analysis tools.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("sweep", help="run a frequency-sweep campaign and write a results CSV")
    p.add_argument("--config", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE")
    p.add_argument("--seed", type=int, default=0, metavar="N")

    p = sub.add_parser("analyze", help="compare classical and wireless gain curves")
    p.add_argument("--classical", required=True, metavar="FILE")
    p.add_argument("--wireless", required=True, metavar="FILE")
    p.add_argument("--report", required=True, metavar="FILE")
    p.add_argument("--svg", metavar="FILE")

    p = sub.add_parser("calibrate", help="fit channel parameters to measured gain curves")
    p.add_argument("--measured", required=True, metavar="FILE")
    p.add_argument("--config", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--budget", type=int, metavar="N")

    p = sub.add_parser("safety-check", help="check a transmit power against the 5 dBm cap")
    p.add_argument("--tx-dbm", required=True, type=float, metavar="X")
    return parser


_PATH_ARGS = ("config", "out", "classical", "wireless", "report", "svg", "measured")


def parse_args(argv) -> CommandPlan:
    ns = _build_parser().parse_args(list(argv))
    args = vars(ns)
    command = args.pop("command")
    paths = {k: args.pop(k) for k in _PATH_ARGS if k in args}
    for k, v in paths.items():
        if v is not None and v == "":
            raise UsageError(f"--{k} must not be empty")
    paths = {k: v for k, v in paths.items() if v is not None}
    if args.get("budget") is not None and args["budget"] < 0:
        raise UsageError("--budget must be >= 0")
    return CommandPlan(command, paths, args)


def _cmd_sweep(plan):
    cfg = campaign.load_config(plan.paths["config"])
    result = campaign.run_campaign(
        cfg.scenarios, cfg.params, cfg.tx, cfg.rx, cfg.sweep, cfg.safety, seed=plan.options["seed"]
    )
    campaign.write_csv(result, plan.paths["out"])
    by_scenario = {}
    for s in result.samples:
        by_scenario.setdefault(s.scenario, []).append(s)
    for sid, rows in by_scenario.items():
        best = max(rows, key=lambda r: (r.gain_db, -r.freq_hz))
        mean_rx = sum(r.rx_power_dbm for r in rows) / len(rows)
        print(
            f"{sid}: {len(rows)} points, peak gain {best.gain_db:.2f} dB at {best.freq_hz / 1e6:g} MHz, "
            f"mean rx power {mean_rx:.2f} dBm"
        )
    print(f"wrote {len(result.samples)} rows to {plan.paths['out']}")


def _cmd_analyze(plan):
    classical = campaign.read_gain_records(plan.paths["classical"])
    wireless = campaign.read_gain_records(plan.paths["wireless"])
    report = analysis.compare_campaigns(classical, wireless)
    svg_text = None
    if "svg" in plan.paths:
        curves = list(analysis.curves_from_records(classical, "classical").values())
        curves += list(analysis.curves_from_records(wireless, "wireless").values())
        curves.sort(key=lambda c: (c.daq_mode, c.distance_cm))
        svg_text = render_gain_chart(curves, title="Channel gain: classical (solid) vs wireless (dashed)")
    campaign.atomic_write_text(plan.paths["report"], report.to_json())
    if svg_text is not None:
        campaign.atomic_write_text(plan.paths["svg"], svg_text)
    for d in report.distances_cm:
        key = f"{d:g}"
        print(f"{key} cm: mean overestimation {report.mean_gap_db[key]:.2f} dB")
    print(f"grand mean overestimation {report.grand_mean_gap_db:.2f} dB")


def _cmd_calibrate(plan):
    cfg = campaign.load_config(plan.paths["config"])
    measured = list(analysis.curves_from_records(campaign.read_measured_csv(plan.paths["measured"])).values())
    if not measured:
        raise InvalidConfig("measured file contains no data rows")
    fit_cfg = dict(cfg.fit)
    unknown = sorted(set(fit_cfg) - {"free", "log10_bounds", "budget"})
    if unknown:
        raise InvalidConfig(f"unknown key(s) in 'fit': {unknown}")
    budget = plan.options.get("budget")
    if budget is None:
        budget = fit_cfg.get("budget", calibrate.DEFAULT_BUDGET)
    bounds = {k: tuple(v) for k, v in fit_cfg.get("log10_bounds", {}).items()}
    try:
        spec = calibrate.FitSpec(
            measured=measured,
            free=tuple(fit_cfg.get("free", calibrate.RETURN_PATH_PARAMS)),
            log10_bounds=bounds,
            initial=cfg.params,
            budget=budget,
            seed=plan.options["seed"],
        )
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"invalid 'fit' section: {exc}") from exc
    result = calibrate.fit(spec)
    campaign.atomic_write_text(plan.paths["out"], calibrate.params_block_json(result.params))
    for c in measured:
        rmse = calibrate.objective_rmse_db(result.params, [c])
        print(f"{c.label}: rmse {rmse:.4f} dB")
    print(
        f"rmse {result.initial_rmse_db:.4f} -> {result.rmse_db:.4f} dB after {result.evaluations} evaluations"
        f" ({'converged' if result.converged else 'not converged'})"
    )


def _cmd_safety(plan):
    tx = plan.options["tx_dbm"]
    policy = campaign.SafetyPolicy()
    campaign.check_safety(tx, policy)
    print(f"ok: {tx:g} dBm <= {policy.max_tx_dbm:g} dBm")


_COMMANDS = {
    "sweep": _cmd_sweep,
    "analyze": _cmd_analyze,
    "calibrate": _cmd_calibrate,
    "safety-check": _cmd_safety,
}


def execute(plan: CommandPlan) -> int:
    try:
        _COMMANDS[plan.command](plan)
    except SafetyViolation as exc:
        p = exc.tx_power_dbm
        shown = f"{p:g}" if math.isfinite(p) else str(p)
        print(f"safety violation: transmit power {shown} dBm exceeds {exc.max_tx_dbm:g} dBm", file=sys.stderr)
        return EXIT_SAFETY
    except (HBCError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        plan = parse_args(argv)
    except _HelpShown:
        return EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return execute(plan)


if __name__ == "__main__":
    sys.exit(main())
