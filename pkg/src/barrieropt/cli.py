"""Command-line interface: solve, verify, sweep.

Exit codes: 0 success, 1 configuration problems (bad flags, bad market file,
missing barriers), 2 market-regime violations (the problem is not admissible
for this market), so pipelines can tell misuse apart from inadmissibility.
"""

from __future__ import annotations

import argparse
import enum
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import BarrierOptError, ConfigError, RegimeError
from .goal import goal_value, solve_goal
from .market import DerivedMarket, MarketSpec, build_derived, load_market
from .reward import RewardDirection, discounted_value, solve_penalty_min, solve_reward_max
from .simulate import SimConfig
from .timing import TimeRegime, reach_value, solve_time, survival_value
from .verify import report_to_json, verify_goal, verify_reward, verify_time

_EXIT_OK = 0
_EXIT_CONFIG = 1
_EXIT_REGIME = 2


class Problem(enum.Enum):
    GOAL = "goal"
    SURVIVE = "survive"
    REACH = "reach"
    REWARD_MAX = "reward-max"
    PENALTY_MIN = "penalty-min"


# barriers/rates each problem requires on the command line
_REQUIRED = {
    Problem.GOAL: ("L", "U", "x"),
    Problem.SURVIVE: ("L", "x"),
    Problem.REACH: ("U", "x"),
    Problem.REWARD_MAX: ("U", "rho", "x"),
    Problem.PENALTY_MIN: ("L", "rho", "x"),
}

_SWEEPABLE = ("x", "c_net", "rho", "L", "U")


@dataclass(frozen=True)
class RunConfig:
    """Validated CLI request."""

    market_path: str
    problem: Problem
    x: Optional[float] = None
    L: Optional[float] = None
    U: Optional[float] = None
    rho: Optional[float] = None
    sim: SimConfig = SimConfig()
    output_format: str = "table"

    def __post_init__(self) -> None:
        for name in _REQUIRED[self.problem]:
            if getattr(self, name) is None:
                raise ConfigError(f"missing {'barrier ' if name in 'LU' else ''}{name} "
                                  f"for problem {self.problem.value}")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on misuse; remap to the config exit code."""

    def error(self, message: str) -> None:  # noqa: A003
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(_EXIT_CONFIG)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="barrieropt")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_sim: bool) -> None:
        p.add_argument("--problem", required=True, choices=[pr.value for pr in Problem])
        p.add_argument("--market", required=True, help="market JSON file")
        p.add_argument("--x", type=float, help="current wealth")
        p.add_argument("--L", type=float, help="lower barrier")
        p.add_argument("--U", type=float, help="upper barrier")
        p.add_argument("--rho", type=float, help="discount rate")
        p.add_argument("--format", default="table", choices=["json", "csv", "table"])
        if with_sim:
            p.add_argument("--paths", type=int, default=100_000)
            p.add_argument("--dt", type=float, default=1e-3)
            p.add_argument("--horizon", type=float, default=500.0)
            p.add_argument("--seed", type=int, default=1)
            p.add_argument("--bridge", action="store_true",
                           help="enable the Brownian-bridge crossing correction")

    common(sub.add_parser("solve", help="print the closed-form solution"), with_sim=False)
    common(sub.add_parser("verify", help="run the verification battery"), with_sim=True)
    sweep = sub.add_parser("sweep", help="solve over a parameter grid, emit CSV")
    common(sweep, with_sim=False)
    sweep.add_argument("--param", required=True, choices=_SWEEPABLE)
    sweep.add_argument("--grid", required=True,
                       help="comma list (1,2,3) or start:stop:step (1.05:1.95:0.05)")
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    sim = SimConfig(
        n_paths=getattr(args, "paths", 100_000),
        dt=getattr(args, "dt", 1e-3),
        horizon=getattr(args, "horizon", 500.0),
        seed=getattr(args, "seed", 1),
        bridge_correction=getattr(args, "bridge", False),
    )
    return RunConfig(
        market_path=args.market,
        problem=Problem(args.problem),
        x=args.x,
        L=args.L,
        U=args.U,
        rho=args.rho,
        sim=sim,
        output_format=args.format,
    )


def _solve_payload(cfg: RunConfig, dm: DerivedMarket) -> dict:
    """Solve the requested problem and flatten the solution for output."""
    r, c_net = dm.r, dm.c_net
    inputs = {"r": r, "c_net": c_net, "x": cfg.x, "L": cfg.L, "U": cfg.U, "rho": cfg.rho}
    payload: dict = {"problem": cfg.problem.value, "inputs": inputs}
    if cfg.problem is Problem.GOAL:
        sol = solve_goal(dm, r, c_net, cfg.L, cfg.U)
        payload.update({
            "case": sol.case.value,
            "alpha": sol.alpha,
            "nu1_star": sol.nu_star.nu1,
            "w_star": [float(v) for v in sol.w_star],
            "value": goal_value(sol, cfg.x),
        })
        wealth = sol.wealth
    elif cfg.problem in (Problem.SURVIVE, Problem.REACH):
        sol = solve_time(dm, r, c_net)
        if cfg.problem is Problem.SURVIVE:
            if sol.regime is not TimeRegime.SURVIVAL:
                raise RegimeError(
                    "market is favourable (beta_star > 0); survival time is unbounded")
            value = survival_value(sol, cfg.x, cfg.L)
        else:
            if sol.regime is not TimeRegime.REACH:
                raise RegimeError(
                    "market is unfavourable (beta_star < 0); the goal may never be reached")
            value = reach_value(sol, cfg.x, cfg.U)
        payload.update({
            "case": sol.case.value,
            "beta_star": sol.beta_star,
            "nu1_star": sol.nu_star.nu1,
            "w_star": [float(v) for v in sol.w_star],
            "value_years": value,
        })
        wealth = sol.wealth
    else:
        if cfg.problem is Problem.REWARD_MAX:
            sol = solve_reward_max(dm, r, c_net, cfg.rho, cfg.U)
        else:
            sol = solve_penalty_min(dm, r, c_net, cfg.rho, cfg.L)
        payload.update({
            "case": sol.case.value,
            "d": sol.d,
            "nu1_star": sol.nu_star.nu1,
            "w_star": [float(v) for v in sol.w_star],
            "value": discounted_value(sol, cfg.x),
        })
        wealth = sol.wealth
    payload["wealth"] = {"log_drift": wealth.log_drift, "log_vol": wealth.log_vol}
    return payload


def _flatten(payload: dict) -> list[tuple[str, object]]:
    items: list[tuple[str, object]] = []
    for key, value in payload.items():
        if isinstance(value, dict):
            items.extend((f"{key}.{k}", v) for k, v in value.items())
        elif isinstance(value, list):
            items.extend((f"{key}_{i}", v) for i, v in enumerate(value))
        else:
            items.append((key, value))
    return items


def _format_cell(value: object) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.12g}"
    if value is None:
        return ""
    return str(value)


def _emit_payload(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, allow_nan=False))
    elif fmt == "csv":
        items = _flatten(payload)
        print(",".join(key for key, _ in items))
        print(",".join(_format_cell(v) for _, v in items))
    else:
        for key, value in _flatten(payload):
            print(f"{key:>18}: {_format_cell(value)}")


def run_solve(cfg: RunConfig) -> int:
    """Solve one problem and print the solution in the requested format."""
    dm = build_derived(load_market(cfg.market_path))
    _emit_payload(_solve_payload(cfg, dm), cfg.output_format)
    return _EXIT_OK


def run_verify(cfg: RunConfig) -> int:
    """Run the verification battery; exit 0 only if every check passes."""
    dm = build_derived(load_market(cfg.market_path))
    r, c_net = dm.r, dm.c_net
    if cfg.problem is Problem.GOAL:
        report = verify_goal(dm, r, c_net, cfg.L, cfg.U, cfg.x, cfg.sim)
    elif cfg.problem is Problem.SURVIVE:
        report = verify_time(dm, r, c_net, cfg.L, cfg.x, cfg.sim)
    elif cfg.problem is Problem.REACH:
        report = verify_time(dm, r, c_net, cfg.U, cfg.x, cfg.sim)
    elif cfg.problem is Problem.REWARD_MAX:
        report = verify_reward(dm, r, c_net, cfg.rho, cfg.U, cfg.x,
                               RewardDirection.MAX_REWARD, cfg.sim)
    else:
        report = verify_reward(dm, r, c_net, cfg.rho, cfg.L, cfg.x,
                               RewardDirection.MIN_PENALTY, cfg.sim)
    if cfg.output_format == "json":
        print(report.to_json())
    elif cfg.output_format == "csv":
        print("name,passed,closed_form,oracle,mc_mean,mc_se,tolerance")
        for rec in report.records:
            cells = [rec.name, str(rec.passed).lower()] + [
                _format_cell(v) for v in
                (rec.closed_form, rec.oracle, rec.mc_mean, rec.mc_se, rec.tolerance)
            ]
            print(",".join(cells))
    else:
        print(report.to_table())
    return _EXIT_OK if report.overall_pass else _EXIT_REGIME


def _parse_grid(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("grid range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0.0 or stop < start:
            raise ConfigError("grid range needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]
    return [float(p) for p in text.split(",") if p.strip()]


def run_sweep(cfg: RunConfig, param: str, grid: Sequence[float]) -> int:
    """Solve along a parameter grid and print a CSV, 12 significant digits."""
    if len(grid) == 0:
        raise ConfigError("sweep grid is empty")
    spec = load_market(cfg.market_path)
    base_dm = build_derived(spec)
    header: Optional[list[str]] = None
    rows: list[list[str]] = []
    for value in grid:
        cur = cfg
        dm = base_dm
        if param == "c_net":
            dm = build_derived(MarketSpec(r=spec.r, c_net=value, mu=spec.mu, sigma=spec.sigma))
        else:
            cur = RunConfig(
                market_path=cfg.market_path,
                problem=cfg.problem,
                x=value if param == "x" else cfg.x,
                L=value if param == "L" else cfg.L,
                U=value if param == "U" else cfg.U,
                rho=value if param == "rho" else cfg.rho,
                sim=cfg.sim,
                output_format=cfg.output_format,
            )
        payload = _solve_payload(cur, dm)
        items = _flatten(payload)
        if header is None:
            header = [key for key, _ in items]
        rows.append([_format_cell(v) for _, v in items])
    print(",".join(header))
    for row in rows:
        print(",".join(row))
    return _EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    json_mode = getattr(args, "format", "table") == "json"
    try:
        cfg = _run_config(args)
        if args.command == "solve":
            return run_solve(cfg)
        if args.command == "verify":
            return run_verify(cfg)
        return run_sweep(cfg, args.param, _parse_grid(args.grid))
    except BarrierOptError as exc:
        code = _EXIT_REGIME if isinstance(exc, RegimeError) else _EXIT_CONFIG
        if json_mode:
            print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}},
                             indent=2))
        else:
            print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
