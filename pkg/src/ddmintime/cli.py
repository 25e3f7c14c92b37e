"""Command-line workflows around scenario files.

A scenario is a YAML file describing the system (or a recorded data
CSV), the excitation experiment, and the minimum-time problem.  The
subcommands cover the full loop: generate data, solve the LP, run the
model-based baseline, compare the two, and report the model lag.

Exit codes: 0 success, 2 bad configuration or arguments, 3 infeasible
problem, 4 solver/baseline disagreement, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from .baseline import BaselineSpec, solve_min_time_exact
from .hankel import build_data_model, is_persistently_exciting
from .lpsolve import dump_lp
from .mintime import (
    InfeasibleProblemError,
    MinTimeSolution,
    MinTimeSpec,
    PathConstraint,
    PolyhedralTarget,
    assemble_lp,
    input_box_path,
    point_target,
    segment_layout,
    solve_min_time,
)
from .statespace import (
    CwhParams,
    StateSpaceModel,
    cwh_model,
    generate_excitation_data,
    lag,
    propagated_initial_state,
)
from .trajectories import (
    DataTrajectory,
    Trajectory,
    read_data_csv,
    write_data_csv,
    write_trajectory_csv,
)

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_DISAGREE = 4
EXIT_IO = 5


class ConfigError(ValueError):
    """A scenario file is missing keys or holds inconsistent values."""


def _section(cfg: dict, name: str, required: bool = True) -> dict:
    value = cfg.get(name)
    if value is None:
        if required:
            raise ConfigError(f"scenario is missing the '{name}' section")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"'{name}' must be a mapping")
    return value


def _get(section: dict, key: str, context: str):
    if key not in section:
        raise ConfigError(f"'{context}' is missing '{key}'")
    return section[key]


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from exc
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: scenario must be a mapping")
    return cfg


def build_model(cfg: dict) -> StateSpaceModel | None:
    """System model from the scenario, or None for data-only scenarios."""
    system = _section(cfg, "system")
    kind = _get(system, "kind", "system")
    if kind == "cwh":
        params = CwhParams(**system.get("cwh", {}))
        return cwh_model(params)
    if kind == "matrices":
        mats = _section(system, "matrices")
        return StateSpaceModel(
            A=np.asarray(_get(mats, "A", "system.matrices"), dtype=float),
            B=np.asarray(_get(mats, "B", "system.matrices"), dtype=float),
            C=np.asarray(_get(mats, "C", "system.matrices"), dtype=float),
            D=np.asarray(_get(mats, "D", "system.matrices"), dtype=float),
        )
    if kind == "data_csv":
        return None
    raise ConfigError(f"unknown system.kind {kind!r} (expected cwh, matrices or data_csv)")


def load_or_generate_data(
    cfg: dict, model: StateSpaceModel | None, seed_override: int | None
) -> tuple[DataTrajectory, int | None]:
    """The excitation record for a scenario, and the seed that made it."""
    system = _section(cfg, "system")
    if _get(system, "kind", "system") == "data_csv":
        return read_data_csv(_get(system, "data_csv", "system")), None
    if model is None:
        raise ConfigError("scenario has no model to generate data from")
    data_cfg = _section(cfg, "data")
    seed = seed_override if seed_override is not None else int(_get(data_cfg, "seed", "data"))
    x0 = data_cfg.get("x0")
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float)
    data = generate_excitation_data(
        model,
        x0,
        int(_get(data_cfg, "M", "data")),
        float(_get(data_cfg, "bound", "data")),
        seed,
    )
    return data, seed


def _build_target(target_cfg, p: int, K_f: int) -> PolyhedralTarget:
    if not isinstance(target_cfg, dict):
        raise ConfigError("'problem.target' must be a mapping")
    if "point" in target_cfg:
        point = np.asarray(target_cfg["point"], dtype=float).reshape(-1)
        if point.size == p:
            point = np.tile(point, K_f)
        if point.size != p * K_f:
            raise ConfigError(
                f"target point must hold p = {p} or p*K_f = {p * K_f} values, got {point.size}"
            )
        return point_target(point)
    width = p * K_f
    G = np.asarray(target_cfg.get("G", np.zeros((0, width))), dtype=float)
    g = np.asarray(target_cfg.get("g", np.zeros(0)), dtype=float)
    H = np.asarray(target_cfg.get("H", np.zeros((0, width))), dtype=float)
    h = np.asarray(target_cfg.get("h", np.zeros(0)), dtype=float)
    return PolyhedralTarget(G=np.atleast_2d(G), g=g, H=np.atleast_2d(H), h=h)


def _build_path(path_cfg, m: int, p: int) -> PathConstraint:
    if path_cfg is None:
        return PathConstraint(S_u=np.zeros((0, m)), S_y=np.zeros((0, p)), s=np.zeros(0))
    if not isinstance(path_cfg, dict):
        raise ConfigError("'problem.path' must be a mapping")
    if "input_box" in path_cfg:
        return input_box_path(m, p, float(path_cfg["input_box"]))
    return PathConstraint(
        S_u=np.atleast_2d(np.asarray(_get(path_cfg, "S_u", "problem.path"), dtype=float)),
        S_y=np.atleast_2d(np.asarray(_get(path_cfg, "S_y", "problem.path"), dtype=float)),
        s=np.asarray(_get(path_cfg, "s", "problem.path"), dtype=float),
    )


def build_problem_spec(cfg: dict, m: int, p: int, theta_override: float | None) -> MinTimeSpec:
    problem = _section(cfg, "problem")
    K_i = int(_get(problem, "K_i", "problem"))
    K_f = int(_get(problem, "K_f", "problem"))
    u_init = np.asarray(_get(problem, "u_init", "problem"), dtype=float).reshape(-1)
    y_init = np.asarray(_get(problem, "y_init", "problem"), dtype=float).reshape(-1)
    if u_init.size != m * K_i:
        raise ConfigError(f"u_init must hold m*K_i = {m * K_i} values, got {u_init.size}")
    if y_init.size != p * K_i:
        raise ConfigError(f"y_init must hold p*K_i = {p * K_i} values, got {y_init.size}")
    theta = float(theta_override if theta_override is not None else problem.get("theta", 2.0))
    return MinTimeSpec(
        K_i=K_i,
        K_f=K_f,
        u_init=u_init,
        y_init=y_init,
        target=_build_target(_get(problem, "target", "problem"), p, K_f),
        path=_build_path(problem.get("path"), m, p),
        T0=int(_get(problem, "T0", "problem")),
        T1=int(_get(problem, "T1", "problem")),
        theta=theta,
        L=int(_get(problem, "L", "problem")),
        eps_tol=float(problem.get("eps_tol", 1e-3)),
    )


def build_baseline_spec(cfg: dict, model: StateSpaceModel, spec: MinTimeSpec) -> BaselineSpec:
    problem = _section(cfg, "problem")
    x_target = np.asarray(_get(problem, "x_target", "problem"), dtype=float)
    if "x_init" in problem:
        x_init = np.asarray(problem["x_init"], dtype=float)
    else:
        window = Trajectory(
            inputs=spec.u_init.reshape(spec.K_i, spec.m),
            outputs=spec.y_init.reshape(spec.K_i, spec.p),
            start_index=-spec.K_i,
        )
        x_init = propagated_initial_state(model, window)
    path_cfg = problem.get("path")
    if not (isinstance(path_cfg, dict) and "input_box" in path_cfg):
        raise ConfigError("the baseline needs an input_box path constraint")
    bound = float(path_cfg["input_box"])
    m = model.m
    return BaselineSpec(
        model=model,
        x_init=x_init,
        x_target=x_target,
        u_lower=np.full(m, -bound),
        u_upper=np.full(m, bound),
        T0=spec.T0,
        T1=spec.T1,
    )


def _out_dir(cfg: dict, override: str | None) -> Path:
    run = _section(cfg, "run", required=False)
    out = Path(override if override is not None else run.get("out_dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _scenario_dt(cfg: dict) -> float | None:
    """Sampling period for time-of-flight reporting, when known."""
    system = _section(cfg, "system")
    if system.get("kind") == "cwh":
        return CwhParams(**system.get("cwh", {})).dt
    dt = _section(cfg, "problem", required=False).get("dt")
    return float(dt) if dt is not None else None


def _init_residual(spec: MinTimeSpec, solution: MinTimeSolution) -> float:
    """Largest deviation of the solved head from the pinned window."""
    u = solution.trajectory.inputs[: spec.K_i].reshape(-1)
    y = solution.trajectory.outputs[: spec.K_i].reshape(-1)
    return float(
        max(
            np.max(np.abs(u - spec.u_init), initial=0.0),
            np.max(np.abs(y - spec.y_init), initial=0.0),
        )
    )


def _path_violation(spec: MinTimeSpec, solution: MinTimeSolution) -> float:
    """Worst per-sample path-constraint violation over the planned window."""
    if spec.path.q_s == 0:
        return 0.0
    u = solution.trajectory.inputs[spec.K_i :]
    y = solution.trajectory.outputs[spec.K_i :]
    margins = u @ spec.path.S_u.T + y @ spec.path.S_y.T - spec.path.s
    return float(np.max(margins, initial=0.0))


def _channel_counts(cfg: dict, model: StateSpaceModel | None, data: DataTrajectory | None):
    if model is not None:
        return model.m, model.p
    if data is not None:
        return data.m, data.p
    raise ConfigError("cannot determine channel counts without a model or data")


def write_slack_csv(solution: MinTimeSolution, path) -> None:
    """Write the slack schedule as 't,eps_l1' rows."""
    lines = ["t,eps_l1"]
    for t in sorted(solution.eps_schedule):
        lines.append(f"{t},{float(np.sum(solution.eps_schedule[t]))!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def _summary(
    spec: MinTimeSpec,
    solution: MinTimeSolution,
    seed,
    use_reduction: bool,
    dt: float | None,
) -> dict:
    layout = segment_layout(spec)
    stats = solution.solver_stats
    t_star = solution.t_star
    return {
        "t_star": t_star,
        "time_of_flight_s": None if t_star is None or dt is None else t_star * dt,
        "objective": solution.objective,
        "theta": spec.theta,
        "T0": spec.T0,
        "T1": spec.T1,
        "K_i": spec.K_i,
        "K_f": spec.K_f,
        "L": spec.L,
        "K": layout.K,
        "N": layout.N,
        "eps_tol": spec.eps_tol,
        "seed": seed,
        "use_reduction": use_reduction,
        "status": stats.status,
        "iterations": stats.iterations,
        "runtime_s": stats.runtime_s,
        "max_violation": stats.max_violation,
        "init_residual": _init_residual(spec, solution),
        "path_violation": _path_violation(spec, solution),
        "files": {"trajectory": "trajectory.csv", "slack": "slack.csv"},
    }


def _run_solve(cfg: dict, args) -> tuple[MinTimeSpec, MinTimeSolution, int | None, bool]:
    model = build_model(cfg)
    data, seed = load_or_generate_data(cfg, model, args.seed)
    m, p = _channel_counts(cfg, model, data)
    spec = build_problem_spec(cfg, m, p, args.theta)
    use_reduction = not args.no_reduction and _section(cfg, "run", required=False).get(
        "use_reduction", True
    )
    hankel_model = build_data_model(data, spec.L)
    lp_model = hankel_model.reduce() if use_reduction else hankel_model
    if args.dump_lp:
        out = _out_dir(cfg, args.out)
        dump_lp(assemble_lp(spec, lp_model), out / "lp_dump.txt")
    solution = solve_min_time(spec, lp_model)
    return spec, solution, seed, use_reduction


def cmd_generate_data(args) -> int:
    cfg = load_config(args.config)
    model = build_model(cfg)
    if model is None:
        raise ConfigError("generate-data needs a system model (kind cwh or matrices)")
    data, seed = load_or_generate_data(cfg, model, args.seed)
    out = _out_dir(cfg, args.out)
    write_data_csv(data, out / "data.csv")
    print(f"wrote {out / 'data.csv'} ({data.M} samples, seed {seed})")
    order = _section(cfg, "problem", required=False).get("L")
    if order is not None:
        order = int(order) + model.n
        excites = is_persistently_exciting(data.u, order)
        print(f"persistently exciting of order {order}: {excites}")
        if not excites:
            achieved = max(
                (k for k in range(1, order) if is_persistently_exciting(data.u, k)),
                default=0,
            )
            print(f"record only excites up to order {achieved}; collect more samples")
            return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    spec, solution, seed, use_reduction = _run_solve(cfg, args)
    out = _out_dir(cfg, args.out)
    write_trajectory_csv(solution.trajectory, out / "trajectory.csv")
    write_slack_csv(solution, out / "slack.csv")
    summary = _summary(spec, solution, seed, use_reduction, _scenario_dt(cfg))
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"wrote trajectory.csv, slack.csv, summary.json to {out}")
    if solution.t_star is None:
        print(f"target not settled within [{spec.T0}, {spec.T1}]")
        return EXIT_INFEASIBLE
    print(f"t* = {solution.t_star}")
    return EXIT_OK


def cmd_baseline(args) -> int:
    cfg = load_config(args.config)
    model = build_model(cfg)
    if model is None:
        raise ConfigError("baseline needs a system model (kind cwh or matrices)")
    m, p = model.m, model.p
    spec = build_problem_spec(cfg, m, p, None)
    baseline = build_baseline_spec(cfg, model, spec)
    started = time.perf_counter()
    t_star, trajectory = solve_min_time_exact(baseline)
    runtime = time.perf_counter() - started
    out = _out_dir(cfg, args.out)
    if trajectory is not None:
        write_trajectory_csv(trajectory, out / "baseline_trajectory.csv")
    dt = _scenario_dt(cfg)
    summary = {
        "t_star": t_star,
        "time_of_flight_s": None if t_star is None or dt is None else t_star * dt,
        "T0": baseline.T0,
        "T1": baseline.T1,
        "runtime_s": runtime,
        "x_init": baseline.x_init.tolist(),
        "x_target": baseline.x_target.tolist(),
    }
    (out / "baseline_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if t_star is None:
        print(f"target state not reachable within [{baseline.T0}, {baseline.T1}]")
        return EXIT_INFEASIBLE
    print(f"baseline t* = {t_star}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    model = build_model(cfg)
    if model is None:
        raise ConfigError("compare needs a system model (kind cwh or matrices)")
    spec, solution, seed, use_reduction = _run_solve(cfg, args)
    baseline = build_baseline_spec(cfg, model, spec)
    started = time.perf_counter()
    baseline_t, baseline_traj = solve_min_time_exact(baseline)
    baseline_runtime = time.perf_counter() - started
    out = _out_dir(cfg, args.out)
    write_trajectory_csv(solution.trajectory, out / "trajectory.csv")
    write_slack_csv(solution, out / "slack.csv")
    (out / "summary.json").write_text(
        json.dumps(_summary(spec, solution, seed, use_reduction, _scenario_dt(cfg)), indent=2)
        + "\n"
    )
    if baseline_traj is not None:
        write_trajectory_csv(baseline_traj, out / "baseline_trajectory.csv")
    agree = solution.t_star == baseline_t
    report = {
        "lp_t_star": solution.t_star,
        "baseline_t_star": baseline_t,
        "agree": agree,
        "lp_runtime_s": solution.solver_stats.runtime_s,
        "baseline_runtime_s": baseline_runtime,
        "init_residual": _init_residual(spec, solution),
        "path_violation": _path_violation(spec, solution),
    }
    (out / "compare_report.json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"LP t* = {solution.t_star}, baseline t* = {baseline_t}: "
          f"{'agree' if agree else 'DISAGREE'}")
    return EXIT_OK if agree else EXIT_DISAGREE


def cmd_lag(args) -> int:
    cfg = load_config(args.config)
    model = build_model(cfg)
    if model is None:
        raise ConfigError("lag needs a system model (kind cwh or matrices)")
    print(json.dumps({"lag": lag(model)}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddmintime",
        description="Minimum-time trajectory optimization from input-output data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, solver_flags=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="scenario YAML file")
        p.add_argument("--out", default=None, help="output directory (default: run.out_dir)")
        if solver_flags:
            p.add_argument("--seed", type=int, default=None, help="override the data seed")
            p.add_argument("--theta", type=float, default=None, help="override the penalty rate")
            p.add_argument("--no-reduction", action="store_true",
                           help="solve with explicit Hankel coefficients instead of row relations")
            p.add_argument("--dump-lp", action="store_true",
                           help="also write the assembled LP as lp_dump.txt")
        p.set_defaults(func=func)
        return p

    gen = add("generate-data", cmd_generate_data, "record an excitation experiment to CSV")
    gen.add_argument("--seed", type=int, default=None, help="override the data seed")
    add("solve", cmd_solve, "solve the minimum-time LP", solver_flags=True)
    add("baseline", cmd_baseline, "model-based minimum-time scan")
    add("compare", cmd_compare, "solve both routes and compare t*", solver_flags=True)
    add("lag", cmd_lag, "report the model lag")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
