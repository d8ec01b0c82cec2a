"""Multi-day runs: build one problem per day, solve them (optionally in
parallel), and collect the heuristic and no-storage references.

Days decouple completely because the tank must return to its terminal state
at each midnight, so a 72-hour scenario is exactly three independent 24-hour
problems. The flat target for each day is the previous day's mean no-storage
generation; the first day (or every day, in same-day mode) uses its own mean
and is flagged.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cooling import CopModel, StorageSchedule, TesConfig, check_schedule
from .errors import ShapeError
from .optimizer import (
    OptimalSchedule,
    ScheduleProblem,
    SolverOptions,
    generation_profile,
    objective,
    operator_heuristic,
    solve,
)
from .plant import PlantConfig
from .scenario import HOURS_PER_DAY, Scenario, no_storage_baseline, split_days

THREADS_ENV_VAR = "GRIDSHAVE_THREADS"


@dataclass(frozen=True)
class DayResult:
    day: int
    problem: ScheduleProblem
    optimal: OptimalSchedule
    heuristic_q_stor: np.ndarray
    heuristic_generation: np.ndarray
    no_storage_generation: np.ndarray
    p_mean: float
    p_mean_mode: str        # "previous-day" or "same-day"


def worker_count(n_tasks: int, requested: int | None = None) -> int:
    """Workers to use, capped by the GRIDSHAVE_THREADS environment variable."""
    cap = os.environ.get(THREADS_ENV_VAR)
    limit = int(cap) if cap else (os.cpu_count() or 1)
    if requested is not None:
        limit = min(limit, requested)
    return max(1, min(n_tasks, limit))


def build_problems(scenario: Scenario,
                   plant: PlantConfig,
                   cop_model: CopModel,
                   tes: TesConfig,
                   p_mean_mode: str = "previous-day") -> list[tuple[ScheduleProblem, str]]:
    """One ScheduleProblem per day with its flat-target provenance flag."""
    if p_mean_mode not in ("previous-day", "same-day"):
        raise ValueError(f"unknown p_mean mode {p_mean_mode!r}")
    days = split_days(scenario)
    day_means = []
    for day in days:
        g = no_storage_baseline(day, cop_model, plant, tes)
        day_means.append(float(np.mean(g)))

    problems = []
    for k, day in enumerate(days):
        if p_mean_mode == "previous-day" and k > 0:
            target, mode = day_means[k - 1], "previous-day"
        else:
            target, mode = day_means[k], "same-day"
        problems.append((
            ScheduleProblem(
                p_base=day.p_base, q_cool=day.q_cool, q_s_c=day.q_s_c,
                twb=day.twb, p_mean=target, tes=tes, cop_model=cop_model,
                plant=plant),
            mode,
        ))
    return problems


def _solve_one(args: tuple[ScheduleProblem, SolverOptions]) -> OptimalSchedule:
    problem, opts = args
    return solve(problem, opts)


def run_days(scenario: Scenario,
             plant: PlantConfig,
             cop_model: CopModel,
             tes: TesConfig,
             opts: SolverOptions = SolverOptions(),
             p_mean_mode: str = "previous-day",
             workers: int | None = None) -> list[DayResult]:
    """Solve every day of the scenario; fan out to processes when workers > 1."""
    problems = build_problems(scenario, plant, cop_model, tes, p_mean_mode)
    n = len(problems)
    n_workers = worker_count(n, workers)

    jobs = [(p, opts) for p, _ in problems]
    if n_workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_solve_one, jobs))
    else:
        results = [_solve_one(job) for job in jobs]

    days = split_days(scenario)
    out = []
    for k, ((problem, mode), optimal) in enumerate(zip(problems, results)):
        heuristic = operator_heuristic(problem)
        out.append(DayResult(
            day=k, problem=problem, optimal=optimal,
            heuristic_q_stor=heuristic.q_stor,
            heuristic_generation=generation_profile(heuristic.q_stor, problem),
            no_storage_generation=no_storage_baseline(days[k], cop_model, plant, tes),
            p_mean=problem.p_mean, p_mean_mode=mode,
        ))
    return out


def evaluate_fixed_schedule(scenario: Scenario,
                            q_stor: np.ndarray,
                            plant: PlantConfig,
                            cop_model: CopModel,
                            tes: TesConfig,
                            p_mean_mode: str = "previous-day") -> list[DayResult]:
    """Like run_days but with a given schedule instead of an optimized one."""
    q = np.asarray(q_stor, dtype=float)
    if q.shape != (len(scenario),):
        raise ShapeError(
            f"schedule length {q.shape} does not match scenario length {len(scenario)}")
    problems = build_problems(scenario, plant, cop_model, tes, p_mean_mode)
    days = split_days(scenario)
    out = []
    for k, (problem, mode) in enumerate(problems):
        day_q = q[k * HOURS_PER_DAY:(k + 1) * HOURS_PER_DAY]
        schedule = StorageSchedule.from_rates(day_q, tes)
        violations = check_schedule(schedule, tes)
        if violations:
            raise ShapeError(
                f"day {k}: fixed schedule infeasible: "
                + "; ".join(str(v) for v in violations))
        generation = generation_profile(day_q, problem)
        fixed = OptimalSchedule(
            schedule=schedule, objective=objective(day_q, problem),
            p_ch=generation - problem.p_base, generation=generation,
            iterations=0, converged=True, message="fixed schedule",
        )
        heuristic = operator_heuristic(problem)
        out.append(DayResult(
            day=k, problem=problem, optimal=fixed,
            heuristic_q_stor=heuristic.q_stor,
            heuristic_generation=generation_profile(heuristic.q_stor, problem),
            no_storage_generation=no_storage_baseline(days[k], cop_model, plant, tes),
            p_mean=problem.p_mean, p_mean_mode=mode,
        ))
    return out
