"""Hourly storage scheduling to flatten the campus generation profile.

The only decision variables are the storage rates q_stor(1..T); every other
plant and cooling quantity follows deterministically from them. The solver
minimizes

    sum_t (G(t) - p_mean)^2,
    G(t) = p_base(t) + p_ch(q_cool(t) + q_stor(t), twb(t)),

subject to the rate box, the stored-energy chain 0 <= e(t) <= e_max, the
terminal state e(T) = e_terminal, per-hour chiller capacity and the COP
floor. Capacity is linear and the COP surface quadratic in PLR, so both
reduce to per-hour intervals on q_stor; the remaining constraints form one
lower-triangular linear system, making the problem a smooth NLP over box +
linear constraints. It is solved with scipy's trust-region interior-point
method from a feasible start, with analytic gradient and Hessian.

A dynamic-programming oracle on a discretized (action, stored energy) grid
provides an independent optimum for small horizons: the stage cost at hour t
depends only on q_stor(t), and hours couple only through the stored-energy
chain, so backward induction is exact on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, minimize

from .configio import get_float, read_config, write_config
from .cooling import (
    CopModel,
    StorageSchedule,
    TesConfig,
    check_schedule,
    cop_plr_slope,
    cop_values,
)
from .errors import (
    ChillerCapacityError,
    DegenerateCopError,
    GridResourceError,
    InfeasibleDischargeError,
    InfeasibleStartError,
    ShapeError,
)
from .plant import DEFAULT_PLANT, PlantConfig

HOURS_PER_DAY = 24

#: Weight of the smoothing tie-break term added inside the solver.
TIE_BREAK_WEIGHT = 1e-9


@dataclass(frozen=True)
class ScheduleProblem:
    """One optimization horizon: exogenous series, target level and configs."""

    p_base: np.ndarray      # MW, base electric load (everything but chillers)
    q_cool: np.ndarray      # MW thermal, cooling delivered to campus
    q_s_c: np.ndarray       # MW thermal, campus steam demand
    twb: np.ndarray         # deg C, wet-bulb temperature
    p_mean: float           # MW, flat generation target
    tes: TesConfig
    cop_model: CopModel
    plant: PlantConfig = field(default_factory=lambda: DEFAULT_PLANT)

    def __post_init__(self):
        for name in ("p_base", "q_cool", "q_s_c", "twb"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
        T = self.p_base.shape[0]
        if T < 2:
            raise ShapeError(f"horizon must be at least 2 hours, got {T}")
        for name in ("q_cool", "q_s_c", "twb"):
            if getattr(self, name).shape != (T,):
                raise ShapeError(f"{name} length differs from p_base length {T}")
        if not self.p_mean > 0.0:
            raise ValueError(f"p_mean must be positive, got {self.p_mean}")

    @property
    def horizon(self) -> int:
        return int(self.p_base.shape[0])


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 100_000
    max_function_evals: int = 100_000
    feasibility_tol: float = 1e-6       # MWh, schedule checks
    optimality_tol: float = 1e-8        # first-order condition tolerance
    initial_tr_radius: float = 1.0
    initial_barrier_parameter: float = 0.1

    def __post_init__(self):
        if self.feasibility_tol <= 0 or self.optimality_tol <= 0:
            raise ValueError("tolerances must be positive")

    def to_entries(self) -> dict[str, str]:
        return {
            "max_iterations": str(self.max_iterations),
            "max_function_evals": str(self.max_function_evals),
            "feasibility_tol": repr(self.feasibility_tol),
            "optimality_tol": repr(self.optimality_tol),
            "initial_tr_radius": repr(self.initial_tr_radius),
            "initial_barrier_parameter": repr(self.initial_barrier_parameter),
        }

    @classmethod
    def load(cls, path: str) -> "SolverOptions":
        cfg = read_config(path)
        return cls(
            max_iterations=int(get_float(cfg, "max_iterations", path)),
            max_function_evals=int(get_float(cfg, "max_function_evals", path)),
            feasibility_tol=get_float(cfg, "feasibility_tol", path),
            optimality_tol=get_float(cfg, "optimality_tol", path),
            initial_tr_radius=get_float(cfg, "initial_tr_radius", path),
            initial_barrier_parameter=get_float(cfg, "initial_barrier_parameter", path),
        )

    def save(self, path: str, header: str | None = None) -> None:
        write_config(path, self.to_entries(), header=header)


@dataclass(frozen=True)
class OptimalSchedule:
    """Solver output: feasible schedule plus diagnostics."""

    schedule: StorageSchedule
    objective: float                   # MW^2, recomputed at the returned point
    p_ch: np.ndarray                   # MW electric per hour
    generation: np.ndarray             # MW per hour
    iterations: int
    converged: bool
    first_order_residual: float | None = None
    grid_error_bound: float | None = None
    message: str = ""


def p_mean(prev_day_generation) -> float:
    """Flat target: arithmetic mean of the previous day's 24 hourly values."""
    g = np.asarray(prev_day_generation, dtype=float)
    if g.shape != (HOURS_PER_DAY,):
        raise ShapeError(f"expected 24 hourly values, got shape {g.shape}")
    if np.any(g <= 0.0):
        raise ValueError("generation values must be positive")
    return float(np.mean(g))


def _plr_floor_interval(twb: float, m: CopModel, plr_ref: float) -> tuple[float, float]:
    """Connected {plr in [0,1]: cop >= floor} segment containing plr_ref.

    cop(plr) at fixed twb is quadratic in plr; the admissible set is a union
    of at most two intervals. Returns the one holding the reference point, or
    raises if the reference itself is inadmissible.
    """
    a = m.c3
    b = m.c1 + m.c4 * twb
    c = m.c0 + m.c2 * twb + m.c5 * twb * twb - m.cop_floor

    def val(p):
        return a * p * p + b * p + c

    if val(plr_ref) <= 0.0:
        raise DegenerateCopError(
            f"COP at plr={plr_ref:.4f}, twb={twb:.2f} is at or below the floor")

    if a == 0.0:
        if b == 0.0:
            return (0.0, 1.0)  # constant and positive at plr_ref
        root = -c / b
        if b > 0.0:
            return (max(0.0, root), 1.0)
        return (0.0, min(1.0, root))

    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        # no real roots: sign is constant, and it is positive at plr_ref
        return (0.0, 1.0)
    sq = math.sqrt(disc)
    r1 = (-b - sq) / (2.0 * a)
    r2 = (-b + sq) / (2.0 * a)
    lo_root, hi_root = min(r1, r2), max(r1, r2)
    if a < 0.0:
        # concave: admissible between the roots
        return (max(0.0, lo_root), min(1.0, hi_root))
    # convex: admissible outside the roots; pick the side holding plr_ref
    if plr_ref <= lo_root:
        return (0.0, min(1.0, lo_root))
    return (max(0.0, hi_root), 1.0)


def hour_bounds(problem: ScheduleProblem) -> tuple[np.ndarray, np.ndarray]:
    """Per-hour [lo, hi] bounds on q_stor from rate, capacity and COP floor."""
    T = problem.horizon
    tes = problem.tes
    lo = np.empty(T)
    hi = np.empty(T)
    for t in range(T):
        q_cool = problem.q_cool[t]
        if not 0.0 <= q_cool <= tes.q_ch_max:
            raise InfeasibleStartError(
                f"hour {t}: cooling demand {q_cool} MW outside [0, {tes.q_ch_max}] MW")
        plr_ref = q_cool / tes.q_ch_max
        try:
            plr_lo, plr_hi = _plr_floor_interval(problem.twb[t], problem.cop_model, plr_ref)
        except DegenerateCopError as exc:
            raise InfeasibleStartError(
                f"hour {t}: zero-storage operating point violates the COP floor "
                f"({exc})") from exc
        lo[t] = max(-tes.rate_max, plr_lo * tes.q_ch_max - q_cool)
        hi[t] = min(tes.rate_max, plr_hi * tes.q_ch_max - q_cool)
        if lo[t] > hi[t]:
            raise InfeasibleStartError(f"hour {t}: empty feasible storage-rate interval")
    return lo, hi


def _power_arrays(q_stor: np.ndarray, problem: ScheduleProblem,
                  check: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(q_ch, cop, p_ch) per hour; validates capacity and COP floor."""
    tes = problem.tes
    m = problem.cop_model
    q_ch = problem.q_cool + q_stor
    if check:
        bad = np.nonzero(q_ch < -1e-9)[0]
        if bad.size:
            t = int(bad[0])
            raise InfeasibleDischargeError(
                f"hour {t}: discharge {-q_stor[t]:.3f} MW exceeds cooling demand "
                f"{problem.q_cool[t]:.3f} MW")
        bad = np.nonzero(q_ch > tes.q_ch_max + 1e-9)[0]
        if bad.size:
            t = int(bad[0])
            raise ChillerCapacityError(
                f"hour {t}: chiller output {q_ch[t]:.3f} MW exceeds capacity "
                f"{tes.q_ch_max} MW")
    plr = np.clip(q_ch, 0.0, tes.q_ch_max) / tes.q_ch_max
    cop = cop_values(plr, problem.twb, m)
    if check:
        bad = np.nonzero(cop <= m.cop_floor)[0]
        if bad.size:
            t = int(bad[0])
            raise DegenerateCopError(
                f"hour {t}: COP {cop[t]:.4f} at plr={plr[t]:.4f}, twb={problem.twb[t]:.2f} "
                f"is at or below floor {m.cop_floor}")
    p_ch = np.where(q_ch > 0.0, q_ch / cop, 0.0)
    return q_ch, cop, p_ch


def generation_profile(q_stor, problem: ScheduleProblem) -> np.ndarray:
    """Total generation G(t) for a storage schedule."""
    q = np.asarray(q_stor, dtype=float)
    if q.shape != (problem.horizon,):
        raise ShapeError(f"q_stor shape {q.shape} != horizon {problem.horizon}")
    _, _, p_ch = _power_arrays(q, problem)
    return problem.p_base + p_ch


def objective(q_stor, problem: ScheduleProblem) -> float:
    """Sum of squared deviations of generation from the flat target, MW^2."""
    g = generation_profile(q_stor, problem)
    r = g - problem.p_mean
    return float(np.dot(r, r))


def gradient(q_stor, problem: ScheduleProblem) -> np.ndarray:
    """Analytic d(objective)/d(q_stor), matching central finite differences.

    Chain rule through p_ch = q_ch / cop(q_ch / q_ch_max, twb):
    dp_ch/dq_ch = (cop - plr * dcop/dplr) / cop^2.
    """
    q = np.asarray(q_stor, dtype=float)
    if q.shape != (problem.horizon,):
        raise ShapeError(f"q_stor shape {q.shape} != horizon {problem.horizon}")
    q_ch, cop, p_ch = _power_arrays(q, problem)
    plr = q_ch / problem.tes.q_ch_max
    slope = cop_plr_slope(plr, problem.twb, problem.cop_model)
    dpch_dqch = (cop - plr * slope) / (cop * cop)
    g = problem.p_base + p_ch
    grad = 2.0 * (g - problem.p_mean) * dpch_dqch
    if not np.all(np.isfinite(grad)):
        t = int(np.nonzero(~np.isfinite(grad))[0][0])
        raise FloatingPointError(f"non-finite gradient component at hour {t}")
    return grad


def hessian_diagonal(q_stor, problem: ScheduleProblem) -> np.ndarray:
    """Diagonal of the objective Hessian (hours are uncoupled in the cost).

    With p' = dp_ch/dq_ch and p'' its derivative,
    d2/dq^2 (G - p_mean)^2 = 2 p'^2 + 2 (G - p_mean) p''.
    """
    q = np.asarray(q_stor, dtype=float)
    q_ch, cop, p_ch = _power_arrays(q, problem)
    q_max = problem.tes.q_ch_max
    plr = q_ch / q_max
    slope = cop_plr_slope(plr, problem.twb, problem.cop_model)
    c1 = slope / q_max                          # dcop/dq_ch
    c2 = 2.0 * problem.cop_model.c3 / (q_max * q_max)   # d2cop/dq_ch2
    p1 = (cop - plr * slope) / (cop * cop)
    p2 = (-q_ch * c2 * cop - 2.0 * c1 * (cop - q_ch * c1)) / (cop ** 3)
    r = problem.p_base + p_ch - problem.p_mean
    return 2.0 * p1 * p1 + 2.0 * r * p2


def _soc_constraint(problem: ScheduleProblem) -> LinearConstraint:
    """Cumulative-sum chain with the terminal state as the last (equality) row."""
    T = problem.horizon
    tes = problem.tes
    A = np.tril(np.ones((T, T)))
    lb = np.full(T, -tes.e_initial)
    ub = np.full(T, tes.e_max - tes.e_initial)
    delta = tes.e_terminal - tes.e_initial
    lb[-1] = delta
    ub[-1] = delta
    return LinearConstraint(A, lb, ub)


def feasible_start(problem: ScheduleProblem,
                   lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Zero schedule, or a uniform ramp when the boundary states differ."""
    T = problem.horizon
    tes = problem.tes
    delta = tes.e_terminal - tes.e_initial
    if abs(delta) <= 1e-12:
        x0 = np.zeros(T)
    else:
        step = delta / T
        if abs(step) > tes.rate_max + 1e-12:
            raise InfeasibleStartError(
                f"cannot move stored energy by {delta:.2f} MWh in {T} h at "
                f"rate limit {tes.rate_max} MW")
        x0 = np.full(T, step)
    if np.any(x0 < lo - 1e-12) or np.any(x0 > hi + 1e-12):
        t = int(np.nonzero((x0 < lo - 1e-12) | (x0 > hi + 1e-12))[0][0])
        raise InfeasibleStartError(
            f"hour {t}: starting schedule violates the hourly feasible interval")
    return x0


class _FunctionBudget(Exception):
    pass


def solve(problem: ScheduleProblem,
          opts: SolverOptions = SolverOptions()) -> OptimalSchedule:
    """Minimize the flatness objective over feasible storage schedules.

    Runs the interior trust-region solver from the zero/ramp start and, for
    24-hour problems, also from the operator heuristic; the best feasible
    point found (including the starting candidates themselves) is returned,
    so the result never loses to either reference schedule. Deterministic
    for identical inputs and options.
    """
    lo, hi = hour_bounds(problem)
    x0 = feasible_start(problem, lo, hi)

    starts = [x0]
    if problem.horizon == HOURS_PER_DAY:
        try:
            heur = operator_heuristic(problem)
            if not check_schedule(heur, problem.tes, tol=opts.feasibility_tol):
                starts.append(heur.q_stor)
        except InfeasibleStartError:
            pass

    tie = TIE_BREAK_WEIGHT
    evals = {"n": 0}

    def f(x):
        evals["n"] += 1
        if evals["n"] > opts.max_function_evals:
            raise _FunctionBudget()
        return objective(x, problem) + tie * float(np.dot(x, x))

    def g(x):
        return gradient(x, problem) + 2.0 * tie * x

    def h(x):
        return np.diag(hessian_diagonal(x, problem) + 2.0 * tie)

    bounds = Bounds(lo, hi, keep_feasible=True)
    constraint = _soc_constraint(problem)

    # raw starts act as fallback candidates so the result can never lose to
    # the zero/ramp schedule or the operator heuristic
    candidates = [
        {"obj": objective(s, problem), "x": s, "iters": 0, "converged": False,
         "residual": None, "message": "feasible start", "priority": 1}
        for s in starts
    ]

    total_iters = 0
    budget_note = ""
    for start in starts:
        try:
            res = minimize(
                f, start, jac=g, hess=h, method="trust-constr",
                bounds=bounds, constraints=[constraint],
                options={
                    "maxiter": opts.max_iterations,
                    "gtol": opts.optimality_tol,
                    "xtol": 1e-12,
                    "initial_tr_radius": opts.initial_tr_radius,
                    "initial_barrier_parameter": opts.initial_barrier_parameter,
                    "verbose": 0,
                },
            )
        except _FunctionBudget:
            budget_note = "function evaluation budget exhausted"
            break
        total_iters += int(res.niter)
        x = np.asarray(res.x, dtype=float)
        # restore the terminal state exactly; the uniform shift is orders of
        # magnitude below feasibility_tol and keeps all other limits within it
        delta = (problem.tes.e_terminal - problem.tes.e_initial) - float(np.sum(x))
        x = x + delta / problem.horizon
        candidates.append({
            "obj": objective(x, problem), "x": x, "iters": int(res.niter),
            "converged": res.status in (1, 2),
            "residual": float(res.optimality), "message": str(res.message),
            "priority": 0,
        })

    best = min(candidates, key=lambda c: (c["obj"], c["priority"]))
    converged = best["converged"]
    residual = best["residual"]
    if best["priority"] == 1:
        # A raw start won on strict objective (e.g. the exact zero schedule on
        # an already-flat profile, which the barrier method only approaches).
        # The returned point is feasible and at least as good as every solver
        # result, so a converged run's certificate carries over.
        for c in sorted((c for c in candidates if c["priority"] == 0),
                        key=lambda c: c["obj"]):
            if c["converged"]:
                converged = True
                residual = c["residual"]
                break

    schedule = StorageSchedule.from_rates(best["x"], problem.tes)
    violations = check_schedule(schedule, problem.tes, tol=opts.feasibility_tol)
    if violations:
        raise InfeasibleStartError(
            "solver returned an infeasible schedule: "
            + "; ".join(str(v) for v in violations))
    _, _, p_ch = _power_arrays(best["x"], problem)
    return OptimalSchedule(
        schedule=schedule,
        objective=best["obj"],
        p_ch=p_ch,
        generation=problem.p_base + p_ch,
        iterations=total_iters,
        converged=converged and not budget_note,
        first_order_residual=residual,
        message=budget_note or best["message"],
    )


def operator_heuristic(problem: ScheduleProblem) -> StorageSchedule:
    """Rule-of-thumb schedule mirroring manual tank operation.

    Top up the tank in the early morning (hours 0-5), discharge evenly over
    the afternoon (hours 13-19), and refill late evening (hours 22-23) back
    to the terminal state. Every step clamps to the rate, tank and chiller
    limits; the discharge budget is sized to what the evening hours can put
    back, so the result is feasible whenever the boundary states can be
    bridged within this phase structure at all.
    """
    T = problem.horizon
    if T != HOURS_PER_DAY:
        raise InfeasibleStartError(
            f"operator heuristic needs a 24-hour midnight-aligned day, got T={T}")
    tes = problem.tes
    lo, hi = hour_bounds(problem)

    q = np.zeros(T)
    e = tes.e_initial

    for t in range(0, 6):
        q[t] = min(max(hi[t], 0.0), tes.e_max - e)
        e += q[t]
    e_morning = e

    refill_hours = (22, 23)
    refill_cap = sum(min(max(hi[t], 0.0), tes.e_max) for t in refill_hours)

    discharge_hours = list(range(13, 20))
    per_hour_limit = min(max(-lo[t], 0.0) for t in discharge_hours)
    total = min(
        refill_cap + e_morning - tes.e_terminal,
        e_morning,
        per_hour_limit * len(discharge_hours),
    )
    total = max(total, 0.0)
    d = total / len(discharge_hours)
    for t in discharge_hours:
        q[t] = -d
        e -= d

    needed = tes.e_terminal - e
    for t in refill_hours:
        step = min(max(hi[t], 0.0), needed, tes.e_max - e)
        step = max(step, 0.0)
        q[t] = step
        e += step
        needed -= step

    return StorageSchedule.from_rates(q, tes)


def dp_oracle(problem: ScheduleProblem,
              action_step: float = 0.5,
              soc_step: float = 0.5,
              max_table_entries: int = 50_000_000) -> OptimalSchedule:
    """Exact optimum over discretized storage rates, by backward induction.

    Actions are multiples of action_step inside the per-hour feasible
    interval; stored-energy states are multiples of soc_step anchored at
    e_initial so every transition stays on the grid (action_step must be an
    integer multiple of soc_step). The reported grid_error_bound is a
    first-order estimate of how far the continuous optimum can undercut the
    grid optimum: sum_t max|dcost_t/dq| * action_step / 2.
    """
    T = problem.horizon
    if T > HOURS_PER_DAY:
        raise ShapeError(f"dp oracle supports horizons up to 24 h, got {T}")
    if action_step <= 0.0 or soc_step <= 0.0:
        raise ValueError("grid steps must be positive")
    ratio = action_step / soc_step
    if abs(ratio - round(ratio)) > 1e-9:
        raise ValueError("action_step must be an integer multiple of soc_step")
    ratio = int(round(ratio))

    tes = problem.tes
    lo, hi = hour_bounds(problem)

    k_min = -math.floor(tes.e_initial / soc_step + 1e-9)
    k_max = math.floor((tes.e_max - tes.e_initial) / soc_step + 1e-9)
    n_states = k_max - k_min + 1
    m = math.floor(tes.rate_max / action_step + 1e-9)
    actions = np.arange(-m, m + 1, dtype=float) * action_step
    n_actions = actions.shape[0]

    if n_states * n_actions + T * n_states > max_table_entries:
        raise GridResourceError(
            f"DP table of {n_states} states x {n_actions} actions over {T} h "
            f"exceeds the cap of {max_table_entries} entries; use coarser steps")

    k_term = round((tes.e_terminal - tes.e_initial) / soc_step)
    if abs(tes.e_terminal - (tes.e_initial + k_term * soc_step)) > 1e-9:
        raise ValueError(
            "terminal stored energy is not on the SOC grid; pick soc_step "
            "dividing (e_terminal - e_initial)")
    idx_term = k_term - k_min
    if not 0 <= idx_term < n_states:
        raise InfeasibleStartError("terminal stored energy outside the grid range")

    stage_cost = np.full((T, n_actions), np.inf)
    grid_bound = 0.0
    for t in range(T):
        ok = (actions >= lo[t] - 1e-12) & (actions <= hi[t] + 1e-12)
        if not np.any(ok):
            raise InfeasibleStartError(f"hour {t}: no admissible action on the grid")
        q_sel = actions[ok]
        q_ch = problem.q_cool[t] + q_sel
        plr = q_ch / tes.q_ch_max
        cop = cop_values(plr, np.full_like(plr, problem.twb[t]), problem.cop_model)
        p_ch = np.where(q_ch > 0.0, q_ch / cop, 0.0)
        g = problem.p_base[t] + p_ch
        stage_cost[t, ok] = (g - problem.p_mean) ** 2
        slope = cop_plr_slope(plr, np.full_like(plr, problem.twb[t]), problem.cop_model)
        dpch = (cop - plr * slope) / (cop * cop)
        grid_bound += float(np.max(np.abs(2.0 * (g - problem.p_mean) * dpch))) \
            * action_step / 2.0

    shifts = np.arange(-m, m + 1) * ratio
    value = np.full(n_states, np.inf)
    value[idx_term] = 0.0
    policy = np.zeros((T, n_states), dtype=np.int32)

    for t in range(T - 1, -1, -1):
        table = np.full((n_actions, n_states), np.inf)
        for j, shift in enumerate(shifts):
            c = stage_cost[t, j]
            if not np.isfinite(c):
                continue
            if shift >= 0:
                hi_slice = n_states - shift
                if hi_slice > 0:
                    table[j, :hi_slice] = c + value[shift:]
            else:
                if n_states + shift > 0:
                    table[j, -shift:] = c + value[: n_states + shift]
        policy[t] = np.argmin(table, axis=0)
        value = table[policy[t], np.arange(n_states)]

    start_idx = -k_min
    if not np.isfinite(value[start_idx]):
        raise InfeasibleStartError(
            "terminal stored energy unreachable on the chosen grids")

    q = np.zeros(T)
    idx = start_idx
    for t in range(T):
        j = int(policy[t][idx])
        q[t] = actions[j]
        idx += shifts[j]

    schedule = StorageSchedule.from_rates(q, tes)
    _, _, p_ch = _power_arrays(q, problem)
    return OptimalSchedule(
        schedule=schedule,
        objective=objective(q, problem),
        p_ch=p_ch,
        generation=problem.p_base + p_ch,
        iterations=T,
        converged=True,
        grid_error_bound=grid_bound,
        message=f"dp grid: {n_states} states, {n_actions} actions",
    )
