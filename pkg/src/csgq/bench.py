"""Experiment runner and quality metrics (approximation ratio, number of optima)."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from statistics import fmean
from typing import Iterable, Sequence

from .algorithms import AlgorithmSpec, run
from .errors import CapacityError
from .exact import optimal_value
from .graph import ABS_TOL, WeightedGraph
from .solvers import Solver, SolverConfig

log = logging.getLogger(__name__)

METRICS = ("mean_ar", "no", "mean_time", "logical_vars", "feasibility_rate")


@dataclass
class ExperimentRecord:
    algorithm: str
    k: int | None
    solver: str
    seed: int
    n: int
    instance: str
    v_solution: float | None
    v_optimal: float | None
    ar: float | None
    optimal: bool
    feasible: bool
    wall_time_s: float
    logical_vars: int
    qubo_calls: int


FIELDNAMES = [f.name for f in fields(ExperimentRecord)]


def approximation_ratio(v_s: float, v_opt: float) -> float | None:
    """``v_s / v_opt``; 1 for a zero optimum matched exactly, ``None`` when undefined."""
    if v_opt > ABS_TOL:
        return v_s / v_opt
    if abs(v_s) <= ABS_TOL:
        return 1.0
    return None


def _instance_key(r: ExperimentRecord) -> tuple:
    return (r.algorithm, r.k, r.solver, r.instance)


def seed_averaged(records: Iterable[ExperimentRecord]) -> dict:
    """Per instance (and algorithm/solver): ``(n, mean feasible V, V*)``; mean is ``None`` without feasible runs."""
    grouped = defaultdict(list)
    for r in records:
        grouped[_instance_key(r)].append(r)
    out = {}
    for key, rows in grouped.items():
        vals = [r.v_solution for r in rows if r.feasible and r.v_solution is not None]
        v_opt = next((r.v_optimal for r in rows if r.v_optimal is not None), None)
        out[key] = (rows[0].n, fmean(vals) if vals else None, v_opt)
    return out


def count_optima(records: Iterable[ExperimentRecord]) -> int:
    """Instances whose seed-averaged value reaches the optimum."""
    return sum(
        1
        for _, v_mean, v_opt in seed_averaged(records).values()
        if v_mean is not None and v_opt is not None and abs(v_mean - v_opt) <= ABS_TOL
    )


def _mean_ar(records: Sequence[ExperimentRecord]) -> float | None:
    ars = []
    for _, v_mean, v_opt in seed_averaged(records).values():
        if v_mean is None or v_opt is None:
            continue
        ar = approximation_ratio(v_mean, v_opt)
        if ar is not None:
            ars.append(ar)
    return fmean(ars) if ars else None


def _metric(records: Sequence[ExperimentRecord], metric: str) -> float | None:
    if metric == "mean_ar":
        return _mean_ar(records)
    if metric == "no":
        return float(count_optima(records))
    if metric == "mean_time":
        return fmean(r.wall_time_s for r in records)
    if metric == "logical_vars":
        return fmean(r.logical_vars for r in records)
    if metric == "feasibility_rate":
        return sum(r.feasible for r in records) / len(records)
    raise ValueError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}")


def _group_label(r: ExperimentRecord, group_by: Sequence[str]) -> str:
    if not group_by:
        return "all"
    parts = []
    for col in group_by:
        v = getattr(r, col)
        parts.append("" if v is None else str(v))
    return "|".join(parts)


def report(records: Sequence[ExperimentRecord], group_by: Sequence[str] = ("n",), metric: str = "mean_ar",
           two_stage: bool = False) -> list[dict]:
    """Aggregate ``metric`` per group, one row ``{"group", metric}`` per group.

    With ``two_stage`` the metric is first computed per n inside each group and
    then averaged over n, so every problem size weighs the same.  Rows are
    ordered by group key, making the output independent of record order.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}")
    for col in group_by:
        if col not in FIELDNAMES:
            raise ValueError(f"cannot group by unknown column {col!r}")
    groups = defaultdict(list)
    for r in records:
        key = tuple(_sort_key(getattr(r, col)) for col in group_by)
        groups[key, _group_label(r, group_by)].append(r)
    rows = []
    for (_, label), rs in sorted(groups.items()):
        if two_stage:
            per_n = defaultdict(list)
            for r in rs:
                per_n[r.n].append(r)
            stage = [_metric(sub, metric) for _, sub in sorted(per_n.items())]
            stage = [v for v in stage if v is not None]
            val = fmean(stage) if stage else None
        else:
            val = _metric(rs, metric)
        rows.append({"group": label, metric: val})
    return rows


def _sort_key(v):
    # None sorts before any value
    return (v is not None, v if v is not None else 0)


# --- running -----------------------------------------------------------------------

def _run_instance(args) -> list[ExperimentRecord]:
    instance, graph, specs, solver, cfg, seeds = args
    try:
        v_opt = optimal_value(graph)
    except CapacityError as exc:
        log.error("%s: %s", instance, exc)
        v_opt = None
    rows = []
    for spec in specs:
        if spec.mode == "iterative" and spec.k > graph.n:
            continue
        for seed in seeds:
            solve = Solver(solver, replace(cfg, seed=seed))
            logical = spec.logical_vars(graph.n)
            try:
                res = run(graph, spec, solve)
            except CapacityError as exc:
                log.error("%s %s seed=%d: %s", instance, spec.name, seed, exc)
                rows.append(ExperimentRecord(spec.name, spec.k, solver, seed, graph.n, instance, None, v_opt,
                                             None, False, False, 0.0, logical, 0))
                continue
            ar = None
            optimal = False
            if v_opt is not None and res.feasible:
                # per-record AR only for a positive optimum; aggregates handle V* = 0
                if v_opt > ABS_TOL:
                    ar = res.value / v_opt
                optimal = abs(res.value - v_opt) <= ABS_TOL
            rows.append(ExperimentRecord(spec.name, spec.k, solver, seed, graph.n, instance, res.value, v_opt, ar,
                                         optimal, res.feasible, res.wall_time, logical, res.qubo_calls))
    return rows


def run_experiment(dataset: Sequence[tuple[str, WeightedGraph]], specs: Sequence[AlgorithmSpec],
                   solver: str = "tabu", cfg: SolverConfig | None = None, seeds: Sequence[int] = (0,),
                   out=None, jobs: int = 1) -> list[ExperimentRecord]:
    """Run every (instance, spec, seed) combination.

    Iterative specs with ``k > n`` are skipped for that instance.  When ``out``
    is given (a path or text stream) rows are written as each instance finishes,
    always in dataset order.
    """
    cfg = cfg or SolverConfig()
    tasks = [(inst, g, list(specs), solver, cfg, list(seeds)) for inst, g in dataset]
    writer = None
    handle = None
    if out is not None:
        handle = open(out, "w", newline="") if isinstance(out, (str, Path)) else out
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(FIELDNAMES)
    records = []
    try:
        if jobs > 1:
            pool = ProcessPoolExecutor(max_workers=jobs)
            results = pool.map(_run_instance, tasks)
        else:
            pool = None
            results = map(_run_instance, tasks)
        for rows in results:
            records.extend(rows)
            if writer is not None:
                writer.writerows(_csv_row(r) for r in rows)
                handle.flush()
        if pool is not None:
            pool.shutdown()
    finally:
        if handle is not None and isinstance(out, (str, Path)):
            handle.close()
    return records


# --- serialization ---------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_row(r: ExperimentRecord) -> list[str]:
    return [_fmt(getattr(r, f)) for f in FIELDNAMES]


def records_to_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDNAMES)
    w.writerows(_csv_row(r) for r in records)
    return buf.getvalue()


def _opt_float(s: str):
    return None if s == "" else float(s)


def _opt_int(s: str):
    return None if s == "" else int(s)


def read_records(path) -> list[ExperimentRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != FIELDNAMES:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            ExperimentRecord(
                algorithm=row["algorithm"],
                k=_opt_int(row["k"]),
                solver=row["solver"],
                seed=int(row["seed"]),
                n=int(row["n"]),
                instance=row["instance"],
                v_solution=_opt_float(row["v_solution"]),
                v_optimal=_opt_float(row["v_optimal"]),
                ar=_opt_float(row["ar"]),
                optimal=row["optimal"] == "1",
                feasible=row["feasible"] == "1",
                wall_time_s=float(row["wall_time_s"]),
                logical_vars=int(row["logical_vars"]),
                qubo_calls=int(row["qubo_calls"]),
            )
            for row in reader
        ]


def records_to_json(records: Iterable[ExperimentRecord]) -> str:
    return json.dumps([asdict(r) for r in records], indent=1)


def report_to_csv(rows: Sequence[dict], metric: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["group", metric])
    for row in rows:
        v = row[metric]
        w.writerow([row["group"], "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(v)])
    return buf.getvalue()


def report_to_json(rows: Sequence[dict], metric: str, group_by: Sequence[str], two_stage: bool) -> str:
    return json.dumps({"metric": metric, "group_by": list(group_by), "two_stage": two_stage, "rows": list(rows)},
                      indent=1)
