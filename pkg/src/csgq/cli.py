"""Command-line interface: ``csgq {gen,solve,exact,bench,report,qubo}``.

Any long option can also come from ``--config FILE``, a plain ``key = value``
file (``#`` comments allowed).  Keys are option names without the leading
dashes; flags given on the command line win over the file.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
from pathlib import Path

from . import bench
from .algorithms import ALGORITHMS, AlgorithmSpec, run
from .errors import CSGError
from .exact import optimal_partition
from .graph import DatasetConfig, generate_dataset, parse_distribution, read_dataset, read_graph, write_dataset
from .qubo import KINDS, build, penalty_bound
from .solvers import SOLVERS, Solver, SolverConfig

log = logging.getLogger("csgq")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from None


def _solver_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", choices=sorted(SOLVERS), default="tabu")
    p.add_argument("--reads", type=int, default=100, help="samples per QUBO call (default 100)")
    p.add_argument("--sweeps", type=int, help="SA sweeps per read (default 10*m)")
    p.add_argument("--tenure", type=int, help="tabu tenure (default min(20, m))")
    p.add_argument("--max-stall", type=int, help="tabu non-improving moves before restart (default 50*m)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csgq", description="Coalition structure generation via QUBO encodings.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("--config", type=Path, help="key = value file supplying default flags")
        return p

    p = add("gen", help="generate a synthetic dataset")
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--n-max", type=int, default=28)
    p.add_argument("--step", type=int, default=2)
    p.add_argument("--per-n", type=int, default=20)
    p.add_argument("--dist", default="uniform:-10:10", help="uniform:LO:HI or normal:MEAN:STD")
    p.add_argument("--int", dest="integer", action=argparse.BooleanOptionalAction, default=True,
                   help="round weights to integers (default on)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--force", action="store_true", help="overwrite an existing non-empty directory")

    p = add("solve", help="run one algorithm on one graph")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--algo", choices=sorted(ALGORITHMS), default="gcsq")
    p.add_argument("--mode", choices=["oneshot", "iter"])
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int, default=0)
    _solver_options(p)
    p.add_argument("--trace", action="store_true", help="include per-step splits in the output")

    p = add("exact", help="optimal coalition structure by subset dynamic programming")
    p.add_argument("--graph", type=Path, required=True)

    p = add("qubo", help="print the QUBO of a formulation as text")
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--formulation", choices=KINDS, required=True)
    p.add_argument("--slots", type=int)

    p = add("bench", help="run an experiment sweep and write records CSV")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--algos", default="gcsq,kochenberger,zens,nsplit,rqubo",
                   help="comma list of gcsq, <algo> (one-shot) and <algo>-iter (expanded over --k-list)")
    p.add_argument("--k-list", type=_int_list, default=[4])
    p.add_argument("--seeds", type=int, default=10, help="number of seeds")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    _solver_options(p)
    p.add_argument("--out", type=Path, help="records CSV (default: standard output)")
    p.add_argument("--json", type=Path, help="also write records as JSON")
    p.add_argument("--jobs", type=int, default=1)

    p = add("report", help="aggregate a records CSV")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--metric", choices=bench.METRICS, default="mean_ar")
    p.add_argument("--group-by", default="n", help="comma list of record columns")
    p.add_argument("--two-stage", action="store_true", help="average per n first, then over n")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    return parser


def _config_argv(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Splice ``--config`` contents in front of the explicit flags so the latter win."""
    path = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif a.startswith("--config="):
            path = a.split("=", 1)[1]
    command = next((a for a in argv if a in COMMANDS), None)
    if path is None or command is None:
        return argv
    subparser = parser._subparsers._group_actions[0].choices[command]
    options = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            options[opt] = action
    extra = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        parser.error(f"cannot read config {path}: {exc.strerror}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.error(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        opt = "--" + key.replace("_", "-")
        action = options.get(opt)
        if action is None or key == "config":
            parser.error(f"{path}:{lineno}: unknown option {key!r} for '{command}'")
        if action.nargs == 0:
            truthy = val.lower() in ("1", "true", "yes", "on")
            if isinstance(action, argparse.BooleanOptionalAction):
                extra.append(opt if truthy else "--no-" + opt[2:])
            elif truthy:
                extra.append(opt)
        else:
            extra.extend([opt, val])
    idx = argv.index(command) + 1
    return argv[:idx] + extra + argv[idx:]


def _solver_config(args, seed: int) -> SolverConfig:
    return SolverConfig(seed=seed, num_reads=args.reads, sweeps=args.sweeps, tenure=args.tenure,
                        max_stall=args.max_stall)


def _spec_from_flags(parser, algo: str, mode: str | None, k: int | None) -> AlgorithmSpec:
    formulation = ALGORITHMS[algo]
    if algo == "gcsq":
        if mode == "oneshot":
            parser.error("gcsq is iterative; --mode oneshot is not allowed")
        if k not in (None, 2):
            parser.error("gcsq always splits in two; --k must be 2")
        return AlgorithmSpec.gcsq()
    mode = mode or "oneshot"
    if mode == "oneshot":
        if k is not None:
            parser.error("--k only applies to --mode iter")
        return AlgorithmSpec(formulation, "one_shot")
    k = 4 if k is None else k
    if k < 2:
        parser.error("--k must be >= 2")
    return AlgorithmSpec(formulation, "iterative", k)


def _bench_specs(parser, algos: str, k_list: list[int]) -> list[AlgorithmSpec]:
    specs = []
    for name in (a.strip() for a in algos.split(",")):
        if not name:
            continue
        iterative = name.endswith("-iter")
        base = name[:-5] if iterative else name
        if base not in ALGORITHMS or (base == "gcsq" and iterative):
            parser.error(f"unknown algorithm {name!r}")
        if base == "gcsq":
            specs.append(AlgorithmSpec.gcsq())
        elif iterative:
            if not k_list or min(k_list) < 2:
                parser.error("--k-list values must be >= 2")
            specs.extend(AlgorithmSpec(ALGORITHMS[base], "iterative", k) for k in k_list)
        else:
            specs.append(AlgorithmSpec(ALGORITHMS[base], "one_shot"))
    if not specs:
        parser.error("no algorithms selected")
    return specs


def cmd_gen(args, parser) -> int:
    if args.n_min < 2 or args.n_max < args.n_min or args.step < 1:
        parser.error("need 2 <= n-min <= n-max and step >= 1")
    cfg = DatasetConfig(
        n_values=tuple(range(args.n_min, args.n_max + 1, args.step)),
        graphs_per_n=args.per_n,
        distribution=parse_distribution(args.dist),
        integer_weights=args.integer,
        seed=args.seed,
    )
    out: Path = args.out
    if out.exists() and any(out.iterdir()):
        if not args.force:
            log.error("%s exists and is not empty; pass --force to overwrite", out)
            return 1
        for sub in out.glob("n[0-9]*"):
            if sub.is_dir():
                shutil.rmtree(sub)
    paths = write_dataset(generate_dataset(cfg), out, cfg)
    log.info("wrote %d graphs to %s", len(paths), out)
    return 0


def cmd_solve(args, parser) -> int:
    spec = _spec_from_flags(parser, args.algo, args.mode, args.k)
    graph = read_graph(args.graph)
    result = run(graph, spec, Solver(args.solver, _solver_config(args, args.seed)), trace=args.trace)
    out = {
        "graph": str(args.graph),
        "n": graph.n,
        "algorithm": spec.name,
        "mode": "iter" if spec.mode == "iterative" else "oneshot",
        "k": spec.k,
        "solver": args.solver,
        "seed": args.seed,
        "reads": args.reads,
        **result.to_dict(),
    }
    if args.trace:
        out["steps"] = [
            {"coalition": list(s.coalition), "num_vars": s.qubo.num_vars,
             "parts": s.parts.to_list() if s.parts is not None else None, "cut": s.cut, "accepted": s.accepted}
            for s in result.steps
        ]
    print(json.dumps(out))
    return 0


def cmd_exact(args, parser) -> int:
    graph = read_graph(args.graph)
    cs, val = optimal_partition(graph)
    print(json.dumps({"graph": str(args.graph), "n": graph.n, "structure": cs.to_list(), "value": val}))
    return 0


def cmd_qubo(args, parser) -> int:
    graph = read_graph(args.graph)
    q, _ = build(args.formulation, graph, args.slots, penalty_bound(graph))
    sys.stdout.write(q.to_text())
    return 0


def cmd_bench(args, parser) -> int:
    specs = _bench_specs(parser, args.algos, args.k_list)
    if args.seeds < 1:
        parser.error("--seeds must be >= 1")
    dataset = read_dataset(args.dataset)
    if not dataset:
        log.error("no graphs found under %s", args.dataset)
        return 1
    seeds = range(args.seed, args.seed + args.seeds)
    out = args.out if args.out is not None else sys.stdout
    records = bench.run_experiment(dataset, specs, args.solver, _solver_config(args, args.seed), seeds,
                                   out=out, jobs=args.jobs)
    if args.json is not None:
        args.json.write_text(bench.records_to_json(records))
    failed = sum(1 for r in records if r.v_solution is None or r.v_optimal is None)
    if failed:
        log.error("%d record(s) hit a capacity limit", failed)
        return 1
    return 0


def cmd_report(args, parser) -> int:
    records = bench.read_records(args.input)
    group_by = [c.strip() for c in args.group_by.split(",") if c.strip()]
    try:
        rows = bench.report(records, group_by, args.metric, two_stage=args.two_stage)
    except ValueError as exc:
        parser.error(str(exc))
    if args.format == "csv":
        sys.stdout.write(bench.report_to_csv(rows, args.metric))
    else:
        print(bench.report_to_json(rows, args.metric, group_by, args.two_stage))
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "exact": cmd_exact,
    "qubo": cmd_qubo,
    "bench": cmd_bench,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_config_argv(parser, argv))
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    root = logging.getLogger("csgq")
    root.handlers[:] = [handler]
    root.propagate = False
    root.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args, parser)
    except (CSGError, ValueError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
