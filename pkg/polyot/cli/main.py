import argparse
import os
import sys
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Literal

import anyio
import pydantic
from loguru import logger

from .._base import BaseModel
from ..baselines import FwConfig, coot_am, frank_wolfe, fw_fixed_step
from ..diagnostics import format_table, run_checks
from ..exceptions import (
    ConfigException,
    DataFileException,
    NumericalException,
    PolyOTException,
    SetupException,
)
from ..manifold import (
    CouplingManifold,
    ProductManifold,
    make_manifold,
    make_masked_manifold,
    make_product_manifold,
)
from ..marginal import Marginal
from ..objectives import (
    CootData,
    LinearCost,
    Objective,
    RobustMaxCost,
    coot_square,
    gw_frobenius,
)
from ..sinkhorn import SinkhornConfig
from ..solvers import SOLVERS, ProgressLogger, SolveResult, SolverConfig
from ..utils import as_generator
from .generate import ProblemKind, generate_problem, write_problem
from .io import read_marginal, read_mask, read_matrix, write_summary, write_trace

OUTPUT_DIR_ENV = "POLYOT_OUTPUT_DIR"

SolverName = Literal["rgd", "rcg", "rtr", "fw", "fw1", "am"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_SETUP = 2
EXIT_NUMERICAL = 3


def default_output_dir() -> Path:
    return Path(os.getenv(OUTPUT_DIR_ENV, "."))


class ExperimentSpec(BaseModel):
    problem: ProblemKind
    solver: SolverName
    data_dir: Path
    output: Path
    """trace CSV, or the directory of ``trace_<seed>.csv`` files when ``repeat > 1``"""
    mask: Path | None = None
    seed: int = 0
    temperature: float = 0.0
    solver_cfg: SolverConfig = SolverConfig()
    fw: FwConfig = FwConfig()
    sinkhorn: SinkhornConfig = SinkhornConfig()
    timing: bool = True
    repeat: int = 1
    jobs: int = 1

    @pydantic.model_validator(mode="after")
    def _check(self):
        if (self.solver == "am") != (self.problem == "coot"):
            if self.solver == "am":
                msg = f"solver am only solves coot problems, not {self.problem}"
            else:
                msg = f"coot couples two plans; use rgd, rcg, rtr or am, not {self.solver}"
            raise ConfigException(msg, {"problem": self.problem, "solver": self.solver})
        if self.mask is not None and (self.problem == "coot" or self.solver not in SOLVERS):
            raise ConfigException(
                "support masks apply to single-plan problems with rgd, rcg or rtr",
                {"problem": self.problem, "solver": self.solver},
            )
        if self.repeat < 1 or self.jobs < 1:
            raise ConfigException(
                "repeat and jobs must be >= 1", {"repeat": self.repeat, "jobs": self.jobs}
            )
        if not self.data_dir.is_dir():
            raise DataFileException(
                f"data directory {self.data_dir} does not exist", {"path": str(self.data_dir)}
            )
        return self

    def trace_path(self, seed: int) -> Path:
        if self.repeat == 1:
            return self.output
        return self.output / f"trace_{seed}.csv"


@dataclass
class LoadedProblem:
    manifold: CouplingManifold | ProductManifold
    objective: Objective
    mu1: Marginal
    mu2: Marginal
    data: CootData | None = None


def load_problem(spec: ExperimentSpec) -> LoadedProblem:
    d = spec.data_dir
    mu1, mu2 = read_marginal(d / "mu1.csv"), read_marginal(d / "mu2.csv")
    if spec.problem == "coot":
        data = CootData(
            X=read_matrix(d / "X.csv"),
            Z=read_matrix(d / "Z.csv"),
            mu1=mu1,
            mu2=mu2,
            nu1=read_marginal(d / "nu1.csv"),
            nu2=read_marginal(d / "nu2.csv"),
        )
        manifold = make_product_manifold(
            [
                make_manifold(mu1, mu2, spec.sinkhorn),
                make_manifold(data.nu1, data.nu2, spec.sinkhorn),
            ]
        )
        return LoadedProblem(manifold, coot_square(data), mu1, mu2, data)

    if spec.problem == "linear":
        objective = LinearCost(read_matrix(d / "C.csv"))
    elif spec.problem == "gw":
        objective = gw_frobenius(read_matrix(d / "S1.csv"), read_matrix(d / "S2.csv"))
    else:
        paths = sorted(d.glob("C[0-9]*.csv"), key=lambda p: int(p.stem[1:]))
        if not paths:
            raise DataFileException(f"no robust cost files C<k>.csv in {d}", {"path": str(d)})
        objective = RobustMaxCost([read_matrix(p) for p in paths], spec.temperature)
    if spec.mask is not None:
        manifold = make_masked_manifold(mu1, mu2, read_mask(spec.mask), spec.sinkhorn)
    else:
        manifold = make_manifold(mu1, mu2, spec.sinkhorn)
    return LoadedProblem(manifold, objective, mu1, mu2)


def run_experiment(spec: ExperimentSpec, seed: int) -> SolveResult:
    problem = load_problem(spec)
    if spec.solver in SOLVERS:
        x0 = problem.manifold.random_point(as_generator(seed))
        solver = SOLVERS[spec.solver](spec.solver_cfg, ProgressLogger())
        return solver.solve(problem.manifold, problem.objective, x0)
    fw_cfg = spec.fw.model_copy(update={"sinkhorn": spec.sinkhorn})
    if spec.solver == "fw":
        return frank_wolfe(problem.objective, problem.mu1, problem.mu2, cfg=fw_cfg)
    if spec.solver == "fw1":
        return fw_fixed_step(problem.objective, problem.mu1, problem.mu2, cfg=fw_cfg)
    return coot_am(problem.data, cfg=fw_cfg)


def _solve_and_write(spec: ExperimentSpec, seed: int) -> SolveResult:
    result = run_experiment(spec, seed)
    path = spec.trace_path(seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_trace(path, result, timing=spec.timing)
    write_summary(
        path.with_suffix(".json"), result, problem=spec.problem, seed=seed, trace=str(path)
    )
    return result


async def _run_repeats(spec: ExperimentSpec) -> list[SolveResult]:
    limiter = anyio.CapacityLimiter(spec.jobs)
    results: dict[int, SolveResult] = {}
    errors: list[PolyOTException] = []

    async def _one(seed: int):
        try:
            results[seed] = await anyio.to_thread.run_sync(
                partial(_solve_and_write, spec, seed), limiter=limiter
            )
        except PolyOTException as e:
            errors.append(e)

    async with anyio.create_task_group() as tg:
        for seed in range(spec.seed, spec.seed + spec.repeat):
            tg.start_soon(_one, seed)
    if errors:
        raise errors[0]
    return [results[s] for s in sorted(results)]


def _report(seed: int, result: SolveResult):
    print(
        f"seed={seed} solver={result.solver} status={result.status.value} "
        f"iterations={result.n_iter} cost={result.cost:.17g}"
    )


def cmd_solve(spec: ExperimentSpec) -> int:
    try:
        if spec.repeat == 1:
            _report(spec.seed, _solve_and_write(spec, spec.seed))
        else:
            seeds = range(spec.seed, spec.seed + spec.repeat)
            for seed, result in zip(seeds, anyio.run(_run_repeats, spec)):
                _report(seed, result)
    except SetupException as e:
        logger.error(str(e))
        print(f"setup error: {e.msg}", file=sys.stderr)
        return EXIT_SETUP
    except NumericalException as e:
        logger.error(str(e))
        print(f"numerical failure: {e.msg}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_gen(kind: str, dims: list[int], seed: int, out_dir: Path) -> int:
    try:
        paths = write_problem(out_dir, generate_problem(kind, dims, seed))
    except SetupException as e:
        print(f"setup error: {e.msg}", file=sys.stderr)
        return EXIT_SETUP
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_check(dims: list[int], seed: int, hessian_fault: float = 0.0) -> int:
    m, n = dims
    results = run_checks(m, n, seed, hessian_fault=hessian_fault)
    print(format_table(results))
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(
            f"FAILED {r.name}: measured {r.value:.6e}, threshold {r.threshold:.1e}",
            file=sys.stderr,
        )
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _setup_logging(verbose: bool, quiet: bool):
    logger.remove()
    level = "DEBUG" if verbose else "WARNING" if quiet else "INFO"
    logger.add(sys.stderr, level=level)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyot", description="Riemannian solvers for non-linear optimal transport."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run a solver and write its trace")
    solve.add_argument("--problem", required=True, choices=["linear", "gw", "coot", "robust"])
    solve.add_argument("--solver", required=True, choices=["rgd", "rcg", "rtr", "fw", "fw1", "am"])
    solve.add_argument("--data", required=True, type=Path, help="directory written by `gen`")
    solve.add_argument("--mask", type=Path, help="0/1 support grid, one row per line")
    solve.add_argument("--out", type=Path, help="trace CSV (a directory with --repeat)")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--temperature", type=float, default=0.0, help="robust smoothing")
    solve.add_argument("--max-iter", type=int)
    solve.add_argument("--max-time", type=float, help="seconds")
    solve.add_argument("--grad-tol", type=float)
    solve.add_argument("--cg-variant", choices=["HS", "FR"])
    solve.add_argument("--epsilon", type=float, help="entropic LMO regularization")
    solve.add_argument("--steps", choices=["open-loop", "fixed-1", "exact"])
    solve.add_argument("--sinkhorn-tol", type=float)
    solve.add_argument("--no-timing", action="store_true", help="leave elapsed_sec empty")
    solve.add_argument("--repeat", type=int, default=1)
    solve.add_argument("--jobs", type=int, default=1)

    gen = sub.add_parser("gen", help="write a random problem instance")
    gen.add_argument("kind", choices=["linear", "gw", "coot", "robust"])
    gen.add_argument("--dims", type=int, nargs="+", required=True, help="m n [d1 d2]")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path)

    check = sub.add_parser("check", help="run the geometry self-check battery")
    check.add_argument("--dims", type=int, nargs=2, default=[4, 5])
    check.add_argument("--seed", type=int, default=0)
    check.add_argument(
        "--inject-hessian-fault", action="store_true", help="perturb the Hessian by 1%%"
    )
    return parser


def _overrides(args: argparse.Namespace, mapping: dict[str, str]) -> dict:
    values = {key: getattr(args, attr) for key, attr in mapping.items()}
    return {key: value for key, value in values.items() if value is not None}


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    solver_cfg = SolverConfig(
        **_overrides(
            args,
            {
                "max_iter": "max_iter",
                "max_time_sec": "max_time",
                "grad_tol": "grad_tol",
                "cg_variant": "cg_variant",
            },
        )
    )
    fw = FwConfig(
        **_overrides(
            args,
            {
                "epsilon": "epsilon",
                "steps": "steps",
                "max_iter": "max_iter",
                "max_time_sec": "max_time",
            },
        )
    )
    sinkhorn = SinkhornConfig(**_overrides(args, {"tol": "sinkhorn_tol"}))
    if args.out is not None:
        output = args.out
    elif args.repeat > 1:
        output = default_output_dir()
    else:
        output = default_output_dir() / "trace.csv"
    return ExperimentSpec(
        problem=args.problem,
        solver=args.solver,
        data_dir=args.data,
        output=output,
        mask=args.mask,
        seed=args.seed,
        temperature=args.temperature,
        solver_cfg=solver_cfg,
        fw=fw,
        sinkhorn=sinkhorn,
        timing=not args.no_timing,
        repeat=args.repeat,
        jobs=args.jobs,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose, args.quiet)
    if args.command == "gen":
        out = args.out or default_output_dir() / args.kind
        return cmd_gen(args.kind, args.dims, args.seed, out)
    if args.command == "check":
        return cmd_check(args.dims, args.seed, 0.01 if args.inject_hessian_fault else 0.0)
    try:
        spec = spec_from_args(args)
    except SetupException as e:
        print(f"setup error: {e.msg}", file=sys.stderr)
        return EXIT_SETUP
    except pydantic.ValidationError as e:
        print(f"setup error: {e}", file=sys.stderr)
        return EXIT_SETUP
    return cmd_solve(spec)


if __name__ == "__main__":
    sys.exit(main())
