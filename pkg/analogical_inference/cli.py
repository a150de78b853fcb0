"""Command-line entry point.

Examples:
    python -m analogical_inference solve --a 1 --b 2 --c 3 --q 1
    python -m analogical_inference counterexample --n 4 --model minimal --out report.json
    python -m analogical_inference verify --suite worst --q 2 --delta 0.1 --seed 7
    python -m analogical_inference predict --train train.csv --query query.csv --p 2,2 --q 2

Exit status is 0 on success, 1 when a verification fails and 2 on usage,
domain or input errors. ``ANALOGY_WORKERS`` sets the number of worker
processes for the exhaustive enumerations.
"""
import argparse
import logging
import sys
from dataclasses import dataclass, fields
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

from .boolean import BooleanModel, verify_ap_affine
from .bounds import Suite, run_suite
from .core import PowerProfile, Tolerance, analogy_holds, sol, solve_power
from .counterexample import algorithm1_lower_bound
from .errors import AnalogyError, UsageError
from .ingest import load_dataset, load_points
from .regression import ap_fit, predict_dataset
from .report import FORMATS, write_report

logger = logging.getLogger(__name__)

COMMANDS = ("solve", "power", "check", "predict", "fit", "counterexample", "verify", "boolean-ap")

REQUIRED = {
    "solve": ("a", "b", "c"),
    "power": ("a", "b", "c", "d"),
    "check": ("a", "b", "c", "d"),
    "predict": ("train", "query"),
    "fit": ("train",),
}

DEFAULT_ARITY = {"counterexample": 4, "boolean-ap": 3, "verify": 3}

# arity at which the counterexample is expected to falsify the claimed bound
FALSIFICATION_ARITY = 4


@dataclass(frozen=True)
class RunConfig:
    command: str
    profile: PowerProfile = PowerProfile((1.0,), 1.0)
    tolerance: Tolerance = Tolerance()
    seed: int = 0
    cap: Optional[int] = None
    train: Optional[str] = None
    query: Optional[str] = None
    out: Optional[str] = None
    format: str = "json"
    a: Optional[Tuple[float, ...]] = None
    b: Optional[Tuple[float, ...]] = None
    c: Optional[Tuple[float, ...]] = None
    d: Optional[Tuple[float, ...]] = None
    n: Optional[int] = None
    model: BooleanModel = BooleanModel.MINIMAL
    suite: Suite = Suite.WORST
    deltas: Tuple[float, ...] = (0.1,)
    trials: int = 200
    relaxed: bool = False
    audit: bool = False
    label: str = "y"
    weight: str = "weight"
    delimiter: Optional[str] = None
    workers: Optional[int] = None
    progress: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        missing = [name for name in REQUIRED.get(self.command, ()) if getattr(self, name) is None]
        if missing:
            raise UsageError(f"{self.command} requires {', '.join('--' + m for m in missing)}")
        if self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}")
        if self.cap is not None and self.cap < 1:
            raise UsageError(f"--cap must be positive, got {self.cap}")
        object.__setattr__(self, "model", BooleanModel(self.model))
        object.__setattr__(self, "suite", Suite(self.suite))

    @property
    def arity(self) -> int:
        return self.n if self.n is not None else DEFAULT_ARITY.get(self.command, 1)

    def profile_for(self, n: int) -> PowerProfile:
        """The profile, broadcasting a single exponent over ``n`` attributes."""
        if self.profile.n == n:
            return self.profile
        if self.profile.n == 1:
            return PowerProfile.uniform(n, self.profile.p[0], self.profile.q)
        raise UsageError(f"--p lists {self.profile.n} exponents for {n} attributes")


def _scalar(values: Tuple[float, ...], name: str) -> float:
    if len(values) != 1:
        raise UsageError(f"--{name} must be a single number, got {values}")
    return values[0]


def _run_solve(config: RunConfig) -> Tuple[int, Dict[str, Any], str]:
    a, b, c = (_scalar(getattr(config, k), k) for k in "abc")
    y = sol(a, b, c, config.profile.q, config.tolerance)
    report = {"a": a, "b": b, "c": c, "q": config.profile.q, "solution": y}
    return 0, report, "none" if y is None else format(y, ".17g")


def _run_power(config: RunConfig):
    a, b, c, d = (_scalar(getattr(config, k), k) for k in "abcd")
    p = solve_power(a, b, c, d)
    return 0, {"a": a, "b": b, "c": c, "d": d, "p": p}, format(p, ".17g")


def _run_check(config: RunConfig):
    profile = config.profile_for(len(config.a))
    holds = analogy_holds(config.a, config.b, config.c, config.d, profile, config.tolerance)
    report = {"a": config.a, "b": config.b, "c": config.c, "d": config.d,
              "p": profile.p, "holds": holds}
    return 0, report, str(holds).lower()


def _run_predict(config: RunConfig):
    train = load_dataset(config.train, config.label, config.weight, config.delimiter)
    queries, columns = load_points(config.query, config.label, config.weight, config.delimiter)
    if list(columns) != list(train.columns):
        raise UsageError(f"query columns {columns} differ from training columns {list(train.columns)}")
    profile = config.profile_for(train.n)
    predictions = predict_dataset(train, queries, profile, config.tolerance, config.cap, config.progress)
    rows = []
    for x, value, size, truncated in zip(queries, predictions.values, predictions.root_sizes,
                                         predictions.truncated):
        row = dict(zip(columns, x.tolist()))
        row.update({"value": value, "root_size": size, "truncated": truncated})
        rows.append(row)
    report = {"p": profile.p, "q": profile.q, "cap": config.cap, "queries": len(rows),
              "covered": predictions.covered, "coverage": predictions.coverage, "rows": rows}
    return 0, report, None


def _run_fit(config: RunConfig):
    train = load_dataset(config.train, config.label, config.weight, config.delimiter)
    result = ap_fit(train, config.profile_for(train.n))
    return 0, result, None


def _run_counterexample(config: RunConfig):
    report = algorithm1_lower_bound(config.arity, config.model, config.workers, config.audit, config.progress)
    expected = config.arity == FALSIFICATION_ARITY and config.model is BooleanModel.MINIMAL
    failed = (expected and not report.violated) or bool(report.small_subset_roots)
    if failed:
        logger.error(f"counterexample check failed: violated={report.violated}, "
                     f"small subset roots={report.small_subset_roots}")
    return int(failed), report, None


def _run_verify(config: RunConfig):
    reports = run_suite(config.suite, config.profile, config.deltas, config.seed, config.trials,
                        config.relaxed, config.arity, config.model, config.progress)
    failures = [r for r in reports if not r.verified]
    for r in failures:
        logger.error(f"{r.bound_kind} bound violated at delta={r.delta}: observed {float(r.observed):.6g} "
                     f"> bound {float(r.bound_value):.6g}")
    return int(bool(failures)), reports, None


def _run_boolean_ap(config: RunConfig):
    report = verify_ap_affine(config.arity, config.model, config.workers, config.progress)
    return int(not report.passed), report, None


HANDLERS: Dict[str, Callable[[RunConfig], Tuple[int, Any, Optional[str]]]] = {
    "solve": _run_solve,
    "power": _run_power,
    "check": _run_check,
    "predict": _run_predict,
    "fit": _run_fit,
    "counterexample": _run_counterexample,
    "verify": _run_verify,
    "boolean-ap": _run_boolean_ap,
}


def run_command(config: RunConfig) -> Tuple[int, Any]:
    """Dispatches a command; returns the exit status and the report object.

    Errors derived from AnalogyError propagate to the caller, which maps them
    to status 2.
    """
    status, report, _ = HANDLERS[config.command](config)
    return status, report


def _float_list(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=_float_list, default=None,
                        help="comma-separated attribute exponents (a single value is broadcast)")
    common.add_argument("--q", type=float, default=1.0, help="label exponent")
    common.add_argument("--tol-rel", type=float, default=1e-9, help="relative tolerance")
    common.add_argument("--tol-abs", type=float, default=1e-12, help="absolute tolerance")
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("--out", type=str, default=None, help="report path (stdout when omitted)")
    common.add_argument("--format", choices=FORMATS, default="json", help="report format")
    common.add_argument("--progress", action="store_true", help="show progress bars")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(prog="analogical_inference",
                                     description="Analogical proportions, regression and bound verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("solve", "power", "check"):
        cmd = sub.add_parser(name, parents=[common])
        for term in "abcd"[: 3 if name == "solve" else 4]:
            cmd.add_argument(f"--{term}", type=_float_list, required=True,
                             help=f"term {term} (comma-separated for vectors)")

    for name in ("predict", "fit"):
        cmd = sub.add_parser(name, parents=[common])
        cmd.add_argument("--train", type=str, required=True, help="labeled training file")
        if name == "predict":
            cmd.add_argument("--query", type=str, required=True, help="file of query points")
            cmd.add_argument("--cap", type=int, default=None, help="max root triples per query")
        cmd.add_argument("--label", type=str, default="y", help="label column name")
        cmd.add_argument("--weight", type=str, default="weight", help="weight column name, if present")
        cmd.add_argument("--delimiter", type=str, default=None, help="field delimiter (auto-detected)")

    for name in ("counterexample", "boolean-ap"):
        cmd = sub.add_parser(name, parents=[common])
        cmd.add_argument("--n", type=int, default=None, help="arity")
        cmd.add_argument("--model", choices=[m.value for m in BooleanModel], default="minimal")
        if name == "counterexample":
            cmd.add_argument("--audit", action="store_true", help="also scan samples with fewer than 3 points")

    cmd = sub.add_parser("verify", parents=[common])
    cmd.add_argument("--suite", choices=[s.value for s in Suite], default="worst")
    cmd.add_argument("--delta", type=float, default=None, help="perturbation size")
    cmd.add_argument("--deltas", type=_float_list, default=None, help="comma-separated sweep of delta values")
    cmd.add_argument("--trials", type=int, default=200, help="sampled checks per delta")
    cmd.add_argument("--relaxed", action="store_true", help="perturb only points the selection never uses")
    cmd.add_argument("--n", type=int, default=None, help="arity of the boolean suite")
    cmd.add_argument("--model", choices=[m.value for m in BooleanModel], default="minimal")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = vars(args)
    p = values.get("p") or ((1.0, 1.0) if args.command == "verify" else (1.0,))
    deltas = values.get("deltas")
    if deltas is None:
        deltas = (values["delta"],) if values.get("delta") is not None else (0.1,)
    known = {f.name for f in fields(RunConfig)}
    kwargs = {k: v for k, v in values.items() if k in known and v is not None}
    kwargs.update(
        profile=PowerProfile(p, args.q),
        tolerance=Tolerance(rel=args.tol_rel, abs=args.tol_abs),
        deltas=tuple(deltas),
    )
    return RunConfig(**kwargs)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format=f"{args.command}:%(levelname)s:%(message)s",
                        level=logging.DEBUG if args.verbose else logging.INFO)
    logger.info("*" * 10 + "INPUT CONFIG:" + "*" * 10)
    for key, value in vars(args).items():
        logger.info(f"{key}: {value}")

    try:
        config = config_from_args(args)
        status, report, summary = HANDLERS[config.command](config)
        if summary is not None:
            print(summary)
        if config.out is not None or summary is None:
            write_report(report, config.out, config.format, config.command)
    except AnalogyError as err:
        logger.debug("failure", exc_info=True)
        print(f"ERROR: {err}", file=sys.stderr)
        return 2
    return status


if __name__ == "__main__":
    sys.exit(main())
