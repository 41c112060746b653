"""Command-line front end.

Problem definitions are JSON documents (nested row-major arrays); solver and
verification commands emit CSV iterate traces plus key:value summary reports.

Exit codes (stable contract):
    0  success
    1  domain negative result (non-stabilizer, non-convergence)
    2  validation error (malformed document, bad shapes, bad flags)
    3  numerical failure (singular operator, step collapse, overflow)
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidInput,
    MaxIterExceeded,
    NotStabilizing,
    Overflow,
    ParseError,
    SingularOperator,
    StepCollapse,
    UnsupportedModel,
    ValidationError,
)
from .lyapunov import is_stabilizer
from .optimize import (
    DescentReport,
    FlowConfig,
    OptimizerConfig,
    check_certificates,
    gradient_descent,
    gradient_flow,
)
from .simulate import SimConfig, estimate_cost, mean_square_decay
from .slq import (
    CostWeights,
    Gain,
    SystemModel,
    constants,
    cost,
    riccati_policy_iteration,
)
from .verify import run_property_suite

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

TRACE_HEADER = "iter,cost,grad_norm_fro,step_size,rel_error"

_MATRIX_FIELDS = ("a", "b", "c", "d", "q", "r", "sigma0", "k0")


@dataclass
class ProblemDocument:
    """Validated problem definition parsed from a JSON document."""

    n: int
    m: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    q: np.ndarray
    r: np.ndarray
    sigma0: np.ndarray
    k0: np.ndarray
    optimizer: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)

    def model(self) -> SystemModel:
        return SystemModel(a=self.a, b=self.b, c=self.c, d=self.d, sigma0=self.sigma0)

    def weights(self) -> CostWeights:
        return CostWeights(q=self.q, r=self.r)

    def to_dict(self) -> dict:
        out = {"n": self.n, "m": self.m}
        for name in _MATRIX_FIELDS:
            out[name] = getattr(self, name).tolist()
        if self.optimizer:
            out["optimizer"] = self.optimizer
        if self.simulation:
            out["simulation"] = self.simulation
        return out


def _shape_of(name: str, n: int, m: int) -> tuple[int, int]:
    return {
        "a": (n, n),
        "b": (n, m),
        "c": (n, n),
        "d": (n, m),
        "q": (n, n),
        "r": (m, m),
        "sigma0": (n, n),
        "k0": (m, n),
    }[name]


def parse_problem_dict(raw: dict) -> ProblemDocument:
    for key in ("n", "m"):
        if key not in raw or not isinstance(raw[key], int) or raw[key] < 1:
            raise ValidationError(f"{key}: missing or not a positive integer")
    n, m = raw["n"], raw["m"]
    mats = {}
    for name in _MATRIX_FIELDS:
        if name not in raw:
            raise ValidationError(f"{name}: missing")
        try:
            arr = np.array(raw[name], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{name}: not a numeric array ({exc})") from exc
        want = _shape_of(name, n, m)
        if arr.shape != want:
            raise ValidationError(f"{name}: shape {arr.shape} does not match declared {want}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"{name}: non-finite entries")
        mats[name] = arr
    for name in ("q", "r", "sigma0"):
        arr = mats[name]
        if np.abs(arr - arr.T).max() > 1e-12 * (1.0 + np.abs(arr).max()):
            raise ValidationError(f"{name}: not symmetric")
        if np.linalg.eigvalsh(0.5 * (arr + arr.T))[0] <= 0:
            raise ValidationError(f"{name} not positive-definite")
    doc = ProblemDocument(
        n=n,
        m=m,
        optimizer=raw.get("optimizer", {}),
        simulation=raw.get("simulation", {}),
        **mats,
    )
    # Constructors re-validate; surface their complaints as ValidationError.
    try:
        doc.model()
        doc.weights()
    except InvalidInput as exc:
        raise ValidationError(str(exc)) from exc
    return doc


def parse_problem(path: str) -> ProblemDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: top level must be an object")
    return parse_problem_dict(raw)


def write_problem(doc: ProblemDocument, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc.to_dict(), fh, indent=2)
        fh.write("\n")


def bundled_benchmark() -> ProblemDocument:
    """The packaged 2-state / 1-input benchmark problem."""
    text = importlib.resources.files("slqpg.data").joinpath("benchmark2d.json").read_text()
    return parse_problem_dict(json.loads(text))


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.16e}"


def write_trace(report: DescentReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(TRACE_HEADER + "\n")
        for rec in report.trace:
            fh.write(
                f"{rec.iter},{_fmt(rec.cost)},{_fmt(rec.grad_norm)},"
                f"{_fmt(rec.step)},{_fmt(rec.rel_error)}\n"
            )


def _report_lines(pairs: list[tuple[str, object]]) -> str:
    lines = []
    for key, value in pairs:
        if isinstance(value, float):
            value = f"{value:.10g}"
        elif isinstance(value, np.ndarray):
            value = json.dumps(value.tolist())
        lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def _write_report(path: str | None, text: str) -> None:
    print(text, end="")
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _optimizer_config(doc: ProblemDocument, args, l_smooth: float | None) -> OptimizerConfig:
    opts = dict(doc.optimizer)
    mode = {"bb": "barzilai_borwein", "fixed": "fixed", "two-over-l": "two_over_L"}[args.step]
    return OptimizerConfig(
        step_mode=mode,
        alpha=args.alpha if args.alpha is not None else opts.get("alpha"),
        gamma=args.gamma if args.gamma is not None else opts.get("gamma", 0.5),
        tol=args.tol if args.tol is not None else opts.get("tol", 1e-3),
        max_iter=args.max_iter if args.max_iter is not None else opts.get("max_iter", 500),
        alpha0=args.alpha0 if args.alpha0 is not None else opts.get("alpha0"),
        alpha_max=args.alpha_max if args.alpha_max is not None else opts.get("alpha_max", 1e3),
        l_smooth=l_smooth,
    )


def cmd_check(args) -> int:
    doc = parse_problem(args.problem)
    check = is_stabilizer(doc.model(), doc.k0)
    if check:
        print("k0: mean-square stabilizing")
        return EXIT_OK
    suffix = " (marginal)" if check.marginal else ""
    print(f"k0: not mean-square stabilizing{suffix}")
    return EXIT_DOMAIN


def cmd_constants(args) -> int:
    doc = parse_problem(args.problem)
    model, weights = doc.model(), doc.weights()
    gain = Gain.verify(model, doc.k0)
    consts = constants(model, weights, gain)
    text = _report_lines(
        [
            ("anchor_cost", f"{consts.anchor_cost:.6g}"),
            ("l_smooth", f"{consts.l_smooth:.6g}"),
            ("xi", f"{consts.xi:.6g}"),
            ("mu_tilde", f"{consts.mu_tilde:.6g}"),
            ("mu_pl", f"{consts.mu_pl:.6g}"),
            ("gain_bound", f"{consts.gain_bound:.6g}"),
        ]
    )
    _write_report(args.report, text)
    return EXIT_OK


def cmd_oracle(args) -> int:
    doc = parse_problem(args.problem)
    model, weights = doc.model(), doc.weights()
    gain = Gain.verify(model, doc.k0)
    sol = riccati_policy_iteration(model, weights, gain, tol=args.tol)
    text = _report_lines(
        [
            ("k_star", sol.k_star.k),
            ("p_star", sol.p_star),
            ("cost_star", sol.cost_star),
            ("grad_norm", sol.grad_norm),
        ]
    )
    _write_report(args.report, text)
    return EXIT_OK


def _run_summary(report: DescentReport, violations: list[str]) -> str:
    final = report.final
    pairs = [
        ("converged", report.converged),
        ("iterations", report.trace[-1].iter),
        ("final_k", final.k_star.k),
        ("final_p", final.p_star),
        ("final_cost", final.cost_star),
        ("final_grad_norm", final.grad_norm),
        ("certificate_violations", json.dumps(violations)),
    ]
    return _report_lines(pairs)


def cmd_descend(args) -> int:
    doc = parse_problem(args.problem)
    model, weights = doc.model(), doc.weights()
    gain = Gain.verify(model, doc.k0)
    consts = constants(model, weights, gain)
    cfg = _optimizer_config(doc, args, consts.l_smooth)
    oracle_cost = None
    if not args.no_oracle:
        oracle_cost = riccati_policy_iteration(model, weights, gain).cost_star
    report = gradient_descent(model, weights, gain, cfg, oracle_cost=oracle_cost)
    violations = check_certificates(report, consts, oracle_cost=oracle_cost)
    write_trace(report, args.trace)
    _write_report(args.report, _run_summary(report, violations))
    return EXIT_OK if report.converged else EXIT_DOMAIN


def cmd_flow(args) -> int:
    doc = parse_problem(args.problem)
    model, weights = doc.model(), doc.weights()
    gain = Gain.verify(model, doc.k0)
    consts = constants(model, weights, gain)
    cfg = FlowConfig(
        t_end=args.t_end, h0=args.h0, rtol=args.rtol, record_every=args.record_every
    )
    oracle_cost = None
    if not args.no_oracle:
        oracle_cost = riccati_policy_iteration(model, weights, gain).cost_star
    report = gradient_flow(model, weights, gain, cfg, oracle_cost=oracle_cost)
    violations = check_certificates(report, consts, oracle_cost=oracle_cost)
    write_trace(report, args.trace)
    _write_report(args.report, _run_summary(report, violations))
    return EXIT_OK


def cmd_verify(args) -> int:
    doc = parse_problem(args.problem)
    model, weights = doc.model(), doc.weights()
    gain = Gain.verify(model, doc.k0)
    violations = run_property_suite(seed=args.seed, systems=args.systems)
    # also exercise the given problem itself
    rng = np.random.default_rng(args.seed + 1)
    from .verify import check_gradient_fd, check_hessian_fd, check_lyapunov_properties

    violations += check_lyapunov_properties(model, gain, rng)
    violations += check_gradient_fd(model, weights, gain, rng)
    violations += check_hessian_fd(model, weights, gain, rng)
    for v in violations:
        print(f"violation: {v}")
    print(f"checked {args.systems} randomized systems + the given problem")
    return EXIT_OK if not violations else EXIT_DOMAIN


def cmd_simulate(args) -> int:
    doc = parse_problem(args.problem)
    model, weights = doc.model(), doc.weights()
    gain = Gain.verify(model, doc.k0)
    seed = args.seed
    if "SLQ_SEED" in os.environ:
        seed = int(os.environ["SLQ_SEED"])
    sim = dict(doc.simulation)
    cfg = SimConfig(
        horizon=args.horizon if args.horizon is not None else sim.get("horizon", 20.0),
        dt=args.dt if args.dt is not None else sim.get("dt", 1e-3),
        paths=args.paths if args.paths is not None else sim.get("paths", 10_000),
        seed=seed if seed is not None else sim.get("seed", 0),
    )
    analytic = cost(model, weights, gain)
    est = estimate_cost(model, weights, gain, cfg)
    curve = mean_square_decay(model, gain, cfg)
    text = _report_lines(
        [
            ("analytic_cost", analytic),
            ("mc_cost_mean", est.cost_mean),
            ("mc_cost_stderr", est.cost_stderr),
            ("relative_gap", abs(est.cost_mean - analytic) / analytic),
            ("terminal_second_moment", est.terminal_second_moment),
            ("truncation_tail_bound", est.tail_bound),
            ("decay_final_over_initial", curve[-1][1] / curve[0][1]),
            ("paths", est.paths_used),
        ]
    )
    _write_report(args.report, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slqpg",
        description="Policy-gradient solvers for stochastic LQ control with multiplicative noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("problem", help="path to a JSON problem document")
        p.add_argument("--report", default=None, help="write the summary report here")

    p = sub.add_parser("check", help="verify that k0 is mean-square stabilizing")
    p.add_argument("problem")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("constants", help="smoothness / gradient-domination constants at k0")
    add_common(p)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("oracle", help="optimal gain by Riccati policy iteration")
    add_common(p)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("descend", help="gradient descent from k0")
    add_common(p)
    p.add_argument("--step", choices=["bb", "fixed", "two-over-l"], default="bb")
    p.add_argument("--alpha", type=float, default=None, help="stepsize for --step fixed")
    p.add_argument("--gamma", type=float, default=None, help="backtracking factor (default 0.5)")
    p.add_argument("--tol", type=float, default=None, help="gradient-norm stop (default 1e-3)")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--alpha0", type=float, default=None, help="first BB step")
    p.add_argument("--alpha-max", type=float, default=None, help="BB safeguard cap")
    p.add_argument("--trace", default="descend_trace.csv")
    p.add_argument("--no-oracle", action="store_true", help="skip relative-error column")
    p.set_defaults(func=cmd_descend)

    p = sub.add_parser("flow", help="gradient flow (matrix ODE) from k0")
    add_common(p)
    p.add_argument("--t-end", type=float, default=100.0)
    p.add_argument("--h0", type=float, default=1e-3)
    p.add_argument("--rtol", type=float, default=1e-6)
    p.add_argument("--record-every", type=float, default=1.0)
    p.add_argument("--trace", default="flow_trace.csv")
    p.add_argument("--no-oracle", action="store_true")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("verify", help="randomized property suites")
    p.add_argument("problem")
    p.add_argument("--systems", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo vs analytic cost at k0")
    add_common(p)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--paths", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, InvalidInput, UnsupportedModel) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NotStabilizing, MaxIterExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (SingularOperator, StepCollapse, Overflow) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
