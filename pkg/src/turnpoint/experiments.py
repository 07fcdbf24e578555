"""Convergence sweeps: experiment plans, table rows and their text formats."""

from __future__ import annotations

import configparser
import csv
import io
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .analysis import Certificate, certify_suite, eps_order, error_report, order
from .errors import ConfigError, NonConvergence, SingularMatrix
from .meshgen import LambdaMode, MeshConfig, Nu, build_mesh
from .problem import SOURCES, Problem, custom_problem, manufactured_tanh_problem
from .scheme import compute_layout
from .solver import Damping, SolverConfig, solve

__all__ = [
    "ProblemSpec",
    "ExperimentPlan",
    "Row",
    "parse_eps",
    "parse_eps_list",
    "parse_floats",
    "parse_ints",
    "preset",
    "run_plan",
    "run_certification",
    "emit_table",
    "emit_certificates",
    "parse_csv",
    "load_config",
    "CSV_COLUMNS",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = ("epsilon", "N", "ell", "lambda_mode", "alpha", "E", "E1", "Ord", "Ord1", "delta")

_POWER = re.compile(r"^\s*([0-9.]+)\s*\^\s*(-?[0-9.]+)\s*$")


def parse_eps(text: str) -> float:
    """Parse ``2^-14`` style powers as well as plain floats."""
    m = _POWER.match(text)
    try:
        value = float(m.group(1)) ** float(m.group(2)) if m else float(text)
    except ValueError:
        raise ConfigError(f"cannot parse epsilon {text!r}") from None
    if not value > 0:
        raise ConfigError(f"epsilon must be positive, got {text!r}")
    return value


def parse_eps_list(text: str) -> tuple[float, ...]:
    return tuple(parse_eps(t) for t in text.split(",") if t.strip())


def parse_floats(text: str) -> tuple[float, ...]:
    out = []
    for t in text.split(","):
        t = t.strip()
        if not t:
            continue
        if "/" in t:
            num, den = t.split("/", 1)
            out.append(float(num) / float(den))
        else:
            out.append(float(t))
    return tuple(out)


def parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


@dataclass(frozen=True)
class ProblemSpec:
    """Problem family indexed by eps: the tanh test problem or a custom one."""

    kind: str = "tanh-mms"
    b_coeffs: tuple[float, ...] = (0.0, 1.0)
    u_minus: float | None = None
    u_plus: float | None = None
    nu: Nu = Nu.INTERIOR
    source: str = "zero"
    b_lower: float | None = None
    b_upper: float | None = None

    def build(self, epsilon: float) -> Problem:
        if self.kind == "tanh-mms":
            return manufactured_tanh_problem(epsilon, self.b_lower, self.b_upper)
        if self.u_minus is None or self.u_plus is None:
            raise ConfigError("custom problems need u_minus and u_plus")
        return custom_problem(epsilon, self.b_coeffs, self.u_minus, self.u_plus, self.nu, self.source,
                              b_lower=self.b_lower, b_upper=self.b_upper)


@dataclass(frozen=True)
class ExperimentPlan:
    """One sweep over (ell, eps, N) with fixed lambda mode and alpha.

    Orders need the run at N/2 and Ord_eps the run at 4*eps; both are
    computed on the side and never emitted as rows of their own.
    """

    eps_list: tuple[float, ...]
    n_list: tuple[int, ...]
    ells: tuple[int, ...] = (3,)
    lambda_mode: LambdaMode = LambdaMode.INVERSE_EPSILON
    alpha: float = 1.0
    ratios: tuple[float, ...] | None = None
    problem: ProblemSpec = field(default_factory=ProblemSpec)
    solver: SolverConfig = field(default_factory=SolverConfig)
    orders: bool = True
    eps_orders: bool = False
    transition: bool = True
    enforce_monotone: bool = True
    fmt: str = "csv"

    def __post_init__(self):
        object.__setattr__(self, "lambda_mode", LambdaMode.parse(self.lambda_mode))
        if self.fmt not in ("csv", "md"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.ratios is not None and len(self.ells) > 1:
            raise ConfigError("explicit ratios only make sense for a single ell")
        if self.orders and any(n % 2 for n in self.n_list):
            raise ConfigError(f"orders need even N, got {self.n_list}")
        if self.eps_orders:
            for a, b in zip(self.eps_list, self.eps_list[1:]):
                if not math.isclose(b, a / 4, rel_tol=1e-12):
                    raise ConfigError("Ord_eps needs an eps list with ratio 1/4")

    @property
    def nu(self) -> Nu:
        return self.problem.nu if self.problem.kind != "tanh-mms" else Nu.INTERIOR

    def mesh_config(self, ell: int, eps: float, n: int) -> MeshConfig:
        return MeshConfig(eps, ell, self.lambda_mode, self.alpha, n, self.ratios, self.nu, self.enforce_monotone)


@dataclass
class Row:
    epsilon: float
    N: int
    ell: int
    lambda_mode: str
    alpha: float
    E: float | None = None
    E1: float | None = None
    Ord: float | None = None
    Ord1: float | None = None
    delta: float | None = None
    Ord_eps: float | None = None
    failed: bool = False
    iterations: int | None = None
    message: str = ""


@dataclass
class _Cell:
    E: float | None
    E1: float | None
    delta: float | None
    iterations: int | None
    error: str = ""


def _run_cell(plan: ExperimentPlan, ell: int, eps: float, n: int) -> _Cell:
    p = plan.problem.build(eps)
    mesh = build_mesh(plan.mesh_config(ell, eps, n))
    layout = compute_layout(mesh, p, transition=plan.transition)
    sol = solve(layout, p, plan.solver)
    if p.exact is None:
        return _Cell(None, None, None, sol.iterations)
    # the ablated scheme is measured in the default scheme's norm
    norm = None if plan.transition else compute_layout(mesh, p)
    rep = error_report(sol, p, norm)
    return _Cell(rep.E, rep.E1, rep.delta, sol.iterations)


def run_plan(plan: ExperimentPlan, on_cell: Callable[[Row], None] | None = None) -> list[Row]:
    """Solve every requested cell; failed cells are marked instead of raised."""
    cache: dict[tuple, _Cell] = {}

    def cell(ell, eps, n, required):
        key = (ell, eps, n)
        if key not in cache:
            try:
                cache[key] = _run_cell(plan, ell, eps, n)
            except (NonConvergence, SingularMatrix, ConfigError) as exc:
                if required:
                    log.warning("cell eps=%g N=%d ell=%d failed: %s", eps, n, ell, exc)
                else:
                    log.info("auxiliary run eps=%g N=%d ell=%d unavailable: %s", eps, n, ell, exc)
                cache[key] = _Cell(None, None, None, None, str(exc))
        return cache[key]

    rows = []
    for ell in plan.ells:
        for eps in plan.eps_list:
            for n in plan.n_list:
                c = cell(ell, eps, n, True)
                row = Row(eps, n, ell, plan.lambda_mode.value, plan.alpha, c.E, c.E1,
                          delta=c.delta, iterations=c.iterations, failed=bool(c.error), message=c.error)
                if not row.failed and c.E is not None:
                    if plan.orders and n % 2 == 0:
                        half = cell(ell, eps, n // 2, False)
                        if half.E:
                            row.Ord = order(half.E, c.E)
                            row.Ord1 = order(half.E1, c.E1)
                    if plan.eps_orders:
                        coarse = cell(ell, 4 * eps, n, False)
                        if coarse.E1:
                            row.Ord_eps = eps_order(coarse.E1, c.E1)
                if on_cell is not None:
                    on_cell(row)
                rows.append(row)
    return rows


def run_certification(plan: ExperimentPlan, trials: int = 1000, seed: int = 0) -> list[tuple[Row, list[Certificate]]]:
    """Certification suite on the layout of every (ell, eps, N) cell."""
    out = []
    for ell in plan.ells:
        for eps in plan.eps_list:
            for n in plan.n_list:
                row = Row(eps, n, ell, plan.lambda_mode.value, plan.alpha)
                p = plan.problem.build(eps)
                layout = compute_layout(build_mesh(plan.mesh_config(ell, eps, n)), p, transition=plan.transition)
                out.append((row, certify_suite(layout, p, trials, seed)))
    return out


# -- presets -------------------------------------------------------------------

_TABLE_EPS = tuple(2.0**-k for k in (14, 18, 22))
_TABLE_N = (64, 128, 256, 512)


def preset(table: int) -> list[ExperimentPlan]:
    """Plans reproducing the published Tables 2-6."""
    if table == 2:
        return [ExperimentPlan(_TABLE_EPS, (512,), ells=(1, 2, 3))]
    if table == 3:
        return [ExperimentPlan(_TABLE_EPS, _TABLE_N)]
    if table == 4:
        return [ExperimentPlan(_TABLE_EPS, _TABLE_N, lambda_mode=LambdaMode.STEP_COUNT, enforce_monotone=False)]
    if table == 5:
        return [ExperimentPlan(_TABLE_EPS, _TABLE_N, lambda_mode=LambdaMode.STEP_COUNT, alpha=2.0,
                               enforce_monotone=False)]
    if table == 6:
        eps = tuple(2.0**-k for k in (14, 16, 18, 20, 22))
        return [
            ExperimentPlan(eps, (512,), orders=False, eps_orders=True),
            ExperimentPlan(eps, (512,), lambda_mode=LambdaMode.STEP_COUNT, alpha=2.0, orders=False,
                           eps_orders=True, enforce_monotone=False),
        ]
    raise ConfigError(f"no preset for table {table}; choose 2-6")


# -- output --------------------------------------------------------------------


def _sci(v: float | None) -> str:
    return "" if v is None else f"{v:.2e}"


def _fixed(v: float | None) -> str:
    return "" if v is None else f"{v:.2f}"


def _cells(row: Row, eps_col: bool) -> list[str]:
    if row.failed:
        err, err1 = "failed", "failed"
    else:
        err, err1 = _sci(row.E), _sci(row.E1)
    out = [repr(float(row.epsilon)), str(row.N), str(row.ell), row.lambda_mode, f"{row.alpha:g}",
           err, err1, _fixed(row.Ord), _fixed(row.Ord1), _sci(row.delta)]
    if eps_col:
        out.append(_fixed(row.Ord_eps))
    return out


def emit_table(rows: Sequence[Row], fmt: str = "csv", eps_orders: bool | None = None) -> str:
    """Render rows as csv or a markdown pipe table.

    Errors and delta carry 3 significant digits, orders 2 decimals; absent
    values are empty. ``Ord_eps`` is added when requested or when any row has it.
    """
    if eps_orders is None:
        eps_orders = any(r.Ord_eps is not None for r in rows)
    header = list(CSV_COLUMNS) + (["Ord_eps"] if eps_orders else [])
    body = [_cells(r, eps_orders) for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buf.getvalue()
    if fmt == "md":
        widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(header)]
        lines = ["| " + " | ".join(h.ljust(w) for h, w in zip(header, widths)) + " |",
                 "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
        lines += ["| " + " | ".join(c.rjust(w) for c, w in zip(b, widths)) + " |" for b in body]
        return "\n".join(lines) + "\n"
    raise ConfigError(f"unknown format {fmt!r}")


def parse_csv(text: str) -> list[Row]:
    """Inverse of :func:`emit_table` for csv output, at the printed precision."""
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        def num(key):
            v = rec.get(key, "")
            return None if v in ("", None, "failed") else float(v)

        rows.append(Row(
            epsilon=float(rec["epsilon"]), N=int(rec["N"]), ell=int(rec["ell"]),
            lambda_mode=rec["lambda_mode"], alpha=float(rec["alpha"]),
            E=num("E"), E1=num("E1"), Ord=num("Ord"), Ord1=num("Ord1"), delta=num("delta"),
            Ord_eps=num("Ord_eps"), failed=rec["E"] == "failed",
        ))
    return rows


def emit_certificates(results: Iterable[tuple[Row, list[Certificate]]], fmt: str = "csv") -> str:
    header = ["epsilon", "N", "ell", "lambda_mode", "alpha", "check", "passed", "value", "bound", "trials", "detail"]
    body = []
    for row, certs in results:
        for c in certs:
            body.append([repr(float(row.epsilon)), str(row.N), str(row.ell), row.lambda_mode, f"{row.alpha:g}",
                         c.name, "yes" if c.passed else "no", f"{c.value:.6g}", f"{c.bound:.6g}",
                         str(c.trials), c.detail])
    if fmt == "md":
        widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(header)]
        lines = ["| " + " | ".join(h.ljust(w) for h, w in zip(header, widths)) + " |",
                 "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
        lines += ["| " + " | ".join(c.ljust(w) for c, w in zip(b, widths)) + " |" for b in body]
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(body)
    return buf.getvalue()


# -- config files --------------------------------------------------------------


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def load_config(path: str) -> dict:
    """Read an INI-style file into keyword arguments for plan construction.

    Sections: ``[problem]`` (b, u_minus, u_plus, nu, source, b_lower,
    b_upper), ``[mesh]`` (ell, lambda, alpha, N, ratios, enforce_monotone),
    ``[run]`` (eps, format, orders, eps_orders, transition) and ``[solver]``
    (residual_tol, step_tol, max_iters, damping, continuation).
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    with open(path) as fh:
        parser.read_file(fh)
    out: dict = {}
    if parser.has_section("problem"):
        sec = parser["problem"]
        source = sec.get("source", "zero").strip()
        if source not in SOURCES:
            raise ConfigError(f"{path}: unknown source {source!r}; known: {sorted(SOURCES)}")
        kw = dict(kind="custom", source=source, b_coeffs=parse_floats(sec.get("b", "0, 1")),
                  nu=Nu(int(sec.get("nu", "-1"))))
        for key in ("u_minus", "u_plus", "b_lower", "b_upper"):
            if key in sec:
                kw[key] = float(sec[key])
        if source == "tanh-mms" and "u_minus" not in sec and "u_plus" not in sec:
            kw["kind"] = "tanh-mms"
        out["problem"] = ProblemSpec(**kw)
    if parser.has_section("mesh"):
        sec = parser["mesh"]
        if "ell" in sec:
            out["ells"] = parse_ints(sec["ell"])
        if "lambda" in sec:
            out["lambda_mode"] = LambdaMode.parse(sec["lambda"])
        if "alpha" in sec:
            out["alpha"] = float(sec["alpha"])
        if "N" in sec:
            out["n_list"] = parse_ints(sec["N"])
        if "ratios" in sec:
            out["ratios"] = parse_floats(sec["ratios"])
        if "enforce_monotone" in sec:
            out["enforce_monotone"] = _bool(sec["enforce_monotone"])
    if parser.has_section("run"):
        sec = parser["run"]
        if "eps" in sec:
            out["eps_list"] = parse_eps_list(sec["eps"])
        if "format" in sec:
            out["fmt"] = sec["format"].strip()
        for key in ("orders", "eps_orders", "transition"):
            if key in sec:
                out[key] = _bool(sec[key])
    if parser.has_section("solver"):
        sec = parser["solver"]
        kw = {}
        if "residual_tol" in sec:
            kw["residual_tol"] = float(sec["residual_tol"])
        if "step_tol" in sec:
            kw["step_tol"] = float(sec["step_tol"])
        if "max_iters" in sec:
            kw["max_iters"] = int(sec["max_iters"])
        if "damping" in sec:
            kw["damping"] = Damping(sec["damping"].strip())
        if "continuation" in sec:
            kw["continuation"] = parse_eps_list(sec["continuation"])
        out["solver"] = SolverConfig(**kw)
    return out

