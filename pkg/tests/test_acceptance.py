"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (shown in the terminal summary) before
asserting, so failing criteria are reported alongside passing ones.
"""

from __future__ import annotations

import time
from dataclasses import replace

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, CERT_GRID, boundary_problem
from turnpoint.analysis import certify_bracket, certify_suite, fit_bound_constant, loglog_slope
from turnpoint.experiments import preset, run_plan
from turnpoint.meshgen import MeshConfig, Nu, build_mesh, iterated_log
from turnpoint.problem import custom_problem, manufactured_tanh_problem
from turnpoint.scheme import compute_layout, jacobian, residual

E14, E18, E22 = 2.0**-14, 2.0**-18, 2.0**-22
NS = (64, 128, 256, 512)

# published (E, E1, Ord, Ord1) per (eps, N)
TABLE3 = {
    (E14, 64): (1.18e-03, 1.88e-07, 2.01, 2.06), (E18, 64): (1.57e-03, 1.73e-08, 1.51, 2.00),
    (E22, 64): (1.73e-03, 1.27e-09, 1.48, 1.89),
    (E14, 128): (3.13e-04, 4.80e-08, 1.92, 1.97), (E18, 128): (3.63e-04, 2.97e-09, 2.12, 2.54),
    (E22, 128): (3.94e-04, 2.45e-10, 2.13, 2.37),
    (E14, 256): (7.83e-05, 1.38e-08, 2.00, 1.80), (E18, 256): (9.16e-05, 7.51e-10, 1.99, 1.98),
    (E22, 256): (1.04e-04, 5.33e-11, 1.92, 2.20),
    (E14, 512): (1.96e-05, 4.29e-09, 2.00, 1.68), (E18, 512): (2.29e-05, 1.93e-10, 2.00, 1.96),
    (E22, 512): (2.60e-05, 1.33e-11, 2.00, 2.00),
}
# published (E, E1) per (ell, eps) at N = 512
TABLE2 = {
    (1, E14): (7.94e-05, 1.19e-08), (1, E18): (1.31e-04, 1.06e-09), (1, E22): (1.96e-04, 9.83e-11),
    (2, E14): (3.84e-05, 6.91e-09), (2, E18): (4.74e-05, 4.15e-10), (2, E22): (5.53e-05, 3.00e-11),
    (3, E14): (1.96e-05, 4.29e-09), (3, E18): (2.29e-05, 1.93e-10), (3, E22): (2.60e-05, 1.33e-11),
}
TABLE6_INV_EPS = (1.45, 1.21, 1.03, 0.97, 0.96)
TABLE6_LAMBDA_N = (1.00, 1.00, 1.00, 1.00, 0.98)


def record(number: int, title: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'} [{number:2d}] {title}: {detail}")
    print(ACCEPTANCE_LINES[-1])


def rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def sig3(v: float) -> float:
    return float(f"{v:.2e}")


def by_cell(rows):
    return {(r.epsilon, r.N): r for r in rows}


@pytest.fixture(scope="module")
def table3():
    start = time.perf_counter()
    rows = run_plan(preset(3)[0])
    return by_cell(rows), time.perf_counter() - start


def test_01_table3_reproduction(table3):
    cells, elapsed = table3
    worst_err, worst_ord = 0.0, 0.0
    for key, (e, e1, o, o1) in TABLE3.items():
        r = cells[key]
        worst_err = max(worst_err, rel(r.E, e), rel(r.E1, e1))
        worst_ord = max(worst_ord, abs(r.Ord - o), abs(r.Ord1 - o1))
    ok = len(cells) == 12 and worst_err <= 0.15 and worst_ord <= 0.2 and elapsed < 10.0
    record(1, "Table 3 reproduction", ok,
           f"max rel err {worst_err:.3f} (<=0.15), max order dev {worst_ord:.3f} (<=0.2), {elapsed:.2f} s (<10)")
    assert ok


def test_02_table2_monotone_in_ell():
    rows = {(r.ell, r.epsilon): r for r in run_plan(preset(2)[0])}
    decreasing = all(rows[(1, e)].E > rows[(2, e)].E > rows[(3, e)].E
                     and rows[(1, e)].E1 > rows[(2, e)].E1 > rows[(3, e)].E1 for e in (E14, E18, E22))
    worst = max(max(rel(rows[k].E, v[0]), rel(rows[k].E1, v[1])) for k, v in TABLE2.items())
    ok = decreasing and worst <= 0.15
    record(2, "Table 2 monotone in ell", ok, f"strictly decreasing={decreasing}, max rel err {worst:.3f} (<=0.15)")
    assert ok


def test_03_table4_eps_floor():
    cells = by_cell(run_plan(preset(4)[0]))
    agree = all(f"{cells[(E18, n)].E1:.2e}" == f"{cells[(E22, n)].E1:.2e}" for n in NS)
    r = cells[(E22, 512)]
    dev = max(rel(r.E, 3.76e-05), rel(r.E1, 3.04e-07))
    ok = agree and dev <= 0.15
    record(3, "Table 4 eps floor", ok,
           f"E1(2^-18)=E1(2^-22) at 3 s.f. for all N: {agree}; N=512 E={r.E:.3g} E1={r.E1:.3g}, rel err {dev:.3f}")
    assert ok


def test_04_table5_alpha2():
    cells = by_cell(run_plan(preset(5)[0]))
    r = cells[(E22, 512)]
    dev = max(rel(r.E, 4.34e-05), rel(r.E1, 2.23e-11))
    decreasing = all(cells[(E14, n)].E1 > cells[(E18, n)].E1 > cells[(E22, n)].E1 for n in NS)
    ok = decreasing and dev <= 0.15
    record(4, "Table 5 alpha=2", ok,
           f"N=512 eps=2^-22 E={r.E:.3g} E1={r.E1:.3g}, rel err {dev:.3f}; E1 decreasing in eps: {decreasing}")
    assert ok


def test_05_table6_eps_order():
    inv, lam_n = (tuple(r.Ord_eps for r in run_plan(plan)) for plan in preset(6))
    dev_inv = max(abs(a - b) for a, b in zip(inv, TABLE6_INV_EPS))
    dev_n = max(abs(a - b) for a, b in zip(lam_n, TABLE6_LAMBDA_N))
    ok = dev_inv <= 0.12 and dev_n <= 0.05
    record(5, "Table 6 Ord_eps", ok,
           f"1/eps column {np.round(inv, 3).tolist()} dev {dev_inv:.3f} (<=0.12); "
           f"lambda=N column {np.round(lam_n, 3).tolist()} dev {dev_n:.3f} (<=0.05)")
    assert ok


def test_06_error_bound_constant(table3):
    cells, _ = table3
    rows = list(cells.values())
    c = fit_bound_constant([r.E1 for r in rows], [r.delta for r in rows])
    slopes = {eps: loglog_slope(NS, [cells[(eps, n)].E1 for n in NS]) for eps in (E14, E18, E22)}
    slopes_ok = all(1.8 <= s <= 2.2 for s in slopes.values())
    c_max = max(fit_bound_constant([cells[(eps, n)].E for n in NS],
                                   [iterated_log(1 / eps, 3) / n for n in NS]) for eps in (E14, E18, E22))
    ok = c <= 10.0 and slopes_ok
    record(6, "E1 <= C delta", ok,
           f"fitted C={c:.2f} (<=10); slopes {[round(s, 3) for s in slopes.values()]} in [1.8, 2.2]: {slopes_ok}; "
           f"max-norm constant C'={c_max:.3g}")
    assert c <= 10.0
    assert slopes_ok


def _grid():
    out = []
    for cfg in CERT_GRID:
        p = manufactured_tanh_problem(cfg["eps"])
        mesh = build_mesh(MeshConfig(cfg["eps"], cfg["ell"], cfg["mode"], cfg["alpha"], cfg["n"]))
        out.append((cfg, compute_layout(mesh, p), p))
    for eps in (E14, E22):
        for ell in (2, 3):
            p = boundary_problem(eps)
            mesh = build_mesh(MeshConfig(eps, ell, n_steps=128, nu=Nu.BOUNDARY))
            out.append((dict(eps=eps, ell=ell, nu=0, n=128), compute_layout(mesh, p), p))
    return out


@pytest.fixture(scope="module")
def certification():
    return [(cfg, lay, p, certify_suite(lay, p, trials=1000, seed=i)) for i, (cfg, lay, p) in enumerate(_grid())]


def _summary(certification, name):
    certs = [next(c for c in res if c.name == name) for *_, res in certification]
    failed = [cfg for (cfg, *_), c in zip(certification, certs) if not c.passed]
    return certs, failed


def test_07_l_matrix(certification):
    certs, failed = _summary(certification, "l_matrix")
    ok = len(certs) >= 12 and not failed and all(c.trials == 1000 for c in certs)
    record(7, "L-matrix sign pattern", ok,
           f"{len(certs)} configurations x 1000 draws, violations in {len(failed)}; "
           f"max off-diagonal {max(c.value for c in certs):.3g}")
    assert ok, failed


def test_08_row_sums(certification):
    certs, failed = _summary(certification, "row_sums")
    margin = min(c.value - c.bound for c in certs)
    ok = len(certs) >= 12 and not failed
    record(8, "weighted row sums", ok,
           f"{len(certs)} configurations, min(s) - b_*/2 = {margin:.3g}; "
           f"transition-adjacent s = b/2 to 1e-12; failures {len(failed)}")
    assert ok, failed


def test_09_stability(certification):
    certs, failed = _summary(certification, "stability")
    ok = len(certs) >= 12 and not failed and all(c.trials == 1000 for c in certs)
    record(9, "stability ratio", ok,
           f"{len(certs)} configurations x 1000 pairs, max ratio * b_*/2 = "
           f"{max(c.value / c.bound for c in certs):.3g} (<=1); failures {len(failed)}")
    assert ok, failed


def test_10_jacobian_oracle():
    rng = np.random.default_rng(2024)
    grid = _grid()
    worst = 0.0
    for _ in range(100):
        cfg, lay, p = grid[rng.integers(len(grid))]
        if lay.size > 140:
            mesh = build_mesh(replace(lay.mesh.config, n_steps=64))
            lay = compute_layout(mesh, p)
        w = rng.uniform(p.u_minus, p.u_plus, lay.size)
        g = jacobian(lay, p, w).to_dense()
        d = 1e-6 * (p.u_plus - p.u_minus)
        for j in range(lay.size):
            e = np.zeros(lay.size)
            e[j] = d
            col = (residual(lay, p, w + e) - residual(lay, p, w - e)) / (2 * d)
            worst = max(worst, np.linalg.norm(g[:, j] - col) / np.linalg.norm(g[:, j]))
    ok = worst <= 1e-6
    record(10, "Jacobian vs finite differences", ok, f"100 draws, worst column rel diff {worst:.2e} (<=1e-6)")
    assert ok


def test_11_bracket(certification):
    certs, failed = _summary(certification, "bracket")
    extra = []
    for ell, b in ((2, (1.0, 0.5)), (3, (2.0, -0.5, 0.25))):
        p = custom_problem(E18, b, 1.0, 3.0)
        lay = compute_layout(build_mesh(MeshConfig(E18, ell, n_steps=256)), p)
        extra.append(certify_bracket(lay, p))
    worst = max(c.value for c in certs + extra)
    ok = not failed and all(c.passed for c in extra)
    record(11, "constant bracket", ok,
           f"{len(certs) + len(extra)} configurations, worst sign violation {worst:.2e} (rounding level)")
    assert ok


def test_12_ablation(table3):
    default, _ = table3
    ablated = by_cell(run_plan(replace(preset(3)[0], transition=False)))
    never_better = all(ablated[k].E1 >= default[k].E1 for k in default)
    strictly = sum(ablated[k].E1 > default[k].E1 for k in default)
    better_printed = sum(sig3(ablated[k].E1) < sig3(default[k].E1) for k in default)
    ratio_inv = max(ablated[k].E1 / default[k].E1 for k in default)
    ratio_min = min(ablated[k].E1 / default[k].E1 for k in default)

    plan_n = preset(4)[0]
    default_n = by_cell(run_plan(plan_n))
    ablated_n = by_cell(run_plan(replace(plan_n, transition=False)))
    ratio_n = max(ablated_n[k].E1 / default_n[k].E1 for k in default_n)
    ok = never_better and strictly >= 1 and ratio_inv > ratio_n
    record(12, "transition-scheme ablation", ok,
           f"never better: {never_better} (min ratio {ratio_min:.6f}, better at 3 s.f. in {better_printed} cells); "
           f"strictly worse in {strictly}/12 cells; "
           f"max E1 ratio 1/eps {ratio_inv:.3f} vs lambda=N {ratio_n:.3f}")
    assert ok
