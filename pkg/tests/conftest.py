from __future__ import annotations

import numpy as np
import pytest

from turnpoint.meshgen import LambdaMode, Mesh, MeshConfig, Nu, build_mesh
from turnpoint.problem import custom_problem, manufactured_tanh_problem
from turnpoint.scheme import compute_layout


def equidistant_mesh(n: int) -> Mesh:
    """Uniform mesh on [0, 1] with n steps, outside the S(l) family."""
    return Mesh(np.linspace(0.0, 1.0, n + 1), Nu.BOUNDARY, n, (), (n,))


def tanh_layout(eps=2.0**-14, ell=3, n=64, mode=LambdaMode.INVERSE_EPSILON, alpha=1.0, **kw):
    p = manufactured_tanh_problem(eps)
    mesh = build_mesh(MeshConfig(eps, ell, mode, alpha, n, **kw))
    return compute_layout(mesh, p), p


# configurations whose meshes satisfy h_i <= h_(i+1); used by the certification tests
CERT_GRID = [
    dict(eps=2.0**-k, ell=ell, mode=LambdaMode.INVERSE_EPSILON, alpha=alpha, n=n)
    for k in (14, 18, 22) for ell in (1, 2, 3) for alpha in (1.0, 2.0) for n in (64,)
] + [
    dict(eps=2.0**-k, ell=ell, mode=LambdaMode.STEP_COUNT, alpha=1.0, n=n)
    for k in (14, 22) for ell in (1, 2) for n in (64, 128)
]


def boundary_problem(eps):
    return custom_problem(eps, (0.0, 1.0), 1.0, 3.0, Nu.BOUNDARY)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
