import numpy as np
import pytest

from roughhopf import _kernels_py as py
from roughhopf import kernels

compiled = pytest.importorskip("roughhopf._kernels")


def problem(seed, steps=5, d=2, m=4):
    rng = np.random.default_rng(seed)
    E = rng.integers(0, 3, size=(m, d)).astype(np.int64)
    Cs = rng.normal(scale=0.1, size=(steps, m, d))
    x = rng.normal(scale=0.5, size=d)
    return E, Cs, x


def test_backend_selection():
    assert kernels.BACKEND in ("compiled", "python")


@pytest.mark.parametrize("seed", range(5))
def test_eval_field_agrees(seed):
    E, Cs, x = problem(seed)
    assert np.allclose(compiled.eval_field(E, Cs[0], x), py.eval_field(E, Cs[0], x), rtol=1e-14, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_rk4_chain_agrees(seed):
    E, Cs, x = problem(seed)
    lo, hi = np.full(2, -np.inf), np.full(2, np.inf)
    a, sa = compiled.rk4_chain(E, Cs, x, 16, lo, hi)
    b, sb = py.rk4_chain(E, Cs, x, 16, lo, hi)
    assert sa == sb
    # rows after a blow-up are not comparable
    n = len(a) if sa < 0 else sa + 1
    assert np.allclose(a[:n], b[:n], rtol=1e-12, atol=1e-13)


def test_rk4_many_agrees_and_reports_exit():
    E, Cs, _ = problem(7)
    X0 = np.random.default_rng(1).normal(size=(6, 2))
    C = np.repeat(Cs[:1], 6, axis=0)
    lo, hi = np.full(2, -1.0), np.full(2, 1.0)
    a, sa = compiled.rk4_many(E, C, X0, 8, lo, hi)
    b, sb = py.rk4_many(E, C, X0, 8, lo, hi)
    assert np.array_equal(np.asarray(sa), np.asarray(sb))
    ok = np.asarray(sa) < 0
    assert np.allclose(np.asarray(a)[ok], np.asarray(b)[ok], rtol=1e-12, atol=1e-13)


def test_exit_index_reported():
    E = np.array([[0]], dtype=np.int64)
    Cs = np.ones((4, 1, 1))
    for mod in (py, compiled):
        _, status = mod.rk4_chain(E, Cs, np.array([0.0]), 4, np.array([-1.0]), np.array([2.5]))
        assert status == 2


def test_pure_python_switch():
    import os
    import subprocess
    import sys
    code = "from roughhopf import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, ROUGHHOPF_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
