import os
import subprocess
import sys

import numpy as np
import pytest

from qtraj import _kernels_py, kernels

ARGS = (-1.0, 0.0, 1.0, 0.0, 1.0, 0.0)  # psi'' = (x^2 - 1) psi: the Gaussian


def test_python_table_matches_gaussian():
    ys, dys = _kernels_py.taylor_table(*ARGS, 0.05, 80)
    x = 0.05 * np.arange(81)
    assert np.max(np.abs(ys - np.exp(-x**2 / 2))) < 1e-13
    assert np.max(np.abs(dys + x * np.exp(-x**2 / 2))) < 1e-13


def test_python_eval_between_nodes():
    ys, dys = _kernels_py.taylor_table(*ARGS, 0.05, 80)
    x = np.linspace(0.0, 3.9, 57)
    y, dy, d2 = _kernels_py.taylor_eval(-1.0, 0.0, 1.0, 0.0, 0.05, ys, dys, x)
    g = np.exp(-x**2 / 2)
    assert np.max(np.abs(y - g)) < 1e-13
    assert np.max(np.abs(dy + x * g)) < 1e-13
    assert np.max(np.abs(d2 - (x**2 - 1) * g)) < 1e-12


@pytest.mark.skipif("compiled" not in kernels.IMPLEMENTATIONS, reason="compiled kernel not built")
def test_compiled_is_bit_identical():
    comp = kernels.IMPLEMENTATIONS["compiled"]
    for h, n in ((0.05, 80), (-0.031, 150)):
        a = _kernels_py.taylor_table(-3.0, 0.2, 1.0, 0.1, 0.3, -0.7, h, n)
        b = comp.taylor_table(-3.0, 0.2, 1.0, 0.1, 0.3, -0.7, h, n)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    ys, dys = _kernels_py.taylor_table(*ARGS, 0.05, 80)
    x = np.linspace(0.0, 4.0, 333)
    for u, v in zip(_kernels_py.taylor_eval(-1.0, 0.0, 1.0, 0.0, 0.05, ys, dys, x),
                    comp.taylor_eval(-1.0, 0.0, 1.0, 0.0, 0.05, ys, dys, x)):
        assert np.array_equal(u, v)


def test_env_var_forces_python_backend():
    env = dict(os.environ, QTRAJ_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import qtraj.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
