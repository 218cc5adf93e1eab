import os
import subprocess
import sys

import numpy as np
import pytest

from stepshift import kernels
from stepshift._pykernels import lrt_profiles as py_profiles


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.available_backends()


@pytest.mark.skipif("cython" not in kernels.available_backends(), reason="extension not built")
@pytest.mark.parametrize("n", [4, 5, 9, 50, 200])
def test_backends_agree(n):
    g = np.random.default_rng(n)
    xs = g.standard_normal((40, n)) * 3.0 + 10.0
    xs[0] = 1.0
    xs[1, : n // 2] = 2.0  # one side constant: floored path
    fast = kernels.available_backends()["cython"].lrt_profiles(xs, 1e-12)
    slow = py_profiles(xs, 1e-12)
    np.testing.assert_allclose(fast, slow, rtol=1e-12, atol=1e-14)


@pytest.mark.skipif("cython" not in kernels.available_backends(), reason="extension not built")
def test_single_matches_block():
    x = np.random.default_rng(3).standard_normal(77)
    mod = kernels.available_backends()["cython"]
    np.testing.assert_array_equal(mod.lrt_profile(x, 1e-12), mod.lrt_profiles(x[None, :], 1e-12)[0])


@pytest.mark.parametrize("mod", list(kernels.available_backends().values()))
def test_rejects_short(mod):
    with pytest.raises(ValueError):
        mod.lrt_profile(np.arange(3.0), 1e-12)


def test_env_var_forces_fallback():
    env = dict(os.environ, STEPSHIFT_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import stepshift; print(stepshift.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
