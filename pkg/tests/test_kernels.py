import numpy as np
import pytest
from scipy.sparse import diags

from movingwave import kernels

BACKENDS = sorted(kernels.BACKENDS)


def _problem(nsteps=12, m=9, seed=0):
    rng = np.random.default_rng(seed)
    new = rng.normal(size=(nsteps, 3, m)) * 0.2
    new[:, 1] += 3.0    # diagonally dominant
    cur = rng.normal(size=(nsteps, 3, m)) * 0.3
    old = rng.normal(size=(nsteps, 3, m)) * 0.3
    src = rng.normal(size=(nsteps, m))
    out = np.zeros((nsteps + 2, m))
    out[:2] = rng.normal(size=(2, m))
    return new, cur, old, src, out


def _dense(tri):
    m = tri.shape[1]
    return diags([tri[0, 1:], tri[1], tri[2, :-1]], [-1, 0, 1], shape=(m, m)).toarray()


def test_compiled_backend_is_available():
    assert "cython" in kernels.BACKENDS
    assert kernels.BACKEND == "cython"


@pytest.mark.parametrize("backend", BACKENDS)
def test_sweep_matches_dense_solve(backend):
    new, cur, old, src, out = _problem()
    ref = out.copy()
    for s in range(new.shape[0]):
        rhs = _dense(cur[s]) @ ref[s + 1] + _dense(old[s]) @ ref[s] + src[s]
        ref[s + 2] = np.linalg.solve(_dense(new[s]), rhs)
    assert kernels.BACKENDS[backend](new, cur, old, src, out, 1e300) == -1
    np.testing.assert_allclose(out, ref, rtol=1e-12, atol=1e-12)


def test_backends_agree():
    results = []
    for b in BACKENDS:
        new, cur, old, src, out = _problem(40, 31, seed=3)
        kernels.BACKENDS[b](new, cur, old, src, out, 1e300)
        results.append(out)
    for r in results[1:]:
        np.testing.assert_allclose(r, results[0], rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("backend", BACKENDS)
def test_diagonal_new_matrix(backend):
    new, cur, old, src, out = _problem()
    new[:, 0] = new[:, 2] = 0.0
    expect = out.copy()
    kernels.BACKENDS[backend](new, cur, old, src, out, 1e300)
    s = 0
    rhs = _dense(cur[s]) @ expect[1] + _dense(old[s]) @ expect[0] + src[s]
    np.testing.assert_allclose(out[2], rhs / new[0, 1], rtol=1e-13)


@pytest.mark.parametrize("backend", BACKENDS)
def test_blowup_reports_step(backend):
    new, cur, old, src, out = _problem()
    src[4] *= 1e8
    assert kernels.BACKENDS[backend](new, cur, old, src, out, 1e6) == 4


def test_environment_forces_pure_python():
    import os
    import subprocess
    import sys
    env = dict(os.environ, MOVINGWAVE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c",
                          "from movingwave import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
