import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from boxrobust import _kernels
from boxrobust.sampling import random_hermitian

pytestmark = pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE, reason="numba missing")


@pytest.fixture
def both():
    prev = _kernels.backend()
    yield
    _kernels.set_backend(prev)


def run_both(fn, *args):
    out = {}
    for b in ("numba", "numpy"):
        _kernels.set_backend(b)
        out[b] = fn(*args)
    return out["numba"], out["numpy"]


@given(st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_jacobi_matches_lapack(dim, seed):
    H = random_hermitian(dim, np.random.default_rng(seed))
    w, V, sweeps = _kernels._jacobi_hermitian(H.copy(), _kernels.JACOBI_MAX_SWEEPS)
    assert sweeps >= 0
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    assert np.allclose(w, np.linalg.eigvalsh(H)[::-1], atol=1e-10)
    assert np.abs((V * w) @ V.conj().T - H).max() < 1e-10
    assert np.abs(V.conj().T @ V - np.eye(dim)).max() < 1e-10


def test_degenerate_and_diagonal(both):
    for H in (np.eye(5, dtype=complex), np.diag([3.0, -1.0, 0.0]).astype(complex), np.zeros((4, 4), complex)):
        a, b = run_both(_kernels.eigh, H)
        assert np.allclose(a[0], b[0], atol=1e-12)


def test_eigenvalues_descending(both, rng):
    _kernels.set_backend("numba")
    w, _ = _kernels.eigh(random_hermitian(8, rng))
    assert np.all(np.diff(w) <= 0)


def test_trace_norms_agree(both, rng):
    stack = np.stack([random_hermitian(6, rng) for _ in range(30)])
    a, b = run_both(_kernels.trace_norms, stack)
    assert np.allclose(a, b, atol=1e-10)


def test_born_agrees(both, rng):
    O = random_hermitian(6, rng)
    M = np.stack([np.stack([random_hermitian(2, rng) for _ in range(3)]) for _ in range(2)])
    N = np.stack([np.stack([random_hermitian(3, rng) for _ in range(2)]) for _ in range(4)])
    a, b = run_both(_kernels.born, O, (2, 3), M, N)
    assert a.shape == (2, 4, 3, 2)
    assert np.allclose(a, b, atol=1e-12)


def test_vertex_matrix_agrees(both):
    a, b = run_both(_kernels.vertex_matrix, 3, 2, 2, 3)
    assert np.array_equal(a, b)


def test_wire_agrees(both, rng):
    from boxrobust.constructions import pr_box, random_wiring
    from boxrobust.correlations import CHSH_SCENARIO

    w = random_wiring(CHSH_SCENARIO, rng=rng)
    args = (pr_box(0.1).p, w.side_table(), w.alice_pre, w.alice_post, w.bob_pre, w.bob_post)
    a, b = run_both(_kernels.wire, *args)
    assert np.allclose(a, b, atol=1e-14)


def test_sweep_cap_raises_convergence_failure(both, rng, monkeypatch):
    _kernels.set_backend("numba")
    monkeypatch.setattr(_kernels, "JACOBI_MAX_SWEEPS", 0)
    with pytest.raises(_kernels.ConvergenceFailure):
        _kernels.eigh(random_hermitian(4, rng))


def test_env_flag_selects_numpy():
    code = "from boxrobust import _kernels; print(_kernels.backend())"
    env = dict(os.environ, BOXROBUST_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_set_backend_rejects_unknown(both):
    with pytest.raises(ValueError):
        _kernels.set_backend("cuda")
