"""Random boxes, operators and measurements for property tests and sweeps."""

import numpy as np

from .correlations import CHSH_SCENARIO, Box, vertex_matrix
from .operators import MeasurementAssemblage, PseudoState


def random_hermitian(dim, rng):
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (X + X.conj().T) / 2


def random_density_matrix(dim, rng, rank=None):
    """Ginibre-induced mixed state of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_pseudostate(dim, rng, bipartition=None, spread=1.0):
    """Unit-trace Hermitian operator, typically with negative eigenvalues."""
    H = random_hermitian(dim, rng) * spread
    H = H - (np.trace(H).real - 1.0) / dim * np.eye(dim)
    return PseudoState(H, bipartition, tol=1e-10)


def random_unitary(dim, rng):
    Z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_projective_assemblage(dim, n_inputs, rng):
    """Two-outcome projective measurements splitting a random basis in half."""
    povms = []
    for _ in range(n_inputs):
        U = random_unitary(dim, rng)
        k = rng.integers(1, dim) if dim > 1 else 1
        P = U[:, :k] @ U[:, :k].conj().T
        povms.append([P, np.eye(dim) - P])
    return MeasurementAssemblage(povms)


def ns_vertices_2222():
    """All 24 vertices of the (2,2,2,2) no-signalling polytope."""
    from .constructions import pr_symmetric_boxes

    D = vertex_matrix(CHSH_SCENARIO)
    local = [D[:, i].reshape(CHSH_SCENARIO.shape) for i in range(D.shape[1])]
    return local + [b.p for b in pr_symmetric_boxes()]


def random_ns_box(rng, concentration=0.3):
    """Random convex mixture of the 24 no-signalling vertices."""
    V = np.stack(ns_vertices_2222())
    w = rng.dirichlet(np.full(len(V), concentration))
    return Box(CHSH_SCENARIO, np.tensordot(w, V, axes=1), tol=1e-10)


def random_local_mixture(scenario, rng, concentration=1.0):
    D = vertex_matrix(scenario)
    w = rng.dirichlet(np.full(D.shape[1], concentration))
    return Box(scenario, (D @ w).reshape(scenario.shape), tol=1e-10), w
