"""Hermitian operators, pseudo-states and local measurements.

A pseudo-state is a unit-trace Hermitian operator on a bipartite space.  It
need not be positive semidefinite; its negativity (sum of the magnitudes of
its negative eigenvalues) is simultaneously its robustness against mixing
with density matrices and its trace distance to the nearest density matrix.
"""

import math

import numpy as np

from . import _kernels
from .correlations import Box, Scenario
from .errors import InvalidPOVM, NotHermitian, NotUnitTrace, NumericalFailure, ShapeMismatch

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POVM_TOL = 1e-10
ZERO_EIG_TOL = 1e-10


def _freeze(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


class HermitianOp:
    """Dense complex Hermitian matrix, symmetrized at construction."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, tol=HERMITIAN_TOL):
        m = np.array(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeMismatch(f"expected a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator entries must be finite")
        scale = max(1.0, float(np.abs(m).max())) if m.size else 1.0
        if m.size and np.abs(m - m.conj().T).max() > tol * scale:
            raise NotHermitian(f"asymmetry {np.abs(m - m.conj().T).max():.3g} exceeds {tol:g}")
        object.__setattr__(self, "matrix", _freeze((m + m.conj().T) / 2))

    def __setattr__(self, name, value):
        raise AttributeError("HermitianOp is immutable")

    @property
    def dim(self):
        return self.matrix.shape[0]

    def trace(self):
        return float(np.trace(self.matrix).real)

    def __repr__(self):
        return f"HermitianOp(dim={self.dim})"

    def to_dict(self):
        return {"dim": self.dim, "re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist()}

    @classmethod
    def from_dict(cls, d):
        m = np.array(d["re"], dtype=float) + 1j * np.array(d.get("im", np.zeros_like(d["re"])), dtype=float)
        if m.shape != (d["dim"], d["dim"]):
            raise ShapeMismatch(f"declared dim {d['dim']} but matrix has shape {m.shape}")
        return cls(m)


class PseudoState:
    """Unit-trace Hermitian operator with an Alice:Bob split of its space."""

    __slots__ = ("op", "bipartition")

    def __init__(self, op, bipartition=None, tol=TRACE_TOL):
        if not isinstance(op, HermitianOp):
            op = HermitianOp(op)
        if abs(np.trace(op.matrix).real - 1.0) > tol:
            raise NotUnitTrace(f"trace is {np.trace(op.matrix).real!r}")
        if bipartition is not None:
            bipartition = (int(bipartition[0]), int(bipartition[1]))
            if bipartition[0] * bipartition[1] != op.dim:
                raise ShapeMismatch(f"bipartition {bipartition} incompatible with dim {op.dim}")
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "bipartition", bipartition)

    def __setattr__(self, name, value):
        raise AttributeError("PseudoState is immutable")

    @property
    def matrix(self):
        return self.op.matrix

    @property
    def dim(self):
        return self.op.dim

    def __repr__(self):
        return f"PseudoState(dim={self.dim}, bipartition={self.bipartition})"

    def to_dict(self):
        d = self.op.to_dict()
        if self.bipartition is not None:
            d["bipartition"] = list(self.bipartition)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(HermitianOp.from_dict(d), d.get("bipartition"))


class MeasurementAssemblage:
    """One POVM per input; ``povms[x][a]`` is the effect M_{a|x}."""

    __slots__ = ("dim", "povms")

    def __init__(self, povms, tol=POVM_TOL):
        ops = []
        dim = None
        for x, povm in enumerate(povms):
            effects = [e if isinstance(e, HermitianOp) else HermitianOp(e) for e in povm]
            if not effects:
                raise InvalidPOVM(f"input {x} has no outcomes")
            for a, e in enumerate(effects):
                if dim is None:
                    dim = e.dim
                if e.dim != dim:
                    raise ShapeMismatch("all effects must act on the same space")
                lo = float(np.linalg.eigvalsh(e.matrix)[0]) if dim else 0.0
                if lo < -tol:
                    raise InvalidPOVM(f"effect ({a}|{x}) has eigenvalue {lo:.3g}")
            total = sum(e.matrix for e in effects)
            if np.abs(total - np.eye(dim)).max() > tol:
                raise InvalidPOVM(f"effects for input {x} do not sum to the identity")
            ops.append(tuple(effects))
        if not ops:
            raise InvalidPOVM("assemblage has no inputs")
        n_out = {len(p) for p in ops}
        if len(n_out) != 1:
            raise InvalidPOVM("every input must have the same number of outcomes")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "povms", tuple(ops))

    def __setattr__(self, name, value):
        raise AttributeError("MeasurementAssemblage is immutable")

    @property
    def n_inputs(self):
        return len(self.povms)

    @property
    def n_outcomes(self):
        return len(self.povms[0])

    def array(self):
        """Effects stacked as (n_inputs, n_outcomes, dim, dim)."""
        return np.array([[e.matrix for e in povm] for povm in self.povms])

    def __repr__(self):
        return f"MeasurementAssemblage(dim={self.dim}, inputs={self.n_inputs}, outcomes={self.n_outcomes})"

    def to_dict(self):
        return {"dim": self.dim, "povms": [[e.to_dict() for e in povm] for povm in self.povms]}

    @classmethod
    def from_dict(cls, d):
        a = cls([[HermitianOp.from_dict(e) for e in povm] for povm in d["povms"]])
        if a.dim != d["dim"]:
            raise ShapeMismatch(f"declared dim {d['dim']} but effects have dim {a.dim}")
        return a


def _matrix(X):
    if isinstance(X, (HermitianOp, PseudoState)):
        return X.matrix
    return np.asarray(X, dtype=np.complex128)


def hermitian_eigen(H):
    """Eigenvalues sorted descending and orthonormal eigenvector columns."""
    return _kernels.eigh(_matrix(H))


def trace_norm(H):
    w, _ = hermitian_eigen(H)
    return float(np.abs(w).sum())


def trace_distance(X, Y):
    X, Y = _matrix(X), _matrix(Y)
    if X.shape != Y.shape:
        raise ShapeMismatch(f"operators of shape {X.shape} and {Y.shape}")
    return 0.5 * trace_norm(X - Y)


def _spectral_split(M):
    w, V = hermitian_eigen(M)
    scale = max(1.0, float(np.abs(w).max())) if w.size else 1.0
    neg = w < -ZERO_EIG_TOL * scale
    return w, V, neg


def jordan_decompose(O):
    """O = O_plus - O_minus with orthogonal supports; kernel goes to O_plus."""
    w, V, neg = _spectral_split(_matrix(O))
    pos_w = np.where(neg, 0.0, w)
    neg_w = np.where(neg, -w, 0.0)
    plus = (V * pos_w) @ V.conj().T
    minus = (V * neg_w) @ V.conj().T
    return HermitianOp(plus), HermitianOp(minus)


def negativity(O):
    """(||O||_1 - 1) / 2 for a unit-trace operator.

    Rounding can push the trace norm of a state a few ulps below 1; the
    result is floored at 0, the true value for every state.
    """
    return max(0.0, (trace_norm(O) - 1.0) / 2.0)


def closest_state(O):
    """Nearest density matrix in trace distance and that distance.

    The positive part, renormalized, attains the minimum.
    """
    plus, _ = jordan_decompose(O)
    rho = PseudoState(plus.matrix / plus.trace(), getattr(O, "bipartition", None), tol=1e-9)
    distance = negativity(O)
    achieved = trace_distance(O, rho)
    if abs(achieved - distance) > 1e-10 * max(1.0, distance):
        raise NumericalFailure(f"D(O, rho_plus) = {achieved!r} but negativity is {distance!r}")
    return rho, distance


def negativity_witness(O):
    """W = P_plus - P_minus, so Tr(W O) = ||O||_1 and ||W||_op = 1."""
    _, V, neg = _spectral_split(_matrix(O))
    signs = np.where(neg, -1.0, 1.0)
    return HermitianOp((V * signs) @ V.conj().T)


def expectation(W, O):
    return float(np.trace(_matrix(W) @ _matrix(O)).real)


def _reorder_kron(X, dX, Y, dY):
    # kron(X, Y) lives on A_X B_X A_Y B_Y; regroup to A_X A_Y B_X B_Y
    aX, bX = dX
    aY, bY = dY
    K = np.kron(X, Y).reshape(aX, bX, aY, bY, aX, bX, aY, bY)
    K = K.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    n = aX * bX * aY * bY
    return K.reshape(n, n)


def tensor(X, Y):
    """X (x) Y with Alice's factors grouped: bipartition (aX*aY, bX*bY)."""
    if X.bipartition is None or Y.bipartition is None:
        raise ShapeMismatch("tensor needs both bipartitions")
    M = _reorder_kron(X.matrix, X.bipartition, Y.matrix, Y.bipartition)
    return PseudoState(M, (X.bipartition[0] * Y.bipartition[0], X.bipartition[1] * Y.bipartition[1]), tol=1e-10)


def born_box(O, alice, bob):
    """p(a,b|x,y) = Tr(M_{a|x} (x) N_{b|y} O).

    The result is normalized but may have negative entries when O is not
    positive semidefinite.
    """
    if O.bipartition is None:
        raise ShapeMismatch("state needs a bipartition")
    dA, dB = O.bipartition
    if alice.dim != dA or bob.dim != dB:
        raise ShapeMismatch(f"assemblage dims ({alice.dim}, {bob.dim}) vs bipartition {O.bipartition}")
    p = _kernels.born(O.matrix, (dA, dB), alice.array(), bob.array())
    scenario = Scenario(alice.n_inputs, bob.n_inputs, alice.n_outcomes, bob.n_outcomes)
    return Box(scenario, p, tol=1e-10)


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(which):
    return HermitianOp(_PAULI[which.upper()])


def bell_vector(sign):
    v = np.zeros(4, dtype=complex)
    v[0] = 1.0
    v[3] = 1.0 if sign in ("+", 1) else -1.0
    return v / math.sqrt(2.0)


def bell_state(sign):
    """|psi+-><psi+-| with |psi+-> = (|00> +- |11>)/sqrt2."""
    v = bell_vector(sign)
    return PseudoState(np.outer(v, v.conj()), (2, 2))


def pure_state(vec, bipartition=None):
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return PseudoState(np.outer(v, v.conj()), bipartition, tol=1e-10)


def projective_measurement(observable):
    """Two-outcome POVM {(I + A)/2, (I - A)/2} of a +-1 valued observable."""
    A = _matrix(observable)
    eye = np.eye(A.shape[0])
    return [HermitianOp((eye + A) / 2), HermitianOp((eye - A) / 2)]


def min_eigenvalue(O):
    w, _ = hermitian_eigen(O)
    return float(w[-1])
