"""Boxes p(a,b|x,y) over a fixed input/output scenario.

A :class:`Box` stores the dense tensor indexed ``[x, y, a, b]``.  Rows are
normalized at construction; nonnegativity is *not* enforced, so the same type
carries the pseudo-probability tensors produced by non-positive operators or
by affine mixing.  Use :func:`is_probability` to ask.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import _kernels
from .errors import ShapeMismatch, SignallingInput, TooLarge, WeightSumMismatch, NotNormalized

NORMALIZATION_TOL = 1e-12
NS_TOL = 1e-9
DEFAULT_VERTEX_CAP = 10**6


@dataclass(frozen=True)
class Scenario:
    nX: int
    nY: int
    nA: int
    nB: int

    def __post_init__(self):
        for name in ("nX", "nY", "nA", "nB"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def shape(self):
        return (self.nX, self.nY, self.nA, self.nB)

    @property
    def n_vertices(self):
        return self.nA**self.nX * self.nB**self.nY

    def to_dict(self):
        return {"nX": self.nX, "nY": self.nY, "nA": self.nA, "nB": self.nB}

    @classmethod
    def from_dict(cls, d):
        return cls(d["nX"], d["nY"], d["nA"], d["nB"])


CHSH_SCENARIO = Scenario(2, 2, 2, 2)


class Box:
    """Normalized (pseudo-)probability tensor p[x, y, a, b].

    Immutable: the underlying array is a read-only copy.
    """

    __slots__ = ("scenario", "p")

    def __init__(self, scenario, p, tol=NORMALIZATION_TOL):
        p = np.array(p, dtype=np.float64)
        if p.shape != scenario.shape:
            raise ShapeMismatch(f"tensor shape {p.shape} does not match scenario {scenario.shape}")
        if not np.all(np.isfinite(p)):
            raise ValueError("box entries must be finite")
        sums = p.sum(axis=(2, 3))
        # affine mixes with large weights carry proportionally larger rounding
        scale = max(1.0, float(np.abs(p).sum(axis=(2, 3)).max()))
        if np.abs(sums - 1.0).max() > tol * scale:
            raise NotNormalized(f"rows sum to {sums.ravel()} (tol {tol})")
        p.setflags(write=False)
        object.__setattr__(self, "scenario", scenario)
        object.__setattr__(self, "p", p)

    def __setattr__(self, name, value):
        raise AttributeError("Box is immutable")

    @classmethod
    def from_array(cls, p, tol=NORMALIZATION_TOL):
        p = np.asarray(p, dtype=np.float64)
        if p.ndim != 4:
            raise ShapeMismatch(f"expected a 4-index tensor, got shape {p.shape}")
        return cls(Scenario(*p.shape), p, tol=tol)

    def __repr__(self):
        s = self.scenario
        return f"Box(scenario=({s.nX},{s.nY},{s.nA},{s.nB}))"

    def __eq__(self, other):
        return isinstance(other, Box) and self.scenario == other.scenario and np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash((self.scenario, self.p.tobytes()))

    @property
    def vector(self):
        return self.p.ravel()

    def allclose(self, other, atol):
        return self.scenario == other.scenario and float(np.abs(self.p - other.p).max()) <= atol

    def to_dict(self):
        return {"scenario": self.scenario.to_dict(), "p": self.p.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(Scenario.from_dict(d["scenario"]), np.array(d["p"], dtype=np.float64))


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """Linear functional B(p) = sum B(a,b|x,y) p(a,b|x,y).

    ``classical_bound`` bounds |B| on the local polytope; ``quantum_bound``,
    when known, bounds it on the quantum set.
    """

    scenario: Scenario
    coefficients: np.ndarray
    classical_bound: float
    quantum_bound: float = None
    name: str = ""

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=np.float64)
        if c.shape != self.scenario.shape:
            raise ShapeMismatch(f"coefficient shape {c.shape} does not match scenario {self.scenario.shape}")
        if not self.classical_bound > 0:
            raise ValueError("classical_bound must be positive")
        if self.quantum_bound is not None and not self.quantum_bound > 0:
            raise ValueError("quantum_bound must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def scaled(self, factor):
        qb = None if self.quantum_bound is None else self.quantum_bound * abs(factor)
        return BellFunctional(self.scenario, self.coefficients * factor, self.classical_bound * abs(factor), qb, self.name)

    def to_dict(self):
        d = {
            "scenario": self.scenario.to_dict(),
            "coefficients": self.coefficients.tolist(),
            "classical_bound": float(self.classical_bound),
        }
        if self.quantum_bound is not None:
            d["quantum_bound"] = float(self.quantum_bound)
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            Scenario.from_dict(d["scenario"]),
            np.array(d["coefficients"], dtype=np.float64),
            float(d["classical_bound"]),
            d.get("quantum_bound"),
            d.get("name", ""),
        )


def is_probability(box, tol=NS_TOL):
    return bool(box.p.min() >= -tol)


def _alice_signalling(box):
    marg = box.p.sum(axis=3)  # (x, y, a)
    return float(np.abs(marg - marg[:, :1, :]).max())


def _bob_signalling(box):
    marg = box.p.sum(axis=2)  # (x, y, b)
    return float(np.abs(marg - marg[:1, :, :]).max())


def signalling_violation(box):
    """Largest entrywise change of a marginal under the other party's input."""
    return max(_alice_signalling(box), _bob_signalling(box))


def is_no_signalling(box, tol=NS_TOL):
    return signalling_violation(box) <= tol


def require_no_signalling(box, tol=NS_TOL):
    v = signalling_violation(box)
    if v > tol:
        raise SignallingInput(f"box signals: marginal varies by {v:.3g} > tol {tol:g}")


def marginal_alice(box, x, tol=NS_TOL):
    """p(a|x), read at y = 0 after checking Bob's input does not matter."""
    v = _alice_signalling(box)
    if v > tol:
        raise SignallingInput(f"Alice's marginal depends on y (deviation {v:.3g})")
    return box.p[x, 0].sum(axis=1).copy()


def marginal_bob(box, y, tol=NS_TOL):
    v = _bob_signalling(box)
    if v > tol:
        raise SignallingInput(f"Bob's marginal depends on x (deviation {v:.3g})")
    return box.p[0, y].sum(axis=0).copy()


def vertex_matrix(scenario, cap=DEFAULT_VERTEX_CAP):
    """Deterministic boxes as columns, flattened in (x, y, a, b) row-major order."""
    n = scenario.n_vertices
    if n > cap:
        raise TooLarge(f"{n} deterministic boxes exceed the cap {cap}")
    return _kernels.vertex_matrix(*scenario.shape)


def enumerate_local_deterministic(scenario, cap=DEFAULT_VERTEX_CAP):
    """All deterministic product boxes, index f * nB**nY + g.

    f is the base-nA integer with digits (f(0), ..., f(nX-1)), most
    significant first; g likewise for Bob.
    """
    D = vertex_matrix(scenario, cap)
    return [Box(scenario, D[:, i].reshape(scenario.shape)) for i in range(D.shape[1])]


def response_functions(scenario, index):
    """Decode a deterministic-box index into the tuples (f(x))_x and (g(y))_y."""
    ng = scenario.nB**scenario.nY
    f, g = divmod(index, ng)
    fx = []
    for _ in range(scenario.nX):
        f, r = divmod(f, scenario.nA)
        fx.append(r)
    gy = []
    for _ in range(scenario.nY):
        g, r = divmod(g, scenario.nB)
        gy.append(r)
    return tuple(reversed(fx)), tuple(reversed(gy))


def deterministic_box(scenario, f, g):
    p = np.zeros(scenario.shape)
    for x in range(scenario.nX):
        for y in range(scenario.nY):
            p[x, y, f[x], g[y]] = 1.0
    return Box(scenario, p)


def mix(boxes, weights, tol=NORMALIZATION_TOL):
    """Affine combination sum_i w_i p_i; weights may be negative."""
    boxes = list(boxes)
    weights = np.asarray(weights, dtype=np.float64)
    if len(boxes) != len(weights) or not boxes:
        raise ShapeMismatch("need one weight per box")
    if abs(weights.sum() - 1.0) > tol:
        raise WeightSumMismatch(f"weights sum to {weights.sum()!r}, not 1")
    scenario = boxes[0].scenario
    if any(b.scenario != scenario for b in boxes):
        raise ShapeMismatch("boxes live in different scenarios")
    p = np.tensordot(weights, np.stack([b.p for b in boxes]), axes=1)
    return Box(scenario, p)


def bell_value(box, f):
    if box.scenario != f.scenario:
        raise ShapeMismatch(f"functional on {f.scenario.shape} applied to box on {box.scenario.shape}")
    return float(np.dot(f.coefficients.ravel(), box.p.ravel()))


def local_bound(f):
    """max |B(d)| over the deterministic vertices."""
    values = f.coefficients.ravel() @ vertex_matrix(f.scenario)
    return float(np.abs(values).max())


def chsh_functional():
    c = np.empty((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    c[x, y, a, b] = 0.5 * (-1) ** ((a ^ b) ^ (x & y))
    return BellFunctional(CHSH_SCENARIO, c, classical_bound=1.0, quantum_bound=math.sqrt(2.0), name="CHSH")


def uniform_box(scenario):
    return Box(scenario, np.full(scenario.shape, 1.0 / (scenario.nA * scenario.nB)))


def normalization_functional(scenario):
    """The functional equal to 1 on every normalized box."""
    c = np.full(scenario.shape, 1.0 / (scenario.nX * scenario.nY))
    return BellFunctional(scenario, c, classical_bound=1.0, name="normalization")
