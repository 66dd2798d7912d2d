"""Concrete realizations of boxes by (pseudo-)states and local measurements.

Covers the noisy PR family, the flagged direct-sum combination of two
realizations, separable (classical-register) realizations of local boxes,
the affine-of-separables realization of an arbitrary NS box, and classical
wirings with a side box.
"""

from dataclasses import dataclass
import itertools
import math

import numpy as np

from . import _kernels
from .correlations import (
    CHSH_SCENARIO,
    Box,
    Scenario,
    is_no_signalling,
    require_no_signalling,
    response_functions,
    uniform_box,
)
from .errors import NotLocal, RangeError, ScenarioMismatch, ShapeMismatch
from .operators import (
    MeasurementAssemblage,
    PseudoState,
    bell_vector,
    born_box,
    pauli,
    projective_measurement,
)
from .robustness import local_robustness

PR_QUANTUM_EDGE = (2.0 - math.sqrt(2.0)) / 4.0
REALIZATION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Realization:
    state: PseudoState
    alice: MeasurementAssemblage
    bob: MeasurementAssemblage
    box: Box

    @classmethod
    def build(cls, state, alice, bob):
        return cls(state, alice, bob, born_box(state, alice, bob))

    def check(self, tol=REALIZATION_TOL):
        return born_box(self.state, self.alice, self.bob).allclose(self.box, tol)

    def to_dict(self):
        return {
            "state": self.state.to_dict(),
            "alice": self.alice.to_dict(),
            "bob": self.bob.to_dict(),
            "box": self.box.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            PseudoState.from_dict(d["state"]),
            MeasurementAssemblage.from_dict(d["alice"]),
            MeasurementAssemblage.from_dict(d["bob"]),
            Box.from_dict(d["box"]),
        )


# ---------------------------------------------------------------------------
# Noisy PR family
# ---------------------------------------------------------------------------


def _check_eps(eps):
    if not 0.0 <= eps <= 0.5:
        raise RangeError(f"eps must lie in [0, 1/2], got {eps!r}")


def pr_box(eps=0.0):
    _check_eps(eps)
    p = np.empty((2, 2, 2, 2))
    for x, y, a, b in itertools.product(range(2), repeat=4):
        p[x, y, a, b] = (1.0 - eps) / 2.0 if (a ^ b) == (x & y) else eps / 2.0
    return Box(CHSH_SCENARIO, p)


def pr_symmetric_boxes():
    """The 8 PR-type vertices: a ^ b = xy ^ alpha x ^ beta y ^ gamma."""
    out = []
    for alpha, beta, gamma in itertools.product(range(2), repeat=3):
        p = np.zeros((2, 2, 2, 2))
        for x, y, a, b in itertools.product(range(2), repeat=4):
            if (a ^ b) == ((x & y) ^ (alpha & x) ^ (beta & y) ^ gamma):
                p[x, y, a, b] = 0.5
        out.append(Box(CHSH_SCENARIO, p))
    return out


def pr_pseudostate(eps=0.0):
    _check_eps(eps)
    s = math.sqrt(2.0) * (1.0 - 2.0 * eps)
    plus, minus = bell_vector("+"), bell_vector("-")
    O = (1.0 + s) / 2.0 * np.outer(plus, plus.conj()) + (1.0 - s) / 2.0 * np.outer(minus, minus.conj())
    return PseudoState(O, (2, 2))


# Outcome labels: PR_LABELS[k] = 1 swaps outcomes 0 and 1 of POVM k, in the
# order (Alice x=0, Alice x=1, Bob y=0, Bob y=1).  Fixed by
# search_pr_labels(); see the regression test.
PR_LABELS = (0, 0, 0, 0)


def _pr_observables():
    X, Y = pauli("X").matrix, pauli("Y").matrix
    r = 1.0 / math.sqrt(2.0)
    return [X, Y], [r * (X - Y), r * (X + Y)]


def _labelled(observables, flips):
    povms = []
    for A, flip in zip(observables, flips):
        effects = projective_measurement(A)
        povms.append(effects[::-1] if flip else effects)
    return MeasurementAssemblage(povms)


def pr_measurements(labels=PR_LABELS):
    """Alice measures sx, sy; Bob measures (sx -+ sy)/sqrt2."""
    alice_obs, bob_obs = _pr_observables()
    return _labelled(alice_obs, labels[:2]), _labelled(bob_obs, labels[2:])


def search_pr_labels():
    """First of the 16 outcome labellings that maps O_PR onto the PR box."""
    target = pr_box(0.0)
    state = pr_pseudostate(0.0)
    for labels in itertools.product(range(2), repeat=4):
        alice, bob = pr_measurements(labels)
        if born_box(state, alice, bob).allclose(target, REALIZATION_TOL):
            return labels
    return None


def pr_realization(eps=0.0):
    alice, bob = pr_measurements()
    return Realization.build(pr_pseudostate(eps), alice, bob)


# ---------------------------------------------------------------------------
# Flagged combination of two realizations
# ---------------------------------------------------------------------------


def _embed_operator(O, dims, new_dims):
    # zero-pad each tensor factor
    dA, dB = dims
    nA, nB = new_dims
    T = np.asarray(O).reshape(dA, dB, dA, dB)
    out = np.zeros((nA, nB, nA, nB), dtype=complex)
    out[:dA, :dB, :dA, :dB] = T
    return out.reshape(nA * nB, nA * nB)


def _embed_assemblage(assemblage, new_dim):
    # pad effects with zeros; the padded subspace is assigned to outcome 0
    d = assemblage.dim
    if d == new_dim:
        return assemblage.array()
    arr = assemblage.array()
    out = np.zeros(arr.shape[:2] + (new_dim, new_dim), dtype=complex)
    out[:, :, :d, :d] = arr
    pad = np.zeros((new_dim, new_dim))
    pad[d:, d:] = np.eye(new_dim - d)
    out[:, 0] += pad
    return out


_FLAG = (np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))


def lemma1_combine(r1, r2, q):
    """Realization of (1 - q) p1 + q p2 for any real q.

    The two operators sit on orthogonal flag sectors |00><00| and |11><11|
    of two extra qubits, one held by each party; each party's effects read
    their flag and apply the matching measurement.  Spaces are ordered
    (A C) : (B D).
    """
    if r1.box.scenario != r2.box.scenario:
        raise ScenarioMismatch("realizations must share the input/output scenario")
    (a1, b1), (a2, b2) = r1.state.bipartition, r2.state.bipartition
    dA, dB = max(a1, a2), max(b1, b2)
    O1 = _embed_operator(r1.state.matrix, (a1, b1), (dA, dB))
    O2 = _embed_operator(r2.state.matrix, (a2, b2), (dA, dB))
    M1, M2 = _embed_assemblage(r1.alice, dA), _embed_assemblage(r2.alice, dA)
    N1, N2 = _embed_assemblage(r1.bob, dB), _embed_assemblage(r2.bob, dB)

    def flagged(O, k):
        T = np.kron(O, np.kron(_FLAG[k], _FLAG[k]))  # A B C D
        T = T.reshape(dA, dB, 2, 2, dA, dB, 2, 2).transpose(0, 2, 1, 3, 4, 6, 5, 7)
        n = 4 * dA * dB
        return T.reshape(n, n)

    O = (1.0 - q) * flagged(O1, 0) + q * flagged(O2, 1)
    state = PseudoState(O, (2 * dA, 2 * dB), tol=1e-10)

    def effects(E1, E2):
        return [
            [np.kron(E1[x, a], _FLAG[0]) + np.kron(E2[x, a], _FLAG[1]) for a in range(E1.shape[1])]
            for x in range(E1.shape[0])
        ]

    alice = MeasurementAssemblage(effects(M1, M2))
    bob = MeasurementAssemblage(effects(N1, N2))
    return Realization.build(state, alice, bob)


# ---------------------------------------------------------------------------
# Separable realizations of local boxes
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SeparableForm:
    """sum_k w_k alice_k (x) bob_k with w_k >= 0 and states alice_k, bob_k."""

    weights: np.ndarray
    alice_states: tuple
    bob_states: tuple

    def operator(self):
        dA = self.alice_states[0].shape[0]
        dB = self.bob_states[0].shape[0]
        out = np.zeros((dA * dB, dA * dB), dtype=complex)
        for w, ra, rb in zip(self.weights, self.alice_states, self.bob_states):
            out += w * np.kron(ra, rb)
        return out

    def is_valid(self, tol=1e-10):
        if self.weights.min() < -tol or abs(self.weights.sum() - 1.0) > tol:
            return False
        for r in self.alice_states + self.bob_states:
            if abs(np.trace(r) - 1.0) > tol or np.linalg.eigvalsh(r)[0] < -tol:
                return False
        return True

    def flagged(self, k):
        """The same form tensored with |k><k| on each party's flag qubit."""
        f = _FLAG[k]
        return SeparableForm(
            self.weights,
            tuple(np.kron(r, f) for r in self.alice_states),
            tuple(np.kron(r, f) for r in self.bob_states),
        )


def certify_separable(operator, form, tol=1e-10):
    """True iff ``form`` is a valid convex product form summing to ``operator``."""
    M = operator.matrix if hasattr(operator, "matrix") else np.asarray(operator)
    return form.is_valid(tol) and float(np.abs(form.operator() - M).max()) <= tol


@dataclass(frozen=True, eq=False)
class SeparableRealization(Realization):
    form: SeparableForm = None


def local_box_to_separable(box, decomposition, tol=REALIZATION_TOL):
    """Classical-register realization of a local box.

    Alice holds one basis vector |f> per response function f: X -> A that
    appears with positive weight (Bob likewise with g); the state is
    sum q_fg |f><f| (x) |g><g| and M_{a|x} projects onto {f : f(x) = a}.
    """
    sc = box.scenario
    w = np.asarray(decomposition, dtype=float)
    if w.shape != (sc.n_vertices,):
        raise NotLocal(f"expected {sc.n_vertices} weights, got shape {w.shape}")
    if w.min() < -tol or abs(w.sum() - 1.0) > tol:
        raise NotLocal("decomposition is not a probability vector")
    w = np.where(w > 1e-15, w, 0.0)
    w = w / w.sum()
    support = np.flatnonzero(w)
    pairs = [response_functions(sc, int(i)) for i in support]
    fs = sorted({f for f, _ in pairs})
    gs = sorted({g for _, g in pairs})
    fi = {f: k for k, f in enumerate(fs)}
    gi = {g: k for k, g in enumerate(gs)}
    dA, dB = len(fs), len(gs)

    weights, alice_states, bob_states = [], [], []
    for i, (f, g) in zip(support, pairs):
        weights.append(w[i])
        ra = np.zeros((dA, dA), dtype=complex)
        ra[fi[f], fi[f]] = 1.0
        rb = np.zeros((dB, dB), dtype=complex)
        rb[gi[g], gi[g]] = 1.0
        alice_states.append(ra)
        bob_states.append(rb)
    form = SeparableForm(np.array(weights), tuple(alice_states), tuple(bob_states))
    state = PseudoState(form.operator(), (dA, dB), tol=1e-10)

    alice = MeasurementAssemblage(
        [[np.diag([1.0 if f[x] == a else 0.0 for f in fs]) for a in range(sc.nA)] for x in range(sc.nX)]
    )
    bob = MeasurementAssemblage(
        [[np.diag([1.0 if g[y] == b else 0.0 for g in gs]) for b in range(sc.nB)] for y in range(sc.nY)]
    )
    out = born_box(state, alice, bob)
    if not out.allclose(box, tol):
        raise NotLocal(f"decomposition does not reproduce the box (error {np.abs(out.p - box.p).max():.3g})")
    return SeparableRealization(state, alice, bob, out, form)


@dataclass(frozen=True, eq=False)
class AffineSeparableRealization:
    """Realization whose state is c_plus * S_plus + c_minus * S_minus.

    Both blocks carry an explicit separable form across the (A C):(B D) cut.
    """

    realization: Realization
    robustness: float
    coefficients: tuple
    blocks: tuple
    forms: tuple

    @property
    def box(self):
        return self.realization.box

    @property
    def state(self):
        return self.realization.state

    def check(self, tol=1e-9):
        ok = all(certify_separable(B, F, 1e-10) for B, F in zip(self.blocks, self.forms))
        c1, c2 = self.coefficients
        resum = c1 * self.blocks[0] + c2 * self.blocks[1]
        return ok and float(np.abs(resum - self.state.matrix).max()) <= tol and self.realization.check(tol)


def prop2_pseudostate(box):
    """Realize a no-signalling box by an affine combination of separable states.

    Writes p = (1 + t) p_plus - t p_minus with t = r_L(p) and p_plus, p_minus
    local, realizes each with classical registers and combines them on flag
    qubits with coefficients (1 + t, -t).
    """
    require_no_signalling(box)
    res = local_robustness(box)
    t = res.value
    plus = local_box_to_separable(res.target, res.target_weights)
    minus = local_box_to_separable(res.noise, res.noise_weights)
    combined = lemma1_combine(plus, minus, -t)
    dA, dB = combined.state.bipartition
    blocks, forms = [], []
    for k, r in enumerate((plus, minus)):
        a, b = r.state.bipartition
        emb = _embed_operator(r.state.matrix, (a, b), (dA // 2, dB // 2))
        blk = np.kron(emb, np.kron(_FLAG[k], _FLAG[k]))
        blk = blk.reshape(dA // 2, dB // 2, 2, 2, dA // 2, dB // 2, 2, 2).transpose(0, 2, 1, 3, 4, 6, 5, 7)
        blocks.append(blk.reshape(dA * dB, dA * dB))
        form = r.form
        if (a, b) != (dA // 2, dB // 2):
            form = SeparableForm(
                form.weights,
                tuple(_pad(s, dA // 2) for s in form.alice_states),
                tuple(_pad(s, dB // 2) for s in form.bob_states),
            )
        forms.append(form.flagged(k))
    return AffineSeparableRealization(combined, t, (1.0 + t, -t), tuple(blocks), tuple(forms))


def _pad(m, d):
    out = np.zeros((d, d), dtype=complex)
    out[: m.shape[0], : m.shape[1]] = m
    return out


# ---------------------------------------------------------------------------
# Classical wirings with a side box
# ---------------------------------------------------------------------------


def _stochastic(arr, name, tol=1e-12):
    arr = np.array(arr, dtype=float)
    if arr.min() < 0 or np.abs(arr.sum(axis=-1) - 1.0).max() > tol:
        raise ValueError(f"{name} is not a stochastic map (rows must be nonnegative and sum to 1)")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Wiring:
    """One round of local classical pre/post-processing around a box.

    Alice receives x', reads her share s of the side box, feeds
    x ~ alice_pre[x', s, :] into the box, receives a and outputs
    a' ~ alice_post[x', s, a, :].  Bob does the same independently.  The side
    box is queried with (x', y') if it has that many inputs, or with (0, 0)
    if it has a single input per party.
    """

    alice_pre: np.ndarray   # (nX', nSA, nX)
    alice_post: np.ndarray  # (nX', nSA, nA, nA')
    bob_pre: np.ndarray     # (nY', nSB, nY)
    bob_post: np.ndarray    # (nY', nSB, nB, nB')
    side_box: Box

    def __post_init__(self):
        for name in ("alice_pre", "alice_post", "bob_pre", "bob_post"):
            object.__setattr__(self, name, _stochastic(getattr(self, name), name))
        nX2, nSA, _ = self.alice_pre.shape
        nY2, nSB, _ = self.bob_pre.shape
        if self.alice_post.shape[:2] != (nX2, nSA) or self.bob_post.shape[:2] != (nY2, nSB):
            raise ShapeMismatch("pre- and post-processing disagree on input or side-outcome counts")
        s = self.side_box.scenario
        if (s.nA, s.nB) != (nSA, nSB):
            raise ShapeMismatch("side box outcome counts do not match the wiring")
        if (s.nX, s.nY) not in ((1, 1), (nX2, nY2)):
            raise ShapeMismatch("side box must take no input or the outer inputs")

    @property
    def in_scenario(self):
        return Scenario(self.alice_pre.shape[2], self.bob_pre.shape[2], self.alice_post.shape[2], self.bob_post.shape[2])

    @property
    def out_scenario(self):
        return Scenario(self.alice_pre.shape[0], self.bob_pre.shape[0], self.alice_post.shape[3], self.bob_post.shape[3])

    def side_table(self):
        nX2, nY2 = self.alice_pre.shape[0], self.bob_pre.shape[0]
        s = self.side_box.p
        if s.shape[:2] == (1, 1):
            s = np.broadcast_to(s, (nX2, nY2) + s.shape[2:])
        return s

    def to_dict(self):
        return {
            "alice_pre": self.alice_pre.tolist(),
            "alice_post": self.alice_post.tolist(),
            "bob_pre": self.bob_pre.tolist(),
            "bob_post": self.bob_post.tolist(),
            "side_box": self.side_box.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["alice_pre"], d["alice_post"], d["bob_pre"], d["bob_post"], Box.from_dict(d["side_box"]))


def apply_wiring(box, wiring):
    if box.scenario != wiring.in_scenario:
        raise ShapeMismatch(f"wiring expects a {wiring.in_scenario.shape} box, got {box.scenario.shape}")
    if not is_no_signalling(wiring.side_box):
        raise ShapeMismatch("side box must be no-signalling")
    p = _kernels.wire(box.p, wiring.side_table(), wiring.alice_pre, wiring.alice_post, wiring.bob_pre, wiring.bob_post)
    return Box(wiring.out_scenario, p, tol=1e-10)


def identity_wiring(scenario):
    nX, nY, nA, nB = scenario.shape
    return Wiring(
        np.eye(nX)[:, None, :],
        np.broadcast_to(np.eye(nA), (nX, 1, nA, nA)),
        np.eye(nY)[:, None, :],
        np.broadcast_to(np.eye(nB), (nY, 1, nB, nB)),
        uniform_box(Scenario(1, 1, 1, 1)),
    )


def relabel_wiring(scenario, x_perm=None, y_perm=None, a_flip=None, b_flip=None):
    """Deterministic relabelling: x = x_perm[x'], a' = a_flip[x'][a], etc."""
    nX, nY, nA, nB = scenario.shape
    x_perm = range(nX) if x_perm is None else x_perm
    y_perm = range(nY) if y_perm is None else y_perm
    a_flip = [list(range(nA))] * nX if a_flip is None else a_flip
    b_flip = [list(range(nB))] * nY if b_flip is None else b_flip
    apre = np.zeros((nX, 1, nX))
    apost = np.zeros((nX, 1, nA, nA))
    for x2, x in enumerate(x_perm):
        apre[x2, 0, x] = 1.0
        for a, a2 in enumerate(a_flip[x2]):
            apost[x2, 0, a, a2] = 1.0
    bpre = np.zeros((nY, 1, nY))
    bpost = np.zeros((nY, 1, nB, nB))
    for y2, y in enumerate(y_perm):
        bpre[y2, 0, y] = 1.0
        for b, b2 in enumerate(b_flip[y2]):
            bpost[y2, 0, b, b2] = 1.0
    return Wiring(apre, apost, bpre, bpost, uniform_box(Scenario(1, 1, 1, 1)))


def _random_stochastic(rng, shape, sharpness):
    # Dirichlet rows; small sharpness pushes towards deterministic maps
    return rng.dirichlet(np.full(shape[-1], sharpness), size=shape[:-1])


def random_local_box(scenario, rng, n_terms=None):
    from .correlations import vertex_matrix

    D = vertex_matrix(scenario)
    k = D.shape[1] if n_terms is None else n_terms
    idx = rng.choice(D.shape[1], size=min(k, D.shape[1]), replace=False)
    w = rng.dirichlet(np.ones(len(idx)))
    return Box(scenario, (D[:, idx] @ w).reshape(scenario.shape), tol=1e-10)


def random_wiring(in_scenario, out_scenario=None, side_outcomes=(2, 2), rng=None, sharpness=0.3):
    """Random classical wiring with a random local side box."""
    rng = np.random.default_rng(rng)
    out_scenario = in_scenario if out_scenario is None else out_scenario
    nSA, nSB = side_outcomes
    side = random_local_box(Scenario(out_scenario.nX, out_scenario.nY, nSA, nSB), rng)
    return Wiring(
        _random_stochastic(rng, (out_scenario.nX, nSA, in_scenario.nX), sharpness),
        _random_stochastic(rng, (out_scenario.nX, nSA, in_scenario.nA, out_scenario.nA), sharpness),
        _random_stochastic(rng, (out_scenario.nY, nSB, in_scenario.nY), sharpness),
        _random_stochastic(rng, (out_scenario.nY, nSB, in_scenario.nB, out_scenario.nB), sharpness),
        side,
    )


def depolarizing_wiring(scenario, weight):
    """With probability ``weight`` (shared via the side box) both parties
    output uniformly random results; otherwise they pass the box through."""
    nX, nY, nA, nB = scenario.shape
    side = Box(Scenario(1, 1, 2, 2), np.array([[[[1 - weight, 0.0], [0.0, weight]]]]))
    apre = np.repeat(np.eye(nX)[:, None, :], 2, axis=1)
    bpre = np.repeat(np.eye(nY)[:, None, :], 2, axis=1)
    apost = np.empty((nX, 2, nA, nA))
    apost[:, 0] = np.eye(nA)
    apost[:, 1] = 1.0 / nA
    bpost = np.empty((nY, 2, nB, nB))
    bpost[:, 0] = np.eye(nB)
    bpost[:, 1] = 1.0 / nB
    return Wiring(apre, apost, bpre, bpost, side)
