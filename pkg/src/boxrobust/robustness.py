"""Box-level robustness quantifiers as linear programs, with certificates.

Primal side: affine decompositions over the deterministic vertices of the
local polytope.  Dual side: a Bell functional bounded by 1 in absolute value
on every local box and taking the value 1 + 2t on the input.

LPs are solved with HiGHS through :func:`scipy.optimize.linprog`.  Nothing
downstream trusts the solver: :func:`verify_certificate` rebuilds the
vertices with plain loops and re-checks both sides.
"""

from dataclasses import dataclass, field
import enum
import itertools
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import linprog

from .correlations import (
    NS_TOL,
    BellFunctional,
    Box,
    bell_value,
    chsh_functional,
    is_no_signalling,
    require_no_signalling,
    uniform_box,
    vertex_matrix,
)
from .errors import LPInfeasible, NoQuantumBoundRegistered, NumericalFailure

CERT_TOL = 1e-8
WEIGHT_CLEAN = 1e-13


class Kind(str, enum.Enum):
    LOCAL = "LocalRobustness"
    GENERALIZED = "GeneralizedLocalRobustness"
    BEST_LOCAL = "BestLocalApprox"


@dataclass(frozen=True, eq=False)
class RobustnessResult:
    """Optimal t with (box + t * noise) / (1 + t) = target.

    ``target_weights`` (and, for local robustness, ``noise_weights``) are
    convex weights over the deterministic boxes in enumeration order.
    """

    kind: Kind
    value: float
    noise: Box
    target: Box
    target_weights: np.ndarray
    noise_weights: Optional[np.ndarray] = None
    dual: Optional[BellFunctional] = None
    gap: float = 0.0

    def to_dict(self):
        d = {
            "kind": self.kind.value,
            "value": float(self.value),
            "noise": self.noise.to_dict(),
            "target": self.target.to_dict(),
            "target_weights": self.target_weights.tolist(),
            "dual": None if self.dual is None else self.dual.to_dict(),
            "gap": float(self.gap),
        }
        if self.noise_weights is not None:
            d["noise_weights"] = self.noise_weights.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        nw = d.get("noise_weights")
        return cls(
            Kind(d["kind"]),
            float(d["value"]),
            Box.from_dict(d["noise"]),
            Box.from_dict(d["target"]),
            np.array(d["target_weights"], dtype=float),
            None if nw is None else np.array(nw, dtype=float),
            None if d.get("dual") is None else BellFunctional.from_dict(d["dual"]),
            float(d.get("gap", 0.0)),
        )


@dataclass(frozen=True, eq=False)
class LPCertificate:
    primal_weights: dict
    dual_functional: BellFunctional
    gap: float


def certificate(result):
    """The LP certificate view of a result: nonzero target weights plus dual."""
    w = {i: float(v) for i, v in enumerate(result.target_weights) if v > 0}
    return LPCertificate(w, result.dual, result.gap)


class LocalApproximation(NamedTuple):
    q_nl_min: float
    local_part: Optional[Box]
    ns_part: Optional[Box]


def _solve(c, A_eq, b_eq, A_ub=None, b_ub=None):
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status == 2:
        raise LPInfeasible(res.message)
    if res.status != 0:
        raise NumericalFailure(res.message)
    return res


def _clean(w):
    w = np.where(w < WEIGHT_CLEAN, 0.0, w)
    return w


def _ns_rows(scenario):
    """Rows of 'Alice's marginal at y equals that at y=0' and the Bob analogue."""
    nX, nY, nA, nB = scenario.shape
    n = nX * nY * nA * nB
    idx = np.arange(n).reshape(scenario.shape)
    rows = []
    for x in range(nX):
        for a in range(nA):
            for y in range(1, nY):
                r = np.zeros(n)
                r[idx[x, y, a, :]] += 1
                r[idx[x, 0, a, :]] -= 1
                rows.append(r)
    for y in range(nY):
        for b in range(nB):
            for x in range(1, nX):
                r = np.zeros(n)
                r[idx[x, y, :, b]] += 1
                r[idx[0, y, :, b]] -= 1
                rows.append(r)
    return np.array(rows).reshape(-1, n)


def _weights_box(scenario, D, w):
    s = w.sum()
    return Box(scenario, (D @ (w / s)).reshape(scenario.shape), tol=1e-9)


def _rescale_local_dual(coeffs, D):
    values = coeffs @ D
    m = float(np.abs(values).max())
    return coeffs / m if m > 0 else coeffs


def local_robustness(box, tol=NS_TOL):
    """Robustness of non-locality r_L via the (mu, nu) decomposition LP.

    minimize sum(nu) s.t. D mu - D nu = p, mu, nu >= 0.  The normalization
    sum(mu) - sum(nu) = 1 is implied by the row sums of D and p.
    """
    require_no_signalling(box, tol)
    sc = box.scenario
    D = vertex_matrix(sc)
    nv = D.shape[1]
    p = box.vector
    c = np.concatenate([np.zeros(nv), np.ones(nv)])
    res = _solve(c, np.hstack([D, -D]), p)
    mu, nu = _clean(res.x[:nv]), _clean(res.x[nv:])
    # cancel common mass so that mu_i * nu_i = 0
    common = np.minimum(mu, nu)
    mu, nu = mu - common, nu - common
    t = float(nu.sum())

    y = res.eqlin.marginals
    norm = np.full(p.size, 1.0 / (sc.nX * sc.nY))
    coeffs = _rescale_local_dual(2.0 * y + norm, D)
    dual = BellFunctional(sc, coeffs.reshape(sc.shape), classical_bound=1.0, name="robustness dual")
    dual_t = (float(coeffs @ p) - 1.0) / 2.0

    target_w = mu / mu.sum()
    target = _weights_box(sc, D, target_w)
    if t > 0:
        noise_w = nu / t
        noise = _weights_box(sc, D, noise_w)
    else:
        noise_w = np.full(nv, 1.0 / nv)
        noise = uniform_box(sc)
    return RobustnessResult(Kind.LOCAL, t, noise, target, target_w, noise_w, dual, abs(t - dual_t))


def generalized_local_robustness(box, tol=NS_TOL):
    """Generalized robustness r^G_L: the admixed noise may be any NS box.

    Variables (mu, q', t): p + q' = D mu, q' >= 0 no-signalling with row sums
    t, minimize t.  The dual is a nonnegative functional y with y(d) <= 1 on
    every vertex; t >= y(p) - 1.
    """
    require_no_signalling(box, tol)
    sc = box.scenario
    D = vertex_matrix(sc)
    nv = D.shape[1]
    n = box.vector.size
    p = box.vector
    nX, nY = sc.nX, sc.nY
    # variable layout: [mu (nv) | q' (n) | t (1)]
    blocks = [np.hstack([D, -np.eye(n), np.zeros((n, 1))])]
    rhs = [p]
    rowsum = np.zeros((nX * nY, n))
    for k in range(nX * nY):
        rowsum[k, k * sc.nA * sc.nB:(k + 1) * sc.nA * sc.nB] = 1.0
    blocks.append(np.hstack([np.zeros((nX * nY, nv)), rowsum, -np.ones((nX * nY, 1))]))
    rhs.append(np.zeros(nX * nY))
    ns = _ns_rows(sc)
    if ns.size:
        blocks.append(np.hstack([np.zeros((ns.shape[0], nv)), ns, np.zeros((ns.shape[0], 1))]))
        rhs.append(np.zeros(ns.shape[0]))
    A_eq = np.vstack(blocks)
    b_eq = np.concatenate(rhs)
    c = np.zeros(nv + n + 1)
    c[-1] = 1.0
    res = _solve(c, A_eq, b_eq)
    mu = _clean(res.x[:nv])
    t = float(max(res.x[-1], 0.0))

    # Dual multipliers (y, z, w) of the three row blocks.  The functional
    # u = rowsum^T z + ns^T w is constant on normalized NS boxes, and
    # g = y - u is nonnegative with g(d) <= 1 and t = g(p) - 1.
    m = res.eqlin.marginals
    y = m[:n] - rowsum.T @ m[n:n + nX * nY]
    if ns.size:
        y = y - ns.T @ m[n + nX * nY:]
    y = np.clip(y, 0.0, None)
    vals = y @ D
    y = y / max(1.0, float(vals.max()))
    norm = np.full(n, 1.0 / (nX * nY))
    coeffs = 2.0 * y - norm
    dual = BellFunctional(sc, coeffs.reshape(sc.shape), classical_bound=1.0, name="generalized robustness dual")
    dual_t = (float(coeffs @ p) - 1.0) / 2.0

    target_w = mu / mu.sum()
    target = _weights_box(sc, D, target_w)
    if t > WEIGHT_CLEAN:
        q = np.clip(D @ mu - p, 0.0, None)
        q = q.reshape(sc.shape)
        q = q / q.sum(axis=(2, 3), keepdims=True)
        noise = Box(sc, q, tol=1e-9)
    else:
        t = 0.0
        noise = uniform_box(sc)
    return RobustnessResult(Kind.GENERALIZED, t, noise, target, target_w, None, dual, abs(t - dual_t))


def best_local_approximation(box, tol=NS_TOL):
    """Minimal non-local weight in p = (1 - q) p_L + q p_NS, both valid boxes.

    maximize sum(mu) s.t. D mu <= p, mu >= 0.
    """
    require_no_signalling(box, tol)
    sc = box.scenario
    D = vertex_matrix(sc)
    p = box.vector
    res = linprog(-np.ones(D.shape[1]), A_ub=D, b_ub=p, bounds=(0, None), method="highs")
    if res.status != 0:
        raise NumericalFailure(res.message)
    mu = _clean(res.x)
    local_weight = min(float(mu.sum()), 1.0)
    q = 1.0 - local_weight
    if q < WEIGHT_CLEAN:
        q = 0.0
    local_part = _weights_box(sc, D, mu) if local_weight > WEIGHT_CLEAN else None
    ns_part = None
    if q > 0:
        rest = np.clip(p - D @ mu, 0.0, None).reshape(sc.shape)
        rest = rest / rest.sum(axis=(2, 3), keepdims=True)
        ns_part = Box(sc, rest, tol=1e-9)
    return LocalApproximation(q, local_part, ns_part)


# ---------------------------------------------------------------------------
# Independent certificate check
# ---------------------------------------------------------------------------


@dataclass
class CertificateReport:
    ok: bool
    gap: float
    reasons: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _fresh_vertices(scenario):
    # plain nested loops, deliberately not the kernel used by the solver
    verts = []
    for f in itertools.product(range(scenario.nA), repeat=scenario.nX):
        for g in itertools.product(range(scenario.nB), repeat=scenario.nY):
            d = np.zeros(scenario.shape)
            for x in range(scenario.nX):
                for y in range(scenario.nY):
                    d[x, y, f[x], g[y]] = 1.0
            verts.append(d)
    return verts


def _check_decomposition(label, weights, box, verts, reasons, tol):
    if weights is None or len(weights) != len(verts):
        reasons.append(f"{label}: missing or mis-sized decomposition")
        return
    if weights.min() < -tol:
        reasons.append(f"{label}: negative weight {weights.min():.3g}")
    if abs(weights.sum() - 1.0) > tol:
        reasons.append(f"{label}: weights sum to {weights.sum()!r}")
    resum = sum(w * v for w, v in zip(weights, verts))
    err = float(np.abs(resum - box.p).max())
    if err > tol:
        reasons.append(f"{label}: decomposition misses the box by {err:.3g}")


def verify_certificate(box, result, tol=CERT_TOL):
    """Re-check a robustness result from scratch.

    (i) mixture identity and explicit membership of target (and noise);
    (ii) |B(d)| <= 1 on freshly enumerated vertices, plus B >= -1 on every
    box for the generalized kind; (iii) B(p) = 1 + 2t.
    """
    reasons = []
    t = float(result.value)
    sc = box.scenario
    verts = _fresh_vertices(sc)
    if t < -tol:
        reasons.append(f"negative robustness {t}")

    mixed = (box.p + t * result.noise.p) / (1.0 + t)
    err = float(np.abs(mixed - result.target.p).max())
    if err > tol:
        reasons.append(f"mixture identity off by {err:.3g}")
    _check_decomposition("target", result.target_weights, result.target, verts, reasons, tol)

    if result.kind is Kind.LOCAL:
        _check_decomposition("noise", result.noise_weights, result.noise, verts, reasons, tol)
    else:
        if result.noise.p.min() < -tol:
            reasons.append("noise has negative entries")
        if not is_no_signalling(result.noise, tol):
            reasons.append("noise signals")

    gap = float("inf")
    B = result.dual
    if B is None:
        reasons.append("no dual functional")
    elif B.scenario != sc:
        reasons.append("dual functional on the wrong scenario")
    else:
        worst = max(abs(float(np.sum(B.coefficients * v))) for v in verts)
        if worst > 1.0 + tol:
            reasons.append(f"dual infeasible: |B(d)| reaches {worst:.6g}")
        if result.kind is Kind.GENERALIZED:
            floor = -1.0 / (sc.nX * sc.nY)
            if B.coefficients.min() < floor - tol:
                reasons.append("dual infeasible: B(w) < -1 for some box w")
        bp = float(np.sum(B.coefficients * box.p))
        gap = abs(bp - (1.0 + 2.0 * t)) / 2.0
        if abs(bp - (1.0 + 2.0 * t)) > tol:
            reasons.append(f"B(p) = {bp:.12g} but 1 + 2t = {1 + 2 * t:.12g}")
    return CertificateReport(not reasons, gap, reasons)


# ---------------------------------------------------------------------------
# Beyond-quantum floor from functionals with a known quantum bound
# ---------------------------------------------------------------------------

_REGISTRY = [chsh_functional()]


def register_functional(f):
    """Make a functional available to :func:`negativity_floor`."""
    if f.quantum_bound is None:
        raise ValueError("only functionals with a quantum bound can be registered")
    _REGISTRY.append(f)


def registered_functionals(scenario=None):
    return [f for f in _REGISTRY if scenario is None or f.scenario == scenario]


def negativity_floor(box, functionals=None, tol=NS_TOL):
    """max_f (|f(p)| / f_Q - 1) / 2, floored at 0.

    A lower bound on the negativity of every pseudo-state realizing the box.
    """
    require_no_signalling(box, tol)
    fs = registered_functionals(box.scenario) if functionals is None else list(functionals)
    fs = [f for f in fs if f.quantum_bound is not None and f.scenario == box.scenario]
    if not fs:
        raise NoQuantumBoundRegistered(f"no functional with a quantum bound for scenario {box.scenario.shape}")
    best = max((abs(bell_value(box, f)) / f.quantum_bound - 1.0) / 2.0 for f in fs)
    return max(best, 0.0)
