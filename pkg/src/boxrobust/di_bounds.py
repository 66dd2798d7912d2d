"""Device-independent bounds from a box alone.

Given only the observed correlations, bound from below the trace norm (hence
negativity) of any pseudo-state that realizes them, and the generalized
entanglement robustness of any quantum state that realizes them.
"""

from dataclasses import dataclass, field
import hashlib
import math

from . import __version__
from .correlations import CHSH_SCENARIO, bell_value, chsh_functional, require_no_signalling
from .errors import RangeError
from .io import canonical_json
from .operators import trace_norm
from .robustness import generalized_local_robustness, registered_functionals

SATURATION_TOL = 1e-9


def _assumption(f):
    if f.name == "CHSH" and f.quantum_bound == math.sqrt(2.0):
        return "quantum bound √2 for CHSH taken as known"
    return f"quantum bound {f.quantum_bound!r} for {f.name or 'user functional'} taken as known"


def box_digest(box):
    return hashlib.sha256(canonical_json(box.to_dict()).encode()).hexdigest()


@dataclass(frozen=True)
class DICertificate:
    box_digest: str
    chsh_value: float
    trace_norm_floor: float
    negativity_floor: float
    entanglement_floor: float
    assumptions: list = field(default_factory=list)

    def to_dict(self):
        return {
            "box_digest": self.box_digest,
            "chsh_value": self.chsh_value,
            "trace_norm_floor": self.trace_norm_floor,
            "negativity_floor": self.negativity_floor,
            "entanglement_floor": self.entanglement_floor,
            "assumptions": list(self.assumptions),
            "version": __version__,
        }


def certify(box, functionals=None):
    """Lower bounds valid for every realization of ``box``.

    trace_norm_floor = max(1, max_f |f(p)| / f_Q) over functionals with a
    known quantum bound; entanglement_floor = r^G_L(p).
    """
    require_no_signalling(box)
    fs = registered_functionals(box.scenario) if functionals is None else list(functionals)
    fs = [f for f in fs if f.quantum_bound is not None and f.scenario == box.scenario]
    assumptions = [_assumption(f) for f in fs]
    if box.scenario == CHSH_SCENARIO:
        chsh = abs(bell_value(box, chsh_functional()))
        if not any(f.name == "CHSH" for f in fs):
            fs.append(chsh_functional())
            assumptions.append(_assumption(fs[-1]))
    else:
        chsh = None
    ratio = max([1.0] + [abs(bell_value(box, f)) / f.quantum_bound for f in fs])
    entanglement = generalized_local_robustness(box).value
    assumptions.append("r^G_L computed with noise over the no-signalling set")
    return DICertificate(box_digest(box), chsh, ratio, (ratio - 1.0) / 2.0, entanglement, assumptions)


@dataclass(frozen=True)
class SaturationReport:
    eps: float
    floor: float
    actual: float

    @property
    def difference(self):
        return abs(self.actual - self.floor)

    @property
    def saturated(self):
        return self.difference <= SATURATION_TOL


def saturation_report(eps):
    """Compare the CHSH trace-norm floor of p_eps with ||O_eps||_1."""
    from .constructions import PR_QUANTUM_EDGE, pr_box, pr_pseudostate

    if not 0.0 <= eps <= PR_QUANTUM_EDGE + 1e-15:
        raise RangeError(f"eps must lie in [0, (2 - sqrt2)/4], got {eps!r}")
    eps = min(eps, PR_QUANTUM_EDGE)
    floor = certify(pr_box(eps)).trace_norm_floor
    actual = trace_norm(pr_pseudostate(eps))
    return SaturationReport(eps, floor, actual)
