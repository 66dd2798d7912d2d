import math

import numpy as np
import pytest

from boxrobust.constructions import PR_QUANTUM_EDGE, pr_box, pr_realization
from boxrobust.correlations import CHSH_SCENARIO, BellFunctional, Scenario, uniform_box
from boxrobust.di_bounds import DICertificate, box_digest, certify, saturation_report
from boxrobust.errors import RangeError
from boxrobust.operators import trace_norm
from boxrobust.robustness import generalized_local_robustness
from boxrobust.sampling import random_local_mixture, random_ns_box


def test_pr_certificate():
    cert = certify(pr_box())
    assert cert.chsh_value == pytest.approx(2.0)
    assert cert.trace_norm_floor == pytest.approx(math.sqrt(2))
    assert cert.negativity_floor == pytest.approx((math.sqrt(2) - 1) / 2)
    assert cert.entanglement_floor == pytest.approx(1 / 3)
    assert any("√2" in a for a in cert.assumptions)


def test_local_box_has_trivial_floors():
    cert = certify(uniform_box(CHSH_SCENARIO))
    assert cert.trace_norm_floor == 1.0 and cert.negativity_floor == 0.0
    assert cert.entanglement_floor == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("eps", np.linspace(0, PR_QUANTUM_EDGE, 7))
def test_saturation(eps):
    rep = saturation_report(eps)
    assert rep.saturated, rep.difference


def test_saturation_range():
    with pytest.raises(RangeError):
        saturation_report(0.2)


def test_floor_below_any_realization(rng):
    for _ in range(10):
        box = random_ns_box(rng)
        from boxrobust.constructions import prop2_pseudostate

        real = prop2_pseudostate(box)
        assert trace_norm(real.state) >= certify(box).trace_norm_floor - 1e-9
    r = pr_realization(0.05)
    assert trace_norm(r.state) >= certify(r.box).trace_norm_floor - 1e-9


def test_entanglement_floor_is_generalized_robustness(rng):
    box = random_ns_box(rng)
    assert certify(box).entanglement_floor == generalized_local_robustness(box).value


def test_other_scenario_has_no_chsh(rng):
    box, _ = random_local_mixture(Scenario(3, 2, 2, 2), rng)
    cert = certify(box)
    assert cert.chsh_value is None and cert.trace_norm_floor == 1.0


def test_user_functional_assumption_listed():
    f = BellFunctional(CHSH_SCENARIO, np.zeros((2, 2, 2, 2)) + 0.25, 1.0, 1.0, "flat")
    cert = certify(pr_box(), [f])
    assert any("flat" in a for a in cert.assumptions)


def test_digest_and_dict():
    assert box_digest(pr_box()) == box_digest(pr_box(0.0))
    assert box_digest(pr_box()) != box_digest(pr_box(0.1))
    d = certify(pr_box()).to_dict()
    assert set(d) >= {"box_digest", "trace_norm_floor", "negativity_floor", "entanglement_floor", "version"}
    assert isinstance(certify(pr_box()), DICertificate)


def _chsh_symmetries():
    """Relabellings g with CHSH(g(p)) = +-CHSH(p) for every box p."""
    import itertools

    from boxrobust.constructions import apply_wiring, relabel_wiring
    from boxrobust.correlations import bell_value, chsh_functional, enumerate_local_deterministic

    f = chsh_functional()
    verts = enumerate_local_deterministic(CHSH_SCENARIO)
    out = []
    perms = [(0, 1), (1, 0)]
    for xp, yp, a0, a1, b0, b1 in itertools.product(perms, repeat=6):
        w = relabel_wiring(CHSH_SCENARIO, xp, yp, [a0, a1], [b0, b1])
        vals = [(bell_value(apply_wiring(d, w), f), bell_value(d, f)) for d in verts]
        if all(abs(u - v) < 1e-12 for u, v in vals) or all(abs(u + v) < 1e-12 for u, v in vals):
            out.append(w)
    return out


def test_certify_invariant_under_chsh_symmetries():
    from boxrobust.constructions import apply_wiring

    syms = _chsh_symmetries()
    assert len(syms) >= 8
    for eps in (0.0, 0.1):
        ref = certify(pr_box(eps))
        for w in syms:
            c = certify(apply_wiring(pr_box(eps), w))
            assert abs(c.chsh_value) == pytest.approx(abs(ref.chsh_value), abs=1e-12)
            assert c.trace_norm_floor == pytest.approx(ref.trace_norm_floor, abs=1e-12)
            assert c.entanglement_floor == pytest.approx(ref.entanglement_floor, abs=1e-8)


def test_quantum_boxes_never_certify_negativity(rng):
    from boxrobust.operators import PseudoState, born_box
    from boxrobust.robustness import negativity_floor
    from boxrobust.sampling import random_density_matrix, random_projective_assemblage

    for _ in range(50):
        rho = PseudoState(random_density_matrix(4, rng, rank=int(rng.integers(1, 5))), (2, 2), tol=1e-10)
        box = born_box(rho, random_projective_assemblage(2, 2, rng), random_projective_assemblage(2, 2, rng))
        assert negativity_floor(box) == 0.0
        cert = certify(box)
        assert cert.negativity_floor == 0.0
        assert cert.entanglement_floor <= generalized_local_robustness(box).value + 1e-12
