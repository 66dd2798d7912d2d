"""Robustness of non-local and beyond-quantum correlations.

Boxes, pseudo-states, robustness linear programs with dual certificates, and
the constructions connecting box-level and operator-level quantifiers.
"""

__version__ = "0.1.0"

from .correlations import (  # noqa: E402
    BellFunctional,
    Box,
    Scenario,
    bell_value,
    chsh_functional,
    enumerate_local_deterministic,
    is_no_signalling,
    is_probability,
    marginal_alice,
    marginal_bob,
    mix,
)
from .operators import (  # noqa: E402
    HermitianOp,
    MeasurementAssemblage,
    PseudoState,
    bell_state,
    born_box,
    closest_state,
    hermitian_eigen,
    jordan_decompose,
    negativity,
    negativity_witness,
    pauli,
    tensor,
    trace_distance,
    trace_norm,
)
from .robustness import (  # noqa: E402
    best_local_approximation,
    generalized_local_robustness,
    local_robustness,
    negativity_floor,
    register_functional,
    verify_certificate,
)
from .constructions import (  # noqa: E402
    Realization,
    Wiring,
    apply_wiring,
    lemma1_combine,
    local_box_to_separable,
    pr_box,
    pr_measurements,
    pr_pseudostate,
    prop2_pseudostate,
)
from .di_bounds import certify, saturation_report  # noqa: E402
