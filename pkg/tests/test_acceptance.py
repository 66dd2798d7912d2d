"""Acceptance criteria, one test per criterion; each prints a PASS/FAIL line."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from boxrobust import _kernels
from boxrobust.constructions import (
    PR_QUANTUM_EDGE,
    Realization,
    apply_wiring,
    lemma1_combine,
    pr_box,
    pr_measurements,
    pr_pseudostate,
    pr_realization,
    prop2_pseudostate,
    random_wiring,
    relabel_wiring,
)
from boxrobust.correlations import CHSH_SCENARIO, bell_value, chsh_functional, mix
from boxrobust.operators import (
    PseudoState,
    bell_state,
    born_box,
    closest_state,
    jordan_decompose,
    negativity,
    tensor,
    trace_norm,
)
from boxrobust.robustness import (
    best_local_approximation,
    generalized_local_robustness,
    local_robustness,
    negativity_floor,
    verify_certificate,
)
from boxrobust.sampling import random_density_matrix, random_local_mixture, random_ns_box, random_pseudostate

from .conftest import GOLDEN

pytestmark = pytest.mark.acceptance

GRID = [round(0.025 * k, 3) for k in range(21)]


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
        assert ok, detail

    return _report


def test_c01_pr_family_closed_forms(report):
    chsh = chsh_functional()
    err_b = max(abs(bell_value(pr_box(e), chsh) - 2 * (1 - 2 * e)) for e in GRID)
    err_n = max(
        abs(trace_norm(pr_pseudostate(e)) - math.sqrt(2) * (1 - 2 * e)) for e in GRID if e <= PR_QUANTUM_EDGE
    )
    report(1, err_b <= 1e-12 and err_n <= 1e-9, f"CHSH err {err_b:.2e} (<=1e-12), trace-norm err {err_n:.2e} (<=1e-9)")


def test_c02_unified_formalism(report):
    err = 0.0
    for eps in (0.0, 0.05, 0.1, PR_QUANTUM_EDGE):
        alice, bob = pr_measurements()
        err = max(err, float(np.abs(born_box(pr_pseudostate(eps), alice, bob).p - pr_box(eps).p).max()))
    report(2, err <= 1e-10, f"max |born - p_eps| = {err:.2e} (<=1e-10)")


def test_c03_saturation(report):
    diffs = [
        abs(negativity_floor(pr_box(e)) - negativity(pr_pseudostate(e))) for e in GRID if e <= PR_QUANTUM_EDGE
    ]
    report(3, max(diffs) <= 1e-9, f"{len(diffs)} grid points, max |floor - negativity| = {max(diffs):.2e} (<=1e-9)")


def test_c04_negativity_identities(report):
    rng = np.random.default_rng(4)
    worst_jordan = worst_closest = 0.0
    worst_sample = math.inf
    for _ in range(200):
        dim = int(rng.integers(4, 17))
        O = random_pseudostate(dim, rng, spread=float(rng.uniform(0.05, 1.0)))
        r = (trace_norm(O) - 1) / 2
        _, minus = jordan_decompose(O)
        worst_jordan = max(worst_jordan, abs(minus.trace() - r))
        rho_plus, dist = closest_state(O)
        worst_closest = max(worst_closest, abs(dist - r))
        sigmas = []
        for k in range(1000):
            if k % 4 == 0:
                # states close to the optimum probe the bound where it is tight
                delta = 10.0 ** rng.uniform(-6, -1)
                s = (1 - delta) * rho_plus.matrix + delta * random_density_matrix(dim, rng)
            else:
                s = random_density_matrix(dim, rng, rank=int(rng.integers(1, dim + 1)))
            sigmas.append(s)
        dists = 0.5 * _kernels.trace_norms(O.matrix[None] - np.stack(sigmas))
        worst_sample = min(worst_sample, float((dists - r).min()))
    ok = worst_jordan <= 1e-10 and worst_closest <= 1e-10 and worst_sample >= -1e-10
    report(
        4,
        ok,
        f"|Tr O- - r| <= {worst_jordan:.2e}, |D(O,rho+) - r| <= {worst_closest:.2e}, "
        f"min sampled D(O,s) - r = {worst_sample:.2e} (>= -1e-10)",
    )


def test_c05_lp_duality(report):
    rng = np.random.default_rng(5)
    boxes = [pr_box(e) for e in GRID] + [random_ns_box(rng) for _ in range(30)]
    worst_gap, failures = 0.0, 0
    for box in boxes:
        for fn in (local_robustness, generalized_local_robustness):
            rep = verify_certificate(box, fn(box))
            failures += not rep.ok
            worst_gap = max(worst_gap, rep.gap)
    worst_local = 0.0
    for _ in range(100):
        box, _ = random_local_mixture(CHSH_SCENARIO, rng)
        res = local_robustness(box)
        failures += not verify_certificate(box, res).ok
        worst_local = max(worst_local, abs(res.value))
    ok = failures == 0 and worst_gap <= 1e-8 and worst_local <= 1e-8
    report(5, ok, f"{failures} failed certificates, max gap {worst_gap:.2e}, max r_L on local mixtures {worst_local:.2e}")


def test_c06_oracle_constants(report, oracle):
    errs = [
        abs(local_robustness(pr_box()).value - oracle["r_local_pr"]),
        abs(generalized_local_robustness(pr_box()).value - oracle["r_generalized_pr"]),
    ]
    consistent = local_robustness(pr_box()).value >= (bell_value(pr_box(), chsh_functional()) - 1) / 2 - 1e-12
    for eps, q in oracle["q_nl_min"].items():
        val = best_local_approximation(pr_box(float(eps))).q_nl_min
        errs.append(abs(val - q))
        consistent = consistent and val >= 1 - 4 * float(eps) - 1e-12
    report(6, max(errs) <= 1e-8 and consistent, f"max deviation from oracle {max(errs):.2e} (<=1e-8), consistency {consistent}")


def test_c07_prop2_construction(report):
    rng = np.random.default_rng(7)
    boxes = [pr_box()] + [random_ns_box(rng) for _ in range(20)]
    worst, all_ok = 0.0, True
    for box in boxes:
        real = prop2_pseudostate(box)
        alice, bob = real.realization.alice, real.realization.bob
        worst = max(worst, float(np.abs(born_box(real.state, alice, bob).p - box.p).max()))
        t = local_robustness(box).value
        coeff_ok = abs(real.coefficients[0] - (1 + t)) <= 1e-9 and abs(real.coefficients[1] + t) <= 1e-9
        all_ok = all_ok and coeff_ok and real.check(1e-9)
    report(7, worst <= 1e-9 and all_ok, f"{len(boxes)} boxes, max round-trip err {worst:.2e} (<=1e-9), blocks certified {all_ok}")


def test_c08_monotonicity(report):
    rng = np.random.default_rng(8)
    worst = -math.inf
    count = 0
    for eps in (0.0, 0.1):
        box = pr_box(eps)
        before = local_robustness(box).value
        wirings = [random_wiring(CHSH_SCENARIO, rng=rng, sharpness=s) for s in (0.05, 0.2, 1.0) for _ in range(20)]
        wirings += [
            relabel_wiring(CHSH_SCENARIO, x_perm=rng.permutation(2), y_perm=rng.permutation(2),
                           a_flip=[rng.permutation(2), rng.permutation(2)], b_flip=[rng.permutation(2), rng.permutation(2)])
            for _ in range(5)
        ]
        for w in wirings:
            worst = max(worst, local_robustness(apply_wiring(box, w)).value - before)
            count += 1
    worst_tensor = 0.0
    for _ in range(50):
        dim_a, dim_b = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        O = random_pseudostate(4, rng, (2, 2))
        rho = PseudoState(random_density_matrix(dim_a * dim_b, rng), (dim_a, dim_b), tol=1e-10)
        worst_tensor = max(worst_tensor, abs(negativity(tensor(O, rho)) - negativity(O)))
    ok = count >= 100 and worst <= 1e-8 and worst_tensor <= 1e-9
    report(8, ok, f"{count} wirings, max r_L increase {worst:.2e} (<=1e-8); max tensoring change {worst_tensor:.2e} (<=1e-9)")


def test_c09_lemma1(report):
    r1 = pr_realization(0.0)
    r2 = Realization.build(bell_state("-"), *pr_measurements())
    worst = 0.0
    for q in (-0.5, 0.0, 0.3, 1.0):
        out = lemma1_combine(r1, r2, q)
        worst = max(worst, float(np.abs(out.box.p - mix([r1.box, r2.box], [1 - q, q]).p).max()))
    report(9, worst <= 1e-10, f"max err {worst:.2e} (<=1e-10) for q in (-0.5, 0, 0.3, 1)")


def test_c10_cli_sweep(report, tmp_path):
    out = tmp_path / "sweep.csv"
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "boxrobust", "pr-sweep", "--eps-grid", "0:0.5:21", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    elapsed = time.perf_counter() - start
    same = proc.returncode == 0 and out.read_bytes() == (GOLDEN / "pr_sweep_21.csv").read_bytes()
    report(10, same and elapsed < 10.0, f"exit {proc.returncode}, {elapsed:.2f} s (<10 s), byte-identical to golden: {same}")
