"""Independent oracle for the frozen LP regression constants.

Runs once, offline, and writes tests/golden/oracle_constants.json.  It does
not import boxrobust: vertices are enumerated here with plain loops and every
quantity is obtained from the *dual* (Bell-functional) side of its LP, while
the library solves the primal decomposition problems.

    python tests/oracles/compute_constants.py
"""

import itertools
import json
import pathlib

import numpy as np
from scipy.optimize import linprog

EPS_GRID = [0.0, 0.05, 0.1, 0.2, 0.3]


def noisy_pr(eps):
    p = np.zeros((2, 2, 2, 2))
    for x, y, a, b in itertools.product(range(2), repeat=4):
        p[x, y, a, b] = (1 - eps) / 2 if (a ^ b) == (x & y) else eps / 2
    return p.ravel()


def vertices():
    out = []
    for f0, f1, g0, g1 in itertools.product(range(2), repeat=4):
        d = np.zeros((2, 2, 2, 2))
        for x, y in itertools.product(range(2), repeat=2):
            d[x, y, (f0, f1)[x], (g0, g1)[y]] = 1.0
        out.append(d.ravel())
    return np.array(out)


def local_robustness(p, V):
    # max B(p) s.t. -1 <= B(d) <= 1 for all 16 vertices; r = (max - 1) / 2
    A_ub = np.vstack([V, -V])
    b_ub = np.ones(2 * len(V))
    res = linprog(-p, A_ub=A_ub, b_ub=b_ub, bounds=(None, None), method="highs-ds")
    assert res.status == 0
    return (-res.fun - 1) / 2


def generalized_robustness(p, V):
    # max y(p) - 1 s.t. y >= 0, y(d) <= 1
    res = linprog(-p, A_ub=V, b_ub=np.ones(len(V)), bounds=(0, None), method="highs-ds")
    assert res.status == 0
    return -res.fun - 1


def nonlocal_weight(p, V):
    # largest local weight = min y(p) s.t. y >= 0, y(d) >= 1
    res = linprog(p, A_ub=-V, b_ub=-np.ones(len(V)), bounds=(0, None), method="highs-ds")
    assert res.status == 0
    return 1 - res.fun


def main():
    V = vertices()
    pr = noisy_pr(0.0)
    constants = {
        "r_local_pr": local_robustness(pr, V),
        "r_generalized_pr": generalized_robustness(pr, V),
        "q_nl_min": {repr(e): nonlocal_weight(noisy_pr(e), V) for e in EPS_GRID},
    }
    out = pathlib.Path(__file__).resolve().parents[1] / "golden" / "oracle_constants.json"
    out.write_text(json.dumps(constants, indent=2, sort_keys=True) + "\n")
    print(json.dumps(constants, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
