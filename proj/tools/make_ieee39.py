#!/usr/bin/env python3
"""Build data/ieee39.json from the MATPOWER/PYPOWER New England 39-bus case.

Each generator is merged with its bus, leaving 39 nodes: buses 30-39 become
machine nodes and buses 1-29 frequency-dependent loads (D = 1 p.u.).

  * B_ij = V_i V_j / (x_ij * tap), V from the solved power flow.
  * Injections are Pg - Pd on a 100 MVA base; the slack generator (bus 31)
    absorbs the line losses so that the lossless case is balanced.
  * Inertia M_i = 2 H_i / (2 pi f*), H_i on the 100 MVA base (Athay et al.).
  * Cost weights alpha_i ~ U(0, 1), seeded.
  * Two-area split: area A1 holds generators 30, 37, 38.

Requires: pip install pypower numpy scipy
"""
import json
import math
import sys

import numpy as np
from scipy.optimize import fsolve
from pypower.case39 import case39

BASE_MVA = 100.0
BASE_HZ = 60.0
H = {30: 42.0, 31: 30.3, 32: 35.8, 33: 28.6, 34: 26.0,
     35: 34.8, 36: 26.4, 37: 24.3, 38: 34.5, 39: 500.0}
AREA_A1 = [1, 2, 3, 17, 18, 25, 26, 27, 28, 29, 30, 37, 38]
SEED = 2017


def main(out_path):
    ppc = case39()
    bus, gen, branch = ppc["bus"], ppc["gen"], ppc["branch"]
    vm = {int(b[0]): float(b[7]) for b in bus}
    p = {int(b[0]): -float(b[2]) / BASE_MVA for b in bus}
    for g in gen:
        p[int(g[0])] += float(g[1]) / BASE_MVA
    p[31] -= sum(p.values())

    lines = []
    for br in branch:
        i, j = int(br[0]), int(br[1])
        tap = float(br[8]) if br[8] != 0 else 1.0
        lines.append({"from": i, "to": j, "B": vm[i] * vm[j] / (float(br[3]) * tap)})

    rng = np.random.default_rng(SEED)
    alphas = {g: float(a) for g, a in zip(sorted(H), rng.uniform(0.0, 1.0, len(H)))}

    nodes = []
    for i in range(1, 40):
        machine = i in H
        nodes.append({
            "id": i,
            "kind": "machine" if machine else "freq",
            "M": 2.0 * H[i] / (2.0 * math.pi * BASE_HZ) if machine else 0.0,
            "D": 1.0,
            "P": p[i],
            "V": vm[i],
            "controller": {"alpha": alphas[i], "u_lo": None, "u_hi": None} if machine else None,
        })

    # Pre-disturbance export of A1 at the lossless operating point.
    ids = list(range(1, 40))
    pos = {b: k for k, b in enumerate(ids)}
    bmat = np.zeros((39, 39))
    for ln in lines:
        a, b = pos[ln["from"]], pos[ln["to"]]
        bmat[a, b] = bmat[b, a] = ln["B"]
    pv = np.array([p[b] for b in ids])
    ref = pos[30]

    def flows(th):
        return (bmat * np.sin(th[:, None] - th[None, :])).sum(axis=1)

    def residual(x):
        th = np.insert(x, ref, 0.0)
        return np.delete(pv - flows(th), ref)

    theta = np.insert(fsolve(residual, np.zeros(38), xtol=1e-14), ref, 0.0)
    a1 = set(AREA_A1)
    export = 0.0
    for ln in lines:
        i, j = ln["from"], ln["to"]
        if (i in a1) != (j in a1):
            sign = 1.0 if i in a1 else -1.0
            export += sign * ln["B"] * math.sin(theta[pos[i]] - theta[pos[j]])

    case = {
        "base_mva": BASE_MVA,
        "base_hz": BASE_HZ,
        "nodes": nodes,
        "lines": lines,
        "areas": [
            {"name": "A1", "nodes": AREA_A1, "p_ex_nominal": export},
            {"name": "A2", "nodes": [i for i in ids if i not in a1], "p_ex_nominal": -export},
        ],
    }
    with open(out_path, "w") as fh:
        json.dump(case, fh, indent=1)
        fh.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/ieee39.json")
