#!/usr/bin/env python3
"""Regenerates the scenario fixtures under fixtures/.

The three-inertia plant is discretized here (zero-order hold, h = 0.1 s) so the
C++ library only ever sees discrete matrices. Requires numpy and scipy.
"""
import json
import pathlib

import numpy as np
import scipy.linalg

OUT = pathlib.Path(__file__).resolve().parents[2] / "fixtures"


def three_inertia():
    j1 = j2 = j3 = 0.01
    b1 = b2 = b3 = 0.005
    k1 = k2 = 1.4
    ac = np.array([
        [0, 1, 0, 0, 0, 0],
        [-k1 / j1, -b1 / j1, k1 / j1, 0, 0, 0],
        [0, 0, 0, 1, 0, 0],
        [k1 / j2, 0, -(k1 + k2) / j2, -b2 / j2, k2 / j2, 0],
        [0, 0, 0, 0, 0, 1],
        [0, 0, k2 / j3, 0, -k2 / j3, -b3 / j3],
    ])
    bc = np.array([[0], [1 / j1], [0], [0], [0], [0]])
    bd = np.array([[0], [0], [0], [0], [0], [1 / j3]])
    cc = np.array([
        [1, 0, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 0, 1, 0],
        [1, 0, -1, 0, 0, 0],
        [1, 0, 0, 0, -1, 0],
        [0, 0, 1, 0, -1, 0],
    ], dtype=float)
    h = 0.1
    big = np.zeros((8, 8))
    big[:6, :6] = ac
    big[:6, 6:7] = bc
    big[:6, 7:8] = bd
    phi = scipy.linalg.expm(big * h)
    return phi[:6, :6], phi[:6, 6:7], phi[:6, 7:8], cc, h


def base_three_inertia(name):
    a, b, e, c, h = three_inertia()
    return {
        "name": name,
        "sample_period": h,
        "A": a.tolist(),
        "B": b.tolist(),
        "C": c.tolist(),
        "E": e.tolist(),
        "tau": 6,
        "s_max": 2,
        "noise": {"w_bound": 0.01, "v_bounds": [0.001] * 6},
        "x0": [-0.2, 0.1, 0.0, 0.3, 0.1, 0.2],
        "horizon": 100,
        "control": {
            "K": [[0.7732, -0.0718, -0.8379, -0.0351, -0.0137, -0.0213]],
            "reference": {"kind": "sine", "amplitude": 1.0, "frequency": 0.2},
        },
        "attack": {"sensors": []},
        "estimator": "both",
        "agreement": "mean",
        "seed": 1,
    }


def case(name, sensors, lo, hi):
    doc = base_three_inertia(name)
    doc["attack"] = {"sensors": [{"index": s, "uniform": [lo, hi]} for s in sensors]}
    return doc


def f16():
    a = [[9.0649e-1, 8.1601e-2, -5.0128e-4],
         [7.4135e-2, 9.0121e-1, -7.0423e-3],
         [0.0, 0.0, 1.3266e-1]]
    return {
        "name": "f16_short_period",
        "sample_period": 1.0,
        "A": a,
        "B": [[0.0], [0.0], [0.0]],
        "C": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        "tau": 3,
        "s_max": 0,
        "noise": {"w_bound": 0.0, "v_bounds": [0.0, 0.0]},
        "x0": [0.0, 0.0, 0.0],
        "horizon": 10,
        "control": {"K": [[0.0, 0.0, 0.0]], "reference": {"kind": "none"}},
        "attack": {"sensors": []},
        "estimator": "fsse",
        "agreement": "mean",
        "seed": 1,
    }


def b747():
    a = [[0.9337, 0.0000, -0.0099, -0.0000],
         [-0.0845, 0.9994, -0.4537, -0.9791],
         [0.0944, -0.0001, 0.9440, 0.0000],
         [0.0967, 0.0000, -0.0005, 1.0000]]
    return {
        "name": "b747_longitudinal",
        "sample_period": 0.1,
        "A": a,
        "B": [[0.0], [0.0], [0.0], [0.0]],
        "C": np.eye(4).tolist(),
        "tau": 4,
        "s_max": 1,
        "noise": {"w_bound": 0.001, "v_bounds": [0.001] * 4},
        "x0": [0.0, 0.0, 0.0, 0.0],
        "horizon": 10,
        "control": {"K": [[0.0] * 4], "reference": {"kind": "none"}},
        "attack": {"sensors": []},
        "estimator": "fsse",
        "agreement": "mean",
        "seed": 1,
    }


def main():
    OUT.mkdir(exist_ok=True)
    docs = {
        "three_inertia.json": base_three_inertia("three_inertia"),
        "three_inertia_case1.json": case("three_inertia_case1", [5, 6], 0.0, 2.0),
        "three_inertia_case2.json": case("three_inertia_case2", [2, 5], -5.0, 5.0),
        "three_inertia_case3.json": case("three_inertia_case3", [3, 6], 0.0, 2.0),
        "three_inertia_case4.json": case("three_inertia_case4", [4, 6], 0.0, 1.0),
        "f16.json": f16(),
        "b747.json": b747(),
    }
    for fname, doc in docs.items():
        (OUT / fname).write_text(json.dumps(doc, indent=2) + "\n")


if __name__ == "__main__":
    main()
