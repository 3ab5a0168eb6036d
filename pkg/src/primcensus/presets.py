"""Ready-made field configuration blocks for common small fields.

These are plain dicts in the documented config schema; tests and the example
configs under ``configs/`` are generated from them.  Invariants follow the
usual tables (class number, roots of unity, discriminant); regulators match
the configured fundamental unit systems.
"""

from __future__ import annotations

import math


def rational_field() -> dict:
    return {
        "name": "Q",
        "min_poly": [1, 0],
        "integral_basis": [[1]],
        "signature": [1, 0],
        "invariants": {"h": 1, "R": 1.0, "w": 2, "disc": 1},
        "fundamental_units": [],
        "class_reps": [{"num": [[1]], "den": 1}],
        "subfields": {"Q": {"degrees": [1], "generators": []}},
    }


def gaussian_field() -> dict:
    # Q(i): basis {1, i}
    return {
        "name": "Q(i)",
        "min_poly": [1, 0, 1],
        "integral_basis": [[1, 0], [0, 1]],
        "signature": [0, 1],
        "invariants": {"h": 1, "R": 1.0, "w": 4, "disc": -4},
        "fundamental_units": [],
        "class_reps": [{"num": [[1, 0], [0, 1]], "den": 1}],
        "subfields": {"Q": {"degrees": [1], "generators": []}},
    }


def sqrt2_field() -> dict:
    # Q(sqrt 2): basis {1, sqrt2}; fundamental unit 1 + sqrt2
    return {
        "name": "Q(sqrt2)",
        "min_poly": [1, 0, -2],
        "integral_basis": [[1, 0], [0, 1]],
        "signature": [2, 0],
        "invariants": {"h": 1, "R": math.log(1 + math.sqrt(2)), "w": 2, "disc": 8},
        "fundamental_units": [[1, 1]],
        "class_reps": [{"num": [[1, 0], [0, 1]], "den": 1}],
        "subfields": {"Q": {"degrees": [1], "generators": []}},
    }


def biquadratic_field() -> dict:
    """Q(sqrt2, sqrt3) via theta = sqrt2 + sqrt3, x^4 - 10x^2 + 1.

    Integral basis {1, sqrt2, sqrt3, (sqrt2 + sqrt6)/2}; the configured unit
    system {1+sqrt2, sqrt2+sqrt3, (sqrt2+sqrt6)/2} is fundamental (its index
    over the three quadratic units is the maximal possible 4).
    """
    a = math.log(1 + math.sqrt(2))
    b = math.log(math.sqrt(2) + math.sqrt(3))
    c = math.log((math.sqrt(2) + math.sqrt(6)) / 2)
    regulator = 4 * a * b * c
    half = ["-5/4", "-9/4", "1/4", "1/4"]
    basis = [
        ["1", "0", "0", "0"],
        ["0", "-9/2", "0", "1/2"],      # sqrt2 = (theta^3 - 9 theta)/2
        ["0", "11/2", "0", "-1/2"],     # sqrt3 = (11 theta - theta^3)/2
        half,                           # (sqrt2+sqrt6)/2 = (theta^3+theta^2-9theta-5)/4
    ]
    return {
        "name": "Q(sqrt2,sqrt3)",
        "min_poly": [1, 0, -10, 0, 1],
        "integral_basis": basis,
        "signature": [4, 0],
        "irreducible_attested": True,
        "invariants": {"h": 1, "R": regulator, "w": 2, "disc": 2304},
        # coords w.r.t. the integral basis above
        "fundamental_units": [
            [1, 1, 0, 0],    # 1 + sqrt2
            [0, 1, 1, 0],    # sqrt2 + sqrt3
            [0, 0, 0, 1],    # (sqrt2 + sqrt6)/2
        ],
        "class_reps": [{"num": [[1, 0, 0, 0], [0, 1, 0, 0],
                                [0, 0, 1, 0], [0, 0, 0, 1]], "den": 1}],
        "subfields": {"Q": {"degrees": [1, 2], "generators": []}},
    }


PRESETS = {
    "Q": rational_field,
    "Q(i)": gaussian_field,
    "Q(sqrt2)": sqrt2_field,
    "Q(sqrt2,sqrt3)": biquadratic_field,
}
