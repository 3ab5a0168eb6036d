"""Run configuration: a strict key/value tree with an explicit schema version.

Unknown keys are errors by design: the constants chain feeding the counting
bounds is fragile against silently ignored misconfiguration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Any, Optional

from .errors import ConfigInvalid
from .heights import (AdelicLipschitzSystem, FiniteException, FinitePlace,
                      build_als)
from .numfield import IdealModule, NumberField, load_field

SCHEMA_VERSION = 1

_FIELD_KEYS = {"name", "min_poly", "integral_basis", "signature", "invariants",
               "fundamental_units", "class_reps", "subfields",
               "irreducible_attested"}
_INVARIANT_KEYS = {"h", "R", "w", "disc", "zeta"}
_ALS_KEYS = {"type", "linear_form", "divisor", "exceptions"}
_EXCEPTION_KEYS = {"prime", "Np", "d_v", "c_v", "C_v"}
_BUDGET_KEYS = {"enumeration", "mc_samples", "moebius_depth", "quotient"}
_TOP_KEYS = {"schema_version", "field", "base_field", "als", "n", "x_grid",
             "seeds", "budgets", "workers", "delta", "fit", "census"}
_SEED_KEYS = {"master"}
_DELTA_KEYS = {"bound", "gs"}
_FIT_KEYS = {"coeff_tolerance"}
_CENSUS_KEYS = {"methods"}
_SUBFIELD_KEYS = {"degrees", "generators"}
_CLASSREP_KEYS = {"num", "den"}


def _expect_keys(block: dict, allowed: set, where: str):
    if not isinstance(block, dict):
        raise ConfigInvalid(f"{where}: expected a key/value block")
    unknown = set(block) - allowed
    if unknown:
        raise ConfigInvalid(f"{where}: unknown keys {sorted(unknown)}")


@dataclass
class RunConfig:
    field_cfg: dict
    base_field: str
    als_spec: Any
    als_exceptions: list
    n: int
    x_grid: list[Fraction]
    seed: int
    workers: int
    enum_budget: int
    mc_samples: int
    moebius_depth: Optional[int]
    quotient_budget: int
    delta_bound: Fraction
    delta_gs: list[int]
    fit_tolerance: float
    census_methods: list[str]
    raw: dict = dc_field(default_factory=dict)

    def load(self) -> NumberField:
        return load_field(self.field_cfg)

    def build_system(self, field: NumberField) -> AdelicLipschitzSystem:
        als = build_als(field, self.n, self.als_spec)
        for exc_cfg in self.als_exceptions:
            als.finite_exceptions.append(_build_exception(field, exc_cfg))
        if self.als_exceptions:
            # re-derive the finite constants
            als.__init__(field, self.n, als.kind, als.infinite_parts,
                         als.finite_exceptions, als.linear_form, als.divisor)
        return als


def _build_exception(field: NumberField, cfg: dict) -> FiniteException:
    _expect_keys(cfg, _EXCEPTION_KEYS, "als.exceptions[]")
    prime_cfg = cfg["prime"]
    if isinstance(prime_cfg, int):
        prime = IdealModule.from_generators(field, [field.from_rational(prime_cfg)])
    else:
        prime = IdealModule(field, prime_cfg["num"], int(prime_cfg.get("den", 1)))
    np_v = int(cfg["Np"])
    d_v = int(cfg["d_v"])
    if prime.norm() != np_v:
        raise ConfigInvalid(f"exception prime norm {prime.norm()} != Np {np_v}")
    return FiniteException(place=FinitePlace(prime=prime, Np=np_v, d_v=d_v),
                           c_v=Fraction(cfg["c_v"]),
                           C_v=Fraction(cfg.get("C_v", 1)))


def parse_config(data: dict) -> RunConfig:
    _expect_keys(data, _TOP_KEYS, "config")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigInvalid(f"schema_version must be {SCHEMA_VERSION}, got {version}")
    if "field" not in data:
        raise ConfigInvalid("config needs a field block")
    field_cfg = data["field"]
    _expect_keys(field_cfg, _FIELD_KEYS, "field")
    _expect_keys(field_cfg.get("invariants", {}), _INVARIANT_KEYS, "field.invariants")
    for name, sub in (field_cfg.get("subfields") or {}).items():
        _expect_keys(sub, _SUBFIELD_KEYS, f"field.subfields.{name}")
    for rep in field_cfg.get("class_reps") or []:
        _expect_keys(rep, _CLASSREP_KEYS, "field.class_reps[]")

    als_cfg = data.get("als", {"type": "standard"})
    _expect_keys(als_cfg, _ALS_KEYS, "als")
    als_type = als_cfg.get("type", "standard")
    if als_type not in ("standard", "mahler", "linear_section"):
        raise ConfigInvalid(f"unknown als.type {als_type!r}")
    if als_type == "linear_section":
        if "linear_form" not in als_cfg or "divisor" not in als_cfg:
            raise ConfigInvalid("linear_section needs linear_form and divisor")
        als_spec = ("linear_section", [int(c) for c in als_cfg["linear_form"]],
                    int(als_cfg["divisor"]))
    else:
        als_spec = als_type

    seeds = data.get("seeds", {})
    _expect_keys(seeds, _SEED_KEYS, "seeds")
    budgets = data.get("budgets", {})
    _expect_keys(budgets, _BUDGET_KEYS, "budgets")
    delta_cfg = data.get("delta", {})
    _expect_keys(delta_cfg, _DELTA_KEYS, "delta")
    fit_cfg = data.get("fit", {})
    _expect_keys(fit_cfg, _FIT_KEYS, "fit")
    census_cfg = data.get("census", {})
    _expect_keys(census_cfg, _CENSUS_KEYS, "census")
    methods = census_cfg.get("methods", ["direct", "decomposed"])
    for m in methods:
        if m not in ("direct", "decomposed"):
            raise ConfigInvalid(f"unknown census method {m!r}")

    try:
        x_grid = [Fraction(x) for x in data.get("x_grid", [])]
        n = int(data.get("n", 1))
        depth = budgets.get("moebius_depth")
        cfg = RunConfig(
            field_cfg=field_cfg,
            base_field=data.get("base_field", "Q"),
            als_spec=als_spec,
            als_exceptions=als_cfg.get("exceptions", []),
            n=n,
            x_grid=x_grid,
            seed=int(seeds.get("master", 0)),
            workers=int(data.get("workers", 0)) or _default_workers(),
            enum_budget=int(budgets.get("enumeration", 8_000_000)),
            mc_samples=int(budgets.get("mc_samples", 1_000_000)),
            moebius_depth=None if depth is None else int(depth),
            quotient_budget=int(budgets.get("quotient", 1_000_000)),
            delta_bound=Fraction(delta_cfg.get("bound", 2)),
            delta_gs=[int(g) for g in delta_cfg.get("gs", [1])],
            fit_tolerance=float(fit_cfg.get("coeff_tolerance", 0.1)),
            census_methods=list(methods),
            raw=data,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad value in config: {exc}") from exc
    if n < 0:
        raise ConfigInvalid("n must be a natural number")
    if any(x <= 0 for x in cfg.x_grid):
        raise ConfigInvalid("x_grid entries must be positive")
    return cfg


def _default_workers() -> int:
    import os
    return max(1, os.cpu_count() or 1)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    return parse_config(data)


def preset_run_config(preset_name: str, **overrides) -> dict:
    """Convenience: a full run-config dict around a named field preset."""
    from . import presets
    data = {
        "schema_version": SCHEMA_VERSION,
        "field": presets.PRESETS[preset_name](),
        "base_field": "Q",
        "als": {"type": "standard"},
        "n": 1,
        "x_grid": [1, 2, 3],
        "seeds": {"master": 0},
        "budgets": {},
    }
    data.update(overrides)
    return data
