"""Scenario configuration: JSON documents describing a region, a weight, candidates and a grid.

Schema (all keys except ``region`` optional)::

    {
      "name": "union",
      "region": {"kind": "polydisc-union", "radii": [[1, 0.5], [0.5, 1]]},
      "weight": "zero",
      "flags": {"balanced": true, "cone_connected": true, "full_cone": true},
      "lower_candidates": ["log(max(abs(z1), abs(z2)))"],
      "grid": {"points": [[0.9, 0.9], [[0.5, 0.1], 1.0]]},
      "kinds": ["affine"],
      "optimizer": {"max_degree": 4, "starts": 8},
      "search": {"radial": 64, "angular": 64, "rounds": 3},
      "output": "union.csv",
      "seed": 0
    }

Region kinds: ``ball`` (radius, dimension), ``annulus`` (r_in, r_out,
dimension), ``polydisc`` (radii), ``polydisc-union`` (radii: list of rows),
``sector`` (r_in, r_out) and ``custom`` (dimension, inequalities: expressions
g_i with E = {max g_i < 0}, sample_annulus: [r_min, r_max]).

Weights: ``"zero"``, ``"log-norm"``, ``{"kind": "constant", "value": c}`` or
``{"expr": "..."}``.

Grids: ``{"points": [...]}`` where a coordinate is a number or ``[re, im]``;
``{"ray": {"direction": [...], "radii": [...]}}``; or
``{"modulus_grid": {"z1": [lo, hi, count], "z2": [lo, hi, count]}}`` (real
positive coordinates, z1 varying fastest).

Top-level keys starting with an underscore are comments and are ignored.
Lower candidates may name a built-in reference as ``"ref:<case>"``.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import domains
from .domains import RegionSpec, ScalingSearch
from .envelope import KINDS, OptimizerConfig
from .errors import ExprSyntaxError, ScenarioError
from .expr import Expression
from .oracles import CandidateFunction, reference_candidate
from .weights import HomogenizedWeight, WeightSpec, constant_weight, log_norm_weight, zero_weight


@dataclass
class ScenarioConfig:
    name: str
    region: RegionSpec
    weight: WeightSpec
    lower_candidates: list
    points: np.ndarray
    kinds: tuple
    optimizer: OptimizerConfig
    search: ScalingSearch
    output: Optional[str]
    seed: int
    source: dict = field(default_factory=dict)

    def homogenized(self) -> HomogenizedWeight:
        return HomogenizedWeight(self.region, self.weight, self.search)

    @property
    def dimension(self) -> int:
        return self.region.dimension


def _coordinate(c):
    if isinstance(c, (list, tuple)):
        if len(c) != 2:
            raise ScenarioError(f"complex coordinate must be [re, im], got {c!r}")
        return complex(float(c[0]), float(c[1]))
    if isinstance(c, str):
        return complex(c.replace(" ", ""))
    return complex(float(c))


def _point(p):
    if not isinstance(p, (list, tuple)):
        p = [p]
    return [_coordinate(c) for c in p]


def _flag(d, key, default):
    return bool(d.get(key, default))


def build_region(spec: dict, flags: dict) -> RegionSpec:
    kind = spec.get("kind")
    try:
        if kind == "ball":
            r = domains.ball(float(spec.get("radius", 1.0)), int(spec.get("dimension", 2)))
        elif kind == "annulus":
            r = domains.annulus(float(spec.get("r_in", 0.5)), float(spec.get("r_out", 2.0)),
                                int(spec.get("dimension", 1)))
        elif kind == "polydisc":
            r = domains.polydisc(spec.get("radii", [1.0, 1.0]))
        elif kind == "polydisc-union":
            r = domains.polydisc_union(spec.get("radii", [[1.0, 0.5], [0.5, 1.0]]))
        elif kind == "sector":
            r = domains.sector(float(spec.get("r_in", 1.0)), float(spec.get("r_out", 2.0)))
        elif kind == "custom":
            r = _custom_region(spec, flags)
        else:
            raise ScenarioError(f"unknown region kind {kind!r}")
    except (TypeError, ValueError) as err:
        if isinstance(err, ScenarioError):
            raise
        raise ScenarioError(f"bad parameters for region {kind!r}: {err}") from err
    if flags:
        r = RegionSpec(r.dimension, r.sample_annulus, r.inequalities, r.membership,
                       _flag(flags, "balanced", r.claimed_balanced),
                       _flag(flags, "cone_connected", r.claimed_cone_connected),
                       _flag(flags, "full_cone", r.claimed_full_cone), r.circled, r.reinhardt, r.name, r.params)
    return r


def _custom_region(spec, flags):
    n = int(spec["dimension"])
    texts = spec.get("inequalities")
    if not texts:
        raise ScenarioError("custom region needs a nonempty list of inequalities")
    exprs = [Expression(t) for t in texts]
    for e in exprs:
        if e.dimension > n:
            raise ScenarioError(f"inequality {e.text!r} uses z{e.dimension} in dimension {n}")
    rotation_free = all(e.modulus_only for e in exprs)

    def g(Z):
        return np.column_stack([np.where(np.isnan(v), np.inf, v) for v in (e(Z) for e in exprs)])

    annulus = tuple(float(x) for x in spec.get("sample_annulus", (0.25, 1.0)))
    return RegionSpec(n, annulus, inequalities=g, circled=rotation_free, reinhardt=rotation_free,
                      name="custom", params={"inequalities": list(texts)})


def build_weight(spec) -> WeightSpec:
    if spec in (None, "zero", 0):
        return zero_weight()
    if spec == "log-norm":
        return log_norm_weight()
    if isinstance(spec, str):
        spec = {"expr": spec}
    if not isinstance(spec, dict):
        raise ScenarioError(f"cannot read weight {spec!r}")
    if spec.get("kind") == "constant":
        return constant_weight(float(spec["value"]))
    if spec.get("kind") in ("zero", "log-norm"):
        return build_weight(spec["kind"])
    if "expr" in spec:
        e = Expression(spec["expr"])
        return WeightSpec(e, circular=e.modulus_only, modulus_only=e.modulus_only, name=spec["expr"])
    raise ScenarioError(f"cannot read weight {spec!r}")


def build_points(spec, dimension) -> np.ndarray:
    if spec is None:
        return np.zeros((0, dimension), dtype=complex)
    if "points" in spec:
        P = [_point(p) for p in spec["points"]]
    elif "ray" in spec:
        ray = spec["ray"]
        u = np.array(_point(ray["direction"]))
        P = [list(float(r) * u) for r in ray["radii"]]
    elif "modulus_grid" in spec:
        axes = []
        for i in range(1, dimension + 1):
            lo, hi, count = spec["modulus_grid"][f"z{i}"]
            axes.append(np.linspace(float(lo), float(hi), int(count)))
        mesh = np.meshgrid(*axes, indexing="ij")
        P = np.column_stack([m.ravel(order="F") for m in mesh]).astype(complex).tolist()
    else:
        raise ScenarioError("grid needs one of: points, ray, modulus_grid")
    P = np.array(P, dtype=complex).reshape(-1, len(P[0]) if len(P) else dimension)
    if P.shape[1] != dimension:
        raise ScenarioError(f"grid points have dimension {P.shape[1]}, region has {dimension}")
    return P


def _dataclass_from(cls, d, what):
    known = {f.name for f in fields(cls)}
    bad = set(d) - known
    if bad:
        raise ScenarioError(f"unknown {what} field(s): {', '.join(sorted(bad))}")
    d = dict(d)
    if "penalty_weights" in d:
        d["penalty_weights"] = tuple(float(w) for w in d["penalty_weights"])
    return cls(**d)


def scenario_from_dict(doc: dict) -> ScenarioConfig:
    """Validate and build a scenario from a parsed JSON document."""
    if "region" not in doc:
        raise ScenarioError("scenario needs a region")
    doc = copy.deepcopy(doc)
    try:
        flags = doc.get("flags", {})
        region = build_region(doc["region"], flags)
        weight = build_weight(doc.get("weight"))
        points = build_points(doc.get("grid"), region.dimension)
        lowers = []
        for text in doc.get("lower_candidates", []):
            c = (reference_candidate(text[4:], region.dimension) if text.startswith("ref:")
                 else CandidateFunction.from_expr(text, region.dimension))
            lowers.append(c)
        seed = int(doc.get("seed", 0))
        opt = dict(doc.get("optimizer", {}))
        opt.setdefault("seed", seed)
        optimizer = _dataclass_from(OptimizerConfig, opt, "optimizer")
        search = _dataclass_from(ScalingSearch, doc.get("search", {}), "search")
    except ExprSyntaxError as err:
        raise ScenarioError(f"expression error: {err}") from err
    except KeyError as err:
        raise ScenarioError(f"missing or unknown key {err}") from err
    kinds = doc.get("kinds")
    if kinds is None:
        kinds = ["affine"] if region.claimed_full_cone else ["projective"]
    for k in kinds:
        if k not in KINDS:
            raise ScenarioError(f"unknown envelope kind {k!r}")
    if isinstance(weight.phi, Expression) and weight.phi.dimension > region.dimension:
        raise ScenarioError("weight uses more coordinates than the region has")
    return ScenarioConfig(doc.get("name", region.name), region, weight, lowers, points, tuple(kinds), optimizer,
                          search, doc.get("output"), seed, doc)


def load_scenario(path) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ScenarioError(f"{path}: invalid JSON ({err})") from err
    return scenario_from_dict(doc)


# -- built-in suite --------------------------------------------------------------

SUITE = {
    "punctured-ball": {
        "region": {"kind": "ball", "radius": 1.0, "dimension": 2},
        "lower_candidates": ["ref:punctured-ball"],
        "grid": {"points": [[0.3, 0.4], [1.0, 0.0], [[0.2, 0.1], 0.5], [2.0, -1.0], [0.05, 0.02]]},
    },
    "annulus": {
        "region": {"kind": "annulus", "r_in": 0.5, "r_out": 2.0, "dimension": 1},
        "lower_candidates": ["ref:annulus"],
        "grid": {"points": [[1.0], [[0.0, 1.5]], [0.1], [5.0], [[-0.3, 0.7]]]},
    },
    "punctured-polydisc": {
        "region": {"kind": "polydisc", "radii": [1.0, 1.0]},
        "lower_candidates": ["ref:punctured-polydisc"],
        "grid": {"points": [[0.9, 0.2], [0.5, [0.0, 0.5]], [2.0, 0.3], [0.1, 0.7], [1.0, 1.0]]},
    },
    "polydisc-union": {
        "region": {"kind": "polydisc-union", "radii": [[1.0, 0.5], [0.5, 1.0]]},
        "lower_candidates": ["ref:polydisc-union"],
        "grid": {"points": [[0.9, 0.9], [0.9, 0.3], [0.6, 0.6], [[0.0, 0.8], 0.7], [0.2, 1.5]]},
    },
    "sector": {
        "region": {"kind": "sector", "r_in": 1.0, "r_out": 2.0},
        "lower_candidates": ["ref:sector"],
        "kinds": ["projective"],
        "grid": {"points": [[0.5, 1.0], [1.0, 0.5], [0.3, 0.9]]},
    },
}


def suite_scenario(name: str, optimizer: Optional[dict] = None, seed: int = 0) -> ScenarioConfig:
    """A built-in scenario by name, with optional optimizer overrides."""
    if name not in SUITE:
        raise ScenarioError(f"unknown suite scenario {name!r}; known: {', '.join(SUITE)}")
    doc = copy.deepcopy(SUITE[name])
    doc["name"] = name
    doc["seed"] = seed
    if optimizer:
        doc["optimizer"] = dict(optimizer)
    return scenario_from_dict(doc)
