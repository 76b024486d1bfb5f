"""Reference solutions, a brute-force hull oracle and validators for L and L^h candidates.

The hull oracle deliberately shares no code with the region and weight
machinery: it works from raw polydisc radii with its own membership test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .domains import RegionSpec, as_points
from .envelope import EnvelopeResult
from .expr import Expression
from .weights import WeightSpec

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class CandidateFunction:
    """A candidate u: C^n -> R or -inf, evaluated on batches of points."""

    u: Callable[[np.ndarray], np.ndarray]
    dimension: int
    label: str = "candidate"

    @classmethod
    def from_expr(cls, text: str, dimension: Optional[int] = None) -> "CandidateFunction":
        e = Expression(text)
        return cls(e, dimension or max(e.dimension, 1), label=text)

    def __call__(self, Z) -> np.ndarray:
        Z = as_points(Z, self.dimension)
        return np.asarray(self.u(Z), dtype=float).reshape(-1)

    def at(self, z) -> float:
        return float(self(z)[0])


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def _ball(Z):
    return _log(np.linalg.norm(Z, axis=1))


def _annulus(Z):
    return _log(np.linalg.norm(Z, axis=1)) - LOG2


def _polydisc(Z):
    return _log(np.abs(Z).max(axis=1))


def _polydisc_union(Z):
    A = np.abs(Z)
    return _log(np.maximum(A.max(axis=1), np.sqrt(2.0 * A[:, 0] * A[:, 1])))


def _sector(Z):
    return _log(np.abs(Z).max(axis=1)) - LOG2


_REFERENCES = {
    "punctured-ball": (_ball, "closed form"),
    "annulus": (_annulus, "closed form"),
    "punctured-polydisc": (_polydisc, "closed form"),
    "polydisc-union": (_polydisc_union, "log-convex hull oracle"),
    "sector": (_sector, "conjectured fixture backed by sandwich"),
}
CASES = tuple(_REFERENCES)


def reference_candidate(case_id: str, dimension: int = 2) -> CandidateFunction:
    """The closed-form (or fixture) envelope of a built-in case as a candidate function."""
    if case_id not in _REFERENCES:
        raise KeyError(f"unknown case {case_id!r}; known cases: {', '.join(CASES)}")
    u, _ = _REFERENCES[case_id]
    return CandidateFunction(u, dimension, label=case_id)


def fixture_provenance(case_id: str) -> str:
    if case_id not in _REFERENCES:
        raise KeyError(f"unknown case {case_id!r}")
    return _REFERENCES[case_id][1]


def reference_vh(case_id: str, z) -> float:
    """Reference envelope value at z.

    ball: log|z|; annulus {1/2 < |w| < 2}: log|z| - log 2; polydisc:
    log max|z_i|; union of the polydiscs with radii (1, 1/2) and (1/2, 1):
    log max(|z_1|, |z_2|, sqrt(2|z_1 z_2|)); sector: log max|z_i| - log 2.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    return reference_candidate(case_id, z.size).at(z)


# -- log-convex hull of a Reinhardt union of polydiscs ----------------------------


def _union_contains(R, a1, a2):
    """Raw membership of moduli (a1, a2) in the union of open polydiscs with radii rows R."""
    a1 = np.asarray(a1, dtype=float)[..., None]
    a2 = np.asarray(a2, dtype=float)[..., None]
    return np.any((a1 < R[:, 0]) & (a2 < R[:, 1]), axis=-1)


def _staircase(R, columns, lo, hi):
    """Corner points of the log-image of the union on a column grid.

    For each column x the top Y(x) = sup{y : (e^x, e^y) in union} is found by
    bisection.  Where Y drops between neighbouring columns, the exact column
    of the drop is located by bisection in x.
    """
    xs = np.linspace(lo, hi, columns)
    inside_low = _union_contains(R, np.exp(xs), math.exp(lo))
    xs = xs[inside_low]
    ylo = np.full(xs.size, lo)
    yhi = np.full(xs.size, hi)
    capped = _union_contains(R, np.exp(xs), math.exp(hi))
    for _ in range(60):
        mid = 0.5 * (ylo + yhi)
        ok = _union_contains(R, np.exp(xs), np.exp(mid))
        ylo = np.where(ok, mid, ylo)
        yhi = np.where(ok, yhi, mid)
    Y = np.where(capped, hi, ylo)
    corners_x, corners_y = list(xs), list(Y)
    for i in np.flatnonzero(np.diff(Y) < -1e-9):
        level = Y[i] - 1e-9
        a, b = xs[i], xs[i + 1]
        for _ in range(60):
            m = 0.5 * (a + b)
            if _union_contains(R, math.exp(m), math.exp(level)):
                a = m
            else:
                b = m
        corners_x.append(a)
        corners_y.append(Y[i])
    # right end of the top step of the last nonempty column
    if xs.size:
        a, b = xs[-1], hi
        for _ in range(60):
            m = 0.5 * (a + b)
            if _union_contains(R, math.exp(m), math.exp(Y[-1] - 1e-9)):
                a = m
            else:
                b = m
        corners_x.append(a)
        corners_y.append(Y[-1])
    return np.array(corners_x), np.array(corners_y)


def reinhardt_hull_gauge(polydiscs, z, columns: int = 2048, angles: int = 2049,
                         box: tuple = (-6.0, 1.0)) -> float:
    """Gauge at z of the balanced domain whose log-image is the convex hull of the union's log-image.

    The log-image is sampled column by column on ``box``, its support function
    h(n) is evaluated for ``angles`` normals n in the closed positive quadrant,
    and log gauge(z) = max_n (n . p - h(n)) / (n_1 + n_2) with p = log|z|.
    """
    R = np.asarray(polydiscs, dtype=float)
    if R.ndim != 2 or R.shape[1] != 2:
        raise ValueError("hull oracle is two-dimensional only")
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if z.size != 2:
        raise ValueError("hull oracle is two-dimensional only")
    lo, hi = box
    hi = max(hi, float(np.log(R.max())) + 0.5)
    cx, cy = _staircase(R, columns, lo, hi)
    if cx.size == 0:
        raise ValueError("union does not meet the sampling box")
    a = np.abs(z)
    if np.any(a == 0):
        # on a coordinate axis only the other modulus matters
        k = int(np.argmax(a))
        edge = cx.max() if k == 0 else cy.max()
        return float(a[k] / math.exp(edge))
    p = np.log(a)
    theta = np.linspace(0.0, np.pi / 2, angles)
    N = np.column_stack([np.cos(theta), np.sin(theta)])
    h = (N @ np.vstack([cx, cy])).max(axis=1)
    log_gauge = np.max((N @ p - h) / N.sum(axis=1))
    return float(math.exp(log_gauge))


# -- validators ------------------------------------------------------------------


def _unit_directions(n, count, seed):
    rng = np.random.default_rng(seed)
    U = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


@dataclass
class LelongReport:
    defect: float
    per_radius: list
    verdict: str


def lelong_defect(c: CandidateFunction, radii=(1.0, 10.0, 100.0, 1000.0), samples: int = 256, seed: int = 0,
                  tol: float = 1e-6) -> LelongReport:
    """max over sampled sphere points and radii of u(z) - log+|z|.

    The same directions are used at every radius, so a logarithmically
    homogeneous u gives the same defect at each radius.  Growth of the running
    maximum beyond ``tol`` is reported as ``"unbounded-evidence"``.
    """
    radii = [float(r) for r in radii]
    if any(r < 1 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing and >= 1")
    U = _unit_directions(c.dimension, samples, seed)
    per_radius = []
    running = -math.inf
    for r in radii:
        with np.errstate(all="ignore"):
            v = c(r * U) - math.log(r)
        running = max(running, float(np.nanmax(v)))
        per_radius.append(running)
    growth = per_radius[-1] - per_radius[0]
    verdict = "unbounded-evidence" if growth > tol * max(1.0, abs(per_radius[0])) else "bounded"
    return LelongReport(per_radius[-1], per_radius, verdict)


def loghomog_residual(c: CandidateFunction, z, lam: complex) -> float:
    """|u(lam z) - u(z) - log|lam||; two -inf values count as agreeing."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    Z = as_points(z, c.dimension)
    if not np.any(Z != 0):
        raise ValueError("z must be nonzero")
    a, b = c.at(lam * Z), c.at(Z)
    if math.isinf(a) and math.isinf(b) and a == b:
        return 0.0
    return abs(a - b - math.log(abs(lam)))


@dataclass
class SandwichReport:
    lower: Optional[float]
    upper: float
    gap: Optional[float]
    verdict: str
    failed_check: str = ""
    label: str = ""

    @property
    def interval(self):
        return (self.lower, self.upper)


def _region_samples(region: RegionSpec, count, seed):
    rng = np.random.default_rng(seed)
    U = _unit_directions(region.dimension, count, seed + 1)
    r_min, r_max = region.sample_annulus
    r = np.exp(rng.uniform(math.log(r_min), math.log(r_max), size=count))
    P = r[:, None] * U
    return P[region.member(P)]


def validate_lower(lower: CandidateFunction, region: RegionSpec, weight: WeightSpec, pairs: int = 64,
                   samples: int = 4000, seed: int = 0, homog_tol: float = 1e-8, dom_tol: float = 1e-9) -> str:
    """Empty string when ``lower`` passes both checks, else the name of the failed check."""
    rng = np.random.default_rng(seed)
    Z = _unit_directions(lower.dimension, pairs, seed) * np.exp(rng.uniform(-2, 2, size=pairs))[:, None]
    lams = np.exp(rng.uniform(-3, 3, size=pairs) + 1j * rng.uniform(0, 2 * np.pi, size=pairs))
    worst = max(loghomog_residual(lower, z, lam) for z, lam in zip(Z, lams))
    if not worst < homog_tol:
        return f"log-homogeneity (residual {worst:.3e})"
    P = _region_samples(region, samples, seed)
    if P.shape[0]:
        excess = float(np.max(lower(P) - weight(P)))
        if excess > dom_tol:
            return f"domination on E (excess {excess:.3e})"
    return ""


def sandwich_certify(z, lower: Optional[CandidateFunction], upper: EnvelopeResult, region: RegionSpec,
                     weight: WeightSpec, tol: float = 0.05, slack: float = 1e-3) -> SandwichReport:
    """Bracket the envelope at z between a validated lower candidate and an optimized upper bound.

    Verdicts: ``certified`` (-slack <= gap < tol), ``not-certified``
    (gap too wide), ``unsound`` (upper below lower by more than ``slack``),
    ``upper-bound-only`` (no candidate) and ``failed-check`` (candidate rejected).
    """
    if lower is None:
        return SandwichReport(None, upper.value, None, "upper-bound-only")
    failed = validate_lower(lower, region, weight)
    if failed:
        return SandwichReport(None, upper.value, None, "failed-check", failed, lower.label)
    lo = lower.at(z)
    gap = upper.value - lo
    if gap < -slack:
        verdict = "unsound"
    elif gap < tol:
        verdict = "certified"
    else:
        verdict = "not-certified"
    return SandwichReport(lo, upper.value, gap, verdict, "", lower.label)
