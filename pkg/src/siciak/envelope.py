"""Disc functionals, circle quadrature and the envelope minimizer.

Three functionals are provided, all integrated with the trapezoidal rule on
the N-th roots of unity:

* ``h_affine``: mean of log rho over the boundary of an affine disc;
* ``h_projective``: mean of log rho over the boundary values of a lift
  (f_0, ..., f_n), with f_0 only constraining the disc;
* ``h_weighted``: crossing term -sum m(a) log|a| over zeros of f_0 in D plus
  the mean of psi over the chart values f/f_0.

The minimizer runs degree continuation with multistart Nelder-Mead descents on
a penalized, quadrature-guarded objective.  Reported values are always the pure
functional of the returned disc.
"""

from __future__ import annotations

import functools
import hashlib
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .discs import (PolyDisc, ProjDisc, aberth_roots, boundary_trace, cluster_roots, infinity_crossings,
                    normalize_reduced, roots_in_unit_disc, unit_roots)
from .domains import RegionSpec
from .errors import (DegenerateDiscError, InfeasibleDiscError, NoFeasibleDiscError, PreconditionError,
                     RootFindingError)
from .weights import HomogenizedWeight

KINDS = ("affine", "projective", "weighted")
SUBGRIDS = 4
F0_CIRCLE_TOL = 1e-6


@dataclass(frozen=True)
class QuadratureGrid:
    """N equally weighted nodes at the N-th roots of unity."""

    N: int = 512

    def __post_init__(self):
        if self.N < SUBGRIDS or self.N & (self.N - 1):
            raise ValueError("N must be a power of two, at least 4")

    @functools.cached_property
    def nodes(self) -> np.ndarray:
        return unit_roots(self.N)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.N, 1.0 / self.N)


@dataclass(frozen=True)
class OptimizerConfig:
    """Budget and schedule for :func:`minimize_envelope`.

    ``max_evals`` caps objective evaluations per descent (all penalty stages
    and restarts together); ``time_budget`` is a wall-clock safety net per
    point, in seconds, after which the best result so far is returned with
    ``converged=False``.
    """

    max_degree: int = 8
    starts: int = 16
    penalty_weights: tuple = (10.0, 100.0, 1000.0, 10000.0)
    max_evals: int = 3000
    restarts: int = 2
    seed: int = 0
    time_budget: Optional[float] = None
    quad_nodes: int = 512
    start_scale: float = 0.25
    initial_step: float = 0.1
    feasibility_tol: float = 1e-8
    stability_tol: float = 1e-3
    spread_weight: float = 1.0
    apex_margin: float = 1e-3
    f0_margin: float = 1e-2

    def __post_init__(self):
        if self.max_degree < 0:
            raise ValueError("degree schedule must be nonempty")
        if self.starts < 1:
            raise ValueError("starts must be at least 1")
        if not self.penalty_weights:
            raise ValueError("penalty schedule must be nonempty")

    @property
    def degree_schedule(self) -> range:
        return range(self.max_degree + 1)

    @property
    def grid(self) -> QuadratureGrid:
        return QuadratureGrid(self.quad_nodes)


@dataclass
class EnvelopeResult:
    value: float
    best_disc: object
    degree_used: int
    penalty_residual: float
    trace: list
    converged: bool
    kind: str = "affine"
    evaluations: int = 0
    message: str = ""


# -- pure functionals ----------------------------------------------------------


def _subgrid_spread(vals):
    means = vals.reshape(-1, SUBGRIDS).mean(axis=0)
    return float(means.max() - means.min())


def _require_feasible(pen, what="boundary node outside the cone"):
    bad = np.flatnonzero(pen > 0)
    if bad.size:
        raise InfeasibleDiscError(f"{bad.size} {what}(s)", bad, float(pen.max()))


def _check_dimension(hw, disc):
    if disc.dimension != hw.region.dimension:
        raise ValueError(f"disc dimension {disc.dimension} != region dimension {hw.region.dimension}")


def _check_f0(disc: ProjDisc):
    f0 = disc.f0
    if np.all(f0[1:] == 0):
        return
    near = [a for a, _ in cluster_roots(aberth_roots(f0)) if abs(abs(a) - 1) < F0_CIRCLE_TOL]
    if near:
        raise InfeasibleDiscError(f"f_0 has a zero within {F0_CIRCLE_TOL} of the unit circle", (), math.inf)


def _affine_terms(integrand, f: PolyDisc, grid):
    vals, pen = integrand(boundary_trace(f, grid.N))
    _require_feasible(pen)
    return float(np.mean(vals)), _subgrid_spread(vals)


def _projective_terms(integrand, f: ProjDisc, grid):
    _check_f0(f)
    T = boundary_trace(f, grid.N)
    vals, pen = integrand(T[:, 1:])
    _require_feasible(pen)
    return float(np.mean(vals)), _subgrid_spread(vals)


def _weighted_terms(psi, f: ProjDisc, grid):
    """psi maps chart points to (values, penalties)."""
    _check_f0(f)
    T = boundary_trace(f, grid.N)
    if np.any(T[:, 0] == 0):
        raise InfeasibleDiscError("f_0 vanishes at a quadrature node", np.flatnonzero(T[:, 0] == 0), math.inf)
    chart = T[:, 1:] / T[:, :1]
    vals, pen = psi(chart)
    _require_feasible(pen)
    crossing = -infinity_crossings(f).log_sum()
    return crossing + float(np.mean(vals)), _subgrid_spread(vals)


def h_affine(hw: HomogenizedWeight, f: PolyDisc, grid: QuadratureGrid = QuadratureGrid()) -> float:
    """Mean of log rho over the boundary of an affine disc.

    Raises :class:`InfeasibleDiscError` (carrying the offending nodes) when a
    boundary value is not found in the cone.
    """
    _check_dimension(hw, f)
    return _affine_terms(hw.integrand(), f, grid)[0]


def h_projective(hw: HomogenizedWeight, f: ProjDisc, grid: QuadratureGrid = QuadratureGrid()) -> float:
    """Mean of log rho over the lift values (f_1, ..., f_n) on the circle."""
    _check_dimension(hw, f)
    return _projective_terms(hw.integrand(), f, grid)[0]


def region_psi(X: RegionSpec, psi):
    """Combine a region X and a batch weight oracle psi on X into an integrand."""

    def integrand(P):
        inside = X.member(P)
        vals = np.zeros(P.shape[0])
        if np.any(inside):
            vals[inside] = np.asarray(psi(P[inside]), dtype=float)
        return vals, np.where(inside, 0.0, 1.0)

    return integrand


def h_weighted(X: RegionSpec, psi, f: ProjDisc, grid: QuadratureGrid = QuadratureGrid()) -> float:
    """Crossing term of f_0 plus the mean of psi over the chart values f/f_0 (which must lie in X)."""
    if f.dimension != X.dimension:
        raise ValueError(f"disc dimension {f.dimension} != region dimension {X.dimension}")
    return _weighted_terms(region_psi(X, psi), f, grid)[0]


def _evaluate(kind, integrand, disc, grid):
    if kind == "affine":
        return _affine_terms(integrand, disc, grid)
    if kind == "projective":
        return _projective_terms(integrand, disc, grid)
    return _weighted_terms(integrand, disc, grid)


# -- optimizer ---------------------------------------------------------------


class _OutOfTime(Exception):
    pass


def point_seed(seed: int, z) -> np.random.SeedSequence:
    """Seed sequence derived from the run seed and the point itself.

    A point therefore gets the same random starts whether it is evaluated alone
    or as part of a batch, in any order.
    """
    z = np.ascontiguousarray(np.asarray(z, dtype=complex).ravel())
    digest = hashlib.sha256(z.tobytes()).digest()
    words = np.frombuffer(digest[:16], dtype=np.uint32).tolist()
    return np.random.SeedSequence([int(seed) & 0xFFFFFFFF] + words)


class _Problem:
    """Penalized objective over the free (non-constant) coefficients at a fixed degree."""

    def __init__(self, kind, integrand, z, degree, cfg: OptimizerConfig):
        self.kind = kind
        self.integrand = integrand
        self.cfg = cfg
        self.z = z
        self.absz = float(np.linalg.norm(z))
        self.degree = degree
        self.base = z if kind == "affine" else np.concatenate([[1.0], z])
        self.rows = self.base.size
        # coefficient = x * scale so that one simplex step is comparable across rows
        self.scale = np.full(self.rows, self.absz)
        if kind != "affine":
            self.scale[0] = 1.0
        nodes = cfg.grid.nodes
        self.V = nodes[None, :] ** np.arange(1, degree + 1)[:, None]
        self.size = 2 * self.rows * degree
        self.evals = 0

    def coefficients(self, x):
        half = self.rows * self.degree
        F = (x[:half] + 1j * x[half:]).reshape(self.rows, self.degree) * self.scale[:, None]
        C = np.empty((self.rows, self.degree + 1), dtype=complex)
        C[:, 0] = self.base
        C[:, 1:] = F
        return C

    def params(self, C):
        F = np.asarray(C)[:, 1:self.degree + 1] / self.scale[:, None]
        pad = np.zeros((self.rows, self.degree), dtype=complex)
        pad[:, : F.shape[1]] = F
        return np.concatenate([pad.real.ravel(), pad.imag.ravel()])

    def disc(self, x):
        C = self.coefficients(x)
        return PolyDisc(C) if self.kind == "affine" else ProjDisc(C)

    def terms(self, x):
        """(values, penalties, crossing) at the quadrature nodes."""
        C = self.coefficients(x)
        W = C[:, :1] + C[:, 1:] @ self.V
        cfg = self.cfg
        crossing = 0.0
        extra = 0.0
        if self.kind == "affine":
            pts = W
        else:
            f0 = W[0]
            extra = np.maximum(0.0, 1.0 - np.abs(f0) / cfg.f0_margin)
            if self.kind == "projective":
                pts = W[1:]
            else:
                with np.errstate(all="ignore"):
                    pts = W[1:] / np.where(f0 == 0, 1e-300, f0)[None, :]
                try:
                    crossing = -roots_in_unit_disc(C[0]).log_sum() if np.any(C[0, 1:] != 0) else 0.0
                except RootFindingError:
                    crossing = math.inf
        P = pts.T
        vals, pen = self.integrand(P)
        apex = np.maximum(0.0, 1.0 - np.linalg.norm(P, axis=1) / (cfg.apex_margin * self.absz))
        return vals, pen + apex + extra, crossing

    def objective(self, x, weight):
        self.evals += 1
        vals, pen, crossing = self.terms(x)
        out = (crossing + float(np.mean(vals)) + self.cfg.spread_weight * _subgrid_spread(vals)
               + weight * float(np.sum(pen)))
        return out if np.isfinite(out) else 1e300

    def residual(self, x):
        return float(np.sum(self.terms(x)[1]))


class _Clock:
    def __init__(self, budget):
        self.deadline = None if budget is None else time.monotonic() + budget
        self.expired = False

    def check(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            self.expired = True
            raise _OutOfTime


def _descend(prob: _Problem, x0, cfg: OptimizerConfig, clock: _Clock):
    """Penalty schedule around restarted adaptive Nelder-Mead; returns the final point."""
    x = np.array(x0, dtype=float)
    used = 0
    for weight in cfg.penalty_weights:
        best = {"f": math.inf, "x": x}

        def fun(v, weight=weight, best=best):
            clock.check()
            fv = prob.objective(v, weight)
            if fv < best["f"]:
                best["f"], best["x"] = fv, np.array(v)
            return fv

        fx = fun(x)
        step = cfg.initial_step
        try:
            for r in range(cfg.restarts + 1):
                left = cfg.max_evals - used
                if left <= prob.size + 1:
                    break
                sign = -1.0 if r % 2 else 1.0
                simplex = np.vstack([x, x + sign * step * np.eye(prob.size)])
                res = minimize(fun, x, method="Nelder-Mead",
                               options={"initial_simplex": simplex, "maxfev": left, "xatol": 1e-9,
                                        "fatol": 1e-12, "adaptive": True})
                used += int(res.nfev)
                gain = fx - best["f"]
                x, fx = best["x"], best["f"]
                if gain <= 1e-10:
                    break
                step *= 0.5
        except _OutOfTime:
            return best["x"]
        if prob.residual(x) <= cfg.feasibility_tol:
            break
    return x


def _as_kind(disc, kind, dimension):
    """Convert a warm-start disc to the representation used by ``kind``."""
    if kind == "affine":
        if isinstance(disc, ProjDisc):
            if np.any(disc.f0[1:] != 0):
                return None
            return PolyDisc(disc.coefficients[1:])
        return disc
    return ProjDisc.from_affine(disc) if isinstance(disc, PolyDisc) else disc


def minimize_envelope(hw: HomogenizedWeight, z, kind: str = "affine", cfg: OptimizerConfig = OptimizerConfig(),
                      warm_starts=()) -> EnvelopeResult:
    """Upper bound for the envelope at z by minimizing the chosen functional over polynomial discs.

    Degree d + 1 is seeded with the zero-padded best disc so far (plus
    ``cfg.starts - 1`` Gaussian random starts), so the per-degree trace can only
    decrease.  ``warm_starts`` are extra discs (of any kind) tried at their
    own degree.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    region = hw.region
    z = region.points(z)[0]
    if not np.any(z != 0):
        raise ValueError("z must be nonzero")
    if kind == "affine" and not region.claimed_full_cone:
        raise PreconditionError(f"affine envelope needs a full cone; region {region.name!r} does not claim one")
    if kind != "affine" and not region.claimed_cone_connected:
        raise PreconditionError(f"region {region.name!r} does not claim a connected cone")

    integrand = hw.integrand()
    grid = cfg.grid
    clock = _Clock(cfg.time_budget)
    rng = np.random.default_rng(point_seed(cfg.seed, z))
    warm = [w for w in (_as_kind(d, kind, region.dimension) for d in warm_starts) if w is not None]

    best = {"value": math.inf, "disc": None, "degree": 0}
    least_residual = math.inf
    evaluations = 0

    def consider(disc, degree):
        nonlocal least_residual
        candidates = [disc]
        if kind != "affine":
            try:
                reduced = normalize_reduced(disc)
                if reduced is not disc:
                    candidates.insert(0, reduced)
            except (DegenerateDiscError, RootFindingError):
                pass
        for cand in candidates:
            try:
                value, spread = _evaluate(kind, integrand, cand, grid)
            except InfeasibleDiscError as err:
                least_residual = min(least_residual, err.residual)
                continue
            except RootFindingError:
                continue
            least_residual = 0.0
            if spread <= cfg.stability_tol and value < best["value"]:
                best.update(value=value, disc=cand, degree=cand.degree)
            return

    constant = PolyDisc.constant(z) if kind == "affine" else ProjDisc.constant(z)
    consider(constant, 0)
    for w in warm:
        if w.degree == 0:
            consider(w, 0)
    trace = [best["value"]]
    completed = True
    try:
        for d in cfg.degree_schedule[1:]:
            prob = _Problem(kind, integrand, z, d, cfg)
            seeds = []
            anchor = best["disc"] if best["disc"] is not None else constant
            seeds.append(prob.params(anchor.padded(d).coefficients))
            for w in warm:
                if w.degree == d:
                    consider(w, d)
                    seeds.append(prob.params(w.coefficients))
            while len(seeds) < cfg.starts:
                x0 = np.zeros(prob.size)
                half = prob.size // 2
                x0[:half] = rng.normal(scale=cfg.start_scale, size=half)
                x0[half:] = rng.normal(scale=cfg.start_scale, size=half)
                seeds.append(x0)
            for x0 in seeds:
                x = _descend(prob, x0, cfg, clock)
                consider(prob.disc(x), d)
                if clock.expired:
                    break
            evaluations += prob.evals
            trace.append(min(trace[-1], best["value"]))
            if clock.expired:
                completed = False
                break
    except _OutOfTime:
        completed = False

    if best["disc"] is None:
        raise NoFeasibleDiscError(f"no feasible {kind} disc found at {z}", least_residual, not completed)
    message = "" if completed else "time budget exhausted"
    return EnvelopeResult(best["value"], best["disc"], best["degree"], 0.0, trace, completed, kind,
                          evaluations, message)


# -- consistency -------------------------------------------------------------


@dataclass
class ConsistencyReport:
    z: tuple
    projective: Optional[float] = None
    weighted: Optional[float] = None
    affine: Optional[float] = None
    notes: list = field(default_factory=list)
    tol: float = 1e-2
    containment_tol: float = 1e-3

    @property
    def projective_weighted_gap(self) -> Optional[float]:
        if self.projective is None or self.weighted is None:
            return None
        return abs(self.projective - self.weighted)

    @property
    def projective_affine_gap(self) -> Optional[float]:
        if self.projective is None or self.affine is None:
            return None
        return self.projective - self.affine

    @property
    def ok(self) -> bool:
        g1, g2 = self.projective_weighted_gap, self.projective_affine_gap
        return (g1 is None or g1 <= self.tol) and (g2 is None or g2 <= self.containment_tol)


def consistency_check(hw: HomogenizedWeight, z, cfg: OptimizerConfig = OptimizerConfig(),
                      tol: float = 1e-2) -> ConsistencyReport:
    """Compare the projective, weighted (X = C*E, psi = log rho) and affine envelopes at z.

    The affine run seeds the projective run, which seeds the weighted run; each
    best disc is then scored by the other functional as well, since the
    projective and weighted functionals range over the same lifts.
    """
    z = hw.region.points(z)[0]
    report = ConsistencyReport(tuple(complex(v) for v in z), tol=tol)
    integrand = hw.integrand()
    grid = cfg.grid
    seeds = []
    if hw.region.claimed_full_cone:
        c = minimize_envelope(hw, z, "affine", cfg)
        report.affine = c.value
        seeds.append(c.best_disc)
    else:
        report.notes.append("affine skipped: cone is not claimed to be all of C^n")
    if not hw.region.claimed_cone_connected:
        report.notes.append("projective and weighted skipped: cone not claimed connected")
        return report
    a = minimize_envelope(hw, z, "projective", cfg, warm_starts=seeds)
    b = minimize_envelope(hw, z, "weighted", cfg, warm_starts=[a.best_disc])
    pa, pb = a.value, b.value
    for disc in (b.best_disc,):
        try:
            pa = min(pa, _projective_terms(integrand, disc, grid)[0])
        except InfeasibleDiscError:
            report.notes.append("weighted disc infeasible for the projective functional")
    try:
        pb = min(pb, _weighted_terms(integrand, a.best_disc, grid)[0])
    except InfeasibleDiscError:
        report.notes.append("projective disc infeasible for the weighted functional")
    report.projective, report.weighted = pa, pb
    return report
