"""Open sets E in C^n minus the origin, their punctured cones C*E, and probes.

All oracles are batch oracles: they take an array of shape (M, n) of complex
points and return one value per row.  A region is immutable once built and may
be shared freely between threads and processes (it is rebuilt from its config
in worker processes).

Scalings follow the convention ``mu * z in E``: the set C*E is exactly the set
of z admitting such a mu != 0.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DimensionError, GaugeError

BOUNDARY_EPS = 1e-12
"""Points within this distance of a defining boundary count as outside."""

Oracle = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ScalingSearch:
    """Log-polar search configuration for scalings mu with mu*z in E."""

    radial: int = 64
    angular: int = 64
    rounds: int = 3
    shrink: float = 8.0
    pad: float = 2.0
    chunk: int = 262_144  # max (point, sample) pairs per vectorized block

    def doubled(self) -> "ScalingSearch":
        """The same search with twice the refinement work."""
        return ScalingSearch(self.radial, self.angular, 2 * self.rounds, self.shrink, self.pad, self.chunk)


@dataclass(frozen=True, eq=False)
class RegionSpec:
    """An open set E in C^n \\ {0} given by oracles.

    ``inequalities`` maps points to an (M, k) array of g_i with the convention
    z in E iff max_i g_i(z) < 0.  When absent, ``membership`` is used.
    ``circled`` (invariant under z -> e^{it} z) and ``reinhardt`` (invariant
    under independent coordinate rotations) enable cheaper searches.
    """

    dimension: int
    sample_annulus: tuple
    inequalities: Optional[Oracle] = None
    membership: Optional[Oracle] = None
    claimed_balanced: bool = False
    claimed_cone_connected: bool = False
    claimed_full_cone: bool = False
    circled: bool = False
    reinhardt: bool = False
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        r_min, r_max = self.sample_annulus
        if not (0 < r_min <= r_max):
            raise ValueError("sample_annulus must satisfy 0 < r_min <= r_max")
        if self.inequalities is None and self.membership is None:
            raise ValueError("region needs inequalities or a membership oracle")

    def points(self, z) -> np.ndarray:
        return as_points(z, self.dimension)

    def member(self, Z: np.ndarray) -> np.ndarray:
        """Batch membership; the origin is never a member."""
        Z = self.points(Z)
        if self.inequalities is not None:
            g = np.asarray(self.inequalities(Z), dtype=float).reshape(Z.shape[0], -1)
            inside = np.max(g, axis=1) < -BOUNDARY_EPS
        else:
            inside = np.asarray(self.membership(Z), dtype=bool)
        return inside & np.any(Z != 0, axis=1)

    def violation(self, Z: np.ndarray) -> np.ndarray:
        """max_i g_i at each point (requires inequalities)."""
        g = np.asarray(self.inequalities(Z), dtype=float).reshape(Z.shape[0], -1)
        return np.max(g, axis=1)


def as_points(z, n: int) -> np.ndarray:
    """Coerce a point or batch of points to a complex (M, n) array."""
    Z = np.asarray(z, dtype=complex)
    if Z.ndim == 0:
        Z = Z.reshape(1, 1)
    elif Z.ndim == 1:
        if n == 1 and Z.shape[0] != 1:
            Z = Z.reshape(-1, 1)
        else:
            Z = Z.reshape(1, -1)
    if Z.ndim != 2 or Z.shape[1] != n:
        raise DimensionError(f"expected points of dimension {n}, got shape {np.shape(z)}")
    if not np.all(np.isfinite(Z)):
        raise ValueError("points must be finite")
    return Z


# -- built-in regions -------------------------------------------------------


def _moduli(Z):
    return np.abs(Z)


def ball(radius: float = 1.0, dimension: int = 2) -> RegionSpec:
    """Punctured ball {0 < |z| < radius}."""

    def g(Z):
        r = np.linalg.norm(Z, axis=1)
        return np.stack([r - radius, -r], axis=1)

    return RegionSpec(dimension, (radius / 4, radius), inequalities=g, claimed_balanced=True,
                      claimed_cone_connected=True, claimed_full_cone=True, circled=True, reinhardt=True,
                      name="ball", params={"radius": radius})


def annulus(r_in: float = 0.5, r_out: float = 2.0, dimension: int = 1) -> RegionSpec:
    """Spherical shell {r_in < |z| < r_out}."""
    if not 0 < r_in < r_out:
        raise ValueError("need 0 < r_in < r_out")

    def g(Z):
        r = np.linalg.norm(Z, axis=1)
        return np.stack([r_in - r, r - r_out], axis=1)

    return RegionSpec(dimension, (r_in, r_out), inequalities=g, claimed_cone_connected=True,
                      claimed_full_cone=True, circled=True, reinhardt=True, name="annulus",
                      params={"r_in": r_in, "r_out": r_out})


def polydisc(radii=(1.0, 1.0)) -> RegionSpec:
    """Punctured polydisc {0 < |z_i| < r_i for all i} (origin removed)."""
    radii = np.asarray(radii, dtype=float)

    def g(Z):
        A = _moduli(Z)
        return np.column_stack([A - radii, -np.linalg.norm(Z, axis=1)])

    n = len(radii)
    return RegionSpec(n, (radii.min() / 4, float(np.linalg.norm(radii))), inequalities=g,
                      claimed_balanced=True, claimed_cone_connected=True, claimed_full_cone=True,
                      circled=True, reinhardt=True, name="polydisc", params={"radii": radii.tolist()})


def polydisc_union(radii_list=((1.0, 0.5), (0.5, 1.0))) -> RegionSpec:
    """Union of polydiscs, origin removed: balanced but not log-convex in general."""
    R = np.asarray(radii_list, dtype=float)

    def g(Z):
        A = _moduli(Z)
        piece = np.max(A[:, None, :] - R[None, :, :], axis=2)
        return np.column_stack([piece.min(axis=1), -np.linalg.norm(Z, axis=1)])

    n = R.shape[1]
    return RegionSpec(n, (R.min() / 4, float(np.linalg.norm(R, axis=1).max())), inequalities=g,
                      claimed_balanced=True, claimed_cone_connected=True, claimed_full_cone=True,
                      circled=True, reinhardt=True, name="polydisc-union", params={"radii": R.tolist()})


def sector(r_in: float = 1.0, r_out: float = 2.0) -> RegionSpec:
    """{(z, w) : |w| < |z|, r_in < |z| < r_out}; its cone {|w| < |z|} is not all of C^2."""

    def g(Z):
        A = _moduli(Z)
        return np.column_stack([A[:, 1] - A[:, 0], r_in - A[:, 0], A[:, 0] - r_out])

    return RegionSpec(2, (r_in, r_out * math.sqrt(2)), inequalities=g, claimed_cone_connected=True,
                      circled=True, reinhardt=True, name="sector", params={"r_in": r_in, "r_out": r_out})


# -- operations --------------------------------------------------------------


def contains(region: RegionSpec, z) -> bool:
    """Membership of a single point."""
    Z = region.points(z)
    if Z.shape[0] != 1:
        raise DimensionError("contains() takes a single point")
    return bool(region.member(Z)[0])


def _window(region, absz, cfg):
    r_min, r_max = region.sample_annulus
    with np.errstate(divide="ignore"):
        lz = np.log(absz)
    return np.log(r_min) - lz - cfg.pad, np.log(r_max) - lz + cfg.pad


def scaling_minimize(region: RegionSpec, Z: np.ndarray, cost: Optional[Oracle], cfg: ScalingSearch,
                     circular: bool = False, rounds: Optional[int] = None):
    """Minimise ``cost(mu z) - log|mu|`` over admissible mu on a refined log-polar grid.

    ``cost=None`` means a zero cost, i.e. the largest admissible |mu| is sought.
    Angular sampling collapses to a single direction when the region is circled
    and the cost is invariant under rotation (``circular``).

    Returns ``(best, log_r, theta)``; ``best`` is +inf where no admissible
    sample was found.
    """
    Z = region.points(Z)
    M = Z.shape[0]
    rounds = cfg.rounds if rounds is None else rounds
    absz = np.linalg.norm(Z, axis=1)
    lo, hi = _window(region, np.where(absz > 0, absz, 1.0), cfg)
    A = 1 if (region.circled and circular) else cfg.angular
    R = cfg.radial

    best = np.full(M, np.inf)
    best_lr = 0.5 * (lo + hi)
    best_th = np.zeros(M)
    live = absz > 0
    half_r = 0.5 * (hi - lo)
    half_t = np.pi
    for rnd in range(rounds + 1):
        if rnd == 0:
            lr = lo[:, None] + (hi - lo)[:, None] * (np.arange(R) / (R - 1))[None, :]
            th = np.broadcast_to(2 * np.pi * np.arange(A) / A, (M, A))
        else:
            half_r = half_r / cfg.shrink
            half_t = half_t / cfg.shrink
            lr = best_lr[:, None] + half_r[:, None] * np.linspace(-1.0, 1.0, R)[None, :]
            if A == 1:
                th = np.zeros((M, 1))
            else:
                th = best_th[:, None] + half_t * np.linspace(-1.0, 1.0, A)[None, :]
        idx = np.flatnonzero(live if rnd == 0 else live & np.isfinite(best))
        step = max(1, cfg.chunk // (R * A))
        for s in range(0, idx.size, step):
            rows = idx[s:s + step]
            mu = np.exp(lr[rows][:, :, None] + 1j * th[rows][:, None, :])  # (m, R, A)
            P = (mu[..., None] * Z[rows][:, None, None, :]).reshape(-1, region.dimension)
            ok = region.member(P)
            vals = np.full(P.shape[0], np.inf)
            if np.any(ok):
                vals[ok] = 0.0 if cost is None else np.asarray(cost(P[ok]), dtype=float)
            vals = vals.reshape(rows.size, R * A) - np.repeat(lr[rows], A, axis=1)
            vals = np.where(np.isnan(vals), np.inf, vals)
            k = np.argmin(vals, axis=1)
            cand = vals[np.arange(rows.size), k]
            better = cand < best[rows]
            upd = rows[better]
            best[upd] = cand[better]
            best_lr[upd] = lr[upd, k[better] // A]
            best_th[upd] = th[upd, k[better] % A]
    return best, best_lr, best_th


@dataclass
class ScalingSample:
    """Admissible scalings mu (with mu*z in E) found by the search."""

    scalings: np.ndarray
    exhausted_budget: bool


def admissible_scalings(region: RegionSpec, z, budget: ScalingSearch = ScalingSearch()) -> ScalingSample:
    """Sample {mu in C* : mu z in E} on a log-polar grid, refined near the outermost member.

    An empty sample with ``exhausted_budget`` set means nothing was found, not
    that the set is empty.
    """
    Z = region.points(z)
    if Z.shape[0] != 1:
        raise DimensionError("admissible_scalings() takes a single point")
    absz = float(np.linalg.norm(Z))
    if absz == 0:
        raise ValueError("z must be nonzero")
    lo, hi = _window(region, np.array([absz]), budget)
    R, A = budget.radial, budget.angular
    lr = np.linspace(lo[0], hi[0], R)
    th = 2 * np.pi * np.arange(A) / A
    found = []
    half_r, half_t = 0.5 * (hi[0] - lo[0]), np.pi
    center = None
    for rnd in range(budget.rounds + 1):
        if rnd > 0:
            if center is None:
                break
            half_r /= budget.shrink
            half_t /= budget.shrink
            lr = center[0] + half_r * np.linspace(-1, 1, R)
            th = center[1] + half_t * np.linspace(-1, 1, A)
        mu = np.exp(lr[:, None] + 1j * th[None, :]).ravel()
        ok = region.member(mu[:, None] * Z[0][None, :])
        if np.any(ok):
            members = mu[ok]
            found.append(members)
            k = np.argmax(np.abs(members))
            if center is None or np.log(abs(members[k])) > center[0]:
                center = (float(np.log(abs(members[k]))), float(np.angle(members[k])))
    scalings = np.concatenate(found) if found else np.zeros(0, dtype=complex)
    return ScalingSample(scalings, exhausted_budget=scalings.size == 0)


def minkowski_gauge(region: RegionSpec, z, rtol: float = 1e-13) -> float:
    """inf{t > 0 : z/t in E} for a region claimed balanced, by bracketing and bisection."""
    if not region.claimed_balanced:
        raise GaugeError(f"region {region.name!r} is not claimed balanced")
    Z = region.points(z)
    absz = float(np.linalg.norm(Z))
    if absz == 0:
        raise ValueError("z must be nonzero")
    r_min, r_max = region.sample_annulus
    lt = np.linspace(np.log(absz / r_max) - 2.0, np.log(absz / r_min) + 2.0, 64)
    inside = region.member(np.exp(-lt)[:, None] * Z[0][None, :])
    if not inside[-1]:
        raise GaugeError("bracketing failed: z/t never enters the region")
    if inside[0]:
        raise GaugeError("bracketing failed: region looks unbounded along the ray")
    k = int(np.argmax(inside))
    lo, hi = lt[k - 1], lt[k]
    for _ in range(200):
        if hi - lo <= rtol:
            break
        mid = 0.5 * (lo + hi)
        if region.member(np.exp(-mid) * Z)[0]:
            hi = mid
        else:
            lo = mid
    return float(np.exp(0.5 * (lo + hi)))


@functools.lru_cache(maxsize=64)
def _cone_cloud(region: RegionSpec, count: int = 4096, seed: int = 12345):
    """Unit-sphere representatives of C*E found from random directions."""
    rng = np.random.default_rng(seed)
    n = region.dimension
    U = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    best, _, _ = scaling_minimize(region, U, None, ScalingSearch(rounds=0), circular=True)
    return U[np.isfinite(best)]


def _projective_distance(U, V):
    """Phase-invariant distance between unit vectors: sqrt(2 - 2|<u, v>|)."""
    ip = np.abs(U @ V.conj().T)
    return np.sqrt(np.maximum(0.0, 2.0 - 2.0 * np.minimum(ip, 1.0)))


def penalty_batch(region: RegionSpec, Z, cfg: ScalingSearch = ScalingSearch()) -> np.ndarray:
    """Vectorised :func:`boundary_penalty` (coarse grid, continuous in z)."""
    Z = region.points(Z)
    M = Z.shape[0]
    absz = np.linalg.norm(Z, axis=1)
    out = np.ones(M)
    live = absz > 0
    if not np.any(live):
        return out
    if region.inequalities is None:
        best, _, _ = scaling_minimize(region, Z[live], None, cfg, circular=True, rounds=0)
        pen = np.zeros(int(live.sum()))
        miss = ~np.isfinite(best)
        if np.any(miss):
            cloud = _cone_cloud(region)
            U = Z[live][miss] / absz[live][miss, None]
            pen[miss] = _projective_distance(U, cloud).min(axis=1) if cloud.size else 1.0
        out[live] = pen
        return out
    Zl = Z[live]
    lo, hi = _window(region, absz[live], cfg)
    R = cfg.radial
    A = 1 if region.circled else cfg.angular
    lr = lo[:, None] + (hi - lo)[:, None] * (np.arange(R) / (R - 1))[None, :]
    th = 2 * np.pi * np.arange(A) / A
    worst = np.empty(Zl.shape[0])
    step = max(1, cfg.chunk // (R * A))
    for s in range(0, Zl.shape[0], step):
        sl = slice(s, s + step)
        mu = np.exp(lr[sl][:, :, None] + 1j * th[None, None, :])
        P = (mu[..., None] * Zl[sl][:, None, None, :]).reshape(-1, region.dimension)
        worst[sl] = region.violation(P).reshape(mu.shape[0], -1).min(axis=1)
    out[live] = np.maximum(0.0, worst + BOUNDARY_EPS)
    return out


def boundary_penalty(region: RegionSpec, z) -> float:
    """Violation of ``z in C*E``: 0 when a sampled scaling puts z strictly inside.

    With defining inequalities the measure is the smallest ``max_i g_i(mu z)``
    over the sampled scalings; otherwise the phase-invariant distance from
    z/|z| to sampled cone representatives.  The origin gets penalty 1.
    """
    return float(penalty_batch(region, z)[0])


def cone_connectivity_probe(region: RegionSpec, budget: int = 2000, seed: int = 0) -> str:
    """Evidence (never proof) on whether C*E is connected.

    Samples cone representatives on the unit sphere, joins those within a
    phase-invariant distance eps, and counts components.  Returns one of
    ``"connected-evidence"``, ``"disconnected-evidence"``, ``"inconclusive"``.
    """
    U = _cone_cloud(region, count=int(budget), seed=seed)
    if U.shape[0] < 2:
        return "inconclusive" if U.shape[0] == 0 else "connected-evidence"
    D = _projective_distance(U, U)
    np.fill_diagonal(D, np.inf)
    nn = D.min(axis=1)
    # every sample gets a neighbour, so isolated points cannot fake a split
    eps = max(1.5 * float(nn.max()), 1e-6)
    i, j = np.nonzero(D < eps)
    graph = coo_matrix((np.ones(i.size), (i, j)), shape=D.shape)
    ncomp, labels = connected_components(graph, directed=False)
    if ncomp == 1:
        return "connected-evidence"
    gaps = [D[np.ix_(labels == a, labels == b)].min() for a in range(ncomp) for b in range(a + 1, ncomp)]
    return "disconnected-evidence" if min(gaps) > 2 * eps else "inconclusive"


def cone_region(region: RegionSpec, search: ScalingSearch = ScalingSearch()) -> RegionSpec:
    """The punctured cone C*E as a membership-only region (coarse scaling search)."""

    def member(Z):
        best, _, _ = scaling_minimize(region, Z, None, search, circular=True, rounds=0)
        return np.isfinite(best)

    return RegionSpec(region.dimension, region.sample_annulus, membership=member,
                      claimed_cone_connected=region.claimed_cone_connected,
                      claimed_full_cone=region.claimed_full_cone, circled=True,
                      reinhardt=region.reinhardt, name=f"cone({region.name})")
