"""The weight phi on E and its homogenization rho(z) = inf |lam| exp(phi(z/lam)).

Writing mu = 1/lam, the logarithm of rho is

    log rho(z) = inf { phi(mu z) - log|mu| : mu != 0, mu z in E },

the largest logarithmically homogeneous minorant of phi.  It is computed by the
refined log-polar search of :mod:`siciak.domains`, so every value is an upper
approximation of the true infimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import RegionSpec, ScalingSearch, penalty_batch, scaling_minimize
from .errors import NotInConeError

DEFAULT_FLOOR = -1e6


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """Batch oracle phi: (M, n) -> (M,) with values in R or -inf."""

    phi: object
    floor: float = DEFAULT_FLOOR
    circular: bool = True  # phi(e^{it} z) == phi(z)
    modulus_only: bool = True  # phi depends on |z_1|, ..., |z_n| only
    name: str = "custom"

    def __call__(self, Z):
        v = np.asarray(self.phi(Z), dtype=float).reshape(-1)
        return np.maximum(np.where(np.isnan(v), np.inf, v), self.floor)


def zero_weight() -> WeightSpec:
    return WeightSpec(lambda Z: np.zeros(len(Z)), name="zero")


def constant_weight(c: float) -> WeightSpec:
    return WeightSpec(lambda Z: np.full(len(Z), float(c)), name=f"constant({c})")


def log_norm_weight() -> WeightSpec:
    def phi(Z):
        with np.errstate(divide="ignore"):
            return np.log(np.linalg.norm(Z, axis=1))

    return WeightSpec(phi, name="log-norm")


def _quantize(Z):
    """Round real and imaginary parts to 12 significant digits (magnitudes below 1e-280 become 0)."""
    X = np.stack([Z.real, Z.imag], axis=-1)
    mag = np.abs(X)
    keep = mag > 1e-280
    e = np.floor(np.log10(np.where(keep, mag, 1.0)))
    scale = 10.0 ** (e - 11)
    Q = np.where(keep, np.round(X / scale) * scale, 0.0)
    return Q[..., 0] + 1j * Q[..., 1]


class HomogenizedWeight:
    """Cached evaluator of rho and of its logarithm tilde_phi.

    Points are quantised to 12 significant digits and the value is computed at
    the quantised point, so cached and fresh values coincide exactly no matter
    in which order points are queried.  Cache writes are idempotent.
    """

    def __init__(self, region: RegionSpec, weight: WeightSpec, search: ScalingSearch = ScalingSearch(),
                 profile_nodes: int = 2049):
        self.region = region
        self.weight = weight
        self.search = search
        self.profile_nodes = profile_nodes
        self._cache: dict = {}
        self._profile = None
        self._sphere_bound = None

    @property
    def floor(self) -> float:
        return self.weight.floor

    def _cost(self, P):
        return self.weight(P)

    def log_rho_batch(self, Z) -> tuple[np.ndarray, np.ndarray]:
        """Return (tilde_phi values, found flags); values are +inf where not found."""
        Z = _quantize(self.region.points(Z))
        keys = [tuple(row) for row in np.column_stack([Z.real, Z.imag]).tolist()]
        out = np.empty(len(keys))
        miss = []
        for i, k in enumerate(keys):
            v = self._cache.get(k)
            if v is None:
                miss.append(i)
            else:
                out[i] = v
        if miss:
            miss = np.asarray(miss)
            best, _, _ = scaling_minimize(self.region, Z[miss], self._cost, self.search,
                                          circular=self.weight.circular)
            best = np.where(np.isfinite(best), np.maximum(best, self.floor), best)
            for i, v in zip(miss.tolist(), best.tolist()):
                self._cache[keys[i]] = v
                out[i] = v
        return out, np.isfinite(out)

    def tilde_phi(self, z) -> float:
        v, found = self.log_rho_batch(z)
        if not found[0]:
            raise NotInConeError(f"no admissible scaling found for {np.ravel(z)}")
        return float(v[0])

    def rho(self, z) -> float:
        t = self.tilde_phi(z)
        return 0.0 if t <= self.floor else math.exp(t)

    def sphere_bound(self, count: int = 256, seed: int = 7) -> float:
        """Largest sampled tilde_phi over unit directions in C*E (a boundedness diagnostic)."""
        if self._sphere_bound is None:
            rng = np.random.default_rng(seed)
            n = self.region.dimension
            U = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
            U /= np.linalg.norm(U, axis=1, keepdims=True)
            v, found = self.log_rho_batch(U)
            self._sphere_bound = float(v[found].max()) if np.any(found) else 0.0
        return self._sphere_bound

    def profile_eligible(self) -> bool:
        return self.region.reinhardt and self.weight.modulus_only and self.region.dimension <= 2

    def integrand(self):
        """Batch evaluator ``W -> (log rho values, cone penalties)`` used by the functionals.

        For Reinhardt regions with modulus-only weights in dimension <= 2 this
        is a tabulated direction profile; otherwise the direct cached search.
        """
        if self.profile_eligible():
            if self._profile is None:
                self._profile = ReinhardtProfile(self, self.profile_nodes)
            return self._profile
        return DirectIntegrand(self)


class DirectIntegrand:
    """Evaluates log rho through the λ-search itself (any region)."""

    def __init__(self, hw: HomogenizedWeight):
        self.hw = hw

    def __call__(self, W):
        W = np.asarray(W, dtype=complex)
        absw = np.linalg.norm(W, axis=1)
        vals = np.full(W.shape[0], self.hw.floor)
        pen = np.ones(W.shape[0])
        live = absw > 0
        if np.any(live):
            v, found = self.hw.log_rho_batch(W[live])
            pen_live = np.zeros(v.size)
            if not np.all(found):
                pen_live[~found] = penalty_batch(self.hw.region, W[live][~found], self.hw.search)
                # stand-in value off the cone; the penalty term decides feasibility
                v = np.where(found, v, np.log(absw[live]) + self.hw.sphere_bound())
            vals[live] = v
            pen[live] = pen_live
        return vals, pen


class ReinhardtProfile:
    """log rho(w) = log|w| + P(direction of (|w_1|, ..., |w_n|)), tabulated.

    For n = 2 the direction is alpha = atan2(|w_2|, |w_1|) in [0, pi/2] and P
    and the cone penalty are linearly interpolated.  Nodes outside the cone
    take the value of the nearest admissible node so the extension is
    continuous; their penalty is positive, and it interpolates to a positive
    value on every cell touching such a node.
    """

    def __init__(self, hw: HomogenizedWeight, nodes: int = 2049):
        n = hw.region.dimension
        self.floor = hw.floor
        if n == 1:
            D = np.ones((1, 1), dtype=complex)
            self.alpha = np.zeros(1)
        else:
            self.alpha = np.linspace(0.0, np.pi / 2, nodes)
            D = np.column_stack([np.cos(self.alpha), np.sin(self.alpha)]).astype(complex)
            D[np.abs(D) < 1e-15] = 0.0
        v, found = hw.log_rho_batch(D)
        pen = penalty_batch(hw.region, D, hw.search)
        if np.any(found):
            idx = np.flatnonzero(found)
            nearest = idx[np.argmin(np.abs(np.arange(v.size)[:, None] - idx[None, :]), axis=1)]
            v = v[nearest]
        else:
            v = np.zeros_like(v)
        self.values = v
        self.penalties = np.where(found, 0.0, np.maximum(pen, 1e-6))
        self.admissible = found

    def __call__(self, W):
        W = np.asarray(W, dtype=complex)
        A = np.abs(W)
        r = np.sqrt(np.sum(A * A, axis=1))
        live = r > 0
        with np.errstate(divide="ignore"):
            logr = np.log(np.where(live, r, 1.0))
        if self.alpha.size == 1:
            vals = logr + self.values[0]
            pen = np.full(r.size, self.penalties[0])
        else:
            a = np.arctan2(A[:, 1], A[:, 0])
            vals = logr + np.interp(a, self.alpha, self.values)
            pen = np.interp(a, self.alpha, self.penalties)
        vals = np.where(live, np.maximum(vals, self.floor), self.floor)
        pen = np.where(live, pen, 1.0)
        return vals, pen


def rho_eval(hw: HomogenizedWeight, z) -> float:
    """rho_{E,phi}(z), an upper approximation; raises NotInConeError off the cone."""
    return hw.rho(z)


def tilde_phi(hw: HomogenizedWeight, z) -> float:
    """log rho(z), clamped at the weight floor."""
    return hw.tilde_phi(z)


def homogeneity_residual(hw: HomogenizedWeight, z, mu: complex) -> float:
    """|tilde_phi(mu z) - tilde_phi(z) - log|mu||."""
    if mu == 0:
        raise ValueError("mu must be nonzero")
    Z = hw.region.points(z)
    return abs(hw.tilde_phi(mu * Z) - hw.tilde_phi(Z) - math.log(abs(mu)))
