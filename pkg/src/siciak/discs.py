"""Polynomial analytic discs and the polynomial machinery they need.

Coefficients are stored lowest degree first, one row per component:
``coefficients[k, j]`` is the coefficient of zeta**j in component k.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDiscError, RootFindingError

CLUSTER_TOL = 1e-6
INSIDE_TOL = 1e-9
DEFAULT_MAX_DEGREE = 16


class QuadratureWarning(UserWarning):
    """A root sits close enough to the unit circle to spoil circle quadrature."""


def _frozen(a):
    a = np.array(a, dtype=complex)
    if a.ndim == 1:
        a = a[None, :]
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PolyDisc:
    """Affine polynomial disc f: D -> C^n with f(0) = center."""

    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _frozen(self.coefficients))

    @classmethod
    def constant(cls, z, degree: int = 0) -> "PolyDisc":
        z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
        c = np.zeros((z.size, degree + 1), dtype=complex)
        c[:, 0] = z
        return cls(c)

    @property
    def dimension(self) -> int:
        return self.coefficients.shape[0]

    @property
    def degree(self) -> int:
        return self.coefficients.shape[1] - 1

    @property
    def center(self) -> np.ndarray:
        return self.coefficients[:, 0].copy()

    def padded(self, degree: int) -> "PolyDisc":
        return PolyDisc(_pad(self.coefficients, degree))

    def components(self) -> np.ndarray:
        return self.coefficients


@dataclass(frozen=True, eq=False)
class ProjDisc:
    """Projective disc [f_0 : ... : f_n] given by a polynomial lift with f_0(0) = 1."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = _frozen(self.coefficients)
        if c.shape[0] < 2:
            raise ValueError("a projective lift needs at least two components")
        if abs(c[0, 0] - 1) > 1e-12:
            raise ValueError("lift must satisfy f_0(0) = 1")
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def from_affine(cls, disc: PolyDisc) -> "ProjDisc":
        c = np.zeros((disc.dimension + 1, disc.degree + 1), dtype=complex)
        c[0, 0] = 1.0
        c[1:] = disc.coefficients
        return cls(c)

    @classmethod
    def constant(cls, z, degree: int = 0) -> "ProjDisc":
        return cls.from_affine(PolyDisc.constant(z, degree))

    @property
    def dimension(self) -> int:
        return self.coefficients.shape[0] - 1

    @property
    def degree(self) -> int:
        return self.coefficients.shape[1] - 1

    @property
    def center(self) -> np.ndarray:
        return self.coefficients[1:, 0].copy()

    @property
    def f0(self) -> np.ndarray:
        return self.coefficients[0]

    def padded(self, degree: int) -> "ProjDisc":
        return ProjDisc(_pad(self.coefficients, degree))

    def components(self) -> np.ndarray:
        return self.coefficients


def _pad(c, degree):
    if degree < c.shape[1] - 1:
        raise ValueError("cannot pad to a lower degree")
    out = np.zeros((c.shape[0], degree + 1), dtype=complex)
    out[:, : c.shape[1]] = c
    return out


def unit_roots(N: int) -> np.ndarray:
    """The N-th roots of unity exp(2 pi i k / N), k = 0..N-1."""
    if N < 1:
        raise ValueError("N must be positive")
    return np.exp(2j * np.pi * np.arange(N) / N)


def horner(coefficients, nodes) -> np.ndarray:
    """Evaluate each row of ``coefficients`` at ``nodes``; returns (rows, len(nodes))."""
    C = np.atleast_2d(np.asarray(coefficients, dtype=complex))
    x = np.asarray(nodes, dtype=complex)
    acc = np.repeat(C[:, -1:], x.size, axis=1)
    for j in range(C.shape[1] - 2, -1, -1):
        acc = acc * x[None, :] + C[:, j:j + 1]
    return acc


def boundary_trace(disc, N: int) -> np.ndarray:
    """Values at the N-th roots of unity, shape (N, components).

    For a :class:`ProjDisc` these are the lift values (f_0, ..., f_n).
    """
    return horner(disc.components(), unit_roots(N)).T


# -- roots -------------------------------------------------------------------


@dataclass
class RootSet:
    """Roots in the open unit disc with multiplicities."""

    roots: list

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    @property
    def locations(self) -> np.ndarray:
        return np.array([a for a, _ in self.roots], dtype=complex)

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([m for _, m in self.roots], dtype=int)

    def log_sum(self) -> float:
        """sum of m(a) * log|a|; -inf if 0 is a root."""
        if not self.roots:
            return 0.0
        with np.errstate(divide="ignore"):
            return float(np.sum(self.multiplicities * np.log(np.abs(self.locations))))


def _trim(c):
    c = np.asarray(c, dtype=complex).ravel()
    nz = np.flatnonzero(c != 0)
    if nz.size == 0:
        raise ValueError("polynomial is identically zero")
    return c[: nz[-1] + 1]


def aberth_roots(coefficients, tol: float = 1e-12, max_iter: int = 500) -> np.ndarray:
    """All roots of a polynomial (ascending coefficients) by Aberth-Ehrlich iteration.

    Stops when every correction is at rounding level or every root has a
    backward-error residual at rounding level; then requires the residual
    |p(a)| / sum_k |c_k||a|^k <= ``tol``.
    """
    c = _trim(coefficients)
    zeros_at_origin = int(np.flatnonzero(c != 0)[0])
    c = c[zeros_at_origin:]
    d = c.size - 1
    origin = np.zeros(zeros_at_origin, dtype=complex)
    if d == 0:
        return origin
    p = c[::-1]  # descending for np.polyval-style Horner
    dp = (p[:-1] * np.arange(d, 0, -1))
    absp = np.abs(p)
    radius = abs(c[0] / c[-1]) ** (1.0 / d)
    z = radius * np.exp(1j * (2 * np.pi * np.arange(d) / d + 0.4))

    def resid(z):
        return np.abs(np.polyval(p, z)) / np.maximum(np.polyval(absp, np.abs(z)), 1e-300)

    eps = np.finfo(float).eps
    for _ in range(max_iter):
        pz = np.polyval(p, z)
        dpz = np.polyval(dp, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)
        with np.errstate(all="ignore"):
            ratio = pz / dpz
            w = ratio / (1.0 - ratio * s)
        bad = ~np.isfinite(w)
        if np.any(bad):
            w[bad] = 1e-3 * (1 + np.abs(z[bad]))
        z = z - w
        small = np.abs(w) <= 4 * eps * np.maximum(np.abs(z), 1e-300)
        if np.all(small | (resid(z) <= 4 * eps)):
            break
    r = resid(z)
    if r.max() > tol:
        raise RootFindingError("Aberth iteration did not converge", float(r.max()))
    return np.concatenate([origin, z])


def cluster_roots(roots, tol: float = CLUSTER_TOL) -> list:
    """Merge roots closer than ``tol`` (single linkage); returns [(centroid, count)]."""
    roots = list(np.asarray(roots, dtype=complex))
    clusters = []
    for a in roots:
        hits = [k for k, cl in enumerate(clusters) if min(abs(a - b) for b in cl) < tol]
        merged = [a]
        for k in sorted(hits, reverse=True):
            merged.extend(clusters.pop(k))
        clusters.append(merged)
    return [(complex(np.mean(cl)), len(cl)) for cl in clusters]


def roots_in_unit_disc(poly) -> RootSet:
    """Roots of ``poly`` with |a| < 1 - 1e-9, clustered within 1e-6."""
    inside = [(a, m) for a, m in cluster_roots(aberth_roots(poly)) if abs(a) < 1 - INSIDE_TOL]
    inside.sort(key=lambda t: (abs(t[0]), np.angle(t[0])))
    return RootSet(inside)


def jensen_defect(poly, N: int = 4096, near_circle: float = 1e-3) -> float:
    """sum_{a in D} m(a) log|a| + mean_k log|p(zeta_k)|, which is 0 for exact quadrature.

    Requires p(0) = 1.  Roots within ``near_circle`` of the unit circle make
    the circle quadrature unreliable; a :class:`QuadratureWarning` is issued.
    """
    c = np.asarray(poly, dtype=complex).ravel()
    if abs(c[0] - 1) > 1e-12:
        raise ValueError("jensen_defect needs p(0) = 1")
    allroots = cluster_roots(aberth_roots(c)) if np.any(c[1:] != 0) else []
    if any(abs(abs(a) - 1) < near_circle for a, _ in allroots):
        warnings.warn("root near the unit circle; quadrature unreliable", QuadratureWarning, stacklevel=2)
    inside = sum(m * math.log(abs(a)) for a, m in allroots if abs(a) < 1 - INSIDE_TOL)
    with np.errstate(divide="ignore"):
        boundary = float(np.mean(np.log(np.abs(horner(c, unit_roots(N))[0]))))
    return inside + boundary


def infinity_crossings(disc: ProjDisc) -> RootSet:
    """Points of D mapped to the hyperplane at infinity: the zeros of f_0."""
    f0 = disc.f0
    if np.all(f0[1:] == 0):
        return RootSet([])
    return roots_in_unit_disc(f0)


def _deflate(c, a):
    """Divide ascending coefficients by (zeta - a), dropping the remainder."""
    desc = c[::-1]
    q = np.empty(desc.size - 1, dtype=complex)
    acc = 0j
    for i in range(desc.size - 1):
        acc = acc * a + desc[i]
        q[i] = acc
    return q[::-1]


def normalize_reduced(disc: ProjDisc, tol: float = CLUSTER_TOL) -> ProjDisc:
    """Remove roots shared by every component in the closed unit disc, then rescale to f_0(0) = 1.

    The boundary map [f_0 : ... : f_n] is unchanged.
    """
    C = np.array(disc.coefficients)
    nonzero = [k for k in range(C.shape[0]) if np.any(C[k] != 0)]
    root_lists = {}
    for k in nonzero:
        if np.all(C[k, 1:] == 0):
            return disc  # a nonzero constant component: no common roots at all
        root_lists[k] = cluster_roots(aberth_roots(C[k]))
    common = []
    for a, m in root_lists[0]:
        if abs(a) > 1 + INSIDE_TOL:
            continue
        mult = m
        for k in nonzero[1:]:
            near = [mk for b, mk in root_lists[k] if abs(b - a) < tol]
            mult = min(mult, sum(near))
        if mult > 0:
            common.append((a, mult))
    if not common:
        return disc
    comps = [C[k] for k in range(C.shape[0])]
    for a, m in common:
        for _ in range(m):
            comps = [_deflate(c, a) for c in comps]
    C = np.array(comps)
    if abs(C[0, 0]) < 1e-14:
        raise DegenerateDiscError("reduction drove f_0(0) to zero")
    C = C / C[0, 0]
    C[0, 0] = 1.0
    return ProjDisc(C)


# -- serialization ---------------------------------------------------------


def disc_to_record(disc) -> str:
    """Plain-text record: kind, dimension, degree, then re/im pairs per component."""
    kind = "projective" if isinstance(disc, ProjDisc) else "affine"
    parts = [kind, str(disc.dimension), str(disc.degree)]
    for row in disc.components():
        parts.append(" ".join(f"{float(x.real)!r} {float(x.imag)!r}" for x in row))
    return " | ".join(parts)


def disc_from_record(text: str):
    fields = [f.strip() for f in text.split("|")]
    kind, n, d = fields[0], int(fields[1]), int(fields[2])
    rows = []
    for f in fields[3:]:
        vals = [float(v) for v in f.split()]
        rows.append(np.array(vals[0::2]) + 1j * np.array(vals[1::2]))
    C = np.array(rows)
    if C.shape != ((n + 1 if kind == "projective" else n), d + 1):
        raise ValueError("record shape does not match its header")
    return ProjDisc(C) if kind == "projective" else PolyDisc(C)
