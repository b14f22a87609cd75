"""
Catalog of uncertainty-set representations.

Every set is an immutable value with closed-form (or exactly computable)
metrics: Chebyshev diameter and center, counting measure and affine
dimension.  Unbounded sets are flagged structurally, so their diameter is
the exact ``math.inf`` rather than a large float.

All geometry uses the Euclidean norm.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, fields
from enum import Enum
from functools import cached_property

import numpy as np
from scipy.optimize import nnls

from .meb import minimum_enclosing_ball

TAU_GEO = 1e-9
TAU_RANK = 1e-8
TAU_ORTH = 1e-10
TAU_SYM = 1e-10
TAU_PD = 1e-12
TAU_DEDUP = 1e-12

INF = math.inf


# -- extended reals ---------------------------------------------------------

def extended_real(value):
    """Validate a nonnegative extended real; returns it as a float."""
    x = float(value)
    if math.isnan(x) or x < 0:
        raise ValueError(f"not a nonnegative extended real: {value!r}")
    return x


def format_extended(x):
    """JSON-safe encoding: finite values stay numbers, infinity is "inf"."""
    return "inf" if math.isinf(x) else float(x)


def parse_extended(value):
    if isinstance(value, str):
        s = value.strip().lower()
        if s in ("inf", "infinity", "+inf"):
            return INF
        value = float(s)
    return extended_real(value)


# -- helpers ----------------------------------------------------------------

class Kind(str, Enum):
    FINITE_POINTS = "FinitePoints"
    SEGMENT = "Segment"
    CONVEX_HULL = "ConvexHullOfPoints"
    BALL = "Ball"
    ELLIPSOID = "Ellipsoid"
    AFFINE_SLAB = "AffineSlab"
    UNBOUNDED_AFFINE = "UnboundedAffine"
    FULL_SPACE = "FullSpace"


@dataclass(frozen=True)
class EnclosingBall:
    """Chebyshev center and radius of a set; radius is inf when unbounded."""

    center: np.ndarray
    radius: float

    @property
    def diameter(self):
        return 2.0 * self.radius

    def contains_ball(self, other, tol=TAU_GEO):
        if math.isinf(self.radius):
            return True
        if math.isinf(other.radius):
            return False
        gap = float(np.linalg.norm(self.center - other.center))
        return gap + other.radius <= self.radius + tol * max(1.0, self.radius)


def _frozen(a, ndim=None):
    arr = np.array(a, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("payload contains non-finite entries")
    arr.setflags(write=False)
    return arr


def _dedup(points, tol=TAU_DEDUP):
    kept = []
    for p in points:
        if all(np.linalg.norm(p - q) > tol for q in kept):
            kept.append(p)
    return np.array(kept)


def point_rank(points, tol=TAU_RANK):
    """Affine dimension of a point cloud: rank of the difference matrix."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if len(P) < 2:
        return 0
    s = np.linalg.svd(P[1:] - P[0], compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def check_orthonormal_rows(B, tol=TAU_ORTH):
    B = np.atleast_2d(B)
    err = np.max(np.abs(B @ B.T - np.eye(len(B)))) if len(B) else 0.0
    return err <= tol


def check_rotation(P, dim, tol=TAU_ORTH):
    P = np.asarray(P, dtype=float)
    if P.shape != (dim, dim):
        raise ValueError(f"rotation must be {dim}x{dim}, got {P.shape}")
    if not check_orthonormal_rows(P, tol):
        raise ValueError("matrix is not orthonormal")
    return P


def random_rotation(dim, rng):
    """Haar-distributed orthogonal matrix (QR of a Gaussian matrix)."""
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    return Q * np.sign(np.diag(R))


class UndecidableSubsetError(ValueError):
    """Raised when the inclusion test is not implemented for a kind pair."""


# -- the catalog ------------------------------------------------------------

class UncertaintySet:
    """Base class; concrete kinds are the frozen dataclasses below."""

    kind: Kind
    bounded = True

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f.name), getattr(other, f.name))
            for f in fields(self)
        )

    __hash__ = None

    @property
    def ambient_dim(self):
        raise NotImplementedError

    def diameter(self):
        return self.center().diameter

    def center(self):
        raise NotImplementedError

    def counting_measure(self):
        return INF

    def affine_dimension(self):
        raise NotImplementedError

    def translate(self, v):
        raise NotImplementedError

    def rotate(self, P):
        raise NotImplementedError

    def contains(self, x, tol=TAU_GEO):
        raise NotImplementedError

    def sample(self, rng, m):
        """`m` member points, shape ``(m, ambient_dim)``."""
        raise NotImplementedError

    def anchor(self):
        """A deterministic member point."""
        raise NotImplementedError

    def farthest_point(self, center):
        """Member point farthest from `center` (bounded kinds only)."""
        raise NotImplementedError

    def _check_vector(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.ambient_dim,):
            raise ValueError(
                f"vector of length {self.ambient_dim} expected, got shape {v.shape}")
        return v


class _PointsMixin:
    """Shared behaviour of kinds defined by a list of points."""

    @property
    def ambient_dim(self):
        return self.points.shape[1]

    @cached_property
    def _ball(self):
        c, r = minimum_enclosing_ball(self.points)
        c.setflags(write=False)
        return EnclosingBall(c, r)

    def center(self):
        return self._ball

    def affine_dimension(self):
        return point_rank(self.points)

    def translate(self, v):
        return type(self)(self.points + self._check_vector(v))

    def rotate(self, P):
        P = check_rotation(P, self.ambient_dim)
        return type(self)(self.points @ P.T)

    def anchor(self):
        return self.points[0].copy()

    def farthest_point(self, center):
        d = np.linalg.norm(self.points - center, axis=1)
        return self.points[int(np.argmax(d))].copy()

    def vertices(self):
        return self.points


@dataclass(frozen=True, eq=False)
class FinitePoints(_PointsMixin, UncertaintySet):
    points: np.ndarray
    kind = Kind.FINITE_POINTS

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.points, dtype=float))
        if P.size == 0:
            raise ValueError("FinitePoints needs at least one point")
        object.__setattr__(self, "points", _frozen(_dedup(P), ndim=2))

    def counting_measure(self):
        return float(len(self.points))

    def contains(self, x, tol=TAU_GEO):
        x = self._check_vector(x)
        scale = max(1.0, float(np.max(np.abs(self.points))))
        return bool(np.min(np.linalg.norm(self.points - x, axis=1)) <= tol * scale)

    def sample(self, rng, m):
        return self.points[rng.integers(len(self.points), size=m)]


@dataclass(frozen=True, eq=False)
class ConvexHullOfPoints(_PointsMixin, UncertaintySet):
    points: np.ndarray
    kind = Kind.CONVEX_HULL

    def __post_init__(self):
        P = _dedup(np.atleast_2d(np.asarray(self.points, dtype=float)))
        if len(P) < 2:
            raise ValueError("a convex hull needs two distinct points; use FinitePoints")
        object.__setattr__(self, "points", _frozen(P, ndim=2))

    def contains(self, x, tol=TAU_GEO):
        x = self._check_vector(x)
        scale = max(1.0, float(np.max(np.abs(self.points))), float(np.max(np.abs(x))))
        M = np.vstack([self.points.T / scale, np.ones(len(self.points))])
        _, resid = nnls(M, np.concatenate([x / scale, [1.0]]))
        return resid <= tol

    def sample(self, rng, m):
        w = rng.dirichlet(np.ones(len(self.points)), size=m)
        return w @ self.points


@dataclass(frozen=True, eq=False)
class Segment(UncertaintySet):
    start: np.ndarray
    end: np.ndarray
    kind = Kind.SEGMENT

    def __post_init__(self):
        a, b = _frozen(self.start, 1), _frozen(self.end, 1)
        if a.shape != b.shape:
            raise ValueError("segment endpoints differ in dimension")
        if np.linalg.norm(b - a) <= TAU_DEDUP:
            raise ValueError("degenerate segment; use FinitePoints")
        object.__setattr__(self, "start", a)
        object.__setattr__(self, "end", b)

    @property
    def ambient_dim(self):
        return self.start.shape[0]

    @property
    def length(self):
        return float(np.linalg.norm(self.end - self.start))

    def center(self):
        return EnclosingBall(0.5 * (self.start + self.end), 0.5 * self.length)

    def diameter(self):
        return self.length

    def affine_dimension(self):
        return 1

    def translate(self, v):
        v = self._check_vector(v)
        return Segment(self.start + v, self.end + v)

    def rotate(self, P):
        P = check_rotation(P, self.ambient_dim)
        return Segment(P @ self.start, P @ self.end)

    def contains(self, x, tol=TAU_GEO):
        x = self._check_vector(x)
        d = self.end - self.start
        t = float(np.clip(np.dot(x - self.start, d) / np.dot(d, d), 0.0, 1.0))
        scale = max(1.0, self.length)
        return float(np.linalg.norm(self.start + t * d - x)) <= tol * scale

    def sample(self, rng, m):
        t = rng.random(m)[:, None]
        return self.start + t * (self.end - self.start)

    def anchor(self):
        return self.start.copy()

    def farthest_point(self, center):
        if np.linalg.norm(self.start - center) >= np.linalg.norm(self.end - center):
            return self.start.copy()
        return self.end.copy()

    def vertices(self):
        return np.array([self.start, self.end])


@dataclass(frozen=True, eq=False)
class Ball(UncertaintySet):
    center_point: np.ndarray
    radius: float
    kind = Kind.BALL

    def __post_init__(self):
        object.__setattr__(self, "center_point", _frozen(self.center_point, 1))
        r = float(self.radius)
        if not (math.isfinite(r) and r > 0):
            raise ValueError("ball radius must be finite and positive")
        object.__setattr__(self, "radius", r)

    @property
    def ambient_dim(self):
        return self.center_point.shape[0]

    def center(self):
        return EnclosingBall(self.center_point, self.radius)

    def affine_dimension(self):
        return self.ambient_dim

    def translate(self, v):
        return Ball(self.center_point + self._check_vector(v), self.radius)

    def rotate(self, P):
        P = check_rotation(P, self.ambient_dim)
        return Ball(P @ self.center_point, self.radius)

    def contains(self, x, tol=TAU_GEO):
        x = self._check_vector(x)
        gap = float(np.linalg.norm(x - self.center_point))
        return gap <= self.radius + tol * max(1.0, self.radius)

    def sample(self, rng, m):
        n = self.ambient_dim
        g = rng.standard_normal((m, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = self.radius * rng.random(m) ** (1.0 / n)
        return self.center_point + g * r[:, None]

    def anchor(self):
        return self.center_point.copy()

    def farthest_point(self, center):
        d = self.center_point - center
        nd = np.linalg.norm(d)
        u = d / nd if nd > 0 else np.eye(self.ambient_dim)[0]
        return self.center_point + self.radius * u


@dataclass(frozen=True, eq=False)
class Ellipsoid(UncertaintySet):
    """``{x : (x - c)^T shape^{-1} (x - c) <= 1}``; semi-axes are sqrt(eig(shape))."""

    center_point: np.ndarray
    shape: np.ndarray
    kind = Kind.ELLIPSOID

    def __post_init__(self):
        c = _frozen(self.center_point, 1)
        Q = _frozen(self.shape, 2)
        if Q.shape != (len(c), len(c)):
            raise ValueError("shape matrix does not match center dimension")
        if np.max(np.abs(Q - Q.T)) > TAU_SYM:
            raise ValueError("shape matrix is not symmetric")
        if np.linalg.eigvalsh(Q)[0] <= TAU_PD:
            raise ValueError("shape matrix is not positive definite")
        object.__setattr__(self, "center_point", c)
        object.__setattr__(self, "shape", Q)

    @property
    def ambient_dim(self):
        return self.center_point.shape[0]

    def center(self):
        lam = np.linalg.eigvalsh(self.shape)[-1]
        return EnclosingBall(self.center_point, float(np.sqrt(lam)))

    def affine_dimension(self):
        return self.ambient_dim

    def translate(self, v):
        return Ellipsoid(self.center_point + self._check_vector(v), self.shape)

    def rotate(self, P):
        P = check_rotation(P, self.ambient_dim)
        Q = P @ self.shape @ P.T
        return Ellipsoid(P @ self.center_point, 0.5 * (Q + Q.T))

    def contains(self, x, tol=TAU_GEO):
        d = self._check_vector(x) - self.center_point
        return float(d @ np.linalg.solve(self.shape, d)) <= 1.0 + tol

    def sample(self, rng, m):
        L = np.linalg.cholesky(self.shape)
        u = Ball(np.zeros(self.ambient_dim), 1.0).sample(rng, m)
        return self.center_point + u @ L.T

    def anchor(self):
        return self.center_point.copy()

    def farthest_point(self, center):
        lam, V = np.linalg.eigh(self.shape)
        return self.center_point + np.sqrt(lam[-1]) * V[:, -1]


class _AffineMixin:
    @property
    def ambient_dim(self):
        return self.offset.shape[0]

    def affine_dimension(self):
        return len(self.basis)

    def _coords(self, x):
        d = x - self.offset
        t = self.basis @ d
        return t, float(np.linalg.norm(d - self.basis.T @ t))

    def anchor(self):
        return self.offset.copy()


def _check_affine_payload(offset, basis):
    o = _frozen(offset, 1)
    B = _frozen(np.atleast_2d(basis), 2)
    if B.shape[1] != len(o):
        raise ValueError("basis vectors do not match offset dimension")
    if len(B) == 0 or len(B) > len(o):
        raise ValueError("need between 1 and ambient_dim basis vectors")
    if not check_orthonormal_rows(B):
        raise ValueError("basis is not orthonormal")
    return o, B


@dataclass(frozen=True, eq=False)
class AffineSlab(_AffineMixin, UncertaintySet):
    """``{offset + sum_j t_j basis_j : |t_j| <= extents_j}``, a centered box."""

    offset: np.ndarray
    basis: np.ndarray
    extents: np.ndarray
    kind = Kind.AFFINE_SLAB

    def __post_init__(self):
        o, B = _check_affine_payload(self.offset, self.basis)
        e = _frozen(np.atleast_1d(self.extents), 1)
        if e.shape != (len(B),) or np.any(e <= 0):
            raise ValueError("need one finite positive extent per basis vector")
        object.__setattr__(self, "offset", o)
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "extents", e)

    def center(self):
        return EnclosingBall(self.offset, float(np.linalg.norm(self.extents)))

    def translate(self, v):
        return AffineSlab(self.offset + self._check_vector(v), self.basis, self.extents)

    def rotate(self, P):
        P = check_rotation(P, self.ambient_dim)
        return AffineSlab(P @ self.offset, self.basis @ P.T, self.extents)

    def contains(self, x, tol=TAU_GEO):
        t, resid = self._coords(self._check_vector(x))
        scale = max(1.0, float(np.max(self.extents)))
        return resid <= tol * scale and bool(np.all(np.abs(t) <= self.extents + tol * scale))

    def sample(self, rng, m):
        t = rng.uniform(-1.0, 1.0, size=(m, len(self.basis))) * self.extents
        return self.offset + t @ self.basis

    def vertices(self):
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=len(self.basis))))
        return self.offset + (signs * self.extents) @ self.basis

    def farthest_point(self, center):
        V = self.vertices()
        return V[int(np.argmax(np.linalg.norm(V - center, axis=1)))].copy()


@dataclass(frozen=True, eq=False)
class UnboundedAffine(_AffineMixin, UncertaintySet):
    """The affine subspace ``offset + span(basis)``."""

    offset: np.ndarray
    basis: np.ndarray
    kind = Kind.UNBOUNDED_AFFINE
    bounded = False

    def __post_init__(self):
        o, B = _check_affine_payload(self.offset, self.basis)
        object.__setattr__(self, "offset", o)
        object.__setattr__(self, "basis", B)

    def center(self):
        return EnclosingBall(self.offset, INF)

    def translate(self, v):
        return UnboundedAffine(self.offset + self._check_vector(v), self.basis)

    def rotate(self, P):
        P = check_rotation(P, self.ambient_dim)
        return UnboundedAffine(P @ self.offset, self.basis @ P.T)

    def contains(self, x, tol=TAU_GEO):
        x = self._check_vector(x)
        _, resid = self._coords(x)
        return resid <= tol * max(1.0, float(np.linalg.norm(x - self.offset)))

    def sample(self, rng, m, spread=10.0):
        t = spread * rng.standard_normal((m, len(self.basis)))
        return self.offset + t @ self.basis


@dataclass(frozen=True, eq=False)
class FullSpace(UncertaintySet):
    dim: int
    kind = Kind.FULL_SPACE
    bounded = False

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("dimension must be positive")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def ambient_dim(self):
        return self.dim

    def center(self):
        return EnclosingBall(np.zeros(self.dim), INF)

    def affine_dimension(self):
        return self.dim

    def translate(self, v):
        self._check_vector(v)
        return self

    def rotate(self, P):
        check_rotation(P, self.dim)
        return self

    def contains(self, x, tol=TAU_GEO):
        self._check_vector(x)
        return True

    def sample(self, rng, m, spread=10.0):
        return spread * rng.standard_normal((m, self.dim))

    def anchor(self):
        return np.zeros(self.dim)


# -- metric operations ------------------------------------------------------

def diameter(s):
    """Chebyshev diameter, ``2 inf_v sup_u ||v - u||``; inf for unbounded sets."""
    return s.diameter()


def center(s):
    """Chebyshev center and radius as an :class:`EnclosingBall`."""
    return s.center()


def counting_measure(s):
    return s.counting_measure()


def affine_dimension(s):
    return s.affine_dimension()


def translate(s, v):
    return s.translate(v)


def rotate(s, P):
    return s.rotate(P)


def is_singleton(s):
    return isinstance(s, FinitePoints) and len(s.points) == 1


def is_subset(U, V, tol=TAU_GEO):
    """
    Decide ``U ⊆ V`` for the supported kind pairs.

    Convex targets are handled through the vertices of polytope-like
    sources; ball and affine pairs have closed-form tests.  Anything else
    raises :class:`UndecidableSubsetError`.
    """
    if U.ambient_dim != V.ambient_dim:
        raise ValueError("sets live in different ambient spaces")
    if isinstance(V, FullSpace):
        return True
    if isinstance(U, FinitePoints):
        return all(V.contains(p, tol) for p in U.points)

    if isinstance(U, FullSpace):
        return isinstance(V, UnboundedAffine) and len(V.basis) == V.ambient_dim
    if isinstance(U, UnboundedAffine):
        if not isinstance(V, UnboundedAffine):
            return False
        if not V.contains(U.offset, tol):
            return False
        return all(V._coords(V.offset + b)[1] <= tol for b in U.basis)

    # U is bounded with infinitely many points from here on
    if isinstance(V, FinitePoints):
        return False
    if isinstance(V, UnboundedAffine) and len(V.basis) == V.ambient_dim:
        return True

    if hasattr(U, "vertices"):
        return all(V.contains(p, tol) for p in U.vertices())

    if isinstance(U, Ball):
        if U.ambient_dim == 1:
            c, r = U.center_point, U.radius
            return is_subset(Segment(c - r, c + r), V, tol)
        if isinstance(V, Ball):
            gap = float(np.linalg.norm(U.center_point - V.center_point))
            return gap + U.radius <= V.radius + tol * max(1.0, V.radius)
        if isinstance(V, (Segment, UnboundedAffine)):
            return False
        if isinstance(V, AffineSlab):
            if len(V.basis) < V.ambient_dim:
                return False
            t, _ = V._coords(U.center_point)
            return bool(np.all(np.abs(t) + U.radius <= V.extents + tol))
    if isinstance(U, Ellipsoid):
        if isinstance(V, (Segment, UnboundedAffine)) or (
                isinstance(V, AffineSlab) and len(V.basis) < V.ambient_dim):
            return False
        if isinstance(V, Ball) and np.allclose(U.center_point, V.center_point):
            return U.center().radius <= V.radius + tol * max(1.0, V.radius)
    raise UndecidableSubsetError(
        f"inclusion {U.kind.value} ⊆ {V.kind.value} is not decidable here")
