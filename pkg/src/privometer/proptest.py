"""
Randomized property suites for the privacy index.

Six properties are exercised on random sets in R^2..R^5:

a. bounds ``0 ⪯ rho ⪯ (inf, 1, n)``
b. ``rho = 0`` exactly for singletons
c. invariance under translation
d. invariance under rotation
e. monotonicity under inclusion
f. the nested-ball witness construction
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .privacy import (
    Ordering, PrivacyIndex, check_monotonicity, compare, construct_prop_f_witness,
    privacy_index, witness_holds,
)
from .uncertainty_sets import (
    TAU_GEO, AffineSlab, Ball, ConvexHullOfPoints, Ellipsoid, FinitePoints, FullSpace,
    Segment, UnboundedAffine, is_singleton, is_subset, random_rotation, translate,
)

PROPERTIES = ("a", "b", "c", "d", "e", "f")
BOUNDED_KINDS = ("finite", "singleton", "hull", "segment", "ball", "ellipsoid", "slab")
ALL_KINDS = BOUNDED_KINDS + ("affine", "full")


@dataclass
class PropertyResult:
    name: str
    trials: int = 0
    passed: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return self.passed == self.trials

    def record(self, ok, detail=""):
        self.trials += 1
        if ok:
            self.passed += 1
        elif len(self.failures) < 5:
            self.failures.append(detail)

    def to_dict(self):
        return {"trials": self.trials, "passed": self.passed, "ok": self.ok,
                "failures": list(self.failures)}


# -- random sets --------------------------------------------------------------

def _orthonormal_rows(rng, k, dim):
    Q, _ = np.linalg.qr(rng.standard_normal((dim, k)))
    return Q.T


def _scale(rng):
    return float(np.exp(rng.uniform(-2.0, 2.0)))


def random_set(rng, dim, kind=None):
    """A random member of the catalog; ``kind`` picks one of :data:`ALL_KINDS`."""
    kind = kind or ALL_KINDS[rng.integers(len(ALL_KINDS))]
    s = _scale(rng)
    c = rng.normal(scale=5.0, size=dim)
    if kind == "singleton":
        p = c + s * rng.standard_normal(dim)
        # duplicates collapse, so this is still one point
        return FinitePoints(np.repeat(p[None, :], rng.integers(1, 4), axis=0))
    if kind in ("finite", "hull"):
        n = int(rng.integers(2, 13))
        k = int(rng.integers(1, dim + 1))
        pts = c + s * rng.standard_normal((n, k)) @ _orthonormal_rows(rng, k, dim)
        return FinitePoints(pts) if kind == "finite" else ConvexHullOfPoints(pts)
    if kind == "segment":
        return Segment(c, c + s * rng.standard_normal(dim))
    if kind == "ball":
        return Ball(c, s)
    if kind == "ellipsoid":
        L = s * rng.standard_normal((dim, dim))
        return Ellipsoid(c, L @ L.T + 0.1 * s * s * np.eye(dim))
    if kind == "slab":
        k = int(rng.integers(1, dim + 1))
        return AffineSlab(c, _orthonormal_rows(rng, k, dim), s * rng.uniform(0.1, 2.0, size=k))
    if kind == "affine":
        k = int(rng.integers(1, dim + 1))
        return UnboundedAffine(c, _orthonormal_rows(rng, k, dim))
    if kind == "full":
        return FullSpace(dim)
    raise ValueError(f"unknown kind {kind!r}")


def random_subset_pair(rng, dim):
    """``(U, V)`` with ``U ⊆ V`` by construction (verified by the caller)."""
    choice = int(rng.integers(7))
    if choice == 0:  # finite subset of a finite set
        V = random_set(rng, dim, "finite")
        m = int(rng.integers(1, len(V.points) + 1))
        idx = rng.choice(len(V.points), size=m, replace=False)
        return FinitePoints(V.points[idx]), V
    if choice == 1:  # points inside a bounded convex set
        V = random_set(rng, dim, ("ball", "ellipsoid", "slab", "segment", "hull")[rng.integers(5)])
        return FinitePoints(V.sample(rng, int(rng.integers(1, 8)))), V
    if choice == 2:  # ball inside a ball
        V = random_set(rng, dim, "ball")
        r = V.radius * rng.uniform(0.05, 0.95)
        u = rng.standard_normal(dim)
        u *= rng.uniform(0, V.radius - r) / np.linalg.norm(u)
        return Ball(V.center_point + u, r), V
    if choice == 3:  # segment inside a full-dimensional box
        V = AffineSlab(rng.normal(scale=5.0, size=dim), _orthonormal_rows(rng, dim, dim),
                       _scale(rng) * rng.uniform(0.1, 2.0, size=dim))
        a, b = V.sample(rng, 2)
        return Segment(a, b), V
    if choice == 4:  # lower-dimensional box inside a larger one
        V = random_set(rng, dim, "slab")
        shrink = rng.uniform(0.1, 1.0, size=len(V.extents))
        return AffineSlab(V.offset, V.basis, V.extents * shrink), V
    if choice == 5:  # bounded set inside an affine subspace
        V = random_set(rng, dim, "affine")
        k = len(V.basis)
        pts = V.offset + rng.standard_normal((int(rng.integers(2, 8)), k)) @ V.basis
        return (FinitePoints(pts) if rng.random() < 0.5 else Segment(pts[0], pts[1])), V
    U = random_set(rng, dim, BOUNDED_KINDS[rng.integers(len(BOUNDED_KINDS))])
    return U, FullSpace(dim)


def random_bounded_pair(rng, dim):
    """Bounded ``(U, V)`` with ``rho(U) ⪯ rho(V)``: a superset moved rigidly."""
    while True:
        U, V = random_subset_pair(rng, dim)
        if V.bounded:
            break
    P = random_rotation(dim, rng)
    v = rng.normal(scale=5.0, size=dim)
    return U, V.rotate(P).translate(v)


# -- the checks ---------------------------------------------------------------

def _rho_equal(r1, r2, tol):
    return compare(r1, r2, tol) is Ordering.EQUAL


def _nu_admissible(nu):
    if nu == 1.0:
        return True
    k = 1.0 / (1.0 - nu)
    return abs(k - round(k)) <= 1e-9 * k


def _probe_points(U, rng, m=3):
    return U.sample(rng, m)


def check_a(rng, dim, tol=TAU_GEO, **_):
    U = random_set(rng, dim)
    rho = privacy_index(U)
    ok = (compare(PrivacyIndex.zero(), rho, tol) in (Ordering.LESS, Ordering.EQUAL)
          and compare(rho, PrivacyIndex.maximal(dim), tol) in (Ordering.LESS, Ordering.EQUAL)
          and _nu_admissible(rho.nu))
    return ok, f"{U.kind.value} rho={rho}"


def check_b(rng, dim, tol=TAU_GEO, **_):
    r = rng.random()
    if r < 0.4:
        U = random_set(rng, dim, "singleton")
    elif r < 0.6:
        # two points that are close but distinct
        p = rng.normal(size=dim)
        U = FinitePoints([p, p + 10.0 ** rng.uniform(-6, -2) * rng.standard_normal(dim)])
    else:
        U = random_set(rng, dim)
    rho = privacy_index(U)
    return is_singleton(U) == rho.is_zero, f"{U.kind.value} rho={rho}"


def check_c(rng, dim, tol=TAU_GEO, translate_fn=translate, **_):
    U = random_set(rng, dim)
    v = rng.normal(scale=10.0, size=dim)
    W = translate_fn(U, v)
    pts = _probe_points(U, rng)
    scale = max(1.0, float(np.max(np.abs(pts))), float(np.max(np.abs(v))))
    member = all(W.contains(u + v, tol * 10 * scale) for u in pts)
    same = _rho_equal(privacy_index(U), privacy_index(W), tol)
    return member and same, f"{U.kind.value} member={member} same_rho={same}"


def check_d(rng, dim, tol=TAU_GEO, **_):
    U = random_set(rng, dim)
    P = random_rotation(dim, rng)
    W = U.rotate(P)
    pts = _probe_points(U, rng)
    scale = max(1.0, float(np.max(np.abs(pts))))
    member = all(W.contains(P @ u, tol * 10 * scale) for u in pts)
    same = _rho_equal(privacy_index(U), privacy_index(W), tol)
    return member and same, f"{U.kind.value} member={member} same_rho={same}"


def check_e(rng, dim, tol=TAU_GEO, **_):
    U, V = random_subset_pair(rng, dim)
    if not is_subset(U, V, tol * 10):
        return False, f"generated pair {U.kind.value} ⊄ {V.kind.value}"
    return check_monotonicity(U, V, tol * 10), f"{U.kind.value} ⊆ {V.kind.value}"


def check_f(rng, dim, tol=TAU_GEO, **_):
    U, V = random_bounded_pair(rng, dim)
    c = rng.normal(scale=5.0, size=dim)
    U_star, V_star = construct_prop_f_witness(U, V, c, tol * 10)
    return witness_holds(U, V, U_star, V_star, c, tol * 10), f"{U.kind.value} / {V.kind.value}"


CHECKS = {"a": check_a, "b": check_b, "c": check_c, "d": check_d, "e": check_e, "f": check_f}


def _sign_flipped_translate(s, v):
    return translate(s, -np.asarray(v, dtype=float))


def run_property_suite(trials=1000, seed=0, properties=PROPERTIES, trials_f=None,
                       inject_bug=None, tol=TAU_GEO):
    """
    Run the randomized suites.

    Parameters
    ----------
    trials : int
        Trials per property.
    trials_f : int, optional
        Trial count for the witness property, defaults to `trials`.
    inject_bug : {None, "translate-sign"}
        Mutation used to confirm the suites can fail.

    Returns
    -------
    dict of PropertyResult
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if inject_bug not in (None, "translate-sign"):
        raise ValueError(f"unknown bug injection {inject_bug!r}")
    if not (tol > 0 and math.isfinite(tol)):
        raise ValueError("tolerance must be positive")
    translate_fn = _sign_flipped_translate if inject_bug == "translate-sign" else translate
    results = {}
    for j, name in enumerate(properties):
        rng = np.random.default_rng([seed, j])
        res = PropertyResult(name)
        n = trials_f if name == "f" and trials_f is not None else trials
        for _ in range(n):
            dim = int(rng.integers(2, 6))
            try:
                ok, detail = CHECKS[name](rng, dim, tol=tol, translate_fn=translate_fn)
            except Exception as exc:  # noqa: BLE001 - a crash counts as a failed trial
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            res.record(bool(ok), detail)
        results[name] = res
    return results
