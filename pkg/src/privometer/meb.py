"""
Minimum enclosing ball of a finite point set.

Move-to-front variant of Welzl's algorithm: the recursion only descends
over the boundary (support) set, so its depth is bounded by ``dim + 1``
and the scan over the points is an ordinary loop.  The result is
checked afterwards against the optimality conditions of the ball: every
point is inside and the center is a convex combination of the points on
the boundary.
"""

import numpy as np
from scipy.optimize import nnls

MAX_DIM = 10

# relative slack used when deciding whether a point is outside the
# current ball during the scan
_SCAN_EPS = 1e-12


def _circumball(support):
    """Smallest ball with all of `support` on its boundary.

    The center is constrained to the affine hull of the support points,
    which makes the ball unique for affinely independent supports.
    """
    if not support:
        return None, -1.0
    p0 = support[0]
    if len(support) == 1:
        return p0.copy(), 0.0
    A = np.array(support[1:]) - p0
    G = A @ A.T
    rhs = 0.5 * np.einsum("ij,ij->i", A, A)
    try:
        w = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        w = np.linalg.lstsq(G, rhs, rcond=None)[0]
    c = p0 + A.T @ w
    return c, float(np.sum((c - p0) ** 2))


def _outside(p, c, r2):
    if c is None:
        return True
    return float(np.sum((p - c) ** 2)) > r2 * (1.0 + _SCAN_EPS) + _SCAN_EPS


def _mtf(pts, end, support, dim):
    c, r2 = _circumball(support)
    if len(support) == dim + 1:
        return c, r2
    for i in range(end):
        p = pts[i]
        if _outside(p, c, r2):
            c, r2 = _mtf(pts, i, support + [p], dim)
            # move to front; the prefix shifts right by one so the scan
            # continues correctly at i + 1
            pts.insert(0, pts.pop(i))
    return c, r2


def center_in_hull(center, support, tol=1e-9):
    """True when `center` is a convex combination of `support` (within tol)."""
    S = np.asarray(support, dtype=float)
    scale = max(1.0, float(np.max(np.abs(S))))
    M = np.vstack([S.T / scale, np.ones(len(S))])
    b = np.concatenate([np.asarray(center, dtype=float) / scale, [1.0]])
    _, resid = nnls(M, b)
    return resid <= tol


def verify_ball(points, center, radius, tol=1e-9):
    """Check containment and the support condition of a candidate MEB."""
    P = np.asarray(points, dtype=float)
    dist = np.linalg.norm(P - center, axis=1)
    scale = max(1.0, radius)
    if np.any(dist > radius + tol * scale):
        return False
    if radius == 0.0:
        return True
    on_boundary = P[dist >= radius - 1e3 * tol * scale]
    return center_in_hull(center, on_boundary, tol=1e-7)


def minimum_enclosing_ball(points, seed=0, max_restarts=5):
    """
    Smallest Euclidean ball containing a finite point set.

    Parameters
    ----------
    points : (n, d) array_like
        Points to enclose, ``n >= 1`` and ``d <= MAX_DIM``.
    seed : int, optional
        Seed of the initial shuffle.  The shuffle only affects running
        time, never the ball, so the result is deterministic.
    max_restarts : int, optional
        Reshuffles attempted if the verification step fails.

    Returns
    -------
    center : (d,) ndarray
    radius : float
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    n, dim = P.shape
    if n == 0:
        raise ValueError("cannot enclose an empty point set")
    if dim > MAX_DIM:
        raise ValueError(f"dimension {dim} exceeds supported maximum {MAX_DIM}")
    if n == 1:
        return P[0].copy(), 0.0

    # work in centered unit-spread coordinates so that the tolerances are
    # relative to the size of the cloud, not to its absolute scale
    shift = P.mean(axis=0)
    spread = float(np.max(np.abs(P - shift)))
    if spread == 0.0:
        return P[0].copy(), 0.0
    Q = (P - shift) / spread

    rng = np.random.default_rng(seed)
    for _ in range(max_restarts + 1):
        pts = [p for p in Q[rng.permutation(n)]]
        c, r2 = _mtf(pts, len(pts), [], dim)
        # radius is re-measured from the actual farthest point so that
        # containment holds exactly for the returned pair
        r = max(float(np.sqrt(max(r2, 0.0))), float(np.max(np.linalg.norm(Q - c, axis=1))))
        if verify_ball(Q, c, r):
            c = shift + spread * c
            return c, max(spread * r, float(np.max(np.linalg.norm(P - c, axis=1))))
    raise RuntimeError("minimum enclosing ball failed verification")
