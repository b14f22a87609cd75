"""Independent reference computations used by the tests.

None of these share code with the package: they are deliberately slow,
direct formulations that are easy to check by hand.
"""

import itertools

import numpy as np
from scipy.optimize import minimize


def brute_force_meb(points):
    """
    Smallest enclosing ball by exhaustive search over support sets.

    The minimum enclosing ball is the circumball (center in the affine
    hull) of at most ``dim + 1`` of the points, so the smallest such ball
    that contains every point is the answer.
    """
    P = np.unique(np.asarray(points, dtype=float), axis=0)
    n, dim = P.shape
    if n == 1:
        return P[0], 0.0
    best_c, best_r = None, np.inf
    for k in range(2, min(n, dim + 1) + 1):
        idx = np.array(list(itertools.combinations(range(n), k)))
        S = P[idx]                                   # (m, k, dim)
        base = S[:, 0, :]
        V = S[:, 1:, :] - base[:, None, :]           # (m, k-1, dim)
        G = V @ V.transpose(0, 2, 1)                 # (m, k-1, k-1)
        rhs = 0.5 * np.sum(V * V, axis=2)
        ok = np.abs(np.linalg.det(G)) > 1e-12 * np.max(np.abs(G), axis=(1, 2)) ** (k - 1)
        if not np.any(ok):
            continue
        t = np.linalg.solve(G[ok], rhs[ok][..., None])[..., 0]
        C = base[ok] + np.einsum("mj,mjd->md", t, V[ok])
        R = np.linalg.norm(C - base[ok], axis=1)
        far = np.max(np.linalg.norm(P[None, :, :] - C[:, None, :], axis=2), axis=1)
        enclosing = far <= R * (1 + 1e-12) + 1e-12
        if np.any(enclosing):
            j = np.argmin(np.where(enclosing, R, np.inf))
            if R[j] < best_r:
                best_c, best_r = C[j], float(R[j])
    return best_c, best_r


def max_pairwise_distance(points):
    P = np.asarray(points, dtype=float)
    return float(np.max(np.linalg.norm(P[:, None] - P[None], axis=2)))


def exp_sum_closed_form(s):
    """
    ``minimize sum exp(-z_i)`` s.t. ``sum s_i exp(3 z_i) <= 1``.

    Stationarity gives ``exp(-4 z_i) = 3 nu s_i``; the active constraint
    then fixes ``3 nu = (sum s_i^{1/4})^{4/3}``.
    """
    s = np.asarray(s, dtype=float)
    three_nu = np.sum(s ** 0.25) ** (4.0 / 3.0)
    return -0.25 * np.log(three_nu * s)


def resource_closed_form(alpha, beta, gamma):
    """``x_i`` proportional to ``(alpha_i / beta_i)^{1/4}`` on the budget boundary."""
    alpha, beta = np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float)
    t = (alpha / beta) ** 0.25
    return t * np.cbrt(gamma / (beta @ t ** 3))


def unit_circle_ellipse_points(Abar):
    """
    Unit vectors with ``a^T Abar^{-1} a = 1`` via the eigenbasis of ``Abar``.

    With eigenvalues ``mu1 > mu2`` the conditions ``x^2/mu1 + y^2/mu2 = 1``
    and ``x^2 + y^2 = 1`` give ``x^2 = mu1 (1 - mu2) / (mu1 - mu2)``.
    """
    mu, V = np.linalg.eigh(Abar)
    mu2, mu1 = mu
    x2 = mu1 * (1 - mu2) / (mu1 - mu2)
    x, y = np.sqrt(x2), np.sqrt(1 - x2)
    local = np.array([[x, y], [x, -y], [-x, y], [-x, -y]])
    return local @ np.column_stack([V[:, 1], V[:, 0]]).T


def centralized_box_qp(Hs, ms, Es, lower, upper):
    """Coupled problem solved directly over the global variable with box bounds."""
    def f(z):
        return sum(0.5 * (E @ z - m) @ H @ (E @ z - m) for H, m, E in zip(Hs, ms, Es))

    def g(z):
        return sum(E.T @ H @ (E @ z - m) for H, m, E in zip(Hs, ms, Es))

    z0 = np.clip(np.zeros(len(lower)), lower, upper)
    res = minimize(f, z0, jac=g, method="L-BFGS-B", bounds=list(zip(lower, upper)),
                   options={"ftol": 1e-15, "gtol": 1e-13, "maxiter": 10_000})
    return res.x


def box_qp_instance(seed):
    """Three 2-D box QPs over a shared 3-vector; returns ``Es, Hs, ms, los, his``."""
    rng = np.random.default_rng(seed)
    # three subsystems share a 3-vector; each sees two of its coordinates
    Es = [np.eye(3)[[0, 1]], np.eye(3)[[1, 2]], np.eye(3)[[0, 2]]]
    Hs, ms, los, his = [], [], [], []
    for _ in range(3):
        G = rng.normal(size=(2, 2))
        Hs.append(G @ G.T + np.eye(2))
        ms.append(rng.normal(scale=3, size=2))
        los.append(-rng.uniform(0.5, 2, size=2))
        his.append(rng.uniform(0.5, 2, size=2))
    return Es, Hs, ms, los, his


def global_box(Es, los, his):
    """Intersection of the local boxes, expressed on the global variable."""
    n = Es[0].shape[1]
    lower, upper = np.full(n, -np.inf), np.full(n, np.inf)
    for E, lo, hi in zip(Es, los, his):
        idx = E.argmax(axis=1)
        lower[idx] = np.maximum(lower[idx], lo)
        upper[idx] = np.minimum(upper[idx], hi)
    return lower, upper
