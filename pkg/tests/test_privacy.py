import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privometer.privacy import (
    Ordering, PrivacyIndex, check_monotonicity, compare, construct_prop_f_witness,
    loss_probability, privacy_index, witness_holds,
)
from privometer.uncertainty_sets import (
    INF, AffineSlab, Ball, Ellipsoid, FinitePoints, Segment, UnboundedAffine,
    UndecidableSubsetError, random_rotation,
)


def test_singleton_index_is_zero():
    rho = privacy_index(FinitePoints([[2.0, -1.0]]))
    assert (rho.d, rho.nu, rho.a) == (0.0, 0.0, 0)
    assert rho.is_zero


def test_two_point_index():
    c1, c2 = np.array([1.0, 2.0]), np.array([4.0, 6.0])
    rho = privacy_index(FinitePoints([c1, c2]))
    assert rho.d == pytest.approx(5.0, abs=1e-12)
    assert (rho.nu, rho.a) == (0.5, 1)


def test_real_line_has_maximal_index():
    rho = privacy_index(UnboundedAffine([3.0], [[1.0]]))
    assert rho == PrivacyIndex(INF, 1.0, 1)


def test_nu_takes_the_lattice_values():
    for k in range(1, 8):
        pts = np.column_stack([np.arange(k), np.zeros(k)])
        assert privacy_index(FinitePoints(pts)).nu == pytest.approx(1 - 1 / k)
    assert loss_probability(math.inf) == 1.0
    with pytest.raises(ValueError):
        loss_probability(0)


@pytest.mark.parametrize("lhs, rhs, expected", [
    (PrivacyIndex(7.0, 1.0, 1), PrivacyIndex(7.0, 1.0, 2), Ordering.LESS),
    (PrivacyIndex(3.0, 0.5, 1), PrivacyIndex(7.0, 1.0, 1), Ordering.LESS),
    (PrivacyIndex(5.0, 1.0, 1), PrivacyIndex(3.0, 1.0, 2), Ordering.INCOMPARABLE),
    (PrivacyIndex(INF, 1.0, 2), PrivacyIndex(INF, 1.0, 2), Ordering.EQUAL),
    (PrivacyIndex(INF, 1.0, 2), PrivacyIndex(9.0, 1.0, 2), Ordering.GREATER),
])
def test_compare_examples(lhs, rhs, expected):
    assert compare(lhs, rhs) is expected


def test_d_tolerance_is_relative():
    assert compare(PrivacyIndex(1e6, 1, 1), PrivacyIndex(1e6 * (1 + 1e-12), 1, 1)) is Ordering.EQUAL
    assert compare(PrivacyIndex(1.0, 1, 1), PrivacyIndex(1.0 + 1e-6, 1, 1)) is Ordering.LESS


@pytest.mark.parametrize("args", [(1.0, 1.5, 1), (1.0, -0.1, 1), (1.0, 0.5, -1), (-1.0, 0.5, 1),
                                  (1.0, 0.5, 1.5)])
def test_invalid_index_rejected(args):
    with pytest.raises(ValueError):
        PrivacyIndex(*args)


def test_index_text_round_trip():
    rho = PrivacyIndex.parse("inf, 1, 2")
    assert rho == PrivacyIndex(INF, 1.0, 2)
    assert PrivacyIndex.from_dict(rho.to_dict()) == rho
    assert rho.to_dict() == {"d": "inf", "nu": 1.0, "a": 2}
    assert str(rho) == "(inf, 1, 2)"
    for bad in ("1,2", "a,b,c", "1,0.5,1.5"):
        with pytest.raises(ValueError):
            PrivacyIndex.parse(bad)


indices = st.builds(
    PrivacyIndex,
    st.sampled_from([0.0, 0.5, 1.0, 2.0, 3.0, INF]),
    st.sampled_from([0.0, 0.5, 2 / 3, 0.75, 1.0]),
    st.integers(0, 4))


@settings(max_examples=300)
@given(indices)
def test_compare_reflexive(x):
    assert compare(x, x) is Ordering.EQUAL


@settings(max_examples=300)
@given(indices, indices)
def test_compare_antisymmetric(x, y):
    fwd, back = compare(x, y), compare(y, x)
    flip = {Ordering.LESS: Ordering.GREATER, Ordering.GREATER: Ordering.LESS,
            Ordering.EQUAL: Ordering.EQUAL, Ordering.INCOMPARABLE: Ordering.INCOMPARABLE}
    assert back is flip[fwd]
    if x <= y and y <= x:
        assert x == y


@settings(max_examples=500)
@given(indices, indices, indices)
def test_compare_transitive(x, y, z):
    if x <= y and y <= z:
        assert x <= z


# -- monotonicity -------------------------------------------------------------

def test_monotone_examples():
    p, q = np.array([0.0, 0.0]), np.array([1.0, 1.0])
    assert check_monotonicity(FinitePoints([p]), FinitePoints([p, q]))
    assert check_monotonicity(Ball([0, 0, 0], 1.0), Ball([0, 0, 0], 2.0))
    assert privacy_index(Ball([0, 0, 0], 1.0)) == PrivacyIndex(2.0, 1.0, 3)


def test_random_finite_inclusions():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        T = rng.normal(size=(int(rng.integers(1, 10)), int(rng.integers(1, 4))))
        S = T[rng.choice(len(T), size=int(rng.integers(1, len(T) + 1)), replace=False)]
        assert check_monotonicity(FinitePoints(S), FinitePoints(T))


def test_monotonicity_preconditions():
    with pytest.raises(ValueError, match="not a subset"):
        check_monotonicity(Ball([0, 0], 2.0), Ball([0, 0], 1.0))
    with pytest.raises(UndecidableSubsetError):
        check_monotonicity(Ball([0, 0], 1.0), Ellipsoid([0.1, 0], np.diag([4.0, 4.0])))


# -- nested-ball witness ------------------------------------------------------

def test_witness_box_in_rectangle():
    U = AffineSlab([0, 0], np.eye(2), [0.5, 0.5])
    V = AffineSlab([3, -2], [[0.6, 0.8], [-0.8, 0.6]], [2.0, 1.0])
    c = np.array([10.0, 10.0])
    U_star, V_star = construct_prop_f_witness(U, V, c)
    assert witness_holds(U, V, U_star, V_star, c)


def test_witness_unbounded_lines():
    U = UnboundedAffine([0, 0], [[1, 0]])
    V = UnboundedAffine([0, 5], [[0, 1]])
    c = np.array([0.0, 0.0])
    U_star, V_star = construct_prop_f_witness(U, V, c)
    assert U_star is U  # already contains c
    assert V_star.contains(c)
    assert witness_holds(U, V, U_star, V_star, c)


def test_witness_singleton_lands_on_c():
    U = FinitePoints([[4.0, 4.0]])
    V = Segment([0, 0], [1, 0])
    c = np.array([-2.0, 7.0])
    U_star, V_star = construct_prop_f_witness(U, V, c)
    np.testing.assert_allclose(U_star.points, [c])
    assert witness_holds(U, V, U_star, V_star, c)


def test_witness_aligned_directions():
    # both limit-point directions coincide up to rounding; the alignment
    # matrix must still map one onto the other
    rng = np.random.default_rng(0)
    for _ in range(50):
        dim = int(rng.integers(2, 6))
        V = Ball(rng.normal(size=dim), rng.uniform(1, 3))
        U = Ball(V.center_point + 0.1 * rng.normal(size=dim), 0.2)
        P = random_rotation(dim, rng)
        V = V.rotate(P).translate(rng.normal(size=dim))
        c = rng.normal(scale=5, size=dim)
        assert witness_holds(U, V, *construct_prop_f_witness(U, V, c), c)


def test_witness_requires_ordered_indices():
    with pytest.raises(ValueError, match="precondition"):
        construct_prop_f_witness(Ball([0, 0], 2.0), Ball([0, 0], 1.0), np.zeros(2))
