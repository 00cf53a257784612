import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mkge.quaternion import (I, J, K, ONE, Quaternion, conjugate, hamilton_product,
                             quat_trilinear_score)
from mkge.scoring import QUATERNION_TERMS

comp = st.floats(-10, 10, allow_nan=False)
quats = st.builds(Quaternion, comp, comp, comp, comp)


def close(p, q, tol=1e-12):
    return all(abs(a - b) <= tol for a, b in zip(p.as_tuple(), q.as_tuple()))


def test_unit_relations():
    assert hamilton_product(I, J) == K
    assert hamilton_product(J, I) == -K
    assert hamilton_product(J, K) == I
    assert hamilton_product(K, I) == J
    for u in (I, J, K):
        assert hamilton_product(u, u) == -ONE
    assert hamilton_product(hamilton_product(I, J), K) == -ONE


def test_hand_expanded_product():
    assert ONE + I == Quaternion(1, 1, 0, 0)
    assert hamilton_product(Quaternion(1, 1, 0, 0), Quaternion(1, 0, 1, 0)) == Quaternion(1, 1, 1, 1)


def test_conjugate_examples():
    assert conjugate(ONE) == ONE
    assert conjugate(I) == Quaternion(0, -1, 0, 0)
    assert conjugate(Quaternion(1, 2, 3, 4)) == Quaternion(1, -2, -3, -4)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        Quaternion(float("nan"))


@given(quats)
def test_conjugate_involution(q):
    assert conjugate(conjugate(q)) == q


@given(quats, quats)
def test_real_part_trace_property(p, q):
    assert math.isclose(hamilton_product(p, q).a, hamilton_product(q, p).a, rel_tol=1e-12, abs_tol=1e-9)


@given(quats, quats)
def test_norm_multiplicative(p, q):
    lhs = hamilton_product(p, q).norm()
    assert math.isclose(lhs, p.norm() * q.norm(), rel_tol=1e-12, abs_tol=1e-12)


@given(quats, quats, quats)
def test_associative(p, q, s):
    a = hamilton_product(hamilton_product(p, q), s)
    b = hamilton_product(p, hamilton_product(q, s))
    assert close(a, b, tol=1e-9)


def test_trilinear_examples():
    r = Quaternion(0.3, -1.2, 2.0, 5.5)
    assert quat_trilinear_score([ONE], [ONE], [r]) == pytest.approx(0.3)
    assert quat_trilinear_score([I], [I], [ONE]) == pytest.approx(1.0)


def test_trilinear_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        quat_trilinear_score([ONE, ONE], [ONE], [ONE])


UNITS = [ONE, I, J, K]


def test_ordering_reproduces_published_expansion():
    """Unit inputs pick out single coefficients: all 64 must match the 16-term table."""
    for (i, hu), (j, tu), (k, ru) in itertools.product(enumerate(UNITS, 1), repeat=3):
        got = quat_trilinear_score([hu], [tu], [ru])
        assert got == QUATERNION_TERMS.get((i, j, k), 0), (i, j, k)


def test_other_orderings_do_not_match():
    # h * r * conj(t) is a plausible alternative; it must disagree somewhere
    mismatch = 0
    for (i, hu), (j, tu), (k, ru) in itertools.product(enumerate(UNITS, 1), repeat=3):
        alt = hamilton_product(hamilton_product(hu, ru), conjugate(tu)).a
        mismatch += alt != QUATERNION_TERMS.get((i, j, k), 0)
    assert mismatch > 0


def test_expansion_on_random_inputs():
    rng = np.random.default_rng(3)
    for _ in range(200):
        h, t, r = rng.normal(size=(3, 4))
        expect = sum(s * h[i - 1] * t[j - 1] * r[k - 1] for (i, j, k), s in QUATERNION_TERMS.items())
        got = quat_trilinear_score([Quaternion(*h)], [Quaternion(*t)], [Quaternion(*r)])
        assert got == pytest.approx(expect, rel=1e-9, abs=1e-12)
