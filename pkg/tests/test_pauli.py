import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paulistab.errors import SingularQuaternion
from paulistab.freqresp import FrequencyGrid, Rational, constant, delay, rl
from paulistab.oracles import matrix_det2, matrix_inv2, matrix_mul2
from paulistab.pauli import (
    IDENTITY,
    JK,
    FrequencyResponseSet,
    J,
    K,
    PauliQuaternion,
    QuaternionElement,
    decompose,
    dot,
    frequency_shift,
    im_operator,
    is_mfd,
    magnitude_sq,
    q_add,
    q_inverse,
    q_mul,
    q_scale,
    re_operator,
    recompose,
    semi_norm,
    semi_norm_sq,
)

from conftest import random_complex, random_quaternions, rel_err

finite = st.floats(-1e3, 1e3, allow_nan=False)
cplx = st.builds(complex, finite, finite)
quats = st.builds(PauliQuaternion, cplx, cplx, cplx, cplx)


def mat_scale(M):
    return np.abs(M).max(axis=(-2, -1))[..., None, None]


def qarr(q):
    return np.array([complex(c) for c in q])


def test_decompose_examples():
    assert np.array_equal(qarr(decompose(np.eye(2))), [1, 0, 0, 0])
    R, L, w, w1 = 0.2, 3e-3, 700.0, 2 * math.pi * 50
    z = R + 1j * w * L
    q = decompose([[z, -w1 * L], [w1 * L, z]])
    assert np.allclose(qarr(q), [z, 0, w1 * L, 0], rtol=0, atol=1e-15)


def test_recompose_basis():
    assert np.array_equal(recompose(IDENTITY), np.eye(2))
    assert np.array_equal(recompose(K), np.diag([1, -1]))
    assert np.array_equal(recompose(JK), [[0, 1], [1, 0]])
    assert np.array_equal(recompose(J), [[0, -1], [1, 0]])


def test_round_trip_random(rng):
    M = random_complex(rng, (1000, 2, 2))
    assert rel_err(recompose(decompose(M)), M, scale=mat_scale(M)) <= 1e-15
    # with entries of equal magnitude there is no cancellation to hide behind
    P = random_complex(rng, (1000, 2, 2), spread=False)
    P = P / np.abs(P)
    assert rel_err(recompose(decompose(P)), P) <= 1e-15


def test_add_and_scale():
    a = PauliQuaternion(1, 2j, 3, 4)
    assert np.array_equal(qarr(q_add(a, PauliQuaternion())), qarr(a))
    assert np.array_equal(qarr(q_scale(2, PauliQuaternion(1, 1, 1, 1))), [2, 2, 2, 2])


def test_linearity(rng):
    A, B = random_complex(rng, (200, 2, 2)), random_complex(rng, (200, 2, 2))
    lhs, rhs = q_add(decompose(A), decompose(B)), decompose(A + B)
    assert rel_err(recompose(lhs), recompose(rhs), scale=mat_scale(A + B)) < 1e-15


def test_q_mul_scalar_case(rng):
    y = random_quaternions(rng, 50)
    z0 = random_complex(rng, 50)
    got = q_mul(PauliQuaternion(z0, 0, 0, 0), y)
    assert rel_err(recompose(got), recompose(q_scale(z0, y))) < 1e-15


def test_q_mul_pure_vectors(rng):
    z = PauliQuaternion(0, *(random_complex(rng, 50) for _ in range(3)))
    y = PauliQuaternion(0, *(random_complex(rng, 50) for _ in range(3)))
    L = q_mul(z, y)
    assert rel_err(L.q0, dot(z, y)) < 1e-14
    # j (z x y) over the vector [Q1, -j Q2, Q3]
    zv = np.stack([z.q1, -1j * z.q2, z.q3])
    yv = np.stack([y.q1, -1j * y.q2, y.q3])
    cross = 1j * np.cross(zv, yv, axis=0)
    Lv = np.stack([L.q1, -1j * L.q2, L.q3])
    assert rel_err(Lv, cross, scale=np.abs(zv).max() * np.abs(yv).max()) < 1e-14


def test_q_mul_general_vector_formula(rng):
    z, y = random_quaternions(rng, 50), random_quaternions(rng, 50)
    L = q_mul(z, y)
    zv = np.stack([z.q1, -1j * z.q2, z.q3])
    yv = np.stack([y.q1, -1j * y.q2, y.q3])
    want = z.q0 * yv + y.q0 * zv + 1j * np.cross(zv, yv, axis=0)
    got = np.stack([L.q1, -1j * L.q2, L.q3])
    scale = np.abs(z.as_array()).max(axis=0) * np.abs(y.as_array()).max(axis=0)
    assert rel_err(got, want, scale=scale) < 1e-14


@settings(max_examples=300, deadline=None)
@given(quats, quats)
def test_q_mul_homomorphism(z, y):
    got = recompose(q_mul(z, y))
    want = recompose(z) @ recompose(y)
    scale = max(np.abs(recompose(z)).max() * np.abs(recompose(y)).max(), 1e-300)
    assert np.max(np.abs(got - want)) <= 1e-12 * scale


def test_inverse_examples():
    assert np.allclose(qarr(q_inverse(IDENTITY)), [1, 0, 0, 0])
    assert np.allclose(qarr(q_inverse(PauliQuaternion(4j, 0, 0, 0))), [1 / 4j, 0, 0, 0])


def test_inverse_random(rng):
    q = random_quaternions(rng, 1000)
    ok = np.abs(semi_norm_sq(q)) > 1e-9
    q = q[ok]
    inv = q_inverse(q)
    assert rel_err(recompose(inv), matrix_inv2(recompose(q)), scale=np.abs(recompose(inv)).max(axis=(-2, -1))[:, None, None]) < 1e-10
    one = q_mul(q, inv)
    assert np.max(np.abs(one.as_array() - np.array([1, 0, 0, 0])[:, None])) < 1e-10


def test_inverse_singular():
    with pytest.raises(SingularQuaternion) as info:
        q_inverse(im_operator(), omega=12.0)
    assert info.value.omega == 12.0
    with pytest.raises(SingularQuaternion):
        q_inverse(PauliQuaternion())
    with pytest.raises(SingularQuaternion):
        q_inverse(PauliQuaternion(np.array([1.0, 1.0]), np.array([0.0, 1.0]), 0, 0))


def test_semi_norm_examples():
    assert semi_norm_sq(IDENTITY) == 1
    R, L, w, w1 = 0.3, 3e-3, 2000.0, 2 * math.pi * 50
    q = PauliQuaternion(R + 1j * w * L, 0, w1 * L, 0)
    want = (R + 1j * w * L) ** 2 + (w1 * L) ** 2
    assert semi_norm_sq(q) == pytest.approx(want, rel=1e-14)
    assert semi_norm_sq(q) == pytest.approx(matrix_det2(recompose(q)), rel=1e-14)


def test_semi_norm_branch():
    q = PauliQuaternion(0, 1, 0, 0)  # semi_norm_sq = -1
    assert semi_norm(q) == pytest.approx(1j)
    assert semi_norm(q) ** 2 == pytest.approx(semi_norm_sq(q))


@settings(max_examples=300, deadline=None)
@given(quats, quats)
def test_multiplicativity(z, y):
    lhs = semi_norm_sq(q_mul(z, y))
    rhs = semi_norm_sq(z) * semi_norm_sq(y)
    scale = max(magnitude_sq_bound(z) * magnitude_sq_bound(y), 1e-300)
    assert abs(lhs - rhs) <= 1e-12 * scale


def magnitude_sq_bound(q):
    return sum(abs(complex(c)) ** 2 for c in q)


def test_magnitude_sq():
    assert magnitude_sq(IDENTITY) == 1
    assert magnitude_sq(PauliQuaternion(1j, 0, 0, 0)) == pytest.approx(1)
    q = PauliQuaternion(1 + 2j, 0.5, -1j, 3)
    assert magnitude_sq(q) == pytest.approx(abs(semi_norm(q) * np.conj(semi_norm(q))))


def test_re_im_operators():
    assert np.array_equal(qarr(re_operator()), [0.5, 0, 0, 0.5])
    assert np.array_equal(qarr(im_operator()), [0, 0.5, -0.5, 0])
    i = np.array([3.0, -7.0])
    assert np.allclose(recompose(im_operator()) @ i, [-7.0, 0])
    assert np.allclose(recompose(re_operator()) @ i, [3.0, 0])
    assert semi_norm_sq(im_operator()) == 0


def test_frequency_shift_examples():
    w1 = 2 * math.pi * 50
    s = 1j * np.array([10.0, 500.0, 7000.0])
    q = frequency_shift(rl(0.4, 3e-3), w1)(s)
    assert rel_err(q.q0, 0.4 + s * 3e-3) < 1e-13
    assert rel_err(q.q2, w1 * 3e-3 + 0 * s) < 1e-12
    assert np.all(q.q1 == 0) and np.all(q.q3 == 0)
    q = frequency_shift(constant(1.0), w1)(s)
    assert np.allclose(q.as_array(), np.array([1, 0, 0, 0])[:, None])
    Td = 150e-6
    q = frequency_shift(delay(Td), w1)(s)
    e = np.exp(-s * Td)
    assert rel_err(q.q0, e * math.cos(w1 * Td)) < 1e-12
    assert rel_err(q.q2, -e * math.sin(w1 * Td), scale=1.0) < 1e-12


def test_frequency_shift_matches_complex_rotation():
    # the matrix of h(s I + J w1) acting on (d, q) equals h(s + j w1) on d + j q
    h = Rational((1.0, 3.0), (2.0, 1.0, 5.0))
    w1 = 314.0
    s = 1j * 123.0
    M = recompose(frequency_shift(h, w1)(s))
    assert M.shape == (2, 2)
    ctf = frequency_shift(h, w1)(s).ctf_positive
    assert ctf == pytest.approx(h(s + 1j * w1))


def test_mfd_characterisation(rng):
    Jm = recompose(J)
    for _ in range(200):
        q = PauliQuaternion(*(random_complex(rng, ()) for _ in range(4)))
        if rng.random() < 0.5:
            q = PauliQuaternion(q.q0, 0, q.q2, 0)
        M = recompose(q)
        commutes = np.allclose(M @ Jm, Jm @ M, rtol=0, atol=1e-12 * np.abs(M).max())
        assert bool(is_mfd(q)) == commutes


def test_quaternion_element_algebra(rng):
    a = QuaternionElement.components(rl(0.1, 1e-3), 0.5, delay(1e-4), 2.0)
    b = QuaternionElement.constant(PauliQuaternion(1, 2j, 0.3, -1))
    s = 1j * np.array([5.0, 50.0, 500.0])
    A, B = recompose(a(s)), recompose(b(s))
    assert rel_err(recompose((a * b)(s)), matrix_mul2(A, B)) < 1e-13
    assert rel_err(recompose((a + b)(s)), A + B) < 1e-14
    assert rel_err(recompose((a - b)(s)), A - B) < 1e-14
    assert rel_err(recompose(a.inverse()(s)), matrix_inv2(A)) < 1e-12
    assert rel_err(recompose((2 * a)(s)), 2 * A) < 1e-15


def test_ctf_accessors():
    q = PauliQuaternion(1, 2, 3, 4)
    assert q.ctf_positive == 1 + 3j
    assert q.ctf_negative == 4 + 2j


def test_response_set_lookup():
    g = FrequencyGrid.from_hz([10.0, 20.0, 30.0])
    el = QuaternionElement.components(rl(0, 1e-3), 0, 1.0, 0)
    fr = FrequencyResponseSet.sample(el, g)
    got = fr(g.s[::-1])
    assert rel_err(got.q0, el(g.s[::-1]).q0) == 0
    with pytest.raises(ValueError):
        fr(1j * 2 * np.pi * 15.0)
    with pytest.raises(ValueError):
        FrequencyResponseSet(g, (np.zeros(2),) * 4)


def test_concat_joins_components():
    a = PauliQuaternion(np.array([1, 2]), np.array([3, 4]), np.array([5, 6]), np.array([7, 8]))
    b = PauliQuaternion(9, 10, 11, 12)
    c = PauliQuaternion.concat([a, b])
    assert [list(comp) for comp in c] == [[1, 2, 9], [3, 4, 10], [5, 6, 11], [7, 8, 12]]
