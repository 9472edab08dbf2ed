"""Pauli decomposition of 2x2 dq-frame matrices.

A real-coefficient dq matrix is written as

    M = Q0*I + Q2*J + Q3*K + Q1*JK

with ``J = [[0, -1], [1, 0]]``, ``K = diag(1, -1)`` and ``JK = [[0, 1], [1, 0]]``,
which is the matrix layout

    [[Q0 + Q3, Q1 - Q2],
     [Q1 + Q2, Q0 - Q3]].

In quaternion form the vector part is ``[Q1, -j*Q2, Q3]`` and the dot product
is the plain (unconjugated) sum of term-by-term products.  All coefficients
may be numpy arrays, in which case every operation acts per frequency sample.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number

import numpy as np

from .errors import SingularQuaternion
from .freqresp import TransferElement, as_element

# relative threshold used by q_inverse
SINGULAR_RTOL = 1e-14


@dataclass(frozen=True, eq=False)
class PauliQuaternion:
    """Four complex coefficients ``(Q0, Q1, Q2, Q3)``, scalars or arrays."""

    q0: complex = 0j
    q1: complex = 0j
    q2: complex = 0j
    q3: complex = 0j

    def __iter__(self):
        return iter((self.q0, self.q1, self.q2, self.q3))

    def __getitem__(self, idx):
        return PauliQuaternion(*(np.asarray(c)[idx] for c in self))

    def as_array(self):
        """Coefficients stacked along a new leading axis of length 4."""
        return np.stack(np.broadcast_arrays(*(np.asarray(c, dtype=complex) for c in self)))

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr)
        return cls(arr[0], arr[1], arr[2], arr[3])

    @classmethod
    def concat(cls, parts):
        return cls(*(np.concatenate([np.atleast_1d(tuple(p)[i]) for p in parts]) for i in range(4)))

    @property
    def scalar(self):
        return self.q0

    @property
    def vector(self):
        """Vector part ``[Q1, -j*Q2, Q3]``."""
        return (self.q1, -1j * self.q2, self.q3)

    @property
    def ctf_positive(self):
        """Complex transfer function acting on ``i``: ``Q0 + j*Q2``."""
        return self.q0 + 1j * self.q2

    @property
    def ctf_negative(self):
        """Complex transfer function acting on ``conj(i)``: ``Q3 + j*Q1``."""
        return self.q3 + 1j * self.q1

    def __add__(self, other):
        return q_add(self, _coerce(other))

    __radd__ = __add__

    def __neg__(self):
        return q_scale(-1, self)

    def __sub__(self, other):
        return q_add(self, q_scale(-1, _coerce(other)))

    def __rsub__(self, other):
        return q_add(_coerce(other), q_scale(-1, self))

    def __mul__(self, other):
        if isinstance(other, PauliQuaternion):
            return q_mul(self, other)
        return q_scale(other, self)

    def __rmul__(self, other):
        if isinstance(other, PauliQuaternion):
            return q_mul(other, self)
        return q_scale(other, self)

    def __repr__(self):
        return f"PauliQuaternion(q0={self.q0!r}, q1={self.q1!r}, q2={self.q2!r}, q3={self.q3!r})"


def _coerce(x):
    if isinstance(x, PauliQuaternion):
        return x
    return PauliQuaternion(x, 0j, 0j, 0j)


IDENTITY = PauliQuaternion(1 + 0j, 0j, 0j, 0j)
J = PauliQuaternion(0j, 0j, 1 + 0j, 0j)
K = PauliQuaternion(0j, 0j, 0j, 1 + 0j)
JK = PauliQuaternion(0j, 1 + 0j, 0j, 0j)


def dq_matrix(m_dd, m_dq, m_qd, m_qq):
    """Stack entries into an array of shape ``(..., 2, 2)``."""
    m_dd, m_dq, m_qd, m_qq = np.broadcast_arrays(
        *(np.asarray(v, dtype=complex) for v in (m_dd, m_dq, m_qd, m_qq))
    )
    return np.stack([np.stack([m_dd, m_dq], -1), np.stack([m_qd, m_qq], -1)], -2)


def decompose(M):
    """Pauli coefficients of a dq matrix (array of shape ``(..., 2, 2)``)."""
    M = np.asarray(M, dtype=complex)
    dd, dq, qd, qq = M[..., 0, 0], M[..., 0, 1], M[..., 1, 0], M[..., 1, 1]
    return PauliQuaternion((dd + qq) / 2, (qd + dq) / 2, (qd - dq) / 2, (dd - qq) / 2)


def recompose(q):
    """Inverse of :func:`decompose`."""
    return dq_matrix(q.q0 + q.q3, q.q1 - q.q2, q.q1 + q.q2, q.q0 - q.q3)


def q_add(a, b):
    return PauliQuaternion(a.q0 + b.q0, a.q1 + b.q1, a.q2 + b.q2, a.q3 + b.q3)


def q_scale(c, a):
    return PauliQuaternion(c * a.q0, c * a.q1, c * a.q2, c * a.q3)


def dot(z, y):
    """``Z0*Y0 + <z_vec, y_vec>`` = ``Z0Y0 + Z1Y1 - Z2Y2 + Z3Y3``."""
    return z.q0 * y.q0 + z.q1 * y.q1 - z.q2 * y.q2 + z.q3 * y.q3


def q_mul(z, y):
    """Quaternion product, identical to the dq matrix product ``Z @ Y``.

    Scalar part ``Z0Y0 + <z,y>``, vector part ``Z0*y + Y0*z + j*(z x y)``.
    """
    z0, z1, z2, z3 = z
    y0, y1, y2, y3 = y
    return PauliQuaternion(
        z0 * y0 + z1 * y1 - z2 * y2 + z3 * y3,
        z0 * y1 + z1 * y0 + z2 * y3 - z3 * y2,
        z0 * y2 + z2 * y0 + z1 * y3 - z3 * y1,
        z0 * y3 + z3 * y0 + z1 * y2 - z2 * y1,
    )


def semi_norm_sq(q):
    """``Q0^2 - Q1^2 + Q2^2 - Q3^2``; equals ``det(recompose(q))``."""
    return q.q0 * q.q0 - q.q1 * q.q1 + q.q2 * q.q2 - q.q3 * q.q3


def semi_norm(q):
    """Principal square root of :func:`semi_norm_sq`.

    The sign is a branch choice (numpy principal branch, cut along the
    negative real axis); nothing in the stability analysis depends on it.
    """
    return np.sqrt(semi_norm_sq(q) + 0j)


def magnitude_sq(q):
    """Squared magnitude of a sample on the jw axis, ``|semi_norm_sq(q)|``."""
    return np.abs(semi_norm_sq(q))


def q_inverse(q, omega=None):
    """Inverse quaternion ``(Q0, -Q1, -Q2, -Q3) / semi_norm_sq(q)``.

    Raises :class:`SingularQuaternion` where ``|semi_norm_sq|`` falls below
    ``1e-14 * max|Qi|^2``; ``omega`` (if given) is reported with the error.
    """
    n = semi_norm_sq(q)
    scale = np.max(np.abs(np.stack(np.broadcast_arrays(*(np.asarray(c) for c in q)))), axis=0) ** 2
    bad = np.abs(n) <= SINGULAR_RTOL * scale
    if np.any(bad):
        where = None
        if omega is not None:
            where = np.ravel(np.broadcast_to(omega, np.shape(bad))[bad])[0] if np.ndim(bad) else omega
        raise SingularQuaternion(
            "singular dq matrix" + ("" if where is None else f" at omega = {where:.6g} rad/s"),
            omega=where,
        )
    return PauliQuaternion(q.q0 / n, -q.q1 / n, -q.q2 / n, -q.q3 / n)


def re_operator():
    """Matrix form of Re{.}: ``(I + K)/2`` maps ``[i_d, i_q]`` to ``[i_d, 0]``."""
    return PauliQuaternion(0.5 + 0j, 0j, 0j, 0.5 + 0j)


def im_operator():
    """Matrix form of Im{.}: ``J(K - I)/2`` maps ``[i_d, i_q]`` to ``[i_q, 0]``."""
    return PauliQuaternion(0j, 0.5 + 0j, -0.5 + 0j, 0j)


def is_mfd(q, rtol=1e-12):
    """True where the sample is mirror-frequency decoupled (Q1 = Q3 = 0)."""
    scale = np.maximum(np.abs(q.q0), np.abs(q.q2))
    tol = rtol * np.where(scale > 0, scale, 1.0)
    return (np.abs(q.q1) <= tol) & (np.abs(q.q3) <= tol)


# -- quaternion-valued elements ---------------------------------------------


class QuaternionElement:
    """A map from complex frequency ``s`` to a :class:`PauliQuaternion`."""

    def __init__(self, fn, name=None):
        self._fn = fn
        self.name = name

    def __call__(self, s):
        return self.evaluate(s)

    def evaluate(self, s):
        s = np.asarray(s, dtype=complex) if np.ndim(s) else complex(s)
        return self._fn(s)

    def __repr__(self):
        return f"QuaternionElement({self.name or self._fn!r})"

    @classmethod
    def components(cls, q0=0.0, q1=0.0, q2=0.0, q3=0.0, name=None):
        """Build from four scalar elements (or constants)."""
        parts = [as_element(c) for c in (q0, q1, q2, q3)]

        def fn(s):
            zero = np.zeros_like(s) if np.ndim(s) else 0j
            return PauliQuaternion(*(p(s) + zero for p in parts))

        return cls(fn, name)

    @classmethod
    def scalar(cls, h, name=None):
        return cls.components(h, 0.0, 0.0, 0.0, name=name)

    @classmethod
    def constant(cls, q, name=None):
        def fn(s):
            zero = np.zeros_like(s) if np.ndim(s) else 0j
            return PauliQuaternion(*(c + zero for c in q))

        return cls(fn, name)

    def __add__(self, other):
        other = _as_qelement(other)
        return QuaternionElement(lambda s: q_add(self._fn(s), other._fn(s)))

    __radd__ = __add__

    def __neg__(self):
        return QuaternionElement(lambda s: q_scale(-1, self._fn(s)))

    def __sub__(self, other):
        return self + (-_as_qelement(other))

    def __rsub__(self, other):
        return _as_qelement(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, Number):
            return QuaternionElement(lambda s: q_scale(other, self._fn(s)))
        other = _as_qelement(other)
        return QuaternionElement(lambda s: q_mul(self._fn(s), other._fn(s)))

    def __rmul__(self, other):
        if isinstance(other, Number):
            return QuaternionElement(lambda s: q_scale(other, self._fn(s)))
        return _as_qelement(other) * self

    def inverse(self):
        return QuaternionElement(lambda s: q_inverse(self._fn(s), omega=np.imag(s)))


def _as_qelement(x):
    if isinstance(x, QuaternionElement):
        return x
    if isinstance(x, PauliQuaternion):
        return QuaternionElement.constant(x)
    if isinstance(x, (TransferElement, Number)):
        return QuaternionElement.scalar(x)
    raise TypeError(f"cannot make a quaternion element from {type(x).__name__}")


def frequency_shift(h, omega1):
    """dq-frame matrix equivalent of ``h`` evaluated at ``s -> s*I + J*omega1``.

    ``Q0(s) = (h(s + j w1) + h(s - j w1)) / 2`` and
    ``Q2(s) = (h(s + j w1) - h(s - j w1)) / 2j``; ``Q1 = Q3 = 0``.
    """
    h = as_element(h)
    w1 = float(omega1)

    def fn(s):
        hp = h(s + 1j * w1)
        hm = h(s - 1j * w1)
        zero = np.zeros_like(hp)
        return PauliQuaternion((hp + hm) / 2, zero, (hp - hm) / 2j, zero)

    return QuaternionElement(fn, name="frequency_shift")


class FrequencyResponseSet:
    """Quaternion samples on a fixed :class:`~paulistab.freqresp.FrequencyGrid`.

    Behaves like a :class:`QuaternionElement` but can only be evaluated on
    its own grid points (no interpolation).
    """

    def __init__(self, grid, q, name=None):
        self.grid = grid
        self.q = PauliQuaternion(*(np.asarray(c, dtype=complex) for c in q))
        self.name = name
        if any(np.shape(c) != (len(grid),) for c in self.q):
            raise ValueError("sample count does not match the grid")

    @classmethod
    def from_matrices(cls, grid, M, name=None):
        return cls(grid, decompose(M), name)

    @classmethod
    def sample(cls, element, grid, name=None):
        return cls(grid, element(grid.s), name or getattr(element, "name", None))

    def matrices(self):
        return recompose(self.q)

    def __len__(self):
        return len(self.grid)

    def __call__(self, s):
        return self.evaluate(s)

    def evaluate(self, s):
        w = np.imag(np.atleast_1d(s))
        if np.any(np.real(np.atleast_1d(s)) != 0):
            raise ValueError("sampled responses exist on the imaginary axis only")
        g = self.grid.omega
        hi = np.clip(np.searchsorted(g, w), 0, len(g) - 1)
        lo = np.clip(hi - 1, 0, len(g) - 1)
        idx = np.where(np.abs(g[lo] - w) < np.abs(g[hi] - w), lo, hi)
        if not np.allclose(self.grid.omega[idx], w, rtol=1e-12, atol=0):
            raise ValueError("frequency not on the sampled grid")
        out = self.q[idx]
        return out if np.ndim(s) else out[0]
