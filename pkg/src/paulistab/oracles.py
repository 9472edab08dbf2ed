"""Independent checks: direct 2x2 matrix algebra and a state-space model.

Nothing here uses the quaternion code.  The 2x2 routines work on arrays of
shape ``(..., 2, 2)``.  :func:`closed_loop_eigs` assembles the linearised
converter, grid and controller in the dq frame with a Pade delay and returns
the closed-loop spectrum, which stands in for a time-domain simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .converter import solve_operating_point
from .errors import AssemblyError, InvalidRange, PauliStabError, Singular
from .freqresp import Rational

SINGULAR_RTOL = 1e-14
RESIDUAL_RTOL = 1e-8


# -- direct 2x2 algebra ------------------------------------------------------


def _m(M):
    M = np.asarray(M, dtype=complex)
    if M.shape[-2:] != (2, 2):
        raise ValueError(f"expected (..., 2, 2) array, got shape {M.shape}")
    return M


def matrix_det2(M):
    M = _m(M)
    return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]


def matrix_trace2(M):
    M = _m(M)
    return M[..., 0, 0] + M[..., 1, 1]


def matrix_eig2(M):
    """Roots of ``lam^2 - tr lam + det``, cancellation-safe.

    The larger-magnitude root comes from ``(tr + sign * sqrt(disc)) / 2`` with
    the sign chosen to avoid cancellation; the other is ``det / lam1``.
    """
    M = _m(M)
    tr = matrix_trace2(M)
    det = matrix_det2(M)
    r = np.sqrt(tr * tr - 4 * det)
    sign = np.where(np.real(np.conj(tr) * r) >= 0, 1.0, -1.0)
    big = (tr + sign * r) / 2
    safe = np.where(big == 0, 1.0, big)
    small = np.where(big == 0, 0.0, det / safe)
    return big, small


def matrix_mul2(A, B):
    A, B = _m(A), _m(B)
    out = np.empty(np.broadcast_shapes(A.shape, B.shape), dtype=complex)
    for i in range(2):
        for k in range(2):
            out[..., i, k] = A[..., i, 0] * B[..., 0, k] + A[..., i, 1] * B[..., 1, k]
    return out


def matrix_inv2(M):
    """Adjugate over determinant; :class:`Singular` when ``|det|`` is tiny."""
    M = _m(M)
    det = matrix_det2(M)
    scale = np.max(np.abs(M).reshape(M.shape[:-2] + (4,)), axis=-1) ** 2
    if np.any(np.abs(det) <= SINGULAR_RTOL * scale):
        raise Singular("matrix is singular to working precision")
    out = np.empty_like(M)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 1, 1] = M[..., 0, 0]
    out[..., 0, 1] = -M[..., 0, 1]
    out[..., 1, 0] = -M[..., 1, 0]
    return out / det[..., None, None]


# -- Pade delay --------------------------------------------------------------


def pade_coefficients(T, order=4):
    """``(num, den)`` in descending powers of ``s`` for the diagonal Pade
    approximation of ``exp(-s T)``."""
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise InvalidRange(f"Pade order must be an integer >= 1, got {order!r}")
    if T < 0:
        raise InvalidRange("delay must be >= 0")
    n = int(order)
    c = [
        math.factorial(2 * n - k) * math.factorial(n)
        / (math.factorial(2 * n) * math.factorial(k) * math.factorial(n - k))
        for k in range(n + 1)
    ]
    den = [ck * T**k for k, ck in enumerate(c)]
    num = [ck * (-T) ** k for k, ck in enumerate(c)]
    return tuple(reversed(num)), tuple(reversed(den))


def pade_delay(T, order=4):
    """Diagonal Pade approximation of ``exp(-s T)`` as a transfer element."""
    num, den = pade_coefficients(T, order)
    return Rational(num, den)


def _pade_state_space(T, order):
    """Controllable-canonical realisation ``(A, B, C, D)`` of the Pade delay."""
    num, den = pade_coefficients(T, order)
    den = np.array(den) / den[0]
    num = np.array(num) / pade_coefficients(T, order)[1][0]
    n = len(den) - 1
    D = num[0]
    # strictly proper remainder
    b = num[1:] - D * den[1:]
    A = np.zeros((n, n))
    A[0, :] = -den[1:]
    A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    C = b.reshape(1, n)
    return A, B, C, np.array([[D]])


# -- closed-loop state-space model -------------------------------------------


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise AssemblyError(f"A must be square, got {A.shape}")
        B = np.asarray(self.B, dtype=float).reshape(n, -1) if np.size(self.B) else np.zeros((n, 0))
        C = np.asarray(self.C, dtype=float)
        C = C.reshape(-1, n) if C.size else np.zeros((0, n))
        D = np.asarray(self.D, dtype=float)
        D = D.reshape(C.shape[0], B.shape[1]) if D.size else np.zeros((C.shape[0], B.shape[1]))
        if np.shape(self.B)[0:1] not in ((n,), ()) and np.size(self.B):
            raise AssemblyError("B row count differs from the state dimension")
        for name, val in (("A", A), ("B", B), ("C", C), ("D", D)):
            object.__setattr__(self, name, val)

    @property
    def n(self):
        return self.A.shape[0]

    def eigenvalues(self):
        """Spectrum of ``A`` with the residual of every pair checked."""
        lam, V = np.linalg.eig(self.A)
        norm = np.linalg.norm(self.A, 2)
        res = np.linalg.norm(self.A @ V - V * lam, axis=0) / np.linalg.norm(V, axis=0)
        if np.any(res > RESIDUAL_RTOL * max(norm, 1.0)):
            raise PauliStabError("eigen-decomposition residual above tolerance")
        return lam[np.argsort(-lam.real, kind="stable")]


_J = np.array([[0.0, -1.0], [1.0, 0.0]])
_I2 = np.eye(2)


def _rot(theta):
    return math.cos(theta) * _I2 + math.sin(theta) * _J


class _Assembler:
    """Index bookkeeping for named state blocks."""

    def __init__(self, blocks):
        self.slices = {}
        k = 0
        for name, size in blocks:
            self.slices[name] = slice(k, k + size)
            k += size
        self.n = k
        self.A = np.zeros((k, k))

    def add(self, row, col, block):
        r, c = self.slices[row], self.slices[col]
        block = np.atleast_2d(block)
        if block.shape != (r.stop - r.start, c.stop - c.start):
            raise AssemblyError(f"block {row}<-{col} has shape {block.shape}")
        self.A[r, c] += block


def closed_loop_state_space(p, g, pade_order=4, connect_converter=True, u1_reference="controller"):
    """Linearised converter + grid around the steady state, in the PLL frame.

    States: filter current ``i``, grid inductor current ``iL``, PCC voltage
    ``v``, current-controller integrators ``x``, PLL angle ``theta`` and
    integrator ``xp``, and a Pade realisation of the delay per dq axis.

    Perturbation equations (source voltage held fixed)::

        e      = v_q - V1 theta
        theta' = Kp_pll e + xp,        xp' = Ki_pll e
        u      = -Kp_cc (i - J I1 theta) + x + w1 L J i + v + J U1 theta
        x'     = -Ki_cc (i - J I1 theta)
        vo     = R(-w1 Td) Pade(u)
        L i'   = vo - v - R i - w1 L J i
        Lg iL' = v - Rg iL - w1 Lg J iL
        Cg v'  = i - iL - w1 Cg J v

    ``iL`` flows from the PCC into the source.  ``U1`` comes from
    :func:`~paulistab.converter.solve_operating_point` with the given
    ``u1_reference``.
    """
    p.validate()
    g.validate()
    w1 = p.omega1
    n = int(pade_order)
    if n < 1:
        raise InvalidRange("Pade order must be >= 1")
    op = solve_operating_point(p, g, u1_reference)
    I1 = np.array([op.I1_d, op.I1_q])
    U1 = np.array([op.U1_d, op.U1_q])

    blocks = [("iL", 2), ("v", 2)]
    if connect_converter:
        blocks += [("i", 2), ("x", 2), ("th", 1), ("xp", 1), ("dd", n), ("dq", n)]
    asm = _Assembler(blocks)

    # grid
    asm.add("iL", "v", _I2 / g.Lg)
    asm.add("iL", "iL", -(g.Rg * _I2 + w1 * g.Lg * _J) / g.Lg)
    asm.add("v", "iL", -_I2 / g.Cg)
    asm.add("v", "v", -w1 * _J)
    if not connect_converter:
        # converter removed: the PCC sees only the grid
        return StateSpaceModel(asm.A, np.zeros((asm.n, 0)), np.zeros((0, asm.n)), np.zeros((0, 0)), tuple(asm.slices))

    asm.add("v", "i", _I2 / g.Cg)
    asm.add("i", "v", -_I2 / p.L)
    asm.add("i", "i", -(p.R * _I2 + w1 * p.L * _J) / p.L)

    # PLL: e = v_q - V1 theta
    e_v = np.array([[0.0, 1.0]])
    e_th = -p.V1
    asm.add("th", "v", p.kp_pll * e_v)
    asm.add("th", "th", p.kp_pll * e_th)
    asm.add("th", "xp", 1.0)
    asm.add("xp", "v", p.ki_pll * e_v)
    asm.add("xp", "th", p.ki_pll * e_th)

    # controller output u as a linear map of the states:
    # u = -Kp (i - J I1 theta) + x + w1 L J i + v + J U1 theta
    jI1 = (_J @ I1).reshape(2, 1)
    jU1 = (_J @ U1).reshape(2, 1)
    u_from = {
        "i": -p.kp_cc * _I2 + w1 * p.L * _J,
        "x": _I2,
        "v": _I2,
        "th": p.kp_cc * jI1 + jU1,
    }
    # x' = -Ki (i - J I1 theta)
    asm.add("x", "i", -p.ki_cc * _I2)
    asm.add("x", "th", p.ki_cc * jI1)

    # delay per axis: d' = Ad d + Bd u_k, delayed u_k = Cd d + Dd u_k
    Ad, Bd, Cd, Dd = _pade_state_space(p.Td, n)
    rot = _rot(-w1 * p.Td)
    for k, dn in enumerate(("dd", "dq")):
        asm.add(dn, dn, Ad)
        axis = rot[:, k : k + 1]
        # vo = R(-w1 Td) delayed(u) enters L i' = vo - ...
        asm.add("i", dn, axis @ Cd / p.L)
        for src, gain in u_from.items():
            row = gain[k : k + 1, :]
            asm.add(dn, src, Bd @ row)
            asm.add("i", src, axis @ (Dd @ row) / p.L)

    return StateSpaceModel(asm.A, np.zeros((asm.n, 0)), np.zeros((0, asm.n)), np.zeros((0, 0)), tuple(asm.slices))


def closed_loop_eigs(p, g, pade_order=4, connect_converter=True, u1_reference="controller"):
    """Closed-loop eigenvalues (rad/s), sorted by descending real part."""
    return closed_loop_state_space(p, g, pade_order, connect_converter, u1_reference).eigenvalues()
