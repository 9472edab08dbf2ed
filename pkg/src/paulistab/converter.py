"""Analytic dq-frame admittance of a grid-following converter and its grid.

The converter has an L filter, a lumped control delay, a PI current
controller with decoupling and grid-voltage feed-forward, and a PLL.  Its
admittance maps a PCC voltage perturbation to the injected current:

    Y_c = (Z_f + Z_cc)^-1 (-I + G_ff + G_pll + G_cc)
        = -Y_o + Y_ff + Y_pll + Y_cc

Every block is a :class:`~paulistab.pauli.QuaternionElement`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidRange, Unsolvable, ValidationError
from .freqresp import Rational, delay, pi_controller, rl
from .pauli import PauliQuaternion, QuaternionElement, frequency_shift, im_operator


@dataclass(frozen=True)
class ConverterParams:
    V1: float  # grid voltage amplitude, V
    omega1: float  # rad/s
    L: float  # filter inductance, H
    Td: float  # control delay, s
    kp_cc: float  # ohm
    ki_cc: float  # ohm/s
    kp_pll: float  # rad/s per V
    ki_pll: float  # rad/s^2 per V
    i1_d: float  # A
    i1_q: float = 0.0
    R: float = 0.0  # filter resistance, ohm

    def validate(self):
        if not self.L > 0:
            raise ValidationError("L", "must be > 0")
        if not self.Td >= 0:
            raise ValidationError("Td", "must be >= 0")
        if not self.V1 > 0:
            raise ValidationError("V1", "must be > 0")
        if not self.omega1 > 0:
            raise ValidationError("omega1", "must be > 0")
        if not self.R >= 0:
            raise ValidationError("R", "must be >= 0")
        return self


@dataclass(frozen=True)
class GridParams:
    Lg: float
    Cg: float
    Rg: float = 0.0

    def validate(self):
        if not self.Lg > 0:
            raise ValidationError("Lg", "must be > 0")
        if not self.Cg > 0:
            raise ValidationError("Cg", "must be > 0")
        if not self.Rg >= 0:
            raise ValidationError("Rg", "must be >= 0")
        return self


@dataclass(frozen=True)
class OperatingPoint:
    """Steady state in the PLL frame (``Vc_q == 0``).

    ``U1`` is the voltage the PLL angle perturbation rotates; ``Vo`` is the
    converter terminal voltage.
    """

    U1_d: float
    U1_q: float
    Vc_d: float
    Vc_q: float
    I1_d: float
    I1_q: float
    Vo_d: float = 0.0
    Vo_q: float = 0.0
    grid_angle: float = 0.0  # angle of the source voltage in the PLL frame, rad


REFERENCE_CONVERTER = ConverterParams(
    V1=326.0,
    omega1=2 * math.pi * 50.0,
    L=3e-3,
    Td=150e-6,
    kp_cc=16.0,
    ki_cc=600.0,
    kp_pll=18.07,
    ki_pll=27708.0,
    i1_d=15.0,
    i1_q=0.0,
)
REFERENCE_GRID = GridParams(Lg=5e-3, Cg=20e-6)

# PLL bandwidth that the reference gains correspond to, Hz
PLL_REFERENCE_BANDWIDTH = 330.0


def filter_impedance(p):
    """``(R + sL) I + J w1 L``."""
    return QuaternionElement.components(rl(p.R, p.L), 0.0, p.omega1 * p.L, 0.0, name="Z_f")


def delay_model(p):
    """``exp(-J w1 Td) exp(-s Td)``: ``Q0 = e^{-sTd} cos(w1 Td)``, ``Q2 = -e^{-sTd} sin(w1 Td)``."""
    d = delay(p.Td)
    theta = p.omega1 * p.Td
    return QuaternionElement.components(
        math.cos(theta) * d, 0.0, -math.sin(theta) * d, 0.0, name="D"
    )


def cc_tf(p):
    return pi_controller(p.kp_cc, p.ki_cc)


def cc_impedance(p):
    """``D(s) [CC(s) I - J w1 L]``."""
    inner = QuaternionElement.components(cc_tf(p), 0.0, -p.omega1 * p.L, 0.0)
    z = delay_model(p) * inner
    z.name = "Z_cc"
    return z


def pll_tf(p):
    """Linearised PLL, angle per q-axis voltage:

    ``(Kp + Ki/s) / (s + V1 (Kp + Ki/s))`` = ``(Kp s + Ki) / (s^2 + V1 Kp s + V1 Ki)``.
    """
    return Rational((p.kp_pll, p.ki_pll), (1.0, p.V1 * p.kp_pll, p.V1 * p.ki_pll))


def _j_pll(p):
    return QuaternionElement.components(0.0, 0.0, pll_tf(p), 0.0)


def pll_admittance_path(p, op):
    """``G_pll = D U1 J PLL(s) Im``."""
    u1 = PauliQuaternion(op.U1_d, 0.0, op.U1_q, 0.0)
    g = delay_model(p) * u1 * _j_pll(p) * im_operator()
    g.name = "G_pll"
    return g


def cc_pll_cross_path(p, op):
    """``G_cc = D CC(s) I1 J PLL(s) Im``."""
    i1 = PauliQuaternion(op.I1_d, 0.0, op.I1_q, 0.0)
    g = delay_model(p) * QuaternionElement.scalar(cc_tf(p)) * i1 * _j_pll(p) * im_operator()
    g.name = "G_cc"
    return g


def feedforward_path(p):
    g = delay_model(p)
    g.name = "G_ff"
    return g


@dataclass(eq=False)
class ConverterAdmittance:
    """The admittance and its four additive parts.

    ``total`` maps the PCC voltage to the current injected into the grid
    (``-y_o + y_ff + y_pll + y_cc``).
    """

    total: QuaternionElement
    y_o: QuaternionElement
    y_ff: QuaternionElement
    y_pll: QuaternionElement
    y_cc: QuaternionElement
    params: ConverterParams
    op: OperatingPoint

    def parts(self):
        """Signed additive parts in the order ``-Y_o, Y_ff, Y_pll, Y_cc``."""
        return {"-Y_o": -self.y_o, "Y_ff": self.y_ff, "Y_pll": self.y_pll, "Y_cc": self.y_cc}

    def ycc0_factors(self, omega):
        """Per-factor complex gains of the ``Y_cc`` chain at one frequency.

        The last entry collects what remains (``Y_o``, the frame rotation and
        the Im projection) so that the product of all factors equals the
        0-order component of ``Y_cc``.
        """
        p, op = self.params, self.op
        s = 1j * omega
        d = complex(np.exp(-s * p.Td))
        cc = complex(cc_tf(p)(s))
        i1 = complex(op.I1_d, op.I1_q)
        pll = complex(pll_tf(p)(s))
        ycc0 = complex(self.y_cc(s).q0)
        known = d * cc * abs(i1) * pll
        rest = ycc0 / known if known != 0 else 0j
        return [("D", d), ("CC", cc), ("I1", complex(abs(i1))), ("PLL", pll), ("Im-path gain", rest)]


def converter_admittance(p, op):
    z_f = filter_impedance(p)
    z_cc = cc_impedance(p)
    y_o = (z_f + z_cc).inverse()
    y_ff = y_o * feedforward_path(p)
    y_pll = y_o * pll_admittance_path(p, op)
    y_cc = y_o * cc_pll_cross_path(p, op)
    total = -y_o + y_ff + y_pll + y_cc
    for el, nm in ((y_o, "Y_o"), (y_ff, "Y_ff"), (y_pll, "Y_pll"), (y_cc, "Y_cc"), (total, "Y_c")):
        el.name = nm
    return ConverterAdmittance(total, y_o, y_ff, y_pll, y_cc, p, op)


def grid_scalar_impedance(g):
    """``[(Rg + s Lg)^-1 + s Cg]^-1`` as one rational function."""
    return Rational((g.Lg, g.Rg), (g.Lg * g.Cg, g.Rg * g.Cg, 1.0))


def grid_impedance(g, omega1):
    z = frequency_shift(grid_scalar_impedance(g), omega1)
    z.name = "Z_g"
    return z


def solve_operating_point(p, g, u1_reference="controller"):
    """Phasor steady state at the fundamental, expressed in the PLL frame.

    KCL at the PCC: ``(Vg - Vc)/(Rg + j w1 Lg) + I1 = j w1 Cg Vc`` with
    ``|Vg| = V1`` and ``Vc`` real.  The converter terminal voltage is
    ``Vo = Vc + (R + j w1 L) I1``.

    ``u1_reference`` selects the voltage rotated by the PLL angle:
    ``"controller"`` (default) uses the current controller's own steady-state
    output ``Vo - Vc``; ``"terminal"`` uses ``Vo``.
    """
    w1 = p.omega1
    i1 = complex(p.i1_d, p.i1_q)
    zl = complex(g.Rg, w1 * g.Lg)
    a = 1 + 1j * w1 * g.Cg * zl
    b = i1 * zl
    # |a Vc - b|^2 = V1^2, quadratic in real Vc
    qa = abs(a) ** 2
    qb = -2 * (a * b.conjugate()).real
    qc = abs(b) ** 2 - p.V1**2
    disc = qb * qb - 4 * qa * qc
    if qa == 0 or disc < 0:
        raise Unsolvable("no real PCC voltage satisfies the fundamental-frequency KCL")
    vc = (-qb + math.sqrt(disc)) / (2 * qa)
    if vc <= 0:
        raise Unsolvable("operating point has non-positive PCC voltage")
    vg = a * vc - b
    vo = vc + complex(p.R, w1 * p.L) * i1
    if u1_reference == "controller":
        u1 = vo - vc
    elif u1_reference == "terminal":
        u1 = vo
    else:
        raise ValueError(f"unknown u1_reference {u1_reference!r}")
    return OperatingPoint(
        U1_d=u1.real,
        U1_q=u1.imag,
        Vc_d=vc,
        Vc_q=0.0,
        I1_d=p.i1_d,
        I1_q=p.i1_q,
        Vo_d=vo.real,
        Vo_q=vo.imag,
        grid_angle=math.atan2(vg.imag, vg.real),
    )


def retune_pll_bandwidth(p, f_bw, f_ref=PLL_REFERENCE_BANDWIDTH):
    """Scale PLL gains to a new bandwidth keeping the damping ratio.

    ``Kp' = Kp (f_bw/f_ref)``, ``Ki' = Ki (f_bw/f_ref)^2``.
    """
    if not f_bw > 0:
        raise InvalidRange(f"PLL bandwidth must be > 0, got {f_bw}")
    k = f_bw / f_ref
    return replace(p, kp_pll=p.kp_pll * k, ki_pll=p.ki_pll * k * k)


def pll_damping(p):
    """Damping ratio of ``s^2 + V1 Kp s + V1 Ki``."""
    return p.V1 * p.kp_pll / (2 * math.sqrt(p.V1 * p.ki_pll))


@dataclass(eq=False)
class MinorLoopModels:
    """Grid impedance and loop admittance ready for the minor loop.

    ``admittance.total`` maps the PCC voltage to the current injected into
    the grid, and the PCC voltage is ``Z_g`` times that current, so the loop
    closes through ``det(I - Z_g Y_c)``.  ``y`` is therefore ``-Y_c``, which
    puts the loop in the ``det(I + z y)`` form used by the stability engine.
    """

    z: QuaternionElement
    y: QuaternionElement
    admittance: ConverterAdmittance
    op: OperatingPoint


def build_minor_loop(p, g, u1_reference="controller"):
    p.validate()
    g.validate()
    op = solve_operating_point(p, g, u1_reference)
    adm = converter_admittance(p, op)
    y = -adm.total
    y.name = "-Y_c"
    return MinorLoopModels(grid_impedance(g, p.omega1), y, adm, op)
