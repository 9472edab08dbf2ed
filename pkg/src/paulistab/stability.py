"""Minor-loop stability assessment and root-cause contributions.

With grid impedance ``z`` and converter admittance ``y`` (both quaternions)
the minor loop is ``L = z*y`` and the characteristic equation is

    L(s) = det(I + L) = 1 + 2<z, y> + ||z||^2 ||y||^2.

At a critical frequency ``w_c`` it splits into admittance-component terms

    L(j w_c) = 1 + l0 + l1 + l2 + l3,
    l0 =  2 Z0 Y0 + Y0^2 ||z||^2      l1 =  2 Z1 Y1 - Y1^2 ||z||^2
    l2 = -2 Z2 Y2 + Y2^2 ||z||^2      l3 =  2 Z3 Y3 - Y3^2 ||z||^2
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import PauliStabError, UnderResolved
from .freqresp import FrequencyGrid, refine_around, sweep
from .pauli import (
    FrequencyResponseSet,
    PauliQuaternion,
    dot,
    q_add,
    q_mul,
    semi_norm_sq,
)

RHP_ASSUMPTION = (
    "encirclement count assumes no open-loop right-half-plane poles in the grid "
    "impedance or the converter admittance; imaginary-axis poles are indented "
    "to the right"
)

# largest phase step between consecutive samples accepted by the winding count
MAX_PHASE_STEP = math.pi / 2
MARGINAL_RTOL = 1e-3


@dataclass(frozen=True)
class MinorLoopSample:
    omega: float
    L: PauliQuaternion
    L_char: complex
    lam1: complex
    lam2: complex
    mag_db: float
    phase_deg: float


@dataclass(eq=False)
class MinorLoopTrace:
    """Minor-loop quantities on a frequency grid (all arrays)."""

    grid: FrequencyGrid
    z: PauliQuaternion
    y: PauliQuaternion
    L: PauliQuaternion
    L_char: np.ndarray
    lam1: np.ndarray
    lam2: np.ndarray

    @property
    def omega(self):
        return self.grid.omega

    @property
    def f_hz(self):
        return self.grid.hz

    @property
    def mag_db(self):
        # |1 + L|^2 = |semi_norm_sq(1 + L)| = |L_char|
        return 10 * np.log10(np.abs(self.L_char))

    @property
    def phase_deg(self):
        return np.degrees(np.angle(self.L_char))

    def __len__(self):
        return len(self.grid)

    def __getitem__(self, i):
        return MinorLoopSample(
            float(self.omega[i]),
            self.L[i],
            complex(self.L_char[i]),
            complex(self.lam1[i]),
            complex(self.lam2[i]),
            float(self.mag_db[i]),
            float(self.phase_deg[i]),
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))


@dataclass
class ContributionBreakdown:
    omega_c: float
    l0: complex
    l1: complex
    l2: complex
    l3: complex
    L_at_wc: complex
    y0_components: list = field(default_factory=list)
    ycc0_factors: list = field(default_factory=list)

    @property
    def f_c(self):
        return self.omega_c / (2 * math.pi)

    @property
    def terms(self):
        return {"l0": self.l0, "l1": self.l1, "l2": self.l2, "l3": self.l3}


@dataclass
class StabilityReport:
    verdict: str
    encirclements: int
    f_c: float
    min_distance: float
    breakdown: ContributionBreakdown
    trace: MinorLoopTrace
    axis_poles: int = 0
    passivity: tuple | None = None
    assumption: str = RHP_ASSUMPTION

    @property
    def ranking(self):
        return rank_root_causes(self.breakdown)


class WindingResult(NamedTuple):
    winding: int
    raw: float
    axis_poles: int
    axis_zeros: int


def _sample(x, s):
    return sweep(x, s)


def minor_loop(z, y, grid):
    """Evaluate the minor loop of ``z`` and ``y`` on ``grid``.

    ``z`` and ``y`` may be :class:`~paulistab.pauli.QuaternionElement` or
    :class:`~paulistab.pauli.FrequencyResponseSet` (sampled on ``grid``).
    """
    s = grid.s
    zq = _sample(z, s)
    yq = _sample(y, s)
    L = q_mul(zq, yq)
    L_char = 1 + 2 * dot(zq, yq) + semi_norm_sq(zq) * semi_norm_sq(yq)
    lam1, lam2 = eigenvalues(L)
    return MinorLoopTrace(grid, zq, yq, L, np.asarray(L_char), lam1, lam2)


def characteristic(z, y):
    """``1 + 2<z,y> + ||z||^2 ||y||^2`` for quaternion samples."""
    return 1 + 2 * dot(z, y) + semi_norm_sq(z) * semi_norm_sq(y)


def characteristic_via_loop(L):
    """``||1 + L||^2`` for a loop quaternion ``L``."""
    return semi_norm_sq(q_add(L, PauliQuaternion(1.0, 0.0, 0.0, 0.0)))


def eigenvalues(L):
    """Roots of ``lam^2 - 2 L0 lam + ||L||^2 = 0``, i.e. ``L0 +- sqrt(L1^2 - L2^2 + L3^2)``."""
    r = np.sqrt(L.q1 * L.q1 - L.q2 * L.q2 + L.q3 * L.q3 + 0j)
    return L.q0 + r, L.q0 - r


def passivity_index(y, grid):
    """``rho_min = Re Y0 - sqrt(Re Y1^2 + Im Y2^2 + Re Y3^2)`` per frequency.

    Returns ``(omega, rho)`` arrays.
    """
    yq = _sample(y, grid.s)
    rho = np.real(yq.q0) - np.sqrt(np.real(yq.q1) ** 2 + np.imag(yq.q2) ** 2 + np.real(yq.q3) ** 2)
    return grid.omega, np.asarray(rho, dtype=float)


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def winding_number(omega, l_char, evaluate=None, pole_gain=10.0):
    """Signed winding of ``L(jw)`` about the origin over the full jw axis.

    The negative-frequency half is the complex conjugate of the sampled
    half.  Phase steps above 90 degrees are resolved by bisection when an
    ``evaluate(omega) -> L`` callable is given.  A step that stays
    discontinuous down to a vanishing interval is an imaginary-axis pole
    (counted as a clockwise half-turn around a rightward indentation) when
    the magnitude blows up, or an imaginary-axis zero when it vanishes.
    Without ``evaluate``, a step of at least 150 degrees whose two end
    samples both exceed ``pole_gain`` times the median magnitude is taken as
    a pole crossing; anything else raises :class:`UnderResolved`.
    """
    omega = np.asarray(omega, dtype=float)
    l_char = np.asarray(l_char, dtype=complex)
    ang = np.angle(l_char)
    steps = _wrap(np.diff(ang))
    median = float(np.median(np.abs(l_char)))
    poles = zeros = 0
    for i in np.nonzero(np.abs(steps) > MAX_PHASE_STEP)[0]:
        wa, wb = omega[i], omega[i + 1]
        la, lb = l_char[i], l_char[i + 1]
        if evaluate is not None:
            step, np_, nz = _resolve(evaluate, wa, wb, la, lb, median)
        else:
            big = min(abs(la), abs(lb)) > pole_gain * median
            if abs(steps[i]) >= np.radians(150) and big:
                step, np_, nz = _pole_step(steps[i]), 1, 0
            else:
                raise UnderResolved(
                    f"phase step of {np.degrees(abs(steps[i])):.1f} deg between "
                    f"{wa / 2 / np.pi:.6g} and {wb / 2 / np.pi:.6g} Hz",
                    omega=wa,
                )
        steps[i] = step
        poles += np_
        zeros += nz
    total = 2 * steps.sum() + _wrap(2 * ang[0]) + _wrap(-2 * ang[-1])
    raw = total / (2 * np.pi)
    return WindingResult(int(round(raw)), float(raw), poles, zeros)


def _pole_step(step):
    # rightward indentation around a simple pole turns the image clockwise
    return step - 2 * np.pi if step > 0 else step


def _resolve(evaluate, wa, wb, la, lb, median, depth=0):
    """Accumulated phase change from ``wa`` to ``wb`` with adaptive bisection."""
    step = _wrap(np.angle(lb) - np.angle(la))
    if abs(step) <= MAX_PHASE_STEP:
        return step, 0, 0
    if (wb - wa) <= 1e-12 * wb or depth > 80:
        if min(abs(la), abs(lb)) > 1e3 * max(median, 1e-300):
            return _pole_step(step), 1, 0
        if max(abs(la), abs(lb)) < 1e-6 * max(median, 1e-300):
            return step, 0, 1
        raise UnderResolved(f"unresolvable phase jump near {wa / 2 / np.pi:.9g} Hz", omega=wa)
    wm = 0.5 * (wa + wb)
    lm = complex(evaluate(wm))
    s1, p1, z1 = _resolve(evaluate, wa, wm, la, lm, median, depth + 1)
    s2, p2, z2 = _resolve(evaluate, wm, wb, lm, lb, median, depth + 1)
    return s1 + s2, p1 + p2, z1 + z2


def nyquist_verdict(trace, evaluate=None):
    """``(encirclements, verdict)`` for a minor-loop trace.

    ``verdict`` is ``"unstable"`` when the winding is nonzero, ``"marginal"``
    when the trace grazes the origin (or crosses it on the axis), and
    ``"stable"`` otherwise.
    """
    res = winding_number(trace.omega, trace.L_char, evaluate)
    return res.winding, _verdict(res, trace.L_char)


def _verdict(res, l_char):
    mags = np.abs(l_char)
    if res.axis_zeros or mags.min() < MARGINAL_RTOL * (1 + np.median(mags)):
        return "marginal"
    return "unstable" if res.winding != 0 else "stable"


def critical_frequency(trace, method="min_distance"):
    """``(f_c, min_distance)`` in Hz.

    ``"min_distance"`` (default) takes the sample closest to the origin,
    lowest frequency on ties.  ``"phase_crossing"`` takes the crossing of
    the negative real axis (phase of +-180 degrees) nearest to the origin,
    linearly interpolated between samples; poles on the axis are skipped.
    """
    mags = np.abs(trace.L_char)
    if method == "min_distance":
        i = int(np.argmin(mags))
        return float(trace.f_hz[i]), float(mags[i])
    if method == "phase_crossing":
        f = phase_crossings(trace.f_hz, trace.L_char)
        if not f:
            raise PauliStabError("trace never crosses the negative real axis")
        best = min(f, key=lambda t: t[1])
        return best
    raise ValueError(f"unknown method {method!r}")


def phase_crossings(f_hz, values, pole_gain=10.0):
    """Frequencies where ``values`` crosses the negative real axis.

    Returns a list of ``(f, |value|)`` pairs.
    """
    v = np.asarray(values, dtype=complex)
    med = np.median(np.abs(v))
    out = []
    for i in range(len(v) - 1):
        a, b = v[i], v[i + 1]
        if a.imag * b.imag < 0 or (b.imag == 0 and b.real < 0):
            t = a.imag / (a.imag - b.imag) if a.imag != b.imag else 1.0
            x = a + t * (b - a)
            if x.real < 0 and min(abs(a), abs(b)) < pole_gain * med:
                out.append((float(f_hz[i] + t * (f_hz[i + 1] - f_hz[i])), float(abs(x))))
    return out


def contribution_terms(zq, yq):
    """``(l0, l1, l2, l3)`` for quaternion samples ``z`` and ``y``."""
    nz = semi_norm_sq(zq)
    return (
        2 * zq.q0 * yq.q0 + yq.q0**2 * nz,
        2 * zq.q1 * yq.q1 - yq.q1**2 * nz,
        -2 * zq.q2 * yq.q2 + yq.q2**2 * nz,
        2 * zq.q3 * yq.q3 - yq.q3**2 * nz,
    )


def contributions(z, y, omega_c, admittance=None):
    """Split ``L(j w_c)`` into the four admittance-component terms.

    When the converter ``admittance`` (a
    :class:`~paulistab.converter.ConverterAdmittance`) is given, the 0-order
    parts of ``-Y_o, Y_ff, Y_pll, Y_cc`` and the factor chain of ``Y_cc`` at
    ``w_c`` are included.
    """
    s = 1j * omega_c
    if isinstance(z, FrequencyResponseSet) or isinstance(y, FrequencyResponseSet):
        s = np.array([s])
        zq, yq = z(s)[0], y(s)[0]
    else:
        zq, yq = z(s), y(s)
    terms = [complex(t) for t in contribution_terms(zq, yq)]
    L_at = complex(characteristic(zq, yq))
    y0 = []
    factors = []
    if admittance is not None:
        y0 = [(name, complex(part(s).q0)) for name, part in admittance.parts().items()]
        factors = admittance.ycc0_factors(omega_c)
    return ContributionBreakdown(float(omega_c), *terms, L_at, y0, factors)


def rank_root_causes(b, threshold=0.0):
    """Contribution terms sorted by magnitude (descending, ties by index).

    Returns ``(name, magnitude, phase_deg)`` tuples for terms whose magnitude
    exceeds ``threshold``.
    """
    rows = [(name, abs(v), math.degrees(np.angle(v))) for name, v in b.terms.items()]
    rows = [r for r in rows if r[1] > threshold]
    return sorted(rows, key=lambda r: -r[1])


def assess(z, y, grid, refine_span=40.0, refine_points=200, admittance=None, method="min_distance"):
    """Full assessment: trace, verdict, critical frequency, contributions.

    For analytic elements the grid is refined around the coarse minimum and
    phase jumps are resolved by re-evaluation.  Sampled inputs are used as
    they are.
    """
    sampled = isinstance(z, FrequencyResponseSet) or isinstance(y, FrequencyResponseSet)
    if sampled:
        trace = minor_loop(z, y, grid)
        evaluate = None
    else:
        coarse = minor_loop(z, y, grid)
        f0, _ = critical_frequency(coarse, "min_distance")
        if refine_points and refine_span > 0 and f0 - refine_span / 2 > 0:
            grid = refine_around(grid, f0, refine_span, refine_points)
            trace = minor_loop(z, y, grid)
        else:
            trace = coarse

        def evaluate(w):
            s = 1j * w
            return characteristic(z(s), y(s))

    wres = winding_number(trace.omega, trace.L_char, evaluate)
    verdict = _verdict(wres, trace.L_char)
    f_c, dmin = critical_frequency(trace, method)
    breakdown = contributions(z, y, 2 * math.pi * f_c, admittance)
    return StabilityReport(
        verdict=verdict,
        encirclements=wres.winding,
        f_c=f_c,
        min_distance=dmin,
        breakdown=breakdown,
        trace=trace,
        axis_poles=wres.axis_poles,
    )
