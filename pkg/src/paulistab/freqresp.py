"""Scalar transfer elements and frequency grids.

A :class:`TransferElement` is anything that can be evaluated at complex
frequency ``s``.  Leaves are rational functions with real coefficients and an
optional pure delay ``exp(-s*T)``; sums, products, inverses and scalings of
elements are elements again.  Evaluation accepts scalars or numpy arrays.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from numbers import Number

import numpy as np

from .errors import InvalidRange, PoleHit

# absolute floor on |den(s)| below which evaluation is treated as a pole hit
POLE_FLOOR = 1e-300

THREADS_ENV = "PAULI_STAB_THREADS"


def _check_pole(den, s):
    bad = np.abs(den) < POLE_FLOOR
    if np.any(bad):
        where = np.asarray(s)[bad] if np.ndim(s) else s
        raise PoleHit(f"evaluation at a pole, s = {np.ravel(where)[0]!r}", s=where)


class TransferElement:
    """Base class; subclasses implement :meth:`_eval`."""

    def __call__(self, s):
        return self.evaluate(s)

    def evaluate(self, s):
        s = np.asarray(s, dtype=complex) if np.ndim(s) else complex(s)
        return self._eval(s)

    def _eval(self, s):
        raise NotImplementedError

    def __add__(self, other):
        return Sum((self, as_element(other)))

    def __radd__(self, other):
        return Sum((as_element(other), self))

    def __sub__(self, other):
        return Sum((self, Scaled(-1.0, as_element(other))))

    def __rsub__(self, other):
        return Sum((as_element(other), Scaled(-1.0, self)))

    def __neg__(self):
        return Scaled(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, Number):
            return Scaled(complex(other), self)
        return Product((self, as_element(other)))

    def __rmul__(self, other):
        if isinstance(other, Number):
            return Scaled(complex(other), self)
        return Product((as_element(other), self))

    def __truediv__(self, other):
        if isinstance(other, Number):
            return Scaled(1.0 / complex(other), self)
        return Product((self, Inverse(as_element(other))))

    def __rtruediv__(self, other):
        return Product((as_element(other), Inverse(self)))

    def inverse(self):
        return Inverse(self)


@dataclass(frozen=True, eq=False)
class Rational(TransferElement):
    """``num(s)/den(s) * exp(-s*delay)``, coefficients in descending powers."""

    num: tuple
    den: tuple = (1.0,)
    delay: float = 0.0

    def __post_init__(self):
        num = tuple(float(c) for c in np.atleast_1d(self.num))
        den = tuple(float(c) for c in np.atleast_1d(self.den))
        if not any(den):
            raise ValueError("denominator is the zero polynomial")
        if self.delay < 0:
            raise InvalidRange("delay must be non-negative")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "delay", float(self.delay))

    def _eval(self, s):
        den = np.polyval(self.den, s)
        _check_pole(den, s)
        val = np.polyval(self.num, s) / den
        if self.delay:
            val = val * np.exp(-s * self.delay)
        return val


@dataclass(frozen=True, eq=False)
class Sum(TransferElement):
    terms: tuple

    def _eval(self, s):
        out = self.terms[0]._eval(s)
        for t in self.terms[1:]:
            out = out + t._eval(s)
        return out


@dataclass(frozen=True, eq=False)
class Product(TransferElement):
    factors: tuple

    def _eval(self, s):
        out = self.factors[0]._eval(s)
        for f in self.factors[1:]:
            out = out * f._eval(s)
        return out


@dataclass(frozen=True, eq=False)
class Inverse(TransferElement):
    inner: TransferElement

    def _eval(self, s):
        val = self.inner._eval(s)
        _check_pole(val, s)
        return 1.0 / val


@dataclass(frozen=True, eq=False)
class Scaled(TransferElement):
    gain: complex
    inner: TransferElement

    def _eval(self, s):
        return self.gain * self.inner._eval(s)


def as_element(x):
    if isinstance(x, TransferElement):
        return x
    if isinstance(x, Number):
        if isinstance(x, complex) and x.imag != 0:
            return Scaled(x, Rational((1.0,)))
        return Rational((float(np.real(x)),))
    raise TypeError(f"cannot make a transfer element from {type(x).__name__}")


def constant(value):
    return as_element(value)


def delay(seconds):
    """Pure delay ``exp(-s*seconds)``, kept exact."""
    return Rational((1.0,), (1.0,), seconds)


def rl(R, L):
    """Series R-L impedance ``R + sL``."""
    return Rational((L, R))


def pi_controller(kp, ki):
    """``kp + ki/s``."""
    return Rational((kp, ki), (1.0, 0.0))


def evaluate(e, s):
    """Evaluate element ``e`` at ``s``; raises :class:`PoleHit` on a pole."""
    return as_element(e).evaluate(s)


# -- frequency grids ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Strictly increasing, positive angular frequencies in rad/s."""

    omega: np.ndarray

    def __post_init__(self):
        w = np.array(self.omega, dtype=float).ravel()
        if w.size == 0:
            raise InvalidRange("frequency grid is empty")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise InvalidRange("grid frequencies must be finite and > 0")
        if np.any(np.diff(w) <= 0):
            raise InvalidRange("grid must be strictly increasing")
        w.setflags(write=False)
        object.__setattr__(self, "omega", w)

    @classmethod
    def from_hz(cls, f_hz):
        return cls(2 * np.pi * np.asarray(f_hz, dtype=float))

    @property
    def hz(self):
        return self.omega / (2 * np.pi)

    @property
    def s(self):
        return 1j * self.omega

    def __len__(self):
        return self.omega.size

    def __iter__(self):
        return iter(self.omega)


def make_log_grid(f_min, f_max, points_per_decade):
    """Logarithmic grid in Hz from ``f_min`` to ``f_max``, both included."""
    if not (0 < f_min < f_max) or points_per_decade < 1:
        raise InvalidRange(
            f"need 0 < f_min < f_max and points_per_decade >= 1, "
            f"got ({f_min}, {f_max}, {points_per_decade})"
        )
    decades = np.log10(f_max / f_min)
    n = max(int(np.ceil(decades * points_per_decade - 1e-9)), 1)
    f = np.logspace(np.log10(f_min), np.log10(f_max), n + 1)
    f[0], f[-1] = f_min, f_max
    return FrequencyGrid.from_hz(f)


def refine_around(grid, f_center, span, points):
    """Merge ``points`` linear samples across ``f_center +- span/2`` into ``grid``.

    ``span`` is the full width in Hz.  With ``span == 0`` only ``f_center`` is
    inserted.
    """
    if span < 0 or points < 0 or f_center - span / 2 <= 0:
        raise InvalidRange(f"refinement window around {f_center} Hz crosses 0")
    if span == 0 or points <= 1:
        extra = np.array([f_center], dtype=float)
    else:
        extra = np.linspace(f_center - span / 2, f_center + span / 2, points)
    f = np.unique(np.concatenate([grid.hz, extra]))
    return FrequencyGrid.from_hz(f)


def sweep(fn, s):
    """Apply ``fn`` to the frequency array ``s``, split over worker threads.

    The worker count comes from ``PAULI_STAB_THREADS`` (default 1).  ``fn``
    must be elementwise, so chunking does not change the result.
    """
    s = np.asarray(s)
    try:
        workers = int(os.environ.get(THREADS_ENV, "1"))
    except ValueError:
        workers = 1
    if workers <= 1 or s.size < 2 * workers:
        return fn(s)
    chunks = np.array_split(s, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(fn, chunks))
    return _concat(parts)


def _concat(parts):
    first = parts[0]
    if isinstance(first, tuple):
        return tuple(_concat([p[i] for p in parts]) for i in range(len(first)))
    if hasattr(first, "concat"):
        return type(first).concat(parts)
    return np.concatenate(parts)
