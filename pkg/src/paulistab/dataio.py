"""Configuration files, frequency-response CSV files, analysis runs and
report emission.

Configuration is flat ``key = value`` text; ``#`` starts a comment.  The
frequency-response (FRD) format is a CSV with the header in
:data:`FRD_HEADER`, one row per frequency, holding the four entries of a
2x2 dq matrix.
"""

from __future__ import annotations

import csv
import json
import math
import os
import platform
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .converter import (
    ConverterParams,
    GridParams,
    build_minor_loop,
    retune_pll_bandwidth,
)
from .errors import (
    FrequencyMismatch,
    NonMonotonicFrequency,
    ParseError,
    ValidationError,
)
from .freqresp import THREADS_ENV, FrequencyGrid, make_log_grid
from .pauli import FrequencyResponseSet, decompose, recompose
from .stability import assess, passivity_index

FRD_HEADER = (
    "f_hz",
    "re_zdd",
    "im_zdd",
    "re_zdq",
    "im_zdq",
    "re_zqd",
    "im_zqd",
    "re_zqq",
    "im_zqq",
)

# config key -> parameter-record field
_CONVERTER_KEYS = {
    "v1": "V1",
    "omega1_hz": "omega1",
    "L": "L",
    "Td": "Td",
    "kp_cc": "kp_cc",
    "ki_cc": "ki_cc",
    "kp_pll": "kp_pll",
    "ki_pll": "ki_pll",
    "i1_d": "i1_d",
    "i1_q": "i1_q",
    "R": "R",
}
_GRID_KEYS = {"Lg": "Lg", "Cg": "Cg", "Rg": "Rg"}
_REQUIRED = ("v1", "omega1_hz", "L", "Td", "Lg", "Cg", "kp_cc", "ki_cc", "kp_pll", "ki_pll", "i1_d", "i1_q")
_OPTIONAL_FLOAT = {"R": 0.0, "Rg": 0.0, "f_min": 10.0, "f_max": 2000.0, "refine_span": 40.0, "pll_bw": None}
_OPTIONAL_INT = {"ppd": 200, "refine_points": 200}
_OPTIONAL_STR = {"u1_reference": "controller", "measured_converter": None, "measured_grid": None}
_ALL_KEYS = set(_REQUIRED) | set(_OPTIONAL_FLOAT) | set(_OPTIONAL_INT) | set(_OPTIONAL_STR)


@dataclass(frozen=True)
class AnalysisConfig:
    converter: ConverterParams
    grid: GridParams
    f_min: float = 10.0
    f_max: float = 2000.0
    points_per_decade: int = 200
    refine_span: float = 40.0
    refine_points: int = 200
    pll_bandwidth_override: float | None = None
    u1_reference: str = "controller"
    measured: tuple | None = None  # (converter_csv, grid_csv)

    @property
    def source(self):
        return "measured" if self.measured else "analytic"

    def validate(self):
        self.converter.validate()
        self.grid.validate()
        if not (0 < self.f_min < self.f_max):
            raise ValidationError("f_min", "need 0 < f_min < f_max")
        if self.points_per_decade < 1:
            raise ValidationError("ppd", "must be >= 1")
        if self.refine_span < 0 or self.refine_points < 0:
            raise ValidationError("refine_span", "refinement settings must be >= 0")
        if self.pll_bandwidth_override is not None and not self.pll_bandwidth_override > 0:
            raise ValidationError("pll_bw", "must be > 0")
        if self.u1_reference not in ("controller", "terminal"):
            raise ValidationError("u1_reference", "must be 'controller' or 'terminal'")
        if self.measured:
            for path in self.measured:
                if not Path(path).is_file():
                    raise ValidationError("measured", f"file not found: {path}")
        return self

    def effective_converter(self):
        if self.pll_bandwidth_override is None:
            return self.converter
        return retune_pll_bandwidth(self.converter, self.pll_bandwidth_override)

    def sweep_grid(self):
        return make_log_grid(self.f_min, self.f_max, self.points_per_decade)


def parse_config(text, base_dir=None):
    """Parse configuration text into a validated :class:`AnalysisConfig`."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected key = value", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            raise ParseError("unknown key", line=lineno, field=key)
        if key in values:
            raise ParseError("duplicate key", line=lineno, field=key)
        if not value:
            raise ParseError("empty value", line=lineno, field=key)
        if key in _OPTIONAL_STR:
            values[key] = value
            continue
        try:
            num = int(value) if key in _OPTIONAL_INT else float(value)
        except ValueError:
            raise ParseError(f"not a number: {value!r}", line=lineno, field=key) from None
        if not math.isfinite(num):
            raise ParseError("value must be finite", line=lineno, field=key)
        values[key] = num

    for key in _REQUIRED:
        if key not in values:
            name = _CONVERTER_KEYS.get(key) or _GRID_KEYS.get(key)
            raise ValidationError(name, "missing required parameter")

    conv = {field_: values.get(key, _OPTIONAL_FLOAT.get(key)) for key, field_ in _CONVERTER_KEYS.items()}
    conv["omega1"] = 2 * math.pi * conv["omega1"]
    grid = {field_: values.get(key, _OPTIONAL_FLOAT.get(key)) for key, field_ in _GRID_KEYS.items()}

    measured = None
    mc, mg = values.get("measured_converter"), values.get("measured_grid")
    if (mc is None) != (mg is None):
        raise ValidationError("measured", "give both measured_converter and measured_grid")
    if mc is not None:
        base = Path(base_dir) if base_dir else Path(".")
        measured = tuple(str((base / p) if not Path(p).is_absolute() else Path(p)) for p in (mc, mg))

    cfg = AnalysisConfig(
        converter=ConverterParams(**conv),
        grid=GridParams(**grid),
        f_min=values.get("f_min", _OPTIONAL_FLOAT["f_min"]),
        f_max=values.get("f_max", _OPTIONAL_FLOAT["f_max"]),
        points_per_decade=values.get("ppd", _OPTIONAL_INT["ppd"]),
        refine_span=values.get("refine_span", _OPTIONAL_FLOAT["refine_span"]),
        refine_points=values.get("refine_points", _OPTIONAL_INT["refine_points"]),
        pll_bandwidth_override=values.get("pll_bw"),
        u1_reference=values.get("u1_reference", _OPTIONAL_STR["u1_reference"]),
        measured=measured,
    )
    return cfg.validate()


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 text") from exc
    return parse_config(text, base_dir=path.parent)


def reference_config_path():
    """Path of the bundled configuration holding the reference parameters."""
    return resources.files("paulistab") / "data" / "tableI.cfg"


# -- frequency-response data files -------------------------------------------


@dataclass(frozen=True, eq=False)
class MeasuredFRD:
    """Sampled 2x2 dq matrices: ``f_hz`` of shape ``(n,)``, ``M`` of shape ``(n, 2, 2)``."""

    f_hz: np.ndarray
    M: np.ndarray
    source: str | None = None

    def __len__(self):
        return len(self.f_hz)

    @property
    def grid(self):
        return FrequencyGrid.from_hz(self.f_hz)

    def quaternions(self):
        return decompose(self.M)

    def response_set(self, name=None):
        return FrequencyResponseSet(self.grid, self.quaternions(), name or self.source)


def load_frd(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 text") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise ParseError(f"{path}: empty file", line=1)
    header = tuple(c.strip() for c in rows[0])
    if header != FRD_HEADER:
        raise ParseError(f"{path}: header must be {','.join(FRD_HEADER)}", line=1)
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(FRD_HEADER):
            raise ParseError(f"{path}: expected {len(FRD_HEADER)} columns, got {len(row)}", line=lineno)
        vals = []
        for name, cell in zip(FRD_HEADER, row):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{path}: not a number: {cell!r}", line=lineno, field=name) from None
            if not math.isfinite(v):
                raise ParseError(f"{path}: value must be finite", line=lineno, field=name)
            vals.append(v)
        data.append(vals)
    if not data:
        raise ParseError(f"{path}: no data rows", line=2)
    a = np.array(data)
    f = a[:, 0]
    if np.any(f <= 0):
        raise ParseError(f"{path}: frequencies must be > 0", field="f_hz")
    bad = np.nonzero(np.diff(f) <= 0)[0]
    if bad.size:
        raise NonMonotonicFrequency(f"{path}: f_hz not strictly increasing at data row {bad[0] + 2}")
    c = a[:, 1::2] + 1j * a[:, 2::2]
    M = c.reshape(-1, 2, 2)
    return MeasuredFRD(f, M, str(path))


def export_frd(path, f_hz, M):
    """Write ``(n, 2, 2)`` matrices at ``f_hz`` in the FRD format.

    Values are written with ``repr`` so that re-reading is exact.
    """
    M = np.asarray(M, dtype=complex)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FRD_HEADER)
        for f, m in zip(np.asarray(f_hz, dtype=float), M):
            cells = [repr(float(f))]
            for v in (m[0, 0], m[0, 1], m[1, 0], m[1, 1]):
                cells += [repr(float(v.real)), repr(float(v.imag))]
            w.writerow(cells)


def export_models(cfg, out_dir, grid=None):
    """Sample the analytic converter admittance and grid impedance into two
    FRD files (``converter.csv`` and ``grid.csv``).

    Without an explicit ``grid`` the refined analysis grid of ``cfg`` is used,
    so that a measured-source run sees the same frequencies.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    models = build_minor_loop(cfg.effective_converter(), cfg.grid, cfg.u1_reference)
    if grid is None:
        grid = _analysis(cfg, models).trace.grid
    conv = out / "converter.csv"
    grd = out / "grid.csv"
    export_frd(conv, grid.hz, recompose(models.admittance.total(grid.s)))
    export_frd(grd, grid.hz, recompose(models.z(grid.s)))
    return conv, grd


def load_measured(converter_csv, grid_csv):
    """Two FRD files as ``(z, y)`` response sets for the minor loop.

    The converter file holds the admittance from PCC voltage to the current
    injected into the grid; it is negated to form the loop admittance.
    """
    yc = load_frd(converter_csv)
    zg = load_frd(grid_csv)
    if len(yc) != len(zg) or not np.array_equal(yc.f_hz, zg.f_hz):
        raise FrequencyMismatch("converter and grid files have different frequency columns")
    y_conv = yc.response_set("Y_c")
    z = zg.response_set("Z_g")
    q = y_conv.q
    y = FrequencyResponseSet(y_conv.grid, (-q.q0, -q.q1, -q.q2, -q.q3), "-Y_c")
    return z, y, y_conv


# -- analysis ----------------------------------------------------------------


@dataclass
class AnalysisResult:
    config: AnalysisConfig
    report: object  # StabilityReport
    passivity: tuple  # (f_hz, rho)
    extras: dict = field(default_factory=dict)


def _analysis(cfg, models):
    return assess(
        models.z,
        models.y,
        cfg.sweep_grid(),
        refine_span=cfg.refine_span,
        refine_points=cfg.refine_points,
        admittance=models.admittance,
    )


def run_analysis(cfg):
    """End-to-end assessment for one configuration.

    The passivity index is taken of the loop admittance ``-Y_c`` (current
    drawn from the PCC), the sign under which a passive load gives
    ``rho >= 0``.
    """
    cfg.validate()
    if cfg.measured:
        z, y, _ = load_measured(*cfg.measured)
        report = assess(z, y, z.grid)
        omega, rho = passivity_index(y, z.grid)
    else:
        models = build_minor_loop(cfg.effective_converter(), cfg.grid, cfg.u1_reference)
        report = _analysis(cfg, models)
        omega, rho = passivity_index(models.y, report.trace.grid)
    f = omega / (2 * np.pi)
    report.passivity = (f, rho)
    return AnalysisResult(cfg, report, (f, rho))


# -- report emission ---------------------------------------------------------


def _c(v):
    v = complex(v)
    return {
        "re": v.real,
        "im": v.imag,
        "mag": abs(v),
        "phase_deg": math.degrees(math.atan2(v.imag, v.real)),
    }


def report_dict(result):
    r = result.report
    cfg = result.config
    b = r.breakdown
    L = complex(b.L_at_wc)
    i_min = int(np.argmin(result.passivity[1]))
    conv = cfg.effective_converter()
    return {
        "verdict": r.verdict,
        "encirclements": int(r.encirclements),
        "f_c_hz": float(r.f_c),
        "min_distance": float(r.min_distance),
        "L_at_fc": {**_c(L), "mag_db": 10 * math.log10(abs(L))},
        "contributions": {k: _c(v) for k, v in b.terms.items()},
        "ranking": [{"term": n, "mag": m, "phase_deg": ph} for n, m, ph in r.ranking],
        "y0_components": [{"name": n, **_c(v)} for n, v in b.y0_components],
        "ycc0_factors": [{"name": n, **_c(v)} for n, v in b.ycc0_factors],
        "axis_poles": int(r.axis_poles),
        "passivity_min": {
            "rho": float(result.passivity[1][i_min]),
            "f_hz": float(result.passivity[0][i_min]),
        },
        "assumption": r.assumption,
        "source": cfg.source,
        "u1_reference": cfg.u1_reference,
        "parameters": {
            "V1": conv.V1,
            "f1_hz": conv.omega1 / (2 * math.pi),
            "L": conv.L,
            "R": conv.R,
            "Td": conv.Td,
            "kp_cc": conv.kp_cc,
            "ki_cc": conv.ki_cc,
            "kp_pll": conv.kp_pll,
            "ki_pll": conv.ki_pll,
            "i1_d": conv.i1_d,
            "i1_q": conv.i1_q,
            "Lg": cfg.grid.Lg,
            "Cg": cfg.grid.Cg,
            "Rg": cfg.grid.Rg,
            "pll_bw_override_hz": cfg.pll_bandwidth_override,
        },
        "grid": {
            "f_min_hz": float(r.trace.f_hz[0]),
            "f_max_hz": float(r.trace.f_hz[-1]),
            "points": len(r.trace),
        },
    }


_COMPLEX_SCHEMA = {
    "type": "object",
    "required": ["re", "im", "mag", "phase_deg"],
    "properties": {k: {"type": "number"} for k in ("re", "im", "mag", "phase_deg")},
}
_NAMED_COMPLEX = {
    "type": "object",
    "required": ["name", "re", "im", "mag", "phase_deg"],
    "properties": {"name": {"type": "string"}, **_COMPLEX_SCHEMA["properties"]},
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "verdict",
        "encirclements",
        "f_c_hz",
        "min_distance",
        "L_at_fc",
        "contributions",
        "ranking",
        "y0_components",
        "ycc0_factors",
        "assumption",
    ],
    "properties": {
        "verdict": {"enum": ["stable", "unstable", "marginal"]},
        "encirclements": {"type": "integer"},
        "f_c_hz": {"type": "number", "exclusiveMinimum": 0},
        "min_distance": {"type": "number", "minimum": 0},
        "L_at_fc": {
            "type": "object",
            "required": ["re", "im", "mag", "phase_deg", "mag_db"],
            "properties": {**_COMPLEX_SCHEMA["properties"], "mag_db": {"type": "number"}},
        },
        "contributions": {
            "type": "object",
            "required": ["l0", "l1", "l2", "l3"],
            "properties": {k: _COMPLEX_SCHEMA for k in ("l0", "l1", "l2", "l3")},
            "additionalProperties": False,
        },
        "ranking": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["term", "mag", "phase_deg"],
                "properties": {
                    "term": {"enum": ["l0", "l1", "l2", "l3"]},
                    "mag": {"type": "number"},
                    "phase_deg": {"type": "number"},
                },
            },
        },
        "y0_components": {"type": "array", "items": _NAMED_COMPLEX},
        "ycc0_factors": {"type": "array", "items": _NAMED_COMPLEX},
        "axis_poles": {"type": "integer", "minimum": 0},
        "passivity_min": {
            "type": "object",
            "required": ["rho", "f_hz"],
            "properties": {"rho": {"type": "number"}, "f_hz": {"type": "number"}},
        },
        "assumption": {"type": "string"},
        "source": {"enum": ["analytic", "measured"]},
        "u1_reference": {"enum": ["controller", "terminal"]},
        "parameters": {"type": "object"},
        "grid": {"type": "object"},
    },
}


def report_json(result):
    return json.dumps(report_dict(result), indent=2) + "\n"


def emit(result, out_dir, config_path=None):
    """Write ``report.json``, ``run_info.json``, ``nyquist.csv``,
    ``nyquist.svg`` and ``passivity.csv`` into ``out_dir``.

    ``report.json`` depends only on the configuration; the wall-clock time
    and environment details go to ``run_info.json``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    r = result.report
    paths = {}

    paths["report"] = out / "report.json"
    paths["report"].write_text(report_json(result), encoding="utf-8")

    paths["run_info"] = out / "run_info.json"
    info = {
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "threads": os.environ.get(THREADS_ENV, "1"),
        "config": str(config_path) if config_path else None,
    }
    paths["run_info"].write_text(json.dumps(info, indent=2) + "\n", encoding="utf-8")

    paths["nyquist_csv"] = out / "nyquist.csv"
    with open(paths["nyquist_csv"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["f_hz", "re_L", "im_L", "mag_db", "phase_deg"])
        for f, L, mdb, ph in zip(r.trace.f_hz, r.trace.L_char, r.trace.mag_db, r.trace.phase_deg):
            w.writerow([repr(float(f)), repr(float(L.real)), repr(float(L.imag)), repr(float(mdb)), repr(float(ph))])

    paths["passivity_csv"] = out / "passivity.csv"
    with open(paths["passivity_csv"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["f_hz", "rho_min"])
        for f, rho in zip(*result.passivity):
            w.writerow([repr(float(f)), repr(float(rho))])

    from .svgplot import nyquist_svg

    paths["nyquist_svg"] = out / "nyquist.svg"
    paths["nyquist_svg"].write_text(nyquist_svg(r), encoding="utf-8")
    return paths


def with_overrides(cfg, **kw):
    """Copy of ``cfg`` with non-``None`` keyword overrides applied."""
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(cfg, **kw).validate() if kw else cfg


__all__ = [
    "AnalysisConfig",
    "AnalysisResult",
    "FRD_HEADER",
    "MeasuredFRD",
    "REPORT_SCHEMA",
    "emit",
    "export_frd",
    "export_models",
    "load_config",
    "load_frd",
    "load_measured",
    "parse_config",
    "report_dict",
    "run_analysis",
    "reference_config_path",
    "with_overrides",
]
