"""Command-line interface.

Exit codes: 0 stable, 1 unstable, 2 marginal, 3 bad input (parse,
validation, missing files), 4 numerical failure, 5 unexpected error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from .errors import (
    FrequencyMismatch,
    NonMonotonicFrequency,
    ParseError,
    PauliStabError,
    ValidationError,
)

EXIT = {"stable": 0, "unstable": 1, "marginal": 2}
EXIT_INPUT = 3
EXIT_NUMERIC = 4
EXIT_UNEXPECTED = 5

log = logging.getLogger("paulistab")


def _parser():
    ap = argparse.ArgumentParser(
        prog="paulistab",
        description="Pauli-quaternion stability analysis of grid-connected converters.",
    )
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="assess closed-loop stability and write a report")
    a.add_argument("--config", required=True, help="key = value configuration file")
    a.add_argument("--out", help="directory for report.json, CSV and SVG output")
    a.add_argument("--pll-bw", type=float, help="retune the PLL to this bandwidth (Hz)")
    a.add_argument(
        "--measured",
        nargs=2,
        metavar=("CONV_CSV", "GRID_CSV"),
        help="use sampled converter admittance and grid impedance instead of the models",
    )
    a.add_argument("--fmin", type=float, help="lowest sweep frequency (Hz)")
    a.add_argument("--fmax", type=float, help="highest sweep frequency (Hz)")
    a.add_argument("--ppd", type=int, help="sweep points per decade")

    d = sub.add_parser("decompose", help="convert an FRD CSV to quaternion components")
    d.add_argument("--frd", required=True, help="FRD CSV file")
    d.add_argument("--out", help="output CSV (default: stdout)")

    o = sub.add_parser("oracle", help="closed-loop eigenvalues of the state-space model")
    o.add_argument("--config", required=True)
    o.add_argument("--pll-bw", type=float, help="retune the PLL to this bandwidth (Hz)")
    o.add_argument("--pade-order", type=int, default=4)

    e = sub.add_parser("export", help="write the analytic models as FRD CSV files")
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True, help="directory for converter.csv and grid.csv")
    e.add_argument("--pll-bw", type=float, help="retune the PLL to this bandwidth (Hz)")
    return ap


def _config(args):
    from .dataio import load_config, with_overrides

    cfg = load_config(args.config)
    measured = tuple(args.measured) if getattr(args, "measured", None) else None
    return with_overrides(
        cfg,
        pll_bandwidth_override=args.pll_bw,
        measured=measured,
        f_min=getattr(args, "fmin", None),
        f_max=getattr(args, "fmax", None),
        points_per_decade=getattr(args, "ppd", None),
    )


def cmd_analyze(args, out):
    from .dataio import emit, run_analysis

    cfg = _config(args)
    result = run_analysis(cfg)
    r = result.report
    print(f"verdict: {r.verdict}", file=out)
    print(f"encirclements: {r.encirclements}", file=out)
    print(f"f_c: {r.f_c:.3f} Hz  (min distance {r.min_distance:.4g})", file=out)
    for name, mag, ph in r.ranking:
        print(f"  {name}: |{mag:.4g}| at {ph:.1f} deg", file=out)
    print(f"note: {r.assumption}", file=out)
    if args.out:
        paths = emit(result, args.out, config_path=args.config)
        print(f"wrote {', '.join(str(p) for p in paths.values())}", file=out)
    return EXIT[r.verdict]


def cmd_decompose(args, out):
    from .dataio import load_frd

    frd = load_frd(args.frd)
    q = frd.quaternions()
    header = ["f_hz"] + [f"{part}_q{k}" for k in range(4) for part in ("re", "im")]
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else out
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, f in enumerate(frd.f_hz):
            row = [repr(float(f))]
            for comp in q:
                v = complex(comp[i])
                row += [repr(v.real), repr(v.imag)]
            w.writerow(row)
    finally:
        if args.out:
            fh.close()
    return 0


def cmd_oracle(args, out):
    from .oracles import closed_loop_eigs

    cfg = _config(args)
    lam = closed_loop_eigs(cfg.effective_converter(), cfg.grid, args.pade_order, u1_reference=cfg.u1_reference)
    print("re_per_s,im_rad_per_s,f_hz", file=out)
    for v in lam:
        print(f"{float(v.real)!r},{float(v.imag)!r},{float(v.imag) / (2 * np.pi)!r}", file=out)
    n_rhp = int(np.sum(lam.real > 1e-9 * np.max(np.abs(lam))))
    print(f"# right-half-plane eigenvalues: {n_rhp}", file=out)
    return EXIT["unstable"] if n_rhp else EXIT["stable"]


def cmd_export(args, out):
    from .dataio import export_models

    cfg = _config(args)
    conv, grid = export_models(cfg, args.out)
    print(f"wrote {conv} and {grid}", file=out)
    return 0


COMMANDS = {
    "analyze": cmd_analyze,
    "decompose": cmd_decompose,
    "oracle": cmd_oracle,
    "export": cmd_export,
}


def main(argv=None, out=None):
    out = out or sys.stdout
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args, out)
    except (ParseError, ValidationError, NonMonotonicFrequency, FrequencyMismatch, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PauliStabError as exc:
        where = getattr(exc, "omega", None)
        suffix = f" (at {np.ravel(where)[0] / (2 * np.pi):.6g} Hz)" if where is not None else ""
        print(f"error: {exc}{suffix}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as exc:  # noqa: BLE001 - mapped to a distinct exit code
        print(f"unexpected error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
