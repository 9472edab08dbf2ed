"""Stability of the reference grid-following converter on an LC grid.

Runs the same analysis as ``paulistab analyze --config <reference cfg>``
and prints the verdict, the critical frequency and the ranked contributions.
"""

from paulistab.dataio import load_config, reference_config_path, run_analysis

cfg = load_config(reference_config_path())
report = run_analysis(cfg).report

print(f"verdict: {report.verdict}  encirclements: {report.encirclements}")
print(f"critical frequency: {report.f_c:.1f} Hz, |L| = {report.min_distance:.3f}")
for name, mag, phase in report.ranking:
    print(f"  {name}: {mag:.4f} at {phase:+.1f} deg")
