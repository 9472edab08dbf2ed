"""Analysis from sampled frequency-response data.

Exports the analytic converter admittance and grid impedance as FRD CSV
files, then analyses those files as if they had been measured.
"""

import tempfile

from paulistab.dataio import export_models, load_config, reference_config_path, run_analysis, with_overrides

cfg = load_config(reference_config_path())
with tempfile.TemporaryDirectory() as tmp:
    conv, grid = export_models(cfg, tmp)
    analytic = run_analysis(cfg).report
    measured = run_analysis(with_overrides(cfg, measured=(str(conv), str(grid)))).report
print(f"analytic: {analytic.verdict}, f_c = {analytic.f_c:.3f} Hz")
print(f"measured: {measured.verdict}, f_c = {measured.f_c:.3f} Hz")
