"""Passivity index of the converter seen from the grid.

A negative index marks frequencies where the converter can inject energy
into the grid resonance.
"""

import numpy as np

from paulistab.dataio import load_config, reference_config_path, run_analysis

result = run_analysis(load_config(reference_config_path()))
f, rho = result.passivity
neg = f[rho < 0]
print(f"minimum index {rho.min():.4f} at {f[np.argmin(rho)]:.0f} Hz")
if neg.size:
    print(f"non-passive between {neg.min():.0f} and {neg.max():.0f} Hz")
