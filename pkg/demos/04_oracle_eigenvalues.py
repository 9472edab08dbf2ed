"""State-space cross-check.

Builds the closed-loop state-space model with a 4th-order Pade delay and
lists the least-damped eigenvalues for both PLL tunings.
"""

import math

from paulistab import REFERENCE_CONVERTER, REFERENCE_GRID, retune_pll_bandwidth
from paulistab.oracles import closed_loop_eigs

for label, params in (
    ("PLL 330 Hz", REFERENCE_CONVERTER),
    ("PLL 20 Hz", retune_pll_bandwidth(REFERENCE_CONVERTER, 20.0)),
):
    lam = closed_loop_eigs(params, REFERENCE_GRID)
    print(label)
    for v in lam[:4]:
        print(f"  {v.real:9.1f} 1/s  {v.imag / (2 * math.pi):+9.1f} Hz")
