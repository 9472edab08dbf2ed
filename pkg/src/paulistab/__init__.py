"""Pauli-quaternion stability analysis of grid-connected power converters.

Typical use::

    from paulistab import REFERENCE_CONVERTER, REFERENCE_GRID, build_minor_loop, assess, make_log_grid

    models = build_minor_loop(REFERENCE_CONVERTER, REFERENCE_GRID)
    report = assess(models.z, models.y, make_log_grid(10, 2000, 200), admittance=models.admittance)
    print(report.verdict, report.encirclements, report.f_c)
"""

__version__ = "0.1.0"

from .converter import (  # noqa: E402
    REFERENCE_CONVERTER,
    REFERENCE_GRID,
    ConverterParams,
    GridParams,
    OperatingPoint,
    build_minor_loop,
    converter_admittance,
    grid_impedance,
    retune_pll_bandwidth,
    solve_operating_point,
)
from .errors import *  # noqa: E402,F403
from .freqresp import (  # noqa: E402
    FrequencyGrid,
    Rational,
    TransferElement,
    evaluate,
    make_log_grid,
    refine_around,
)
from .pauli import (  # noqa: E402
    FrequencyResponseSet,
    PauliQuaternion,
    QuaternionElement,
    decompose,
    dot,
    frequency_shift,
    magnitude_sq,
    q_inverse,
    q_mul,
    recompose,
    semi_norm,
    semi_norm_sq,
)
from .stability import (  # noqa: E402
    ContributionBreakdown,
    MinorLoopSample,
    MinorLoopTrace,
    StabilityReport,
    assess,
    contributions,
    critical_frequency,
    eigenvalues,
    minor_loop,
    nyquist_verdict,
    passivity_index,
    rank_root_causes,
)
