"""Frame analysis of space-time samples of diagonal semigroups.

Continuous orbits ``{e^{tA} g}`` and discrete orbits ``{B^n a}`` are compared
through the Cayley map; truncated frame bounds, time-discretization
certificates and structural frame conditions are computed at finite size.
"""

from .conditions import (
    ConditionConfig,
    carleson_test,
    cluster_matrix_test,
    factorize_vectors,
    full_theorem_check,
    interpolating_test_m1,
    separation_test,
)
from .discretization import (
    TimeGrid,
    finite_horizon,
    sampled_quadform,
    search_delta,
    stability_dichotomy,
    verify_grid_frame,
)
from .frame_analysis import (
    FrameBounds,
    QuadForm,
    VectorSet,
    cayley_residual,
    cayley_transform_vectors,
    frame_bounds,
    quadform_continuous,
    quadform_discrete,
)
from .operators import BasisChange, Spectrum
from .pipeline import run_analyze, run_conditions, run_discretize, run_equivalence, run_reconstruct
from .report import RunReport, emit_report
from .scenario import Scenario, parse_scenario

__version__ = "0.1.0"
