"""
Split Bregman TV + non-negativity solver.

Example Usage:
    ```python
    from tvcone.solver import regularize, preset_params

    f, report = regularize(raw, mask, preset_params("bead"))
    print(report.residuals)
    ```
"""

from .state import PatchedReport, SolverState, SolveReport
from .bregman import (
    init_state,
    system_symbol,
    f_update,
    shrink_tv,
    shrink_nonneg,
    update_multipliers,
    bregman_refresh,
    measured_spectrum,
    regularize,
    objective,
    support_residual,
)
from .presets import (
    PRESETS,
    BEAD_STUDY_SETS,
    create_bead_params,
    create_spyogenes_params,
    create_ociaml3_params,
    create_bench_params,
    preset_params,
    params_from_tuple,
)
from .study import parameter_study

__all__ = [
    "PatchedReport", "SolverState", "SolveReport",
    "init_state", "system_symbol", "f_update", "shrink_tv", "shrink_nonneg",
    "update_multipliers", "bregman_refresh", "measured_spectrum", "regularize",
    "objective", "support_residual",
    "PRESETS", "BEAD_STUDY_SETS", "create_bead_params", "create_spyogenes_params",
    "create_ociaml3_params", "create_bench_params", "preset_params", "params_from_tuple",
    "parameter_study",
]
