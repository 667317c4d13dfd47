"""Delta estimators for mean-field SDEs.

Thin re-export of the compiled ``_mfbel`` extension; see ``help(mfbel.estimate_delta)``.
"""

from ._mfbel import (
    CurveResolver,
    EstimatorConfig,
    Model,
    Scheme,
    analytic_curves,
    build_model,
    closed_form,
    compare_methods,
    estimate_delta,
    malliavin_weights,
    model_ids,
    parameter_set,
    particle_curves,
    run_config,
    validate,
)

__all__ = [
    "CurveResolver",
    "EstimatorConfig",
    "Model",
    "Scheme",
    "analytic_curves",
    "build_model",
    "closed_form",
    "compare_methods",
    "estimate_delta",
    "malliavin_weights",
    "model_ids",
    "parameter_set",
    "particle_curves",
    "run_config",
    "validate",
]
