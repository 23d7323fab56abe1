"""Front tracking for the two-species pressure swing adsorption system.

Modules
-------
model       isotherms and the derived scalar functions ``h, f, H, g, G``
riemann     exact boundary and full Riemann solvers, amplification factor
fronttrack  event-driven front tracking with interaction bookkeeping
scenario    alternating boundary data, growth checks, Temple test
fvref       first-order upwind finite volumes for cross-checks
cli         the ``wavefront-psa`` command
"""

from .model import (DerivedFunctions, HypothesisReport, IsothermModel, ModelError, State,
                    check_hypotheses, functions_for, make_model, model_from_mapping)
from .riemann import (RiemannError, WaveFan, amplification, solve_boundary_rp, solve_full_rp,
                      solve_rarefaction, solve_shock)
from .fronttrack import Solution, run
from .scenario import (Scenario, blowup_study, build_alternating, classify_temple,
                       geometric_points, predict_growth, verify_growth)

__version__ = "0.1.0"

__all__ = [
    "DerivedFunctions", "HypothesisReport", "IsothermModel", "ModelError", "State",
    "check_hypotheses", "functions_for", "make_model", "model_from_mapping",
    "RiemannError", "WaveFan", "amplification", "solve_boundary_rp", "solve_full_rp",
    "solve_rarefaction", "solve_shock", "Solution", "run", "Scenario", "blowup_study",
    "build_alternating", "classify_temple", "geometric_points", "predict_growth",
    "verify_growth",
]
