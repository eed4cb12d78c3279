"""Growth of hyperbolic and elliptic periodic orbits in area-preserving maps.

The library builds twist maps with invariant circles, forges prescribed
numbers of hyperbolic/elliptic periodic orbits on resonant circles, counts
them with an independent census and chains the construction into a
multi-stage cascade.  An interval-map counterpart lives in
:mod:`pergrowth.interval`.
"""

from .campaign import CampaignConfig, GrowthLedger, load_config, run_cascade, run_stage
from .census import Census, OrbitRecord, OrbitType, classify, find_periodic, minimal_period
from .errors import NumericFailure, PergrowthError, ValidationError
from .flows import (IntegratorConfig, bump_hamiltonian, curve_following_hamiltonian, integrate_flow,
                    shear_flow, transversality_flow)
from .forge import build_bump, build_grid, forge, forge_with_budget, select_t
from .interval import build_f0, interval_census, perturb_plateau, plateau_identity_check
from .kam import (GOLDEN, adapted_coordinates, diophantine_certificate, intersection_check, kam_smallness,
                  rotation_number, solve_cohomological, solve_invariance, twist_coefficient)
from .phase import (Composition, HorizontalShear, IntegrableTwist, PhasePoint, PolarTwist, Space,
                    SymplecticMap, Translation, VerticalShear, cone_check, eval_map, iterate, jacobian,
                    map_from_dict, standard_example, sup_distance, twist_entry)
from .trig import TrigPoly

__version__ = "0.1.0"

__all__ = [
    "CampaignConfig", "Census", "Composition", "GOLDEN", "GrowthLedger", "HorizontalShear",
    "IntegrableTwist", "IntegratorConfig", "NumericFailure", "OrbitRecord", "OrbitType", "PergrowthError",
    "PhasePoint", "PolarTwist", "Space", "SymplecticMap", "Translation", "TrigPoly", "ValidationError",
    "VerticalShear", "adapted_coordinates", "build_bump", "build_f0", "build_grid", "bump_hamiltonian",
    "classify", "cone_check", "curve_following_hamiltonian", "diophantine_certificate", "eval_map",
    "find_periodic", "forge", "forge_with_budget", "integrate_flow", "intersection_check", "interval_census",
    "iterate", "jacobian", "kam_smallness", "load_config", "map_from_dict", "minimal_period",
    "perturb_plateau", "plateau_identity_check", "rotation_number", "run_cascade", "run_stage",
    "select_t", "shear_flow", "solve_cohomological", "solve_invariance", "standard_example",
    "sup_distance", "transversality_flow", "twist_coefficient", "twist_entry",
]
