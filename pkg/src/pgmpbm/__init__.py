"""Pretty good and pretty bad measurements for finite quantum state ensembles."""

__version__ = "0.1.0"

from .analysis import DiscriminationReport, r_vector, report, thm1_lower_bound, thm2_upper_bound
from .config import DEFAULT, Tolerances
from .ensemble import (
    Ensemble,
    anomaly_ensemble,
    average_state,
    bloch_qubit,
    random_ensemble,
    tilde_transform,
    trine,
    validate,
)
from .measurement import Povm, offset, offset_profile, p_pbm, p_pgm, pbm, pgm, success_probability
from .optimal import OptimalSolution, check_certificate, solve_pbest, solve_pworst

__all__ = [
    "DEFAULT",
    "DiscriminationReport",
    "Ensemble",
    "OptimalSolution",
    "Povm",
    "Tolerances",
    "anomaly_ensemble",
    "average_state",
    "bloch_qubit",
    "check_certificate",
    "offset",
    "offset_profile",
    "p_pbm",
    "p_pgm",
    "pbm",
    "pgm",
    "r_vector",
    "random_ensemble",
    "report",
    "solve_pbest",
    "solve_pworst",
    "success_probability",
    "thm1_lower_bound",
    "thm2_upper_bound",
    "tilde_transform",
    "trine",
    "validate",
]
