"""Stability and performance certificates for LTI systems learned from one trajectory."""

from .certificates import (
    DataMatrices,
    EnergyBound,
    GainBound,
    LyapunovCertificate,
    PeakBound,
    ValidationReport,
    build_data_matrices,
    energy_bound,
    l2_gain,
    learn_lyapunov,
    peak_bound,
    solve_lyapunov_equation,
    validate_certificate,
)
from .linalg import oplus, quad_form, sym_pack, sym_unpack
from .lp import LpProblem, LpSolution, solve
from .oracles import (
    PEAK_SDP_REFERENCE_BOUND,
    OracleReport,
    ellipsoid_invariance_check,
    hinf_norm,
    is_hurwitz,
    lyap_solve_model,
    max_output_energy_sim,
    observability_gramian,
)
from .trajectory import DiffTrajectory, LtiModel, Trajectory, differentiate, read_csv, simulate, write_csv

__version__ = "0.1.0"
