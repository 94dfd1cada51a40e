"""Fixed-order robust controller synthesis for interval SISO plants.

Builds the robust-stability (scaled positive realness) and finite-frequency
sensitivity/complementary-sensitivity LMIs for a plant with interval
coefficient uncertainty, solves them through a pluggable conic-solver
gateway, and verifies/simulates the resulting controller.
"""

from .affine import AffineMatrixExpr, AffinePoly, DecisionVarRegistry, hermitian_embed
from .design import MODES, SynthesisOutcome, build_synthesis_problem, synthesize
from .plantmodel import (
    ControllerParams,
    RationalTF,
    SynthesisSpec,
    UncertainPlant,
    UncertaintySample,
    closed_loop_charpoly,
    instantiate,
    loop_transfers,
    shaped_numerators,
)
from .realization import FrequencyBand, StateSpace, ctrl_canonical, freq_band
from .sdpgate import ConicProblem, CvxpyAdapter, SolveResult, extract_controller, solve, to_sdpa
from .simulate import Reference, SimResult, metrics, simulate_tracking
from .verify import VerificationReport, check_stability, gain_response, sample_uncertainty, verify_specs

__version__ = "0.1.0"

__all__ = [
    "AffineMatrixExpr",
    "AffinePoly",
    "ControllerParams",
    "ConicProblem",
    "CvxpyAdapter",
    "DecisionVarRegistry",
    "FrequencyBand",
    "MODES",
    "RationalTF",
    "Reference",
    "SimResult",
    "SolveResult",
    "StateSpace",
    "SynthesisOutcome",
    "SynthesisSpec",
    "UncertainPlant",
    "UncertaintySample",
    "VerificationReport",
    "build_synthesis_problem",
    "check_stability",
    "closed_loop_charpoly",
    "ctrl_canonical",
    "extract_controller",
    "freq_band",
    "gain_response",
    "hermitian_embed",
    "instantiate",
    "loop_transfers",
    "metrics",
    "sample_uncertainty",
    "shaped_numerators",
    "simulate_tracking",
    "solve",
    "synthesize",
    "to_sdpa",
    "verify_specs",
]
