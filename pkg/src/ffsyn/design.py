"""Synthesis drivers: assemble the design LMIs, solve, extract the controller."""

from __future__ import annotations

from dataclasses import dataclass

from . import lmikit, plantmodel, sdpgate
from .affine import DecisionVarRegistry
from .plantmodel import ControllerParams, SynthesisSpec, UncertainPlant

MODES = ("proposed", "vertex", "nominal")


def build_synthesis_problem(plant: UncertainPlant, spec: SynthesisSpec,
                            pins=None, mode: str = "proposed",
                            eps_margin: float = 1e-7,
                            max_params: int = 16) -> sdpgate.ConicProblem:
    """Assemble the feasibility SDP for one design method.

    proposed: one scaled condition set (5 LMIs, uncertainty handled by
    multipliers); vertex: 5 LMIs per extreme plant; nominal: 5 LMIs on the
    deviation-free plant only.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    registry = DecisionVarRegistry()
    plantmodel.controller_polys(registry, spec.m, pins)
    if mode == "proposed":
        lmis = [("stability", lmikit.stability_lmi(plant, spec, registry))]
        lmis += list(lmikit.performance_lmis(plant, spec, registry).items())
    elif mode == "vertex":
        lmis = lmikit.vertex_baseline_lmis(plant, spec, registry, max_params=max_params)
    else:
        lmis = lmikit.nominal_lmis(plant, spec, registry)
    problem = sdpgate.ConicProblem(registry, eps_margin=eps_margin)
    for name, expr in lmis:
        problem.add_lmi(name, expr)
    return problem.finalize()


@dataclass
class SynthesisOutcome:
    controller: ControllerParams | None
    result: sdpgate.SolveResult
    problem: sdpgate.ConicProblem

    @property
    def feasible(self) -> bool:
        return self.result.status == "feasible"


def synthesize(plant: UncertainPlant, spec: SynthesisSpec, pins=None,
               mode: str = "proposed", adapter=None,
               eps_margin: float = 1e-7) -> SynthesisOutcome:
    """Solve the feasibility SDP and extract a controller when feasible."""
    problem = build_synthesis_problem(plant, spec, pins=pins, mode=mode,
                                      eps_margin=eps_margin)
    result = sdpgate.solve(problem, adapter=adapter)
    controller = None
    if result.status == "feasible":
        controller = sdpgate.extract_controller(result, problem.registry)
    return SynthesisOutcome(controller=controller, result=result, problem=problem)
