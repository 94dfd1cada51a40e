"""Sampling-based ground truth: pole checks and frequency sweeps of S and T.

The LMIs are the certificate; this module is the independent cross-check.  It
never touches the LMI machinery: stability comes from closed-loop roots and
gains from direct rational evaluation on per-band grids.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import plantmodel, polyalg
from .plantmodel import ControllerParams, SynthesisSpec, UncertainPlant, UncertaintySample

POLE_TOL = 1e-12
DEFAULT_SLACK = 1e-3  # 0.1% headroom absorbing grid quantization at band edges


def check_stability(charpoly) -> tuple[bool, float]:
    """(stable, margin): margin is the max real part over the roots."""
    margin = polyalg.stability_margin(charpoly)
    return margin < 0.0, margin


def gain_response(num, den, omegas) -> np.ndarray:
    """|num(jw)/den(jw)| over the grid; points on a pole come back as NaN."""
    omegas = np.asarray(omegas, dtype=float)
    s = 1j * omegas
    den_vals = polyalg.polyeval(den, s)
    num_vals = polyalg.polyeval(num, s)
    flagged = np.abs(den_vals) < POLE_TOL
    out = np.empty(omegas.shape, dtype=float)
    out[~flagged] = np.abs(num_vals[~flagged] / den_vals[~flagged])
    out[flagged] = np.nan
    return out


def sample_uncertainty(count: int, seed: int, plant: UncertainPlant) -> list[UncertaintySample]:
    """Deterministic uniform samples of the interval box."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = rng.uniform(-1.0, 1.0, size=2 * plant.n)
        out.append(UncertaintySample(d[: plant.n], d[plant.n:]))
    return out


def vertices(plant: UncertainPlant) -> list[UncertaintySample]:
    """All extreme points of the plant's interval box."""
    return plantmodel.vertex_samples(plant.n)


@dataclass
class GainViolation:
    sample: str
    transfer: str  # "S" or "T"
    omega: float
    gain: float
    bound: float


@dataclass
class VerificationReport:
    stable_nominal: bool = True
    nominal_margin: float = -np.inf
    n_samples: int = 0
    stable_fraction: float = 1.0
    worst_margin: float = -np.inf
    worst_margin_sample: str = ""
    gain_violations: list[GainViolation] = field(default_factory=list)
    worst_S_gain: float = 0.0
    worst_S_omega: float = 0.0
    worst_S_sample: str = ""
    worst_T_gain: float = 0.0
    worst_T_omega: float = 0.0
    worst_T_sample: str = ""

    @property
    def clean(self) -> bool:
        return not self.gain_violations and self.stable_fraction == 1.0

    def to_dict(self) -> dict:
        return {
            "stable_nominal": self.stable_nominal,
            "nominal_margin": self.nominal_margin,
            "n_samples": self.n_samples,
            "stable_fraction": self.stable_fraction,
            "worst_margin": self.worst_margin,
            "worst_margin_sample": self.worst_margin_sample,
            "n_gain_violations": len(self.gain_violations),
            "gain_violations": [vars(v) for v in self.gain_violations[:100]],
            "worst_S_gain": self.worst_S_gain,
            "worst_S_omega": self.worst_S_omega,
            "worst_S_sample": self.worst_S_sample,
            "worst_T_gain": self.worst_T_gain,
            "worst_T_omega": self.worst_T_omega,
            "worst_T_sample": self.worst_T_sample,
            "clean": self.clean,
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def verify_specs(plant: UncertainPlant, controller: ControllerParams,
                 spec: SynthesisSpec, samples=None, grid_points: int = 200,
                 include_vertices: bool = True, slack: float = DEFAULT_SLACK,
                 collect_curves: bool = False):
    """Per-sample stability and band-gain checks for S and T.

    The nominal sample always participates; all box vertices are added when
    2n <= 12.  Bounds are checked with multiplicative slack.  With
    collect_curves a list of (tag, band, omegas, S, T) rows is returned too.
    """
    tagged: list[tuple[str, UncertaintySample]] = [
        ("nominal", UncertaintySample(np.zeros(plant.n), np.zeros(plant.n)))
    ]
    if include_vertices and 2 * plant.n <= 12:
        tagged += [(f"vertex{i}", v) for i, v in enumerate(vertices(plant))]
    tagged += [(f"mc{i}", s) for i, s in enumerate(samples or [])]

    grid_s = spec.band_s.grid(grid_points)
    grid_t = spec.band_t.grid(grid_points)

    report = VerificationReport(n_samples=len(tagged))
    curves = []
    n_stable = 0
    for tag, sample in tagged:
        a, b = plantmodel.instantiate(plant, sample)
        den = plantmodel.closed_loop_charpoly(a, b, controller)
        stable, margin = check_stability(den)
        if tag == "nominal":
            report.stable_nominal = stable
            report.nominal_margin = margin
        n_stable += stable
        if margin > report.worst_margin:
            report.worst_margin = margin
            report.worst_margin_sample = tag

        s_num = polyalg.conv(a, controller.x)
        t_num = polyalg.conv(b, controller.y)
        gains_s = gain_response(s_num, den, grid_s)
        gains_t = gain_response(t_num, den, grid_t)
        for transfer, grid, gains, bound in (
            ("S", grid_s, gains_s, spec.rho_s),
            ("T", grid_t, gains_t, spec.rho_t),
        ):
            limit = bound * (1.0 + slack)
            bad = np.flatnonzero(gains > limit)
            for i in bad:
                report.gain_violations.append(
                    GainViolation(sample=tag, transfer=transfer,
                                  omega=float(grid[i]), gain=float(gains[i]), bound=bound)
                )
        k = int(np.nanargmax(gains_s))
        if gains_s[k] > report.worst_S_gain:
            report.worst_S_gain = float(gains_s[k])
            report.worst_S_omega = float(grid_s[k])
            report.worst_S_sample = tag
        k = int(np.nanargmax(gains_t))
        if gains_t[k] > report.worst_T_gain:
            report.worst_T_gain = float(gains_t[k])
            report.worst_T_omega = float(grid_t[k])
            report.worst_T_sample = tag
        if collect_curves:
            curves.append((tag, "S", grid_s, gains_s, gain_response(t_num, den, grid_s)))
            curves.append((tag, "T", grid_t, gain_response(s_num, den, grid_t), gains_t))
    report.stable_fraction = n_stable / len(tagged)
    if collect_curves:
        return report, curves
    return report


def write_gains_csv(path, curves) -> None:
    """CSV rows (sample, band, omega_rad_s, S_mag, T_mag) from collected curves."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample", "band", "omega_rad_s", "S_mag", "T_mag"])
        for tag, band, omegas, s_mag, t_mag in curves:
            for i in range(len(omegas)):
                w.writerow([tag, band, f"{omegas[i]:.10g}",
                            f"{s_mag[i]:.10g}", f"{t_mag[i]:.10g}"])
