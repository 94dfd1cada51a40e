"""Closed-loop reference tracking with a classical fixed-step 4th-order scheme.

The loop output is y = T(s) r with T = conv(b, y)/charpoly; the tracking error
r - y then equals S(s) r.  For an LTI system the RK4 update is a constant
linear recurrence, so the stage combinations are precomputed once and the
stepping loop only does one small mat-vec per step.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from . import plantmodel, polyalg, realization
from .plantmodel import ControllerParams


@dataclass(frozen=True)
class Reference:
    """Reference signal descriptor: unit-ish sinusoid, step, or zero."""

    kind: str = "sin"  # sin | step | zero
    amplitude: float = 1.0
    omega: float = 0.05  # rad/s, sinusoid only

    def signal(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "sin":
            return self.amplitude * np.sin(self.omega * t)
        if self.kind == "step":
            return np.full_like(t, self.amplitude)
        if self.kind == "zero":
            return np.zeros_like(t)
        raise ValueError(f"unknown reference kind {self.kind!r}")


@dataclass
class SimResult:
    t: np.ndarray
    r: np.ndarray
    y: np.ndarray
    e: np.ndarray
    rmse: float
    max_abs_error: float
    dt: float
    stable: bool

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "r", "y", "e"])
            for k in range(self.t.size):
                w.writerow([f"{self.t[k]:.10g}", f"{self.r[k]:.10g}",
                            f"{self.y[k]:.10g}", f"{self.e[k]:.10g}"])


def _rk4_update(A: np.ndarray, B: np.ndarray, dt: float):
    """Constant RK4 step matrices: x+ = M x + c1 r(t) + c2 r(t+dt/2) + c3 r(t+dt)."""
    N = A.shape[0]
    b = B.reshape(-1)
    A2 = A @ A
    A3 = A2 @ A
    A4 = A3 @ A
    M = (np.eye(N) + dt * A + dt**2 / 2 * A2 + dt**3 / 6 * A3 + dt**4 / 24 * A4)
    c1 = dt / 6 * b + dt**2 / 6 * (A @ b) + dt**3 / 12 * (A2 @ b) + dt**4 / 24 * (A3 @ b)
    c2 = 2 * dt / 3 * b + dt**2 / 3 * (A @ b) + dt**3 / 12 * (A2 @ b)
    c3 = dt / 6 * b
    return M, c1, c2, c3


def simulate_tracking(plant_sample, controller: ControllerParams,
                      reference: Reference, duration: float,
                      dt: float = 1e-3) -> SimResult:
    """Integrate the closed-loop complementary sensitivity driven by the reference.

    dt must satisfy dt <= 1/(50 * max|pole|); too-coarse steps are rejected
    with a suggested value.  An unstable loop is simulated anyway but warned
    about.
    """
    a, b = plant_sample
    den = plantmodel.closed_loop_charpoly(a, b, controller)
    t_num = polyalg.conv(b, controller.y)
    poles = polyalg.roots(den)
    max_pole = float(np.max(np.abs(poles)))
    dt_max = 1.0 / (50.0 * max_pole) if max_pole > 0 else np.inf
    if dt > dt_max:
        raise ValueError(f"dt={dt} too large for the loop dynamics; use dt <= {dt_max:.2e}")
    stable = bool(np.max(poles.real) < 0)
    if not stable:
        warnings.warn("closed loop is unstable; simulation will diverge", stacklevel=2)

    ss = realization.ctrl_canonical(np.asarray(t_num, dtype=float) / den[0], den / den[0])
    A, B, C, D = ss.concrete()

    nsteps = int(round(duration / dt))
    if nsteps < 1:
        raise ValueError("duration shorter than one step")
    t = np.arange(nsteps + 1) * dt
    r = reference.signal(t)
    r_half = reference.signal(t[:-1] + dt / 2)

    M, c1, c2, c3 = _rk4_update(A, B, dt)
    forcing = (np.outer(c1, r[:-1]) + np.outer(c2, r_half) + np.outer(c3, r[1:]))
    x = np.zeros(A.shape[0])
    y = np.empty(nsteps + 1)
    y[0] = C @ x + D * r[0]
    for k in range(nsteps):
        x = M @ x + forcing[:, k]
        y[k + 1] = C @ x + D * r[k + 1]
    e = r - y
    return SimResult(t=t, r=r, y=y, e=e,
                     rmse=float(np.sqrt(np.mean(e**2))),
                     max_abs_error=float(np.max(np.abs(e))),
                     dt=dt, stable=stable)


def metrics(result: SimResult, settle_fraction: float = 0.2) -> tuple[float, float]:
    """(rmse, max abs error) over the post-transient window."""
    if not 0.0 <= settle_fraction < 1.0:
        raise ValueError("settle_fraction must lie in [0, 1)")
    start = int(result.e.size * settle_fraction)
    window = result.e[start:]
    if window.size == 0:
        raise ValueError("empty evaluation window")
    return float(np.sqrt(np.mean(window**2))), float(np.max(np.abs(window)))


def steady_amplitude(result: SimResult, omega: float, periods: int = 2) -> float:
    """Peak amplitude over the trailing whole periods of a sinusoidal run."""
    period = 2 * np.pi / omega
    n = int(round(periods * period / result.dt))
    if n < 2 or n > result.y.size:
        raise ValueError("not enough samples for the requested trailing periods")
    tail = result.y[-n:]
    return 0.5 * (float(np.max(tail)) - float(np.min(tail)))
