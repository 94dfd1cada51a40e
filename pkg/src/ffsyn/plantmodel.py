"""Interval-uncertain SISO plant, fixed-order controller, and loop assembly.

The plant denominator/numerator coefficients live in boxes
``a_i in [a_i^c - a_i^d, a_i^c + a_i^d]`` (same for b) driven by standard
interval variables in [-1, 1].  Closed-loop objects are built by polynomial
convolution of the (possibly variable-valued) controller with the plant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import polyalg
from .affine import AffinePoly, DecisionVarRegistry
from .realization import FrequencyBand

_BOX_TOL = 1e-12


@dataclass(frozen=True)
class UncertainPlant:
    """Interval plant: monic denominator center, strictly proper numerator center."""

    a_center: np.ndarray  # length n+1, a_center[0] == 1
    b_center: np.ndarray  # length n+1, b_center[0] == 0
    a_dev: np.ndarray     # length n, entrywise >= 0
    b_dev: np.ndarray     # length n, entrywise >= 0

    def __post_init__(self):
        for name in ("a_center", "b_center", "a_dev", "b_dev"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        n = self.a_center.size - 1
        if n < 1:
            raise ValueError("plant order must be at least 1")
        if self.a_center[0] != 1.0:
            raise ValueError("denominator center must be monic")
        if self.b_center.size != n + 1 or self.b_center[0] != 0.0:
            raise ValueError("numerator center must be length n+1 with leading 0")
        if self.a_dev.size != n or self.b_dev.size != n:
            raise ValueError("deviation vectors must have length n")
        if np.any(self.a_dev < 0) or np.any(self.b_dev < 0):
            raise ValueError("deviations must be nonnegative")

    @property
    def n(self) -> int:
        return self.a_center.size - 1

    @classmethod
    def from_nominal(cls, a_tail, b_tail, percent: float = 0.0,
                     a_dev=None, b_dev=None) -> "UncertainPlant":
        """Build from nominal a_1..a_n, b_1..b_n plus percent or absolute deviations.

        Percent deviations are fractions of |nominal| expanded here, at load time.
        """
        a_tail = np.asarray(a_tail, dtype=float).reshape(-1)
        b_tail = np.asarray(b_tail, dtype=float).reshape(-1)
        if a_dev is None:
            a_dev = np.abs(a_tail) * (percent / 100.0)
        if b_dev is None:
            b_dev = np.abs(b_tail) * (percent / 100.0)
        return cls(
            a_center=np.concatenate([[1.0], a_tail]),
            b_center=np.concatenate([[0.0], b_tail]),
            a_dev=np.asarray(a_dev, dtype=float),
            b_dev=np.asarray(b_dev, dtype=float),
        )


@dataclass(frozen=True)
class ControllerParams:
    """Order-m controller y(s)/x(s) with monic x and optional pinned coefficients."""

    x: np.ndarray  # length m+1, x[0] == 1
    y: np.ndarray  # length m+1
    fixed_mask: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(-1))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).reshape(-1))
        if self.x.size != self.y.size:
            raise ValueError("x and y must share length m+1")
        if self.x[0] != 1.0:
            raise ValueError("controller denominator must be monic")
        for name, val in dict(self.fixed_mask).items():
            kind, idx = name[0], int(name[1:])
            coeff = self.x[idx] if kind == "x" else self.y[idx]
            if coeff != val:
                raise ValueError(f"pinned coefficient {name}={val} not honored (got {coeff})")

    @property
    def m(self) -> int:
        return self.x.size - 1


@dataclass(frozen=True)
class UncertaintySample:
    """One point of the interval box: delta entries in [-1, 1]."""

    delta_a: np.ndarray
    delta_b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "delta_a", np.asarray(self.delta_a, dtype=float).reshape(-1))
        object.__setattr__(self, "delta_b", np.asarray(self.delta_b, dtype=float).reshape(-1))
        if np.any(np.abs(self.delta_a) > 1 + _BOX_TOL) or np.any(np.abs(self.delta_b) > 1 + _BOX_TOL):
            raise ValueError("sample outside the unit box")


@dataclass(frozen=True)
class SynthesisSpec:
    """Design targets: gain bounds (absolute), bands, split factors, central polynomial."""

    rho_s: float
    band_s: FrequencyBand
    rho_t: float
    band_t: FrequencyBand
    delta_s: float
    delta_t: float
    d_c: np.ndarray
    m: int

    def __post_init__(self):
        object.__setattr__(self, "d_c", np.asarray(self.d_c, dtype=float).reshape(-1))
        if not (0 < self.delta_s < 1 and 0 < self.delta_t < 1):
            raise ValueError("split factors must lie in (0, 1)")
        if self.rho_s <= 0 or self.rho_t <= 0:
            raise ValueError("gain bounds must be positive")
        if self.d_c[0] != 1.0:
            raise ValueError("central polynomial must be monic")
        if not polyalg.is_hurwitz(self.d_c):
            raise ValueError("central polynomial must be Hurwitz")


@dataclass(frozen=True)
class RationalTF:
    """num/den rational function plus a denominator stability flag."""

    num: np.ndarray
    den: np.ndarray
    stable: bool
    margin: float

    def __call__(self, s):
        return polyalg.polyeval(self.num, s) / polyalg.polyeval(self.den, s)


def instantiate(plant: UncertainPlant, sample: UncertaintySample) -> tuple[np.ndarray, np.ndarray]:
    """Concrete (a, b) coefficient vectors at one interval sample; a stays monic."""
    if sample.delta_a.size != plant.n or sample.delta_b.size != plant.n:
        raise ValueError("sample dimension does not match plant order")
    a = plant.a_center + np.concatenate([[0.0], plant.a_dev * sample.delta_a])
    b = plant.b_center + np.concatenate([[0.0], plant.b_dev * sample.delta_b])
    return a, b


def closed_loop_charpoly(a, b, k: ControllerParams) -> np.ndarray:
    """conv(a, x) + conv(b, y): the shared denominator of S and T, degree m+n."""
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size != a.size:
        raise ValueError("a and b must share length n+1 (b leading-padded)")
    return polyalg.conv(a, k.x) + polyalg.conv(b, k.y)


def loop_transfers(a, b, k: ControllerParams) -> tuple[RationalTF, RationalTF]:
    """Sensitivity S = conv(a,x)/charpoly and complementary T = conv(b,y)/charpoly."""
    den = closed_loop_charpoly(a, b, k)
    kind, margin = polyalg.classify_stability(den)
    stable = kind == "stable"
    S = RationalTF(polyalg.conv(a, k.x), den, stable, margin)
    T = RationalTF(polyalg.conv(b, k.y), den, stable, margin)
    return S, T


def vertex_samples(n: int) -> list[UncertaintySample]:
    """All 2^(2n) extreme points of the interval box, lexicographic order."""
    import itertools

    out = []
    for bits in itertools.product((-1.0, 1.0), repeat=2 * n):
        out.append(UncertaintySample(np.array(bits[:n]), np.array(bits[n:])))
    return out


def controller_polys(registry: DecisionVarRegistry, m: int,
                     pins: Mapping[str, float] | None = None) -> tuple[AffinePoly, AffinePoly]:
    """Register controller coefficients x_1..x_m, y_0..y_m as decision variables.

    Pinned coefficients (e.g. {"x2": 0.0}) become constants instead of
    variables.  Calling again on a registry that already holds controller
    variables reuses the existing slots (the order and pins must match), so
    several LMI builders can share one controller.
    """
    existing = registry.meta.get("controller")
    if existing is not None:
        if existing["m"] != m:
            raise ValueError(f"registry already holds an order-{existing['m']} controller")
        if pins is not None and dict(pins) != existing["pins"]:
            raise ValueError("pin set does not match the registered controller")
        pins = existing["pins"]
    pins = dict(pins or {})
    for name in pins:
        kind, idx = name[0], name[1:]
        if kind not in "xy" or not idx.isdigit():
            raise ValueError(f"unknown pin {name!r}")
        i = int(idx)
        if kind == "x" and not 1 <= i <= m:
            raise ValueError(f"pin {name!r} out of range for order {m}")
        if kind == "y" and not 0 <= i <= m:
            raise ValueError(f"pin {name!r} out of range for order {m}")

    def slot(name: str) -> int:
        return registry.index(name) if existing is not None else registry.add_scalar(name)

    x_c0, x_slots = np.zeros(m + 1), {}
    x_c0[0] = 1.0
    for i in range(1, m + 1):
        name = f"x{i}"
        if name in pins:
            x_c0[i] = pins[name]
        else:
            x_slots[i] = slot(name)
    y_c0, y_slots = np.zeros(m + 1), {}
    for i in range(m + 1):
        name = f"y{i}"
        if name in pins:
            y_c0[i] = pins[name]
        else:
            y_slots[i] = slot(name)

    def weights(slots: dict[int, int]) -> np.ndarray:
        W = np.zeros((m + 1, registry.size))
        for row, k in slots.items():
            W[row, k] = 1.0
        return W

    registry.meta["controller"] = {"m": m, "pins": pins}
    return AffinePoly(x_c0, weights(x_slots)), AffinePoly(y_c0, weights(y_slots))


@dataclass(frozen=True)
class ShapedNumerators:
    """Numerators over the central polynomial, affine in controller variables."""

    g_sn: AffinePoly   # conv(a_c, x) + conv(b_c, y)
    g_p1n: AffinePoly  # d_c - g_sn
    g_p2n: AffinePoly  # conv(a_c, x)
    g_p3n: AffinePoly  # conv(b_c, y)
    x: AffinePoly
    y: AffinePoly


def shaped_numerators(plant: UncertainPlant, m: int, d_c,
                      registry: DecisionVarRegistry,
                      pins: Mapping[str, float] | None = None) -> ShapedNumerators:
    """Numerators of the four shaped transfer functions over d_c.

    d_c must have degree exactly m+n so the shared canonical realization has
    state dimension m+n.
    """
    d_c = np.asarray(d_c, dtype=float).reshape(-1)
    if d_c.size != m + plant.n + 1:
        raise ValueError(f"central polynomial degree must be {m + plant.n}, got {d_c.size - 1}")
    x, y = controller_polys(registry, m, pins)
    g_p2n = polyalg.conv(x, plant.a_center)
    g_p3n = polyalg.conv(y, plant.b_center)
    g_sn = g_p2n + g_p3n
    g_p1n = AffinePoly.constant(d_c) - g_sn
    return ShapedNumerators(g_sn=g_sn, g_p1n=g_p1n, g_p2n=g_p2n, g_p3n=g_p3n, x=x, y=y)
