"""LMI builders: KYP positive realness, finite-frequency bounded realness,
the scaled robust-synthesis conditions, and the vertex-enumeration baseline.

The synthesis path always emits the diagonally-scaled conditions (positive
diagonal multipliers R replace the interval uncertainty blocks), which are the
solver-representable forms.  The raw uncertainty forms are exposed only as
test oracles via the scaling_pair helpers.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import plantmodel, realization
from .affine import AffineMatrixExpr, DecisionVarRegistry, hermitian_embed
from .plantmodel import ShapedNumerators, SynthesisSpec, UncertainPlant
from .realization import FrequencyBand, StateSpace, ctrl_canonical, uncertain_output_offset

__all__ = [
    "DecisionVarRegistry",
    "AffineMatrixExpr",
    "hermitian_embed",
    "kyp_pr_lmi",
    "gkyp_bg_lmi",
    "stability_lmi",
    "performance_lmis",
    "vertex_baseline_lmis",
    "nominal_lmis",
    "scaling_pair",
    "multi_scaling_pair",
]


def _pr_quadratic(ss: StateSpace, P: AffineMatrixExpr) -> AffineMatrixExpr:
    """[A B; I 0]^T [[0,P],[P,0]] [A B; I 0] as an affine expression."""
    N = ss.order
    T = np.vstack([
        np.hstack([ss.A, ss.B]),
        np.hstack([np.eye(N), np.zeros((N, 1))]),
    ])
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    return P.kron_left(swap).congruence(T)


def _gkyp_quadratic(ss: StateSpace, Xi: AffineMatrixExpr) -> AffineMatrixExpr:
    N = ss.order
    T = np.vstack([
        np.hstack([ss.A, ss.B]),
        np.hstack([np.eye(N), np.zeros((N, 1))]),
    ])
    return Xi.congruence(T)


def _corner(dim: int, val: float) -> np.ndarray:
    M = np.zeros((dim, dim))
    M[-1, -1] = val
    return M


def _cd_row(ss: StateSpace) -> AffineMatrixExpr:
    """[C D] as a 1 x (N+1) affine row."""
    return AffineMatrixExpr.bmat([[ss.C.as_row_expr(), ss.D.as_row_expr()]])


def kyp_pr_lmi(ss: StateSpace, registry: DecisionVarRegistry,
               name: str = "P_pr") -> AffineMatrixExpr:
    """KYP strict-positive-realness LMI for the realization's transfer function.

    Feasibility of the returned expression being negative definite (with the
    registered P > 0) certifies Re G(jw) > 0 over the whole axis, infinity
    included.
    """
    N = ss.order
    P = registry.add_symmetric(registry.fresh_name(name), N, definite=True)
    gamma = _pr_quadratic(ss, P)
    Crow = ss.C.as_row_expr()
    D2 = ss.D.as_row_expr() * 2.0
    output_part = AffineMatrixExpr.bmat([
        [AffineMatrixExpr.zeros(N, N), Crow.T],
        [Crow, D2],
    ])
    return gamma - output_part


def gkyp_bg_lmi(ss: StateSpace, band: FrequencyBand, rho: float,
                registry: DecisionVarRegistry, name: str = "G") -> AffineMatrixExpr:
    """Bordered generalized-KYP LMI certifying |G(jw)| < rho on the band.

    P is free Hermitian (symmetric when the band data is real), Q > 0; the
    whole-axis band drops the Q term.  The result is complex Hermitian for
    one-sided (mid) bands and should be embedded before handing to a solver.
    """
    if rho <= 0:
        raise ValueError("gain bound must be positive")
    N = ss.order
    add = registry.add_hermitian if band.is_complex else registry.add_symmetric
    P = add(registry.fresh_name(f"{name}_P"), N, definite=False)
    if band.kind == "all":
        Xi = P.kron_left(np.real(band.Phi))
    else:
        Q = add(registry.fresh_name(f"{name}_Q"), N, definite=True)
        Xi = P.kron_left(band.Phi) + Q.kron_left(band.Psi)
    gamma = _gkyp_quadratic(ss, Xi) + _corner(N + 1, -rho)
    cd = _cd_row(ss)
    return AffineMatrixExpr.bmat([
        [gamma, cd.H],
        [cd, np.array([[-rho]])],
    ])


def stability_lmi(plant: UncertainPlant, spec: SynthesisSpec,
                  registry: DecisionVarRegistry) -> AffineMatrixExpr:
    """Robust-stability LMI: scaled positive realness of the shaped loop ratio.

    The interval deviation rows enter through the banded Toeplitz X, Y borders
    against positive diagonal multipliers R_sa, R_sb, with the matching
    a_d R_sa a_d^T + b_d R_sb b_d^T correction in the feedthrough corner.
    """
    nums = plantmodel.shaped_numerators(plant, spec.m, spec.d_c, registry)
    return _stability_from_numerators(plant, spec, registry, nums)


def _stability_from_numerators(plant, spec, registry, nums: ShapedNumerators) -> AffineMatrixExpr:
    n = plant.n
    N = spec.m + n
    ss = ctrl_canonical(nums.g_sn, spec.d_c)
    P_s = registry.add_symmetric("P_s", N, definite=True)
    R_sa = registry.add_pos_diagonal("R_sa", n)
    R_sb = registry.add_pos_diagonal("R_sb", n)

    a_col = plant.a_dev.reshape(n, 1)
    b_col = plant.b_dev.reshape(n, 1)
    corr = R_sa.congruence(a_col) + R_sb.congruence(b_col)  # a_d R a_d^T, scalar

    Crow = ss.C.as_row_expr()
    gamma_s = _pr_quadratic(ss, P_s) - AffineMatrixExpr.bmat([
        [AffineMatrixExpr.zeros(N, N), Crow.T],
        [Crow, ss.D.as_row_expr() * 2.0 - corr],
    ])

    X, Y = uncertain_output_offset(nums.x, nums.y, n)
    pad = AffineMatrixExpr.zeros(n, 1)
    Xe = AffineMatrixExpr.bmat([[X, pad]])
    Ye = AffineMatrixExpr.bmat([[Y, pad]])

    z_nn = AffineMatrixExpr.zeros(n, n)
    return AffineMatrixExpr.bmat([
        [gamma_s, Xe.T, Ye.T],
        [Xe, -R_sa, z_nn],
        [Ye, z_nn, -R_sb],
    ])


def performance_lmis(plant: UncertainPlant, spec: SynthesisSpec,
                     registry: DecisionVarRegistry) -> dict[str, AffineMatrixExpr]:
    """The four scaled finite-frequency performance LMIs.

    Two per shaping target: the central-polynomial proximity condition
    (|1 - d/d_c| < delta over the band) and the scaled-numerator gain
    condition (|n/d_c| < (1-delta)*rho).  Complex bands are returned already
    embedded as real symmetric expressions.
    """
    nums = plantmodel.shaped_numerators(plant, spec.m, spec.d_c, registry)
    return _performance_from_numerators(plant, spec, registry, nums)


def _performance_from_numerators(plant, spec, registry, nums: ShapedNumerators):
    n = plant.n
    N = spec.m + n
    a_col = plant.a_dev.reshape(n, 1)
    b_col = plant.b_dev.reshape(n, 1)

    ss_p1 = ctrl_canonical(nums.g_p1n, spec.d_c)
    ss_p2 = ctrl_canonical(nums.g_p2n, spec.d_c)
    ss_p3 = ctrl_canonical(nums.g_p3n, spec.d_c)

    X, Y = uncertain_output_offset(nums.x, nums.y, n)
    pad = AffineMatrixExpr.zeros(n, 1)
    Xe = AffineMatrixExpr.bmat([[X, pad]])
    Ye = AffineMatrixExpr.bmat([[Y, pad]])

    def gkyp_gamma(ss, band, corner_val, tag):
        add = registry.add_hermitian if band.is_complex else registry.add_symmetric
        P = add(f"P_{tag}", N)
        Q = add(f"Q_{tag}", N, definite=True)
        Xi = P.kron_left(band.Phi) + Q.kron_left(band.Psi)
        return _gkyp_quadratic(ss, Xi) + _corner(N + 1, corner_val)

    def split_lmi(ss, band, delta, tag_idx):
        """Proximity LMI: |G_p1| < delta with both deviation channels scaled."""
        tag = f"p{tag_idx}"
        gamma = gkyp_gamma(ss, band, -delta, tag)
        Ra = registry.add_pos_diagonal(f"R_{tag}a", n)
        Rb = registry.add_pos_diagonal(f"R_{tag}b", n)
        H = Ra.congruence(a_col) + Rb.congruence(b_col) + np.array([[-delta]])
        cd = _cd_row(ss)
        z1 = AffineMatrixExpr.zeros(1, n)
        z_nn = AffineMatrixExpr.zeros(n, n)
        expr = AffineMatrixExpr.bmat([
            [gamma, cd.H, Xe.T, Ye.T],
            [cd, H, z1, z1],
            [Xe, z1.T, -Ra, z_nn],
            [Ye, z1.T, z_nn, -Rb],
        ])
        return expr

    def gain_lmi(ss, band, level, tag_idx, channel):
        """Scaled-numerator LMI: |G_p| < level with a single deviation channel."""
        tag = f"p{tag_idx}"
        gamma = gkyp_gamma(ss, band, -level, tag)
        if channel == "a":
            R = registry.add_pos_diagonal(f"R_{tag}a", n)
            dev_col, border = a_col, Xe
        else:
            R = registry.add_pos_diagonal(f"R_{tag}b", n)
            dev_col, border = b_col, Ye
        H = R.congruence(dev_col) + np.array([[-level]])
        cd = _cd_row(ss)
        z1 = AffineMatrixExpr.zeros(1, n)
        expr = AffineMatrixExpr.bmat([
            [gamma, cd.H, border.T],
            [cd, H, z1],
            [border, z1.T, -R],
        ])
        return expr

    out = {
        "sens_split": split_lmi(ss_p1, spec.band_s, spec.delta_s, 1),
        "sens_gain": gain_lmi(ss_p2, spec.band_s, (1.0 - spec.delta_s) * spec.rho_s, 2, "a"),
        "comp_split": split_lmi(ss_p1, spec.band_t, spec.delta_t, 3),
        "comp_gain": gain_lmi(ss_p3, spec.band_t, (1.0 - spec.delta_t) * spec.rho_t, 4, "b"),
    }
    return {k: (hermitian_embed(v) if v.is_complex else v) for k, v in out.items()}


def _case_lmis(plant: UncertainPlant, spec: SynthesisSpec,
               registry: DecisionVarRegistry,
               samples: Sequence[plantmodel.UncertaintySample],
               tag: str, pins=None) -> list[tuple[str, AffineMatrixExpr]]:
    """The 5 nominal-form LMIs (no scaling variables) per instantiated plant."""
    x, y = plantmodel.controller_polys(registry, spec.m, pins)
    d_c = spec.d_c
    seen: set[tuple] = set()
    out: list[tuple[str, AffineMatrixExpr]] = []
    idx = 0
    for sample in samples:
        a_v, b_v = plantmodel.instantiate(plant, sample)
        key = tuple(np.round(np.concatenate([a_v, b_v]), 12))
        if key in seen:
            continue
        seen.add(key)
        g_s = x.conv(a_v) + y.conv(b_v)
        g_p1 = -g_s + d_c
        g_p2 = x.conv(a_v)
        g_p3 = y.conv(b_v)
        builders = [
            ("stab", kyp_pr_lmi(ctrl_canonical(g_s, d_c), registry, f"P_s@{tag}{idx}")),
            ("sens_split", gkyp_bg_lmi(ctrl_canonical(g_p1, d_c), spec.band_s,
                                       spec.delta_s, registry, f"s1@{tag}{idx}")),
            ("sens_gain", gkyp_bg_lmi(ctrl_canonical(g_p2, d_c), spec.band_s,
                                      (1 - spec.delta_s) * spec.rho_s, registry, f"s2@{tag}{idx}")),
            ("comp_split", gkyp_bg_lmi(ctrl_canonical(g_p1, d_c), spec.band_t,
                                       spec.delta_t, registry, f"t1@{tag}{idx}")),
            ("comp_gain", gkyp_bg_lmi(ctrl_canonical(g_p3, d_c), spec.band_t,
                                      (1 - spec.delta_t) * spec.rho_t, registry, f"t2@{tag}{idx}")),
        ]
        for kind, expr in builders:
            if expr.is_complex:
                expr = hermitian_embed(expr)
            out.append((f"{kind}@{tag}{idx}", expr))
        idx += 1
    return out


def vertex_baseline_lmis(plant: UncertainPlant, spec: SynthesisSpec,
                         registry: DecisionVarRegistry, pins=None,
                         max_params: int = 16) -> list[tuple[str, AffineMatrixExpr]]:
    """Exponential baseline: 5 LMIs per extreme plant of the interval box.

    Identical vertex plants (zero deviations) are deduplicated, so the count
    is 5 * (number of distinct vertices).
    """
    if 2 * plant.n > max_params:
        raise ValueError(
            f"{2 * plant.n} uncertain parameters exceed the vertex guard of {max_params}; "
            "raise max_params explicitly to force enumeration"
        )
    samples = plantmodel.vertex_samples(plant.n)
    return _case_lmis(plant, spec, registry, samples, tag="v", pins=pins)


def nominal_lmis(plant: UncertainPlant, spec: SynthesisSpec,
                 registry: DecisionVarRegistry, pins=None) -> list[tuple[str, AffineMatrixExpr]]:
    """Design conditions of the deviation-free plant only (no robustness)."""
    zero = plantmodel.UncertaintySample(np.zeros(plant.n), np.zeros(plant.n))
    return _case_lmis(plant, spec, registry, [zero], tag="n", pins=pins)


# -- scaling-equivalence oracles (test-only builders) --------------------------


def scaling_pair(Q, H, E, delta=None, r=None):
    """Concrete left-hand sides of the single-uncertainty scaling equivalence.

    Returns (delta_form, r_form): Q + offdiag uncertainty coupling for a given
    diagonal delta in [-1,1]^k, and Q + E^T R^-1 E (+) H R H^T for a given
    positive diagonal r.  Either side may be None when its parameter is omitted.
    """
    Q = np.asarray(Q, dtype=float)
    H = np.atleast_2d(np.asarray(H, dtype=float))
    E = np.atleast_2d(np.asarray(E, dtype=float))
    p, q = E.shape[1], H.shape[0]
    if Q.shape != (p + q, p + q):
        raise ValueError("Q must be square with size E-cols + H-rows")
    delta_form = r_form = None
    if delta is not None:
        D = np.diag(np.asarray(delta, dtype=float))
        coupling = np.zeros_like(Q)
        coupling[:p, p:] = E.T @ D @ H.T
        coupling[p:, :p] = H @ D @ E
        delta_form = Q + coupling
    if r is not None:
        R = np.diag(np.asarray(r, dtype=float))
        block = np.zeros_like(Q)
        block[:p, :p] = E.T @ np.linalg.inv(R) @ E
        block[p:, p:] = H @ R @ H.T
        r_form = Q + block
    return delta_form, r_form


def multi_scaling_pair(Q, Hs, Es, deltas=None, rs=None, mid_dim: int = 0):
    """Multi-block scaling forms, optionally with an uncoupled middle border.

    Q is partitioned (p, mid_dim, q); every uncertainty block couples the first
    and last partitions.  mid_dim = 0 recovers the plain multi-block case.
    """
    Q = np.asarray(Q, dtype=float)
    Hs = [np.atleast_2d(np.asarray(H, dtype=float)) for H in Hs]
    Es = [np.atleast_2d(np.asarray(E, dtype=float)) for E in Es]
    p, q = Es[0].shape[1], Hs[0].shape[0]
    if Q.shape != (p + mid_dim + q, p + mid_dim + q):
        raise ValueError("Q size must be E-cols + mid_dim + H-rows")
    delta_form = r_form = None
    if deltas is not None:
        coupling = np.zeros_like(Q)
        for H, E, d in zip(Hs, Es, deltas):
            D = np.diag(np.asarray(d, dtype=float))
            coupling[:p, p + mid_dim:] += E.T @ D @ H.T
            coupling[p + mid_dim:, :p] += H @ D @ E
        delta_form = Q + coupling
    if rs is not None:
        block = np.zeros_like(Q)
        for H, E, r in zip(Hs, Es, rs):
            R = np.diag(np.asarray(r, dtype=float))
            block[:p, :p] += E.T @ np.linalg.inv(R) @ E
            block[p + mid_dim:, p + mid_dim:] += H @ R @ H.T
        r_form = Q + block
    return delta_form, r_form
