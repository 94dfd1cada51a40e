"""Polynomial arithmetic on descending-power coefficient vectors.

Coefficient vectors are 1-D arrays with index 0 holding the highest power.
Operations accept plain arrays or :class:`AffinePoly` values whose entries are
affine in decision variables; at most one convolution operand may be affine so
results stay linear in the variables.
"""

from __future__ import annotations

import numpy as np

from .affine import AffineMatrixExpr, AffinePoly

BOUNDARY_TOL = 1e-9


def conv(p, q):
    """Polynomial product; q must be a constant coefficient vector."""
    if isinstance(p, AffinePoly) and isinstance(q, AffinePoly):
        if not p.is_constant and not q.is_constant:
            raise ValueError("product of two variable-dependent polynomials is not affine")
        if q.is_constant:
            return p.conv(q.value())
        return q.conv(p.value())
    if isinstance(q, AffinePoly):
        p, q = q, p
    if isinstance(p, AffinePoly):
        return p.conv(np.asarray(q, dtype=float))
    return np.convolve(np.asarray(p, dtype=float), np.asarray(q, dtype=float))


def polyeval(p, s):
    """Horner evaluation of p at a (possibly complex) point or array of points."""
    p = np.asarray(p)
    s = np.asarray(s)
    out = np.zeros_like(s, dtype=complex) + p.flat[0]
    for c in p.reshape(-1)[1:]:
        out = out * s + c
    return out if out.ndim else complex(out)


def trim(p) -> np.ndarray:
    """Strip leading (highest-power) zero coefficients; keeps at least one entry."""
    p = np.asarray(p, dtype=float).reshape(-1)
    nz = np.flatnonzero(p)
    if nz.size == 0:
        return p[-1:]
    return p[nz[0]:]


def roots(p) -> np.ndarray:
    """All deg(p) roots via companion-matrix eigenvalues of the trimmed polynomial."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if not np.any(p):
        raise ValueError("zero polynomial has no well-defined roots")
    return np.roots(trim(p))


def stability_margin(p) -> float:
    """Max real part over the roots of p (negative means Hurwitz)."""
    r = roots(p)
    if r.size == 0:
        return -np.inf
    return float(np.max(r.real))


def is_hurwitz(p) -> bool:
    """True iff every root of p lies strictly in the open left half plane."""
    return stability_margin(p) < 0.0


def classify_stability(p) -> tuple[str, float]:
    """('stable'|'unstable'|'boundary', margin); boundary when |margin| < 1e-9."""
    margin = stability_margin(p)
    if abs(margin) < BOUNDARY_TOL:
        return "boundary", margin
    return ("stable" if margin < 0 else "unstable"), margin


def toeplitz_band(c, rows: int, cols: int):
    """Banded Toeplitz matrix: row i holds c starting at column offset i-1.

    For a length m+1 coefficient vector this is the shift-structured band used
    to push interval deviations into realization output rows; cols must be at
    least rows+m so no coefficient is truncated.  Affine coefficient vectors
    produce an affine matrix expression.
    """
    if isinstance(c, AffinePoly):
        m = len(c) - 1
        if cols < rows + m:
            raise ValueError(f"cols={cols} would truncate the band (need >= {rows + m})")
        const = np.zeros((rows, cols))
        for i in range(rows):
            const[i, i : i + m + 1] = c.c0
        coeffs = {}
        for k in range(c.nvars):
            col = c.W[:, k]
            if not np.any(col):
                continue
            K = np.zeros((rows, cols))
            for i in range(rows):
                K[i, i : i + m + 1] = col
            coeffs[k] = K
        return AffineMatrixExpr(const, coeffs)
    c = np.asarray(c, dtype=float).reshape(-1)
    m = c.size - 1
    if cols < rows + m:
        raise ValueError(f"cols={cols} would truncate the band (need >= {rows + m})")
    out = np.zeros((rows, cols))
    for i in range(rows):
        out[i, i : i + m + 1] = c
    return out
