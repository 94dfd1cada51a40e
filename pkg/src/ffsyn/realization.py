"""Controllable-canonical realizations and frequency-range characterization.

All shaped transfer functions share a denominator d_c, so they share the same
top-row companion A and B = e1; only the output row C and feedthrough D vary
(and may be affine in decision variables).  State i corresponds to s^(N-i),
which lines the banded Toeplitz deviation rows up with C without permutation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affine import AffinePoly
from .polyalg import toeplitz_band


@dataclass(frozen=True)
class StateSpace:
    """Companion realization with output row/feedthrough affine in decision vars."""

    A: np.ndarray
    B: np.ndarray
    C: AffinePoly  # length-N affine row, state i <-> s^(N-i)
    D: AffinePoly  # length-1 affine scalar

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def concrete(self, z=None) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
        """(A, B, C, D) evaluated at an assignment of the decision variables."""
        return self.A, self.B, self.C.value(z), float(self.D.value(z)[0])

    def transfer(self, s, z=None) -> complex:
        """C (sI - A)^-1 B + D at a complex point."""
        A, B, C, D = self.concrete(z)
        N = self.order
        x = np.linalg.solve(s * np.eye(N) - A, B.reshape(-1))
        return complex(C @ x + D)


def companion(d_c) -> tuple[np.ndarray, np.ndarray]:
    """Top-row companion (A, B) of a monic polynomial."""
    d_c = np.asarray(d_c, dtype=float).reshape(-1)
    if d_c[0] != 1.0:
        raise ValueError("companion form needs a monic polynomial")
    N = d_c.size - 1
    A = np.zeros((N, N))
    A[0, :] = -d_c[1:]
    A[1:, :-1] = np.eye(N - 1)
    B = np.zeros((N, 1))
    B[0, 0] = 1.0
    return A, B


def ctrl_canonical(numer, d_c) -> StateSpace:
    """Controllable-canonical realization of numer / d_c.

    The feedthrough is the degree-N numerator coefficient (0 when the
    numerator is strictly proper) and C_i = numer_i - D * d_c_i.
    """
    d_c = np.asarray(d_c, dtype=float).reshape(-1)
    N = d_c.size - 1
    if not isinstance(numer, AffinePoly):
        numer = AffinePoly.constant(numer)
    if len(numer) > N + 1:
        raise ValueError(f"numerator degree {len(numer) - 1} exceeds denominator degree {N}")
    numer = numer.pad_to(N + 1)
    A, B = companion(d_c)
    D = AffinePoly(numer.c0[:1].copy(), numer.W[:1, :].copy())
    # C = numerator tail minus feedthrough times denominator tail
    C = AffinePoly(numer.c0[1:] - numer.c0[0] * d_c[1:],
                   numer.W[1:, :] - np.outer(d_c[1:], numer.W[0, :]))
    return StateSpace(A=A, B=B, C=C, D=D)


def uncertain_output_offset(x, y, n: int):
    """Banded Toeplitz pair (X, Y) mapping interval deviations into output rows.

    X stacks n shifted copies of the controller denominator coefficients and Y
    of the numerator coefficients, each of width m+n, so that for any sample
    the realization output row of the perturbed numerator equals
    C + a_d*Delta_a*X + b_d*Delta_b*Y.
    """
    m = len(x) - 1
    return toeplitz_band(x, n, m + n), toeplitz_band(y, n, m + n)


@dataclass(frozen=True)
class FrequencyBand:
    """Hermitian pair (Phi, Psi) selecting a segment of the imaginary axis."""

    kind: str  # low | mid | high | all
    omega_l: float | None
    omega_h: float | None
    Phi: np.ndarray
    Psi: np.ndarray

    @property
    def is_complex(self) -> bool:
        return bool(np.any(np.abs(self.Psi.imag) > 0))

    def grid(self, points: int = 200) -> np.ndarray:
        """Frequency grid (rad/s) covering the band, for sampling-based checks."""
        if self.kind == "low":
            return np.linspace(0.0, self.omega_l, points)
        if self.kind == "mid":
            return np.geomspace(self.omega_l, self.omega_h, points)
        if self.kind == "high":
            return np.geomspace(self.omega_h, 100.0 * self.omega_h, points)
        return np.geomspace(1e-3, 1e4, points)


def sigma(lam: complex, M: np.ndarray) -> float:
    """Quadratic form [lam; 1]^* M [lam; 1] (real for Hermitian M)."""
    v = np.array([lam, 1.0], dtype=complex)
    return float(np.real(v.conj() @ np.asarray(M, dtype=complex) @ v))


def freq_band(kind: str, omega_l: float | None = None,
              omega_h: float | None = None) -> FrequencyBand:
    """Build the (Phi, Psi) pair for a low/mid/high/all frequency range."""
    Phi = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    if kind == "low":
        if omega_l is None or omega_l <= 0:
            raise ValueError("low band needs omega_l > 0")
        Psi = np.array([[-1.0, 0.0], [0.0, omega_l**2]], dtype=complex)
        omega_h = None
    elif kind == "mid":
        if omega_l is None or omega_h is None or not 0 <= omega_l < omega_h:
            raise ValueError("mid band needs 0 <= omega_l < omega_h")
        c = 0.5 * (omega_h + omega_l)
        Psi = np.array([[-1.0, 1j * c], [-1j * c, -omega_l * omega_h]])
    elif kind == "high":
        if omega_h is None or omega_h <= 0:
            raise ValueError("high band needs omega_h > 0")
        Psi = np.array([[1.0, 0.0], [0.0, -(omega_h**2)]], dtype=complex)
        omega_l = None
    elif kind == "all":
        Psi = np.zeros((2, 2), dtype=complex)
        omega_l = omega_h = None
    else:
        raise ValueError(f"unknown band kind {kind!r}")
    return FrequencyBand(kind=kind, omega_l=omega_l, omega_h=omega_h, Phi=Phi, Psi=Psi)
