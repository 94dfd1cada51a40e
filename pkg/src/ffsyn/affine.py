"""Affine-in-variables vectors and matrices over a shared scalar variable registry.

Everything downstream (polynomial numerators, state-space output rows, LMI
blocks) is affine in a flat vector z of *real* scalar decision variables:

    value(z) = const + sum_k z[k] * coeff[k]

Hermitian matrix variables are parametrized by real scalars (real part of the
upper triangle plus imaginary part of the strict upper triangle), so complex
expressions still have real decision vectors and stay solver-friendly.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

_HERM_TOL = 1e-9


class DecisionVarRegistry:
    """Flat registry of named real scalar decision variables.

    Matrix-valued variables (symmetric, Hermitian, positive diagonal) expand
    into scalar slots; the registry remembers their structure so expressions
    can be rebuilt and solutions extracted by name.
    """

    def __init__(self):
        self._names: list[str] = []
        self._index: dict[str, int] = {}
        self._matrices: dict[str, dict] = {}
        self._definite: list[str] = []
        self.meta: dict = {}

    @property
    def size(self) -> int:
        return len(self._names)

    @property
    def names(self) -> list[str]:
        return list(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._index or name in self._matrices

    def index(self, name: str) -> int:
        return self._index[name]

    def add_scalar(self, name: str) -> int:
        if name in self:
            raise ValueError(f"variable {name!r} already registered")
        self._index[name] = len(self._names)
        self._names.append(name)
        return self._index[name]

    def scalar_expr(self, name: str) -> "AffineMatrixExpr":
        k = self._index[name]
        return AffineMatrixExpr(np.zeros((1, 1)), {k: np.ones((1, 1))})

    def fresh_name(self, stem: str) -> str:
        if stem not in self and f"{stem}[0,0]" not in self._index and f"{stem}[0]" not in self._index:
            return stem
        i = 1
        while True:
            cand = f"{stem}#{i}"
            if cand not in self and f"{cand}[0,0]" not in self._index and f"{cand}[0]" not in self._index:
                return cand
            i += 1

    def add_symmetric(self, name: str, dim: int, definite: bool = False) -> "AffineMatrixExpr":
        """Register a real symmetric dim x dim variable; returns its expression."""
        if name in self:
            raise ValueError(f"variable {name!r} already registered")
        coeffs = {}
        for i in range(dim):
            for j in range(i, dim):
                k = self.add_scalar(f"{name}[{i},{j}]")
                basis = np.zeros((dim, dim))
                basis[i, j] = 1.0
                basis[j, i] = 1.0
                coeffs[k] = basis
        self._matrices[name] = {"kind": "symmetric", "dim": dim}
        if definite:
            self._definite.append(name)
        return AffineMatrixExpr(np.zeros((dim, dim)), coeffs)

    def add_hermitian(self, name: str, dim: int, definite: bool = False) -> "AffineMatrixExpr":
        """Register a complex Hermitian variable via real/imag scalar slots."""
        if name in self:
            raise ValueError(f"variable {name!r} already registered")
        coeffs = {}
        for i in range(dim):
            for j in range(i, dim):
                k = self.add_scalar(f"{name}.re[{i},{j}]")
                basis = np.zeros((dim, dim), dtype=complex)
                basis[i, j] = 1.0
                basis[j, i] = 1.0
                coeffs[k] = basis
                if i != j:
                    k = self.add_scalar(f"{name}.im[{i},{j}]")
                    basis = np.zeros((dim, dim), dtype=complex)
                    basis[i, j] = 1.0j
                    basis[j, i] = -1.0j
                    coeffs[k] = basis
        self._matrices[name] = {"kind": "hermitian", "dim": dim}
        if definite:
            self._definite.append(name)
        return AffineMatrixExpr(np.zeros((dim, dim), dtype=complex), coeffs)

    def add_pos_diagonal(self, name: str, dim: int) -> "AffineMatrixExpr":
        """Register a positive diagonal dim x dim variable (strict positivity)."""
        if name in self:
            raise ValueError(f"variable {name!r} already registered")
        coeffs = {}
        for i in range(dim):
            k = self.add_scalar(f"{name}[{i}]")
            basis = np.zeros((dim, dim))
            basis[i, i] = 1.0
            coeffs[k] = basis
        self._matrices[name] = {"kind": "pos_diagonal", "dim": dim}
        self._definite.append(name)
        return AffineMatrixExpr(np.zeros((dim, dim)), coeffs)

    def matrix_expr(self, name: str) -> "AffineMatrixExpr":
        info = self._matrices[name]
        dim = info["dim"]
        if info["kind"] == "symmetric":
            coeffs = {}
            for i in range(dim):
                for j in range(i, dim):
                    basis = np.zeros((dim, dim))
                    basis[i, j] = 1.0
                    basis[j, i] = 1.0
                    coeffs[self._index[f"{name}[{i},{j}]"]] = basis
            return AffineMatrixExpr(np.zeros((dim, dim)), coeffs)
        if info["kind"] == "hermitian":
            coeffs = {}
            for i in range(dim):
                for j in range(i, dim):
                    basis = np.zeros((dim, dim), dtype=complex)
                    basis[i, j] = 1.0
                    basis[j, i] = 1.0
                    coeffs[self._index[f"{name}.re[{i},{j}]"]] = basis
                    if i != j:
                        basis = np.zeros((dim, dim), dtype=complex)
                        basis[i, j] = 1.0j
                        basis[j, i] = -1.0j
                        coeffs[self._index[f"{name}.im[{i},{j}]"]] = basis
            return AffineMatrixExpr(np.zeros((dim, dim), dtype=complex), coeffs)
        if info["kind"] == "pos_diagonal":
            coeffs = {}
            for i in range(dim):
                basis = np.zeros((dim, dim))
                basis[i, i] = 1.0
                coeffs[self._index[f"{name}[{i}]"]] = basis
            return AffineMatrixExpr(np.zeros((dim, dim)), coeffs)
        raise ValueError(f"unknown kind {info['kind']!r}")

    def definite_vars(self) -> list[tuple[str, "AffineMatrixExpr"]]:
        """Matrix variables that carry a strict positive-definiteness requirement."""
        return [(name, self.matrix_expr(name)) for name in self._definite]

    def pad(self, z) -> np.ndarray:
        """Zero-pad an assignment vector to the current registry size."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if z.size > self.size:
            raise ValueError("assignment longer than registry")
        return np.concatenate([z, np.zeros(self.size - z.size)])


class AffinePoly:
    """Polynomial (or plain vector) with entries affine in the decision variables.

    Coefficients are in descending powers.  The constant part is ``c0`` and the
    dense weight matrix ``W`` has one column per registry slot existing at
    construction time; later slots are implicitly zero-weighted.
    """

    __slots__ = ("c0", "W")

    def __init__(self, c0, W=None):
        self.c0 = np.asarray(c0, dtype=float).reshape(-1)
        if W is None:
            W = np.zeros((self.c0.size, 0))
        self.W = np.asarray(W, dtype=float)
        if self.W.shape[0] != self.c0.size:
            raise ValueError("weight rows must match coefficient length")

    @classmethod
    def constant(cls, vec) -> "AffinePoly":
        return cls(np.asarray(vec, dtype=float))

    def __len__(self) -> int:
        return self.c0.size

    @property
    def degree(self) -> int:
        return self.c0.size - 1

    @property
    def nvars(self) -> int:
        return self.W.shape[1]

    @property
    def is_constant(self) -> bool:
        return self.W.shape[1] == 0 or not np.any(self.W)

    def value(self, z=None) -> np.ndarray:
        if z is None:
            z = np.zeros(self.nvars)
        z = np.asarray(z, dtype=float).reshape(-1)
        if z.size < self.nvars:
            raise ValueError("assignment shorter than weight width")
        return self.c0 + self.W @ z[: self.nvars]

    def _pad_width(self, nv: int) -> np.ndarray:
        if self.nvars >= nv:
            return self.W
        return np.hstack([self.W, np.zeros((len(self), nv - self.nvars))])

    def __add__(self, other) -> "AffinePoly":
        other = other if isinstance(other, AffinePoly) else AffinePoly.constant(other)
        L = max(len(self), len(other))
        nv = max(self.nvars, other.nvars)
        c0 = _pad_leading(self.c0, L) + _pad_leading(other.c0, L)
        W = _pad_leading_rows(self._pad_width(nv), L) + _pad_leading_rows(other._pad_width(nv), L)
        return AffinePoly(c0, W)

    def __sub__(self, other) -> "AffinePoly":
        other = other if isinstance(other, AffinePoly) else AffinePoly.constant(other)
        return self + (-other)

    def __neg__(self) -> "AffinePoly":
        return AffinePoly(-self.c0, -self.W)

    def __rsub__(self, other) -> "AffinePoly":
        return AffinePoly.constant(other) - self

    def conv(self, q) -> "AffinePoly":
        """Polynomial product with a constant coefficient vector q."""
        q = np.asarray(q, dtype=float).reshape(-1)
        c0 = np.convolve(self.c0, q)
        L = c0.size
        W = np.zeros((L, self.nvars))
        for k in range(self.nvars):
            W[:, k] = np.convolve(self.W[:, k], q)
        return AffinePoly(c0, W)

    def pad_to(self, L: int) -> "AffinePoly":
        if L < len(self):
            raise ValueError("cannot pad to a shorter length")
        return AffinePoly(_pad_leading(self.c0, L), _pad_leading_rows(self.W, L))

    def as_row_expr(self) -> "AffineMatrixExpr":
        """View as a 1 x L affine matrix expression."""
        coeffs = {}
        for k in range(self.nvars):
            col = self.W[:, k]
            if np.any(col):
                coeffs[k] = col.reshape(1, -1).astype(float)
        return AffineMatrixExpr(self.c0.reshape(1, -1).copy(), coeffs)

    def __repr__(self) -> str:
        return f"AffinePoly(len={len(self)}, nvars={self.nvars})"


def _pad_leading(vec: np.ndarray, L: int) -> np.ndarray:
    if vec.size == L:
        return vec
    return np.concatenate([np.zeros(L - vec.size), vec])


def _pad_leading_rows(W: np.ndarray, L: int) -> np.ndarray:
    if W.shape[0] == L:
        return W
    return np.vstack([np.zeros((L - W.shape[0], W.shape[1])), W])


class AffineMatrixExpr:
    """Matrix-valued expression  const + sum_k z[k] * coeffs[k]  over real scalars z.

    ``coeffs`` maps registry slot -> coefficient matrix.  Intermediate shapes
    may be rectangular; constraint left-hand sides are square Hermitian.
    """

    __slots__ = ("const", "coeffs")

    def __init__(self, const, coeffs: Mapping[int, np.ndarray] | None = None):
        const = np.asarray(const)
        if const.ndim != 2:
            raise ValueError("const must be a 2-D matrix")
        self.const = const
        self.coeffs = dict(coeffs) if coeffs else {}
        for K in self.coeffs.values():
            if np.asarray(K).shape != const.shape:
                raise ValueError("coefficient shape mismatch")

    # -- construction helpers ------------------------------------------------

    @classmethod
    def wrap(cls, obj) -> "AffineMatrixExpr":
        if isinstance(obj, AffineMatrixExpr):
            return obj
        if isinstance(obj, AffinePoly):
            return obj.as_row_expr()
        arr = np.atleast_2d(np.asarray(obj))
        return cls(arr)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "AffineMatrixExpr":
        return cls(np.zeros((rows, cols)))

    @staticmethod
    def bmat(blocks: Iterable[Iterable]) -> "AffineMatrixExpr":
        """Assemble a block matrix out of affine/constant blocks."""
        rows = [[AffineMatrixExpr.wrap(b) for b in row] for row in blocks]
        row_h = [row[0].shape[0] for row in rows]
        col_w = [b.shape[1] for b in rows[0]]
        for row in rows:
            if [b.shape[0] for b in row] != [row[0].shape[0]] * len(row):
                raise ValueError("inconsistent block heights")
            if [b.shape[1] for b in row] != col_w:
                raise ValueError("inconsistent block widths")
        shape = (sum(row_h), sum(col_w))
        use_complex = any(np.iscomplexobj(b.const) or b.is_complex for row in rows for b in row)
        dtype = complex if use_complex else float
        const = np.zeros(shape, dtype=dtype)
        coeffs: dict[int, np.ndarray] = {}
        r0 = 0
        for i, row in enumerate(rows):
            c0 = 0
            for j, b in enumerate(row):
                r1, c1 = r0 + row_h[i], c0 + col_w[j]
                const[r0:r1, c0:c1] = b.const
                for k, K in b.coeffs.items():
                    if k not in coeffs:
                        coeffs[k] = np.zeros(shape, dtype=dtype)
                    coeffs[k][r0:r1, c0:c1] = K
                c0 = c1
            r0 += row_h[i]
        return AffineMatrixExpr(const, coeffs)

    # -- basic properties ----------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.const.shape

    @property
    def dim(self) -> int:
        r, c = self.shape
        if r != c:
            raise ValueError("dim requested on a rectangular expression")
        return r

    @property
    def is_complex(self) -> bool:
        if np.iscomplexobj(self.const) and np.any(np.abs(self.const.imag) > 0):
            return True
        return any(
            np.iscomplexobj(K) and np.any(np.abs(K.imag) > 0) for K in self.coeffs.values()
        )

    def value(self, z=None) -> np.ndarray:
        out = self.const.astype(complex if self.is_complex else float).copy()
        if z is None:
            return out
        z = np.asarray(z, dtype=float).reshape(-1)
        for k, K in self.coeffs.items():
            if k >= z.size:
                raise ValueError(f"assignment missing slot {k}")
            out += z[k] * K
        return out

    def hermitian_defect(self, z=None) -> float:
        v = self.value(z)
        return float(np.max(np.abs(v - v.conj().T))) if v.size else 0.0

    # -- algebra ---------------------------------------------------------

    def _map(self, f) -> "AffineMatrixExpr":
        return AffineMatrixExpr(f(self.const), {k: f(K) for k, K in self.coeffs.items()})

    def __add__(self, other) -> "AffineMatrixExpr":
        other = AffineMatrixExpr.wrap(other)
        if other.shape != self.shape:
            raise ValueError("shape mismatch in addition")
        coeffs = dict(self.coeffs)
        for k, K in other.coeffs.items():
            coeffs[k] = coeffs[k] + K if k in coeffs else K
        return AffineMatrixExpr(self.const + other.const, coeffs)

    def __sub__(self, other) -> "AffineMatrixExpr":
        return self + (-AffineMatrixExpr.wrap(other))

    def __rsub__(self, other) -> "AffineMatrixExpr":
        return AffineMatrixExpr.wrap(other) + (-self)

    def __neg__(self) -> "AffineMatrixExpr":
        return self._map(lambda M: -M)

    def __mul__(self, s) -> "AffineMatrixExpr":
        return self._map(lambda M: M * s)

    __rmul__ = __mul__

    @property
    def T(self) -> "AffineMatrixExpr":
        return self._map(lambda M: M.T)

    @property
    def H(self) -> "AffineMatrixExpr":
        return self._map(lambda M: M.conj().T)

    def __matmul__(self, R) -> "AffineMatrixExpr":
        R = np.asarray(R)
        return self._map(lambda M: M @ R)

    def __rmatmul__(self, L) -> "AffineMatrixExpr":
        L = np.asarray(L)
        return self._map(lambda M: L @ M)

    def congruence(self, T) -> "AffineMatrixExpr":
        """T^H * self * T for a constant matrix T."""
        T = np.asarray(T)
        Th = T.conj().T
        return self._map(lambda M: Th @ M @ T)

    def kron_left(self, K) -> "AffineMatrixExpr":
        """Kronecker product K (constant) x self."""
        K = np.asarray(K)
        return self._map(lambda M: np.kron(K, M))

    def real_symmetric_embedding(self) -> "AffineMatrixExpr":
        """Real symmetric doubling of a Hermitian-valued expression.

        H < 0  iff  [[Re H, -Im H], [Im H, Re H]] < 0, with all eigenvalues
        duplicated.  Already-real expressions embed to two diagonal copies.
        """
        d = self.dim
        if np.max(np.abs(self.const - self.const.conj().T)) > _HERM_TOL * max(
            1.0, np.max(np.abs(self.const))
        ):
            raise ValueError("constant part is not Hermitian")

        def emb(M):
            Re, Im = np.real(M), np.imag(M)
            out = np.zeros((2 * d, 2 * d))
            out[:d, :d] = Re
            out[d:, d:] = Re
            out[:d, d:] = -Im
            out[d:, :d] = Im
            return out

        return self._map(emb)

    def __repr__(self) -> str:
        return f"AffineMatrixExpr(shape={self.shape}, nvars={len(self.coeffs)})"


def hermitian_embed(obj):
    """Real symmetric embedding of a Hermitian matrix or affine expression."""
    if isinstance(obj, AffineMatrixExpr):
        return obj.real_symmetric_embedding()
    return AffineMatrixExpr.wrap(obj).real_symmetric_embedding().const
