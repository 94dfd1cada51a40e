"""Solver-agnostic conic problem IR, SDPA sparse export, and solve gateway.

A problem is a list of real symmetric affine constraints, each required to
satisfy M(z) <= -eps_margin * I (the strict-feasibility surrogate), plus the
positive-definiteness constraints harvested from the registry.  Adapters only
produce candidate assignments; feasibility is always re-checked here by
recomputing per-constraint extreme eigenvalues.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass, field

import numpy as np

from .affine import AffineMatrixExpr, DecisionVarRegistry, hermitian_embed
from .plantmodel import ControllerParams

RESIDUAL_TOL = 1e-6
_HERM_TOL = 1e-9


class ConicProblem:
    """Feasibility/linear-objective SDP over the registry's scalar variables."""

    def __init__(self, registry: DecisionVarRegistry, eps_margin: float = 1e-7):
        self.registry = registry
        self.eps_margin = float(eps_margin)
        self.lmis: list[tuple[str, AffineMatrixExpr]] = []
        self.positivity: list[tuple[str, AffineMatrixExpr]] = []
        self.objective: np.ndarray | None = None
        self._finalized = False

    @property
    def n_lmis(self) -> int:
        """Principal constraint count (positivity side constraints excluded)."""
        return len(self.lmis)

    def add_lmi(self, name: str, expr: AffineMatrixExpr) -> None:
        self._check_open()
        self.lmis.append((name, self._canonical(name, expr)))

    def add_positivity(self, name: str, var_expr: AffineMatrixExpr) -> None:
        """Require var_expr >= eps_margin * I (stored as -var_expr <= -eps I)."""
        self._check_open()
        self.positivity.append((f"pos:{name}", self._canonical(name, -var_expr)))

    def set_objective(self, c) -> None:
        """Minimize c @ z; None (default) solves pure feasibility."""
        self._check_open()
        c = np.asarray(c, dtype=float).reshape(-1)
        if c.size != self.registry.size:
            raise ValueError("objective length must match the registry")
        self.objective = c

    def finalize(self, auto_positivity: bool = True) -> "ConicProblem":
        """Freeze the problem; harvests registered definite variables."""
        self._check_open()
        if auto_positivity:
            for name, expr in self.registry.definite_vars():
                self.positivity.append((f"pos:{name}", self._canonical(name, -expr)))
        if not self.lmis and not self.positivity:
            raise ValueError("empty problem")
        self._finalized = True
        return self

    def all_constraints(self) -> list[tuple[str, AffineMatrixExpr]]:
        return list(self.lmis) + list(self.positivity)

    def residuals(self, z) -> dict[str, float]:
        """Max eigenvalue of every constraint at z (feasible means <= 0)."""
        out = {}
        for name, M in self.all_constraints():
            v = M.value(z)
            out[name] = float(np.max(np.linalg.eigvalsh((v + v.conj().T) / 2.0)))
        return out

    def _canonical(self, name: str, expr: AffineMatrixExpr) -> AffineMatrixExpr:
        if expr.shape[0] != expr.shape[1]:
            raise ValueError(f"constraint {name!r} is not square")
        if expr.is_complex:
            expr = hermitian_embed(expr)
        scale = max(1.0, float(np.max(np.abs(expr.const))) if expr.const.size else 1.0)
        if expr.hermitian_defect() > _HERM_TOL * scale:
            raise ValueError(f"constraint {name!r} has a non-symmetric constant part")
        for k, K in expr.coeffs.items():
            if np.max(np.abs(K - K.conj().T)) > _HERM_TOL * max(1.0, np.max(np.abs(K))):
                raise ValueError(f"constraint {name!r} has a non-symmetric coefficient (slot {k})")
        return expr

    def _check_open(self):
        if self._finalized:
            raise ValueError("problem already finalized")


@dataclass
class SolveResult:
    """Adapter outcome after independent residual verification."""

    status: str  # feasible | infeasible | inaccurate | error
    z: np.ndarray | None
    residuals: dict[str, float] = field(default_factory=dict)
    wall_time: float = 0.0
    solver: str = ""
    info: dict = field(default_factory=dict)

    @property
    def max_violation(self) -> float:
        if not self.residuals:
            return np.inf
        return max(max(v, 0.0) for v in self.residuals.values())


class CvxpyAdapter:
    """Canonical in-process adapter: hands the IR to a cvxpy conic solver."""

    def __init__(self, solver: str = "CLARABEL", verbose: bool = False, **solver_opts):
        self.solver = solver.upper()
        self.verbose = verbose
        self.solver_opts = solver_opts

    @property
    def name(self) -> str:
        return f"cvxpy:{self.solver}"

    def solve(self, problem: ConicProblem):
        import cvxpy as cp

        nz = problem.registry.size
        z = cp.Variable(nz) if nz else None
        constraints = []
        for _, M in problem.all_constraints():
            d = M.shape[0]
            target = -problem.eps_margin * np.eye(d)
            if M.coeffs and nz:
                idx = sorted(M.coeffs)
                Kmat = np.stack([np.real(M.coeffs[k]).reshape(-1) for k in idx], axis=1)
                flat = Kmat @ z[idx] + np.real(M.const).reshape(-1)
                E = cp.reshape(flat, (d, d), order="C")
                constraints.append((E + E.T) / 2 << target)
            else:
                lam = np.max(np.linalg.eigvalsh(np.real(M.const)))
                if lam > -problem.eps_margin:
                    # constant constraint already violated; no variable can fix it
                    return "infeasible", None, 0.0, {"constant_violation": float(lam)}
        if problem.objective is not None and nz:
            objective = cp.Minimize(problem.objective @ z)
        else:
            objective = cp.Minimize(0)
        prob = cp.Problem(objective, constraints)
        t0 = time.perf_counter()
        try:
            prob.solve(solver=self.solver, verbose=self.verbose, **self.solver_opts)
        except cp.error.SolverError as exc:
            return "error", None, time.perf_counter() - t0, {"exception": str(exc)}
        wall = time.perf_counter() - t0
        status = prob.status or "unknown"
        zval = None if z is None or z.value is None else np.asarray(z.value, dtype=float)
        if status in (cp.OPTIMAL,):
            return "feasible", zval, wall, {"cvxpy_status": status}
        if status in (cp.OPTIMAL_INACCURATE,):
            return "inaccurate", zval, wall, {"cvxpy_status": status}
        if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
            return "infeasible", None, wall, {"cvxpy_status": status}
        return "error", zval, wall, {"cvxpy_status": status}


def solve(problem: ConicProblem, adapter=None) -> SolveResult:
    """Run an adapter and independently verify the returned assignment.

    The adapter's claimed status is never trusted for feasibility: a solution
    is 'feasible' only if every recomputed constraint eigenvalue is within
    RESIDUAL_TOL of the semidefinite cone.
    """
    if not problem._finalized:
        problem.finalize()
    if adapter is None:
        adapter = CvxpyAdapter()
    status, z, wall, info = adapter.solve(problem)
    residuals: dict[str, float] = {}
    if z is not None:
        z = problem.registry.pad(z)
        residuals = problem.residuals(z)
        violation = max(max(v, 0.0) for v in residuals.values())
        if violation <= RESIDUAL_TOL:
            final = "feasible"
            if status not in ("feasible",):
                info = dict(info, adapter_reported=status)
        elif status == "infeasible":
            final = "infeasible"
        else:
            final = "inaccurate"
            info = dict(info, max_violation=float(violation))
    else:
        final = status if status in ("infeasible", "error") else "error"
    return SolveResult(status=final, z=z, residuals=residuals, wall_time=wall,
                       solver=getattr(adapter, "name", adapter.__class__.__name__), info=info)


def extract_controller(result: SolveResult, registry: DecisionVarRegistry) -> ControllerParams:
    """Read controller coefficients out of a feasible assignment."""
    if result.status != "feasible":
        raise ValueError(f"cannot extract a controller from status {result.status!r}")
    meta = registry.meta.get("controller")
    if meta is None:
        raise ValueError("registry holds no controller variables")
    m, pins = meta["m"], meta["pins"]
    z = result.z
    x = np.zeros(m + 1)
    x[0] = 1.0
    y = np.zeros(m + 1)
    for i in range(1, m + 1):
        name = f"x{i}"
        x[i] = pins[name] if name in pins else z[registry.index(name)]
    for i in range(m + 1):
        name = f"y{i}"
        y[i] = pins[name] if name in pins else z[registry.index(name)]
    return ControllerParams(x=x, y=y, fixed_mask=dict(pins))


# -- SDPA sparse format ---------------------------------------------------------


def canonical_blocks(problem: ConicProblem):
    """Canonical block view: (name, size, F0, {slot: Fk}) with X(z) = sum z_k Fk - F0 >= 0."""
    out = []
    for name, M in problem.all_constraints():
        d = M.shape[0]
        F0 = np.real(M.const) + problem.eps_margin * np.eye(d)
        Fk = {k: -np.real(K) for k, K in M.coeffs.items()}
        out.append((name, d, F0, Fk))
    return out


def _is_diagonal(F0, Fk) -> bool:
    mats = [F0] + list(Fk.values())
    return all(np.allclose(M, np.diag(np.diag(M)), atol=0.0) for M in mats)


def to_sdpa(problem: ConicProblem) -> str:
    """Serialize to the SDPA sparse (.dat-s) text format.

    Values are printed with 17 significant digits so parsing reproduces the
    matrices bit-exactly.  Purely diagonal blocks are written as negative
    block sizes per the format's convention.
    """
    if not problem._finalized:
        problem.finalize()
    blocks = canonical_blocks(problem)
    if not blocks:
        raise ValueError("empty problem")
    nvars = problem.registry.size
    buf = io.StringIO()
    buf.write('"generated by ffsyn sdpgate"\n')
    buf.write(f"{nvars} = mDIM\n")
    buf.write(f"{len(blocks)} = nBLOCK\n")
    sizes = []
    diag_flags = []
    for _, d, F0, Fk in blocks:
        diag = _is_diagonal(F0, Fk)
        diag_flags.append(diag)
        sizes.append(str(-d if diag and d > 1 else d))
    buf.write("(" + ", ".join(sizes) + ") = bLOCKsTRUCT\n")
    c = problem.objective if problem.objective is not None else np.zeros(nvars)
    buf.write("{" + ", ".join(f"{v:.17g}" for v in c) + "}\n")

    def emit(matno: int, blkno: int, M: np.ndarray, diag: bool):
        d = M.shape[0]
        for i in range(d):
            for j in range(i, d):
                if diag and i != j:
                    continue
                v = M[i, j]
                if v != 0.0:
                    buf.write(f"{matno} {blkno} {i + 1} {j + 1} {v:.17g}\n")

    for b, (_, d, F0, Fk) in enumerate(blocks, start=1):
        emit(0, b, F0, diag_flags[b - 1])
    for b, (_, d, F0, Fk) in enumerate(blocks, start=1):
        for k in sorted(Fk):
            emit(k + 1, b, Fk[k], diag_flags[b - 1])
    return buf.getvalue()


@dataclass
class ParsedSDPA:
    """Dense reconstruction of an SDPA sparse file for round-trip checks."""

    nvars: int
    block_sizes: list[int]  # negative = diagonal block
    c: np.ndarray
    mats: list[dict[int, np.ndarray]]  # per block: matno -> dense symmetric matrix


def parse_sdpa(text: str) -> ParsedSDPA:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith(("*", '"'))]
    nvars = int(lines[0].split("=")[0].split()[0])
    nblocks = int(lines[1].split("=")[0].split()[0])
    struct_raw = lines[2].split("=")[0]
    for ch in "(){},":
        struct_raw = struct_raw.replace(ch, " ")
    sizes = [int(tok) for tok in struct_raw.split()]
    if len(sizes) != nblocks:
        raise ValueError("block structure length mismatch")
    c_raw = lines[3]
    for ch in "(){},":
        c_raw = c_raw.replace(ch, " ")
    c = np.array([float(tok) for tok in c_raw.split()], dtype=float)
    if c.size != nvars:
        raise ValueError("objective length mismatch")
    mats: list[dict[int, np.ndarray]] = [dict() for _ in range(nblocks)]
    for ln in lines[4:]:
        toks = ln.split()
        if len(toks) != 5:
            raise ValueError(f"malformed entry line: {ln!r}")
        matno, blkno, i, j = (int(t) for t in toks[:4])
        val = float(toks[4])
        d = abs(sizes[blkno - 1])
        M = mats[blkno - 1].setdefault(matno, np.zeros((d, d)))
        M[i - 1, j - 1] = val
        M[j - 1, i - 1] = val
    return ParsedSDPA(nvars=nvars, block_sizes=sizes, c=c, mats=mats)
