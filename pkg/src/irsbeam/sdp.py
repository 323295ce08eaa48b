"""Feasibility of small complex-Hermitian PSD programs with trace constraints.

The Hermitian variable is embedded as the real symmetric matrix
``[[Re X, -Im X], [Im X, Re X]]`` (traces double, PSD-ness and feasibility are
preserved both ways), handed to the max-slack interior-point core, and mapped
back. Feasible answers are re-verified against the original complex data
before being reported; infeasible answers carry a dual bound certifying that
the max-slack optimum is below ``-tol``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .forms import require_hermitian

SENSES = ("<=", "==", ">=")


class SdpStatus(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SdpFeasibilityProblem:
    """``Tr[A_i X] (sense_i) b_i`` for Hermitian ``A_i``, over PSD ``X``.

    ``trace_bound``, when known, bounds ``Tr[X]`` on the feasible set and
    tightens the internal search ball; otherwise a generous ball is inferred
    from the data (and enlarged on demand before declaring infeasibility).
    """

    dim: int
    constraints: tuple = field(default_factory=tuple)
    trace_bound: float | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        checked = []
        for idx, (A, sense, b) in enumerate(self.constraints):
            if sense not in SENSES:
                raise ValueError(f"constraint {idx}: bad sense {sense!r}")
            A = require_hermitian(A, f"constraint {idx} matrix")
            if A.shape != (self.dim, self.dim):
                raise ValueError(f"constraint {idx}: shape {A.shape} != dim {self.dim}")
            b = float(b)
            if not math.isfinite(b):
                raise ValueError(f"constraint {idx}: non-finite bound")
            checked.append((A, sense, b))
        object.__setattr__(self, "constraints", tuple(checked))


@dataclass(frozen=True)
class SdpOutcome:
    status: SdpStatus
    X: np.ndarray | None
    margin: float
    iterations: int
    bound: float

    @property
    def feasible(self) -> bool:
        return self.status is SdpStatus.FEASIBLE


def embed_hermitian(A: np.ndarray) -> np.ndarray:
    """Real symmetric embedding ``[[Re A, -Im A], [Im A, Re A]]``."""
    re, im = A.real, A.imag
    return np.block([[re, -im], [im, re]])


def project_embedded(Xr: np.ndarray) -> np.ndarray:
    """Inverse of :func:`embed_hermitian` on (a symmetrization of) ``Xr``.

    For any symmetric PSD ``Xr`` the projection is Hermitian PSD and
    satisfies ``Tr[A X] = Tr[embed(A) Xr] / 2`` exactly, so feasibility
    carries over.
    """
    n = Xr.shape[0] // 2
    U = Xr[:n, :n]
    Wb = Xr[n:, n:]
    V = Xr[:n, n:]
    Xc = 0.5 * (U + Wb) + 0.5j * (V.T - V)
    return 0.5 * (Xc + Xc.conj().T)


def _is_diag_row(A: np.ndarray) -> bool:
    return bool(np.all(A == np.diag(np.diagonal(A))))


def _certify(problem: SdpFeasibilityProblem, X: np.ndarray, tol: float):
    """Direct constraint verification; returns ``(ok, min_relative_margin)``."""
    evals = np.linalg.eigvalsh(X)
    lam_scale = max(1.0, float(np.max(np.abs(evals))))
    ok = evals[0] >= -tol * lam_scale
    xnorm = float(np.linalg.norm(X))
    margin = math.inf
    for A, sense, b in problem.constraints:
        val = float(np.real(np.sum(A.conj() * X)))  # Tr[A X] for Hermitian A
        scale = max(1.0, abs(b), float(np.linalg.norm(A)) * xnorm)
        if sense == "==":
            ok = ok and abs(val - b) <= tol * scale
        else:
            slack = (b - val) if sense == "<=" else (val - b)
            ok = ok and slack >= -tol * scale
            margin = min(margin, slack / scale)
    return ok, margin


def _polish_diagonal_equalities(problem: SdpFeasibilityProblem, X: np.ndarray) -> np.ndarray:
    """Rescale rows/columns so single-entry diagonal equalities hold exactly."""
    scale = np.ones(problem.dim)
    for A, sense, b in problem.constraints:
        if sense != "==" or not _is_diag_row(A):
            continue
        diag = np.real(np.diagonal(A))
        nz = np.nonzero(diag)[0]
        if nz.size != 1:
            continue
        j = nz[0]
        target = b / diag[j]
        cur = float(np.real(X[j, j]))
        if target > 0 and cur > 1e-300:
            scale[j] = math.sqrt(target / cur)
    if np.all(scale == 1.0):
        return X
    return scale[:, None] * X * scale[None, :]


def _auto_ball(problem: SdpFeasibilityProblem) -> float:
    cands = [10.0 * problem.dim]
    total_b = sum(abs(b) for _, _, b in problem.constraints)
    cands.append(10.0 * max(1.0, total_b))
    for A, sense, b in problem.constraints:
        if sense == "<=" and _is_diag_row(A):
            diag = np.real(np.diagonal(A))
            if np.all(diag > 0) and b > 0:
                cands.append(b / float(np.min(diag)))
    return 4.0 * max(cands)


def _assemble(problem: SdpFeasibilityProblem, ball_radius: float):
    """Row-scaled real-embedded arrays for the kernel, diagonal rows first."""
    nr = 2 * problem.dim
    diag_rows, dense_rows = [], []
    for A, sense, b in problem.constraints:
        if sense == ">=":
            A, b = -A, -b
        is_eq = sense == "=="
        if _is_diag_row(A):
            vec = np.concatenate([np.real(np.diagonal(A))] * 2)
            c = max(float(np.linalg.norm(vec)), 1e-300)
            diag_rows.append((vec / c, 2.0 * b / c, is_eq))
        else:
            E = embed_hermitian(A)
            c = max(float(np.linalg.norm(E)), 1e-300)
            dense_rows.append((E / c, 2.0 * b / c, is_eq))
    # internal search ball keeps the max-slack problem bounded and provides a
    # strictly positive diagonal seed for the dual start
    vec = np.ones(nr)
    c = float(np.linalg.norm(vec))
    diag_rows.append((vec / c, 2.0 * ball_radius / c, False))

    nd, kd = len(diag_rows), len(dense_rows)
    Ad = np.stack([r[0] for r in diag_rows])
    Aden = (np.stack([r[0] for r in dense_rows])
            if kd else np.zeros((0, nr, nr)))
    b_all = np.array([r[1] for r in diag_rows] + [r[1] for r in dense_rows])
    iseq = np.array([r[2] for r in diag_rows] + [r[2] for r in dense_rows])
    return Ad, Aden, b_all, iseq, nd, kd


def check_feasibility(problem: SdpFeasibilityProblem, tol: float = 1e-7,
                      max_iter: int = 200, backend: str | None = None) -> SdpOutcome:
    """Decide feasibility; feasible answers return a verified point.

    The decision rule follows the max-slack reformulation: a point whose
    worst constraint violation is within ``tol`` (relative to row scale) is
    feasible, a dual bound below ``-tol`` certifies infeasibility, anything
    else after ``max_iter`` interior-point iterations is inconclusive.
    """
    auto_ball = problem.trace_bound is None
    radius = _auto_ball(problem) if auto_ball else 2.0 * float(problem.trace_bound)
    result, ball_active = _solve_once(problem, radius, tol, max_iter, backend)
    if auto_ball:
        # an infeasibility verdict that leaned on the internal ball may be an
        # artifact of a too-small search region; enlarge and retry
        for _ in range(2):
            if result.status is not SdpStatus.INFEASIBLE or not ball_active:
                break
            radius *= 64.0
            result, ball_active = _solve_once(problem, radius, tol, max_iter, backend)
    return result


def _solve_once(problem, radius, tol, max_iter, backend):
    Ad, Aden, b_all, iseq, nd, kd = _assemble(problem, radius)
    try:
        code, Xr, t, y, bound, iters, margin, eqres = kernels.solve_maxslack(
            Ad, Aden, b_all, iseq, tol, tol, max_iter, backend=backend)
    except Exception:
        return SdpOutcome(SdpStatus.INCONCLUSIVE, None, -math.inf, 0, math.inf), False

    y_ineq_total = float(np.sum(np.abs(y[~iseq]))) or 1.0
    ball_active = abs(y[nd - 1]) / y_ineq_total > 1e-3

    if code in (0, 2, 3):
        Xc = project_embedded(Xr)
        Xc = _polish_diagonal_equalities(problem, Xc)
        ok, cert_margin = _certify(problem, Xc, tol)
        if ok:
            return SdpOutcome(SdpStatus.FEASIBLE, Xc, cert_margin, iters, bound), False
    if code == 1 or bound < -tol:
        return SdpOutcome(SdpStatus.INFEASIBLE, None, margin, iters, bound), ball_active
    return SdpOutcome(SdpStatus.INCONCLUSIVE, None, margin, iters, bound), ball_active
