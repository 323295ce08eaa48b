"""Lifted representations of the FC and ED constraint functions.

Two fixed-point parameterizations of the same pair of quadratics:

* phase step: for a fixed weight Gram matrix ``B``, the FC constraint value
  ``S`` and ED constraint value ``T`` are quadratic forms in the lifted phase
  vector, expressed through (N+1) x (N+1) Hermitian blocks;
* weight step: for a fixed lifted phase matrix ``Q``, the same values are
  trace-linear in ``B`` through folded K x K matrices and diagonal weights.

Lift convention: ``lift_phase(phi) = [conj(phi); 1]``. With that choice the
block formulas below reproduce the direct evaluations exactly; the rank-one
oracle tests pin this down.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ChannelSet

HERMITIAN_TOL = 1e-10


def lift_phase(phi: np.ndarray) -> np.ndarray:
    """Lifted phase vector: conjugated coefficients with a trailing 1."""
    phi = np.asarray(phi, dtype=np.complex128)
    return np.concatenate([np.conj(phi), [1.0 + 0.0j]])


def unlift_phase(xi: np.ndarray, n: int) -> np.ndarray:
    """Recover a unit-modulus phase vector from a lifted (N+1)-vector.

    De-rotates by the phase of the last entry, then projects entrywise onto
    the unit circle; zero entries map to 1.
    """
    xi = np.asarray(xi, dtype=np.complex128)
    last = xi[n]
    ref = last / abs(last) if abs(last) > 1e-300 else 1.0
    z = xi[:n] * np.conj(ref)
    mags = np.abs(z)
    safe = np.where(mags > 1e-300, mags, 1.0)
    return np.where(mags > 1e-300, np.conj(z) / safe, 1.0 + 0.0j)


def lifted_gram(phi: np.ndarray) -> np.ndarray:
    """Rank-one lifted matrix ``Q`` for a concrete phase vector."""
    v = lift_phase(phi)
    return np.outer(v, v.conj())


def require_hermitian(mat: np.ndarray, name: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be square, got shape {mat.shape}")
    scale = max(1.0, float(np.max(np.abs(mat))) if mat.size else 0.0)
    if mat.size and np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL * scale:
        raise ValueError(f"{name} is not Hermitian")
    return 0.5 * (mat + mat.conj().T)


@dataclass(frozen=True)
class PhaseStepForms:
    """Quadratic-form blocks of S and T in the lifted phase vector.

    ``P``/``R`` carry the FC-side numerator and weighted-channel-power blocks
    with a zero bottom-right corner; ``p3``/``r3`` are the displaced corner
    scalars. Tilded fields are the ED-side counterparts.
    """

    P: np.ndarray
    R: np.ndarray
    p3: float
    r3: float
    P_tilde: np.ndarray
    R_tilde: np.ndarray
    p3_tilde: float
    r3_tilde: float

    @property
    def dim(self) -> int:
        return self.P.shape[0]

    def p_full(self) -> np.ndarray:
        out = self.P.copy()
        out[-1, -1] += self.p3
        return out

    def r_full(self) -> np.ndarray:
        out = self.R.copy()
        out[-1, -1] += self.r3
        return out

    def p_tilde_full(self) -> np.ndarray:
        out = self.P_tilde.copy()
        out[-1, -1] += self.p3_tilde
        return out

    def r_tilde_full(self) -> np.ndarray:
        out = self.R_tilde.copy()
        out[-1, -1] += self.r3_tilde
        return out


@dataclass(frozen=True)
class WeightStepForms:
    """Trace-linear representation of S and T in the weight Gram matrix.

    Raw factors (``Kmat``, ``Lmat``, tilded, ``Lambda``) plus the products
    already folded with the supplied ``Q``: ``fc_quad = Kmat Q Kmat^H``,
    ``fc_diag = diag(Lmat Q Lmat^H)`` and the ED-side twins.
    """

    Kmat: np.ndarray
    Lmat: np.ndarray
    K_tilde: np.ndarray
    L_tilde: np.ndarray
    Lambda: np.ndarray
    fc_quad: np.ndarray
    fc_diag: np.ndarray
    ed_quad: np.ndarray
    ed_diag: np.ndarray

    @property
    def n_sensors(self) -> int:
        return self.Kmat.shape[0]


def _phase_blocks(h_ir: np.ndarray, h_direct: np.ndarray, H_I: np.ndarray,
                  alpha: np.ndarray, B: np.ndarray):
    # G = D(h_ir) H_I maps sensor space to per-element reflected space
    G = h_ir[:, None] * H_I
    GA = G * alpha[None, :]
    ha = h_direct * alpha  # row h_direct D(alpha)
    P1 = GA @ B @ GA.conj().T
    p2 = GA @ B @ ha.conj()
    p3 = float(np.real(ha @ B @ ha.conj()))
    dB = np.real(np.diag(B))
    R1 = (G * dB[None, :]) @ G.conj().T
    r2 = (G * dB[None, :]) @ h_direct.conj()
    r3 = float(np.sum(dB * np.abs(h_direct) ** 2))
    n = h_ir.size
    P = np.zeros((n + 1, n + 1), dtype=np.complex128)
    P[:n, :n] = P1
    P[:n, n] = p2
    P[n, :n] = p2.conj()
    R = np.zeros((n + 1, n + 1), dtype=np.complex128)
    R[:n, :n] = R1
    R[:n, n] = r2
    R[n, :n] = r2.conj()
    return P, R, p3, r3


def build_phase_forms(ch: ChannelSet, B: np.ndarray) -> PhaseStepForms:
    """Assemble the phase-step quadratic blocks for a given Hermitian ``B``."""
    B = require_hermitian(B, "B")
    if B.shape != (ch.K, ch.K):
        raise ValueError(f"B must be {ch.K} x {ch.K}, got {B.shape}")
    P, R, p3, r3 = _phase_blocks(ch.h_IF, ch.h_f, ch.H_I, ch.alpha, B)
    Pt, Rt, p3t, r3t = _phase_blocks(ch.h_IE, ch.h_e, ch.H_I, ch.alpha, B)
    return PhaseStepForms(P=P, R=R, p3=p3, r3=r3,
                          P_tilde=Pt, R_tilde=Rt, p3_tilde=p3t, r3_tilde=r3t)


def _trace_re(A: np.ndarray, X: np.ndarray) -> float:
    return float(np.real(np.sum(A * X.T)))


def eval_S_phase(Q: np.ndarray, forms: PhaseStepForms, gamma: float,
                 sigma2_o: float, sigma2_f: float) -> float:
    """FC constraint value ``Tr[QP] + p3 - gamma (sigma2_o (Tr[QR] + r3) + sigma2_f)``."""
    Q = require_hermitian(Q, "Q")
    return (_trace_re(Q, forms.P) + forms.p3
            - gamma * (sigma2_o * (_trace_re(Q, forms.R) + forms.r3) + sigma2_f))


def eval_T_phase(Q: np.ndarray, forms: PhaseStepForms, eta: float,
                 sigma2_o: float, sigma2_e: float) -> float:
    """ED counterpart of :func:`eval_S_phase` with the tilded blocks."""
    Q = require_hermitian(Q, "Q")
    return (_trace_re(Q, forms.P_tilde) + forms.p3_tilde
            - eta * (sigma2_o * (_trace_re(Q, forms.R_tilde) + forms.r3_tilde) + sigma2_e))


def build_weight_forms(ch: ChannelSet, Q: np.ndarray) -> WeightStepForms:
    """Assemble the weight-step factors and fold them with ``Q``."""
    Q = require_hermitian(Q, "Q")
    n = ch.N
    if Q.shape != (n + 1, n + 1):
        raise ValueError(f"Q must be {n + 1} x {n + 1}, got {Q.shape}")
    if abs(Q[n, n] - 1.0) > 1e-6:
        raise ValueError(f"Q must have unit bottom-right corner, got {Q[n, n]}")
    a_conj = ch.alpha.conj()
    L1 = ch.H_I.conj().T * ch.h_IF.conj()[None, :]  # H_I^H D(h_IF^H)
    Lmat = np.concatenate([L1, ch.h_f.conj()[:, None]], axis=1)
    Kmat = a_conj[:, None] * Lmat
    L1t = ch.H_I.conj().T * ch.h_IE.conj()[None, :]
    L_tilde = np.concatenate([L1t, ch.h_e.conj()[:, None]], axis=1)
    K_tilde = a_conj[:, None] * L_tilde
    Lam = np.abs(ch.alpha) ** 2

    KQ = Kmat @ Q
    fc_quad = KQ @ Kmat.conj().T
    fc_quad = 0.5 * (fc_quad + fc_quad.conj().T)
    fc_diag = np.real(np.einsum("ij,ji->i", Lmat @ Q, Lmat.conj().T))
    KQt = K_tilde @ Q
    ed_quad = KQt @ K_tilde.conj().T
    ed_quad = 0.5 * (ed_quad + ed_quad.conj().T)
    ed_diag = np.real(np.einsum("ij,ji->i", L_tilde @ Q, L_tilde.conj().T))
    return WeightStepForms(Kmat=Kmat, Lmat=Lmat, K_tilde=K_tilde, L_tilde=L_tilde,
                           Lambda=Lam, fc_quad=fc_quad, fc_diag=fc_diag,
                           ed_quad=ed_quad, ed_diag=ed_diag)


def eval_S_weight(B: np.ndarray, forms: WeightStepForms, gamma: float,
                  sigma2_o: float, sigma2_f: float) -> float:
    """FC constraint value ``Tr[K Q K^H B] - gamma (sigma2_o Tr[diag(L Q L^H) B] + sigma2_f)``."""
    B = require_hermitian(B, "B")
    dB = np.real(np.diag(B))
    return (_trace_re(forms.fc_quad, B)
            - gamma * (sigma2_o * float(np.sum(forms.fc_diag * dB)) + sigma2_f))


def eval_T_weight(B: np.ndarray, forms: WeightStepForms, eta: float,
                  sigma2_o: float, sigma2_e: float) -> float:
    """ED counterpart of :func:`eval_S_weight` with the tilded factors."""
    B = require_hermitian(B, "B")
    dB = np.real(np.diag(B))
    return (_trace_re(forms.ed_quad, B)
            - eta * (sigma2_o * float(np.sum(forms.ed_diag * dB)) + sigma2_e))
