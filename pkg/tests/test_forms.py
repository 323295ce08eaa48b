import numpy as np
import pytest

from irsbeam.forms import (build_phase_forms, build_weight_forms, eval_S_phase,
                           eval_S_weight, eval_T_phase, eval_T_weight,
                           lift_phase, lifted_gram, unlift_phase)

from .conftest import synth_channels
from .oracles import (direct_S, direct_T, direct_numerator,
                      direct_weighted_channel_power)

GAMMA, ETA = 1.3, 0.8
SO, SF, SE = 0.25, 0.6, 0.45


def _rank1_instance(rng, K, N):
    ch = synth_channels(rng, K, N)
    beta = rng.standard_normal(K) + 1j * rng.standard_normal(K)
    phi = np.exp(2j * np.pi * rng.random(N))
    return ch, beta, phi


def test_zero_weights_zero_blocks():
    rng = np.random.default_rng(0)
    ch = synth_channels(rng, 3, 4)
    f = build_phase_forms(ch, np.zeros((3, 3)))
    for M in (f.P, f.R, f.P_tilde, f.R_tilde):
        np.testing.assert_array_equal(M, 0)
    assert f.p3 == 0 and f.r3 == 0
    Q = lifted_gram(np.ones(4))
    assert eval_S_phase(Q, f, GAMMA, SO, SF) == pytest.approx(-GAMMA * SF)
    assert eval_T_phase(Q, f, ETA, SO, SE) == pytest.approx(-ETA * SE)


def test_zero_weights_weight_side():
    rng = np.random.default_rng(1)
    ch = synth_channels(rng, 3, 4)
    wf = build_weight_forms(ch, lifted_gram(np.exp(2j * np.pi * rng.random(4))))
    zero = np.zeros((3, 3))
    assert eval_S_weight(zero, wf, GAMMA, SO, SF) == pytest.approx(-GAMMA * SF)
    assert eval_T_weight(zero, wf, ETA, SO, SE) == pytest.approx(-ETA * SE)


def test_hand_algebra_k1_n1():
    # every block collapses to scalars that can be expanded by hand
    h_i, h_if, h_f, a, b = 2.0 - 1.0j, 1.0 + 1.0j, 0.5 + 0.25j, 1.5 - 0.5j, 0.7 + 0.3j
    ch = synth_channels(np.random.default_rng(0), 1, 1)
    ch = type(ch)(H_I=np.array([[h_i]]), h_IF=np.array([h_if]), h_IE=np.array([2.0j]),
                  h_f=np.array([h_f]), h_e=np.array([0.1 + 0.0j]), alpha=np.array([a]))
    B = np.array([[abs(b) ** 2]])
    f = build_phase_forms(ch, B)
    assert f.P[0, 0] == pytest.approx(abs(h_if * h_i * a * b) ** 2)
    assert f.P[0, 1] == pytest.approx((h_if * h_i * a) * abs(b) ** 2 * np.conj(h_f * a))
    assert f.p3 == pytest.approx(abs(h_f * a * b) ** 2)
    assert f.R[0, 0] == pytest.approx(abs(h_if * h_i * b) ** 2)
    assert f.R[0, 1] == pytest.approx(h_if * h_i * abs(b) ** 2 * np.conj(h_f))
    assert f.r3 == pytest.approx(abs(h_f * b) ** 2)


def test_rank_one_oracle_equivalence():
    # the module's central property: both lifted parameterizations reproduce
    # the direct constraint values on rank-one instances
    rng = np.random.default_rng(7)
    for _ in range(60):
        K = int(rng.integers(1, 7))
        N = int(rng.integers(0, 13))
        ch, beta, phi = _rank1_instance(rng, K, N)
        B, Q = np.outer(beta, beta.conj()), lifted_gram(phi)
        pf = build_phase_forms(ch, B)
        wf = build_weight_forms(ch, Q)
        s_ref = direct_S(ch, phi, beta, GAMMA, SO, SF)
        t_ref = direct_T(ch, phi, beta, ETA, SO, SE)
        s_scale = max(1.0, abs(s_ref))
        t_scale = max(1.0, abs(t_ref))
        assert abs(eval_S_phase(Q, pf, GAMMA, SO, SF) - s_ref) / s_scale < 1e-9
        assert abs(eval_S_weight(B, wf, GAMMA, SO, SF) - s_ref) / s_scale < 1e-9
        assert abs(eval_T_phase(Q, pf, ETA, SO, SE) - t_ref) / t_scale < 1e-9
        assert abs(eval_T_weight(B, wf, ETA, SO, SE) - t_ref) / t_scale < 1e-9


def test_trace_identities():
    rng = np.random.default_rng(8)
    for _ in range(40):
        K = int(rng.integers(1, 7))
        N = int(rng.integers(0, 13))
        ch, beta, phi = _rank1_instance(rng, K, N)
        B, Q = np.outer(beta, beta.conj()), lifted_gram(phi)
        wf = build_weight_forms(ch, Q)
        num = float(np.real(np.sum(wf.fc_quad * B.T)))
        ref_num = direct_numerator(ch, phi, beta)
        assert num == pytest.approx(ref_num, rel=1e-9, abs=1e-12)
        wcp = float(np.sum(wf.fc_diag * np.real(np.diag(B))))
        ref_wcp = direct_weighted_channel_power(ch, phi, beta)
        assert wcp == pytest.approx(ref_wcp, rel=1e-9, abs=1e-12)


def test_cross_parameterization_on_general_matrices():
    # bilinearity: the two parameterizations agree for any Hermitian pair,
    # not just rank-one lifts
    rng = np.random.default_rng(9)
    for _ in range(20):
        K, N = int(rng.integers(1, 5)), int(rng.integers(1, 7))
        ch = synth_channels(rng, K, N)
        Wb = rng.standard_normal((K, 2 * K)) + 1j * rng.standard_normal((K, 2 * K))
        B = Wb @ Wb.conj().T / K
        Wq = rng.standard_normal((N + 1, N + 2)) + 1j * rng.standard_normal((N + 1, N + 2))
        Q = Wq @ Wq.conj().T / N
        Q[N, N] = 1.0
        pf = build_phase_forms(ch, B)
        wf = build_weight_forms(ch, Q)
        sp = eval_S_phase(Q, pf, GAMMA, SO, SF)
        sw = eval_S_weight(B, wf, GAMMA, SO, SF)
        assert sp == pytest.approx(sw, rel=1e-9, abs=1e-9)


def test_blocks_hermitian_and_psd():
    rng = np.random.default_rng(10)
    ch = synth_channels(rng, 4, 6)
    W = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
    B = W @ W.conj().T
    f = build_phase_forms(ch, B)
    for M in (f.P, f.R, f.P_tilde, f.R_tilde):
        assert np.max(np.abs(M - M.conj().T)) < 1e-12 * max(1.0, np.max(np.abs(M)))
    for M in (f.P[:6, :6], f.R[:6, :6]):
        assert np.linalg.eigvalsh(M)[0] >= -1e-10 * max(1.0, np.linalg.norm(M))
    assert f.p3 >= 0 and f.r3 >= 0


def test_eval_affine_decreasing_in_gamma_eta():
    rng = np.random.default_rng(11)
    ch, beta, phi = _rank1_instance(rng, 3, 4)
    B, Q = np.outer(beta, beta.conj()), lifted_gram(phi)
    f = build_phase_forms(ch, B)
    gammas = np.array([0.0, 1.0, 2.0, 5.0])
    vals = np.array([eval_S_phase(Q, f, g, SO, SF) for g in gammas])
    diffs = np.diff(vals) / np.diff(gammas)
    assert np.allclose(diffs, diffs[0], rtol=1e-9)
    assert diffs[0] < 0
    etas = np.array([0.5, 1.0, 2.0])
    tvals = np.array([eval_T_phase(Q, f, e, SO, SE) for e in etas])
    tdiffs = np.diff(tvals) / np.diff(etas)
    assert np.allclose(tdiffs, tdiffs[0], rtol=1e-9) and tdiffs[0] < 0


def test_scaling_linearity_in_b():
    rng = np.random.default_rng(12)
    ch, beta, phi = _rank1_instance(rng, 3, 4)
    B, Q = np.outer(beta, beta.conj()), lifted_gram(phi)
    wf = build_weight_forms(ch, Q)
    s1 = eval_S_weight(B, wf, 0.0, SO, SF)
    s3 = eval_S_weight(3.0 * B, wf, 0.0, SO, SF)
    assert s3 == pytest.approx(3.0 * s1, rel=1e-12)


def test_non_hermitian_rejected():
    rng = np.random.default_rng(13)
    ch = synth_channels(rng, 3, 4)
    bad = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    with pytest.raises(ValueError, match="Hermitian"):
        build_phase_forms(ch, bad)
    with pytest.raises(ValueError, match="Hermitian"):
        eval_S_phase(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)),
                     build_phase_forms(ch, np.eye(3)), GAMMA, SO, SF)


def test_dimension_errors():
    rng = np.random.default_rng(14)
    ch = synth_channels(rng, 3, 4)
    with pytest.raises(ValueError, match="3 x 3"):
        build_phase_forms(ch, np.eye(4))
    with pytest.raises(ValueError, match="5 x 5"):
        build_weight_forms(ch, np.eye(6))
    with pytest.raises(ValueError, match="corner"):
        build_weight_forms(ch, 2.0 * np.eye(5))


def test_lift_unlift_roundtrip():
    rng = np.random.default_rng(15)
    phi = np.exp(2j * np.pi * rng.random(6))
    xi = lift_phase(phi)
    assert xi[-1] == 1.0 + 0j
    np.testing.assert_allclose(unlift_phase(np.exp(0.7j) * 2.5 * xi, 6), phi, rtol=1e-12)


def test_weight_forms_zero_h_i_structure():
    # with no reflected path only the trailing column of Kmat survives
    rng = np.random.default_rng(16)
    ch = synth_channels(rng, 3, 2)
    ch = type(ch)(H_I=np.zeros((2, 3), complex), h_IF=ch.h_IF, h_IE=ch.h_IE,
                  h_f=ch.h_f, h_e=ch.h_e, alpha=ch.alpha)
    wf = build_weight_forms(ch, lifted_gram(np.ones(2)))
    np.testing.assert_array_equal(wf.Kmat[:, :2], 0)
    np.testing.assert_allclose(wf.Kmat[:, 2], ch.alpha.conj() * ch.h_f.conj())
