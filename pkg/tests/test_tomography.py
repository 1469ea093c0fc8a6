import numpy as np
import pytest

from tcgsim import composer as comp
from tcgsim import library as lib
from tcgsim import reference as ref
from tcgsim import tomography as tomo
from tcgsim.circuit import Circuit
from tcgsim.core import state_fidelity


def test_sample_counts_edges():
    assert np.all(tomo.sample_counts([0.5, 0.5], 0, 1) == 0)
    c = tomo.sample_counts([1.0, 0.0, 0.0], 777, 3)
    assert list(c) == [777, 0, 0]
    with pytest.raises(ValueError):
        tomo.sample_counts([1.1, -0.1], 10, 0)
    with pytest.raises(ValueError):
        tomo.sample_counts([0.5, 0.4], 10, 0)


def test_sample_counts_binomial_mean():
    shots = 5000
    means = np.mean([tomo.sample_counts([0.5, 0.5], shots, s)[0] for s in range(100)])
    sigma = np.sqrt(shots * 0.25)
    assert abs(means - shots / 2) <= 3 * sigma
    assert np.array_equal(tomo.sample_counts([0.3, 0.7], 100, 5), tomo.sample_counts([0.3, 0.7], 100, 5))


def test_settings_informationally_complete():
    for n in (1, 2, 3):
        assert len(tomo.setting_list(n)) == 3 ** n
        assert tomo._pinv_design(n).shape[0] == 4 ** n


def test_project_psd_nearest():
    rho = np.diag([0.6, 0.5, -0.1]).astype(complex)
    out = tomo.project_psd(rho)
    # the negative weight is taken evenly from the two positive eigenvalues
    assert np.allclose(out, np.diag([0.55, 0.45, 0.0]))
    good = np.diag([0.2, 0.8]).astype(complex)
    assert np.allclose(tomo.project_psd(good), good)
    with pytest.raises(ValueError):
        tomo.project_psd(-np.eye(2))


def test_qst_zero_state():
    rho = tomo.qst(Circuit((3,)))
    assert np.allclose(rho.matrix, [[1, 0], [0, 0]], atol=1e-12)


def test_qst_ghz_exact_and_sampled():
    c = lib.ghz_circuit(3, 0.0, "CU")
    target = tomo.restrict_state(lib.ghz_state(3))
    assert state_fidelity(tomo.qst(c), target) == pytest.approx(1, abs=1e-12)
    assert state_fidelity(tomo.qst(c, shots=5000, seed=4), target) >= 0.99


def test_qst_site_limit():
    with pytest.raises(ValueError):
        tomo.qst(Circuit((3,) * 5))


def test_qpt_identity():
    chi = tomo.qpt(np.eye(9))
    expect = np.zeros((16, 16))
    expect[0, 0] = 1
    assert np.allclose(chi.chi, expect, atol=1e-12)
    assert chi.survival == pytest.approx(1)


def test_qpt_global_phase_invariant():
    u = comp.cu(1.2, 0.3).operator.matrix
    a, b = tomo.qpt(u).chi, tomo.qpt(np.exp(2.1j) * u).chi
    assert np.allclose(a, b, atol=1e-12)


def test_qpt_cnot_fidelity():
    chi = tomo.qpt(comp.cu(np.pi, np.pi))
    assert chi.fidelity(tomo.ChiMatrix(tomo.chi_of_unitary(ref.cnot()))) == pytest.approx(1, abs=1e-9)


def test_qpt_rejects_non_two_site():
    with pytest.raises(ValueError):
        tomo.qpt(Circuit((3, 3, 3)))
    with pytest.raises(ValueError):
        tomo.qpt(np.eye(9), noise=object())


def test_chi_invariants():
    chi = tomo.qpt(comp.cu(0.8, 0.1), shots=2000, seed=1)
    assert np.allclose(chi.chi, chi.chi.conj().T, atol=1e-8)
    assert np.trace(chi.chi).real == pytest.approx(1)
    assert np.linalg.eigvalsh(chi.cp_projected()).min() >= -1e-8


def test_fidelity_monotone_under_depolarizing():
    chi0 = tomo.chi_of_unitary(comp.cu(np.pi / 2, 0.0).restricted.matrix)
    f = [tomo.process_fidelity(tomo.depolarized_chi(chi0, lam), chi0) for lam in np.linspace(0, 1, 11)]
    assert f[0] == pytest.approx(1)
    assert np.all(np.diff(f) < 0)


def test_truth_table_fidelity():
    m0 = lib.comparator_reference_table()
    assert tomo.truth_table_fidelity(m0, m0) == pytest.approx(1)
    assert tomo.truth_table_fidelity(np.zeros((16, 16)), m0) == 0
    with pytest.raises(ValueError):
        tomo.truth_table_fidelity(np.eye(4), np.eye(16))
    rng = np.random.default_rng(2)
    for _ in range(20):
        me = rng.random((16, 16))
        me /= me.sum(axis=0) * rng.uniform(1, 2)
        assert 0 <= tomo.truth_table_fidelity(me, m0) <= 1


def test_feedback_no_error_converges_immediately():
    st = tomo.feedback_calibrate(np.pi, np.pi)
    assert st.iterations == 1 and st.converged


def test_feedback_history_improves():
    st = tomo.feedback_calibrate(np.pi / 2, 0.3, dtheta=0.2, dphi=-0.1)
    assert st.converged
    assert all(b >= a - 1e-12 for a, b in zip(st.history[1:], st.history[2:]))
    with pytest.raises(ValueError):
        tomo.feedback_calibrate(np.pi, 0.0, max_iter=0)


def test_fit_recovers_parameters():
    chi = tomo.qpt(comp.cu(1.3, 0.6))
    th, ph = tomo.fit_cu_parameters(chi, (1.2, 0.5))
    assert th == pytest.approx(1.3, abs=1e-6) and ph == pytest.approx(0.6, abs=1e-6)
