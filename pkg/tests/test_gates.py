import numpy as np
import pytest

from tcgsim import gates as g
from tcgsim.core import HilbertSpace

PAULI_X = np.array([[0, 1], [1, 0]])
PAULI_Y = np.array([[0, -1j], [1j, 0]])


def _expm_rotation(theta, phi):
    n = np.cos(phi) * PAULI_X + np.sin(phi) * PAULI_Y
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * n


@pytest.mark.parametrize("theta,phi", [(0.3, 0.0), (np.pi, 1.1), (2.2, -0.7)])
def test_two_level_rotations(theta, phi):
    r = _expm_rotation(theta, phi)
    a = g.x01(theta, phi).matrix
    b = g.x12(theta, phi).matrix
    assert np.allclose(a[:2, :2], r) and a[2, 2] == 1
    assert np.allclose(b[1:, 1:], r) and b[0, 0] == 1
    assert np.allclose(a.conj().T @ a, np.eye(3))


def test_bare_sin_drops_minus_i():
    a = g.x12(0.8, 0.4, bare_sin=True).matrix
    b = g.x12(0.8, 0.4).matrix
    assert np.allclose(a[1, 2], 1j * b[1, 2])
    assert np.allclose(a[2, 1], 1j * b[2, 1])
    assert not np.allclose(a.conj().T @ a, np.eye(3))


def test_rotation_on_dim4_leaves_level3():
    m = g.x12(np.pi, dim=4).matrix
    assert m[3, 3] == 1 and np.abs(m[3, :3]).max() == 0


def test_cp_exchange():
    sp = HilbertSpace((3, 3))
    m = g.sqrt_cz().matrix
    assert abs(m[sp.index((0, 2)), sp.index((1, 1))]) == pytest.approx(1)
    m0 = g.sqrt_cz(excursion_site=0).matrix
    assert abs(m0[sp.index((2, 0)), sp.index((1, 1))]) == pytest.approx(1)
    with pytest.raises(ValueError):
        g.cp(1.0, excursion_site=2)


def test_cz_is_diagonal_sign():
    m = g.cz().matrix
    sp = HilbertSpace((3, 3))
    idx = sp.computational_indices()
    assert np.allclose(m[np.ix_(idx, idx)], np.diag([1, 1, 1, -1]))


def test_su2_matches_u3():
    t, p, l = 0.7, 0.2, -1.3
    u3 = np.array([[np.cos(t / 2), -np.exp(1j * l) * np.sin(t / 2)],
                   [np.exp(1j * p) * np.sin(t / 2), np.exp(1j * (p + l)) * np.cos(t / 2)]])
    assert np.allclose(g.su2(t, p, l).matrix[:2, :2], u3)


def test_ccp_structure():
    m = g.sqrt_ccz().matrix
    assert np.allclose(m.conj().T @ m, np.eye(27))
    sp = HilbertSpace((3, 3, 3))
    assert abs(m[sp.index((0, 2, 1)), sp.index((1, 1, 1))]) == pytest.approx(1)
    a = b = 1 / np.sqrt(2)
    m4 = g.ccp(np.pi, a, b).matrix
    sp4 = HilbertSpace((3, 4, 3))
    col = m4[:, sp4.index((1, 1, 1))]
    assert abs(col[sp4.index((0, 3, 0))]) ** 2 == pytest.approx(0.5)
    with pytest.raises(ValueError):
        g.ccp(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        g.ccp(1.0, a, b, dims=(3, 3, 3))


def test_z_phases_length_check():
    assert np.allclose(g.z_phases([0, np.pi]).matrix, np.diag([1, -1]))
    with pytest.raises(ValueError):
        g.z_phases([0, 1], dim=3)


def test_gate_def_metadata():
    d = g.gate_def("x12", g.x12(1.0), {"theta": 1.0}, "single_qudit")
    assert d.duration_ns == 30.0 and d.arity == 1
    assert np.allclose(d.operator().matrix, g.x12(1.0).matrix)
