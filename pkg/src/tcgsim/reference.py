"""Closed-form matrices used as golden values for the composite gates.

Two-qutrit forms use the |02> <-> |11> coupling (excursion on site 1) and are
written in the basis order |00>, |01>, |02>, |10>, ..., |22>.  Reduced forms
are 4x4 over |00>, |01>, |10>, |11>.
"""
from __future__ import annotations

import numpy as np

E = np.exp


def _cs(theta):
    return np.cos(theta / 2), np.sin(theta / 2)


def cu_reduced(theta, phi):
    """CU with control on site 0: rotation block on {|10>, |11>}."""
    c, s = _cs(theta)
    m = np.eye(4, dtype=complex)
    m[2, 2], m[2, 3] = c, -1j * E(-1j * phi) * s
    m[3, 2], m[3, 3] = -1j * E(1j * phi) * s, -c
    return m


def spcu_reduced(theta, phi):
    """Short-path CU: the |11> row vanishes."""
    c, s = _cs(theta)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = m[1, 1] = 1
    m[2, 2], m[2, 3] = c, -1j * E(-1j * phi) * s
    return m


def cu_com_full(theta, phi):
    c, s = _cs(theta)
    m = np.zeros((9, 9), dtype=complex)
    m[0, 0] = m[3, 3] = m[6, 6] = 1
    m[1, 1], m[1, 4] = c, -1j * E(-1j * phi) * s
    m[2, 2], m[2, 5] = -c, -1j * E(-1j * phi) * s
    m[4, 1], m[4, 4] = -1j * E(1j * phi) * s, -c
    m[5, 2], m[5, 5] = -1j * E(1j * phi) * s, c
    m[7, 7], m[7, 8] = c, E(-1j * phi) * s
    m[8, 7], m[8, 8] = E(1j * phi) * s, c
    return m


def cu_site1_reduced(theta, phi, phi_c1=0.0, phi_c2=0.0):
    """CU with control on site 1 (block on {|01>, |11>}), with the optional
    extra phases on |10> and on the |11> diagonal."""
    c, s = _cs(theta)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1
    m[1, 1], m[1, 3] = c, -1j * E(-1j * phi) * s
    m[2, 2] = E(1j * phi_c2)
    m[3, 1], m[3, 3] = -1j * E(1j * phi) * s, -E(1j * phi_c1) * c
    return m


def cu_prime_full(theta, phi1, phi2):
    c, s = _cs(theta)
    d = phi1 - phi2
    m = np.zeros((9, 9), dtype=complex)
    m[0, 0] = m[6, 6] = 1
    m[1, 1] = m[7, 7] = E(2j * d)
    m[2, 2] = -E(2j * d)
    m[3, 3], m[3, 4] = c, -E(-1j * phi2) * s
    m[4, 3], m[4, 4] = -E(1j * phi1) * s, -E(1j * d) * c
    m[5, 5] = m[8, 8] = E(1j * d)
    return m


def cu_prime_reduced(theta, phi1, phi2):
    c, s = _cs(theta)
    d = phi1 - phi2
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1
    m[1, 1] = E(2j * d)
    m[2, 2], m[2, 3] = c, -E(-1j * phi2) * s
    m[3, 2], m[3, 3] = -E(1j * phi1) * s, -E(1j * d) * c
    return m


def cu_qutrit_full(theta, phi1, phi2):
    c, s = _cs(theta)
    m = np.zeros((9, 9), dtype=complex)
    m[0, 0] = m[3, 3] = m[6, 6] = 1
    m[1, 1], m[1, 5] = E(1j * (phi2 - phi1)) * c, -1j * E(-1j * (phi1 + phi2)) * s
    m[2, 2] = -E(1j * (phi2 - phi1))
    m[4, 4] = -E(1j * (phi1 - phi2))
    m[5, 1], m[5, 5] = -1j * E(1j * (phi1 + phi2)) * s, E(1j * (phi1 - phi2)) * c
    m[7, 7] = E(1j * (phi2 - phi1))
    m[8, 8] = E(1j * (phi1 - phi2))
    return m


def swap_com_full(theta, phi1, phi2, phi3, phi4):
    c, s = _cs(theta)
    px = -phi1 + phi2 - phi3 + phi4
    py = phi1 + 2 * phi2 - 2 * phi3 - phi4
    m = np.zeros((9, 9), dtype=complex)
    m[0, 0] = m[6, 6] = 1
    m[1, 1], m[1, 3] = E(1j * px) * c, -1j * E(1j * (phi2 - phi1)) * s
    m[3, 1], m[3, 3] = -1j * E(1j * (phi4 - phi3)) * s, c
    m[2, 2] = m[5, 5] = m[8, 8] = E(1j * py)
    m[4, 4] = m[7, 7] = E(1j * px)
    return m


def swap_reduced(theta, phi1, phi2, phi3, phi4):
    c, s = _cs(theta)
    px = -phi1 + phi2 - phi3 + phi4
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1
    m[1, 1], m[1, 2] = E(1j * px) * c, -1j * E(1j * (phi2 - phi1)) * s
    m[2, 1], m[2, 2] = -1j * E(1j * (phi4 - phi3)) * s, c
    m[3, 3] = E(1j * px)
    return m


def cnot() -> np.ndarray:
    m = np.eye(4, dtype=complex)
    m[[2, 3]] = m[[3, 2]]
    return m


def phase_normalized(u: np.ndarray) -> np.ndarray:
    """Fix the global phase so that <0...0|u|0...0> is real positive."""
    g = u[0, 0]
    return u / (g / abs(g))
