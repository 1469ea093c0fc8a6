"""Component gate generators (single-qudit rotations, phases, CP / sqrt(CZ), CCP).

Two phase conventions exist for the two-level rotations:

* ``bare_sin=False`` (default): exp(-i theta/2 (cos(phi) sx + sin(phi) sy)) on the
  block, i.e. off-diagonals -i e^{-+i phi} sin(theta/2).  Unitary for all angles.
* ``bare_sin=True``: off-diagonals e^{-+i phi} sin(theta/2) with no -i.  Not
  unitary for generic theta; the reference matrices in `tcgsim.reference` are
  plain products of components in this form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import HilbertSpace, Operator

DURATION_NS = {
    "single_qudit": 30.0,
    "two_qudit": 40.0,
    "three_qudit": 40.0,
}
CU_DURATION_NS = 90.0


@dataclass(frozen=True)
class GateDef:
    """A generated gate plus the metadata used for accounting and noise."""
    name: str
    params: dict
    local_dims: tuple
    gate_class: str
    duration_ns: float
    matrix: np.ndarray = field(repr=False, compare=False)

    @property
    def arity(self) -> int:
        return len(self.local_dims)

    def operator(self) -> Operator:
        return Operator(HilbertSpace(self.local_dims), self.matrix)


def _block(dim: int, lo: int, hi: int, theta: float, phi: float, bare_sin: bool) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    m = np.eye(dim, dtype=complex)
    if bare_sin:
        up, dn = np.exp(-1j * phi) * s, np.exp(1j * phi) * s
    else:
        up, dn = -1j * np.exp(-1j * phi) * s, -1j * np.exp(1j * phi) * s
    m[lo, lo] = c
    m[hi, hi] = c
    m[lo, hi] = up
    m[hi, lo] = dn
    return m


def x01(theta: float, phi: float = 0.0, dim: int = 3, bare_sin: bool = False) -> Operator:
    """Rotation on {|0>,|1>}, identity on higher levels."""
    return Operator(HilbertSpace((dim,)), _block(dim, 0, 1, theta, phi, bare_sin))


def x12(theta: float, phi: float = 0.0, dim: int = 3, bare_sin: bool = False) -> Operator:
    """Rotation on {|1>,|2>}, identity on |0> (and |3> if present)."""
    return Operator(HilbertSpace((dim,)), _block(dim, 1, 2, theta, phi, bare_sin))


def z_phases(phases: Sequence[float], dim: Optional[int] = None) -> Operator:
    phases = np.asarray(phases, dtype=float)
    if dim is not None and len(phases) != dim:
        raise ValueError(f"expected {dim} phases, got {len(phases)}")
    return Operator(HilbertSpace((len(phases),)), np.diag(np.exp(1j * phases)))


def hadamard(dim: int = 3) -> Operator:
    m = np.eye(dim, dtype=complex)
    m[:2, :2] = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    return Operator(HilbertSpace((dim,)), m)


def su2(theta: float, phi: float = 0.0, lam: float = 0.0, dim: int = 3) -> Operator:
    """General single-qubit rotation U3(theta, phi, lam) on {|0>,|1>}."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    m = np.eye(dim, dtype=complex)
    m[:2, :2] = [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]]
    return Operator(HilbertSpace((dim,)), m)


def _pair_indices(excursion_site: int, dims=(3, 3)):
    sp = HilbertSpace(dims)
    exc = (0, 2) if excursion_site == 1 else (2, 0)
    return sp, sp.index(exc), sp.index((1, 1))


def cp(theta: float, phi_q: float = 0.0, excursion_site: int = 1, dims=(3, 3)) -> Operator:
    """Two-qutrit exchange between |11> and |02> (or |20> for excursion_site=0)."""
    if excursion_site not in (0, 1):
        raise ValueError("excursion_site must be 0 or 1")
    sp, e, j = _pair_indices(excursion_site, dims)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    m = np.eye(sp.dim, dtype=complex)
    m[e, e] = c
    m[j, j] = c
    m[e, j] = -1j * np.exp(-1j * phi_q) * s
    m[j, e] = -1j * np.exp(1j * phi_q) * s
    return Operator(sp, m)


def sqrt_cz(excursion_site: int = 1, phi_q: float = 0.0, dims=(3, 3)) -> Operator:
    """Full |11> <-> |02> (|20>) population exchange, cp(pi, phi_q)."""
    return cp(np.pi, phi_q, excursion_site, dims)


def cz(dims=(3, 3), excursion_site: int = 1) -> Operator:
    """CZ as a full 2 pi cycle through the excursion state, cp(2 pi)."""
    return cp(2 * np.pi, 0.0, excursion_site, dims)


def ccp(theta: float, mix_a: complex = 1.0, mix_b: complex = 0.0, dims=None) -> Operator:
    """Three-qudit rotation between |111> and a|021> + b|030>.

    The middle site needs four levels whenever b != 0.
    """
    a, b = complex(mix_a), complex(mix_b)
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1) > 1e-10:
        raise ValueError("mix amplitudes must satisfy |a|^2 + |b|^2 = 1")
    if dims is None:
        dims = (3, 4, 3) if b != 0 else (3, 3, 3)
    sp = HilbertSpace(tuple(dims))
    if b != 0 and sp.dims[1] < 4:
        raise ValueError("middle site needs dim 4 to host |3>")
    one = np.zeros(sp.dim, dtype=complex)
    one[sp.index((1, 1, 1))] = 1
    psi = np.zeros(sp.dim, dtype=complex)
    psi[sp.index((0, 2, 1))] = a
    if b != 0:
        psi[sp.index((0, 3, 0))] = b
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    m = (np.eye(sp.dim, dtype=complex)
         + (c - 1) * (np.outer(one, one.conj()) + np.outer(psi, psi.conj()))
         - 1j * s * (np.outer(psi, one.conj()) + np.outer(one, psi.conj())))
    return Operator(sp, m)


def sqrt_ccz(mix_a: complex = 1.0, mix_b: complex = 0.0, dims=None) -> Operator:
    return ccp(np.pi, mix_a, mix_b, dims)


def gate_def(name: str, op: Operator, params: dict, gate_class: str,
             duration_ns: Optional[float] = None) -> GateDef:
    if duration_ns is None:
        duration_ns = DURATION_NS.get(gate_class, 0.0)
    return GateDef(name, dict(params), op.space.dims, gate_class, float(duration_ns), op.matrix)
