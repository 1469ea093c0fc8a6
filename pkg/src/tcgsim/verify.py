"""Golden-matrix checks of every composite against its closed form.

Each entry composes the gate from its components and reports the maximum
entrywise residual over a parameter grid.  Closed forms written with bare
sin entries are compared against compositions with `bare_sin=True`.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass

import numpy as np

from . import composer as comp
from . import reference as ref
from .core import GOLDEN_TOL

GRID = np.linspace(0, 2 * np.pi, 9)
COARSE = np.linspace(0, 2 * np.pi, 5)


@dataclass(frozen=True)
class Residual:
    name: str
    residual: float
    points: int
    convention: str
    tol: float = GOLDEN_TOL

    @property
    def ok(self) -> bool:
        return bool(self.residual <= self.tol)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


def _mx(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _scan(name, conv, fn, grid) -> Residual:
    worst, n = 0.0, 0
    for pt in grid:
        worst = max(worst, fn(*pt))
        n += 1
    return Residual(name, worst, n, conv)


def golden_checks(bare: bool = True) -> list:
    """bare=False flips the X12/X01 convention (negative control)."""
    N = ref.phase_normalized
    g2 = list(itertools.product(GRID, GRID))
    g4 = list(itertools.product(COARSE, COARSE, [0.0, 0.9, np.pi], [0.0, 2.1]))
    g3 = list(itertools.product(COARSE, COARSE, COARSE))
    g5 = list(itertools.product(COARSE, [0.0, 1.1], [0.4], [2.3, 5.0], COARSE))
    conv = "bare sin" if bare else "rotation (-i)"
    out = [
        _scan("cu", f"control site 0, restricted, {conv}",
              lambda t, p: _mx(comp.cu(t, p, bare_sin=bare).restricted.matrix, ref.cu_reduced(t, p)), g2),
        _scan("spcu", f"control site 0, restricted, {conv}",
              lambda t, p: _mx(comp.spcu(t, p, bare_sin=bare).restricted.matrix, ref.spcu_reduced(t, p)), g2),
        _scan("cu_com", f"control site 1, full 9x9, {conv}",
              lambda t, p: _mx(comp.cu(t, p, control_site=1, bare_sin=bare).operator.matrix,
                               ref.cu_com_full(t, p)), g2),
        _scan("cu_phase_extended", f"control site 1, restricted, {conv}",
              lambda t, p, c1, c2: _mx(comp.cu(t, p, c1, c2, control_site=1, bare_sin=bare).restricted.matrix,
                                       ref.cu_site1_reduced(t, p, c1, c2)), g4),
        _scan("cu_prime", f"full 9x9 and restricted, global phase fixed by <00|U|00>, {conv}",
              lambda t, p1, p2: max(
                  _mx(N(comp.cu_prime(t, p1, p2, bare_sin=bare).operator.matrix), ref.cu_prime_full(t, p1, p2)),
                  _mx(N(comp.cu_prime(t, p1, p2, bare_sin=bare).restricted.matrix),
                      ref.cu_prime_reduced(t, p1, p2))), g3),
        _scan("cu_qutrit", f"full 9x9, phi_q = 0, {conv}",
              lambda t, p1, p2: _mx(comp.cu_qutrit(t, p1, p2, bare_sin=bare).operator.matrix,
                                    ref.cu_qutrit_full(t, p1, p2)), g3),
        _scan("swap_com", f"full 9x9, global phase fixed by <00|U|00>, {conv}",
              lambda t, a, b, c, d: _mx(N(comp.swap_family(t, a, b, c, d, bare_sin=bare).operator.matrix),
                                        ref.swap_com_full(t, a, b, c, d)), g5),
        _scan("swap", f"restricted, global phase fixed by <00|U|00>, {conv}",
              lambda t, a, b, c, d: _mx(N(comp.swap_family(t, a, b, c, d, bare_sin=bare).restricted.matrix),
                                        ref.swap_reduced(t, a, b, c, d)), g5),
    ]
    zetas = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    out.append(Residual("cnot_frame", max(max(comp.path_independence_check(z, s) for z in zetas)
                                          for s in (0, 1)), 32, "Z(zeta) frame conjugation, both control sites"))
    return out


def structural_checks() -> list:
    """Unitarity of restricted symmetric composites (residual of U^dag U - I).
    cu_qutrit is left out: its coupled pair |01>, |12> leaves the qubit subspace."""
    rows = []
    grid = list(itertools.product(COARSE, COARSE))
    for name, mk in (("cu", lambda t, p: comp.cu(t, p)),
                     ("cu_prime", lambda t, p: comp.cu_prime(t, p, 0.3)),
                     ("swap_family", lambda t, p: comp.swap_family(t, p, 0.3, 0.1, 0.7)),
                     ("ccu", lambda t, p: comp.ccu(t, p, 0.4, 1 / np.sqrt(2), 1 / np.sqrt(2)))):
        def f(t, p, mk=mk):
            r = mk(t, p).restricted.matrix
            return _mx(r.conj().T @ r, np.eye(r.shape[0]))
        rows.append(_scan(f"{name}_unitary", "restricted", f, grid))
    return rows
