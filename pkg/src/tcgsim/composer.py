"""Transition-pathway composition and the named composite gates.

A path lists factors in written (operator-product) order: the last step acts
first on a state.  The symmetric composition appends the mirrored prefix,

    U_s = T1 I1 ... T_{N-1} I_{N-1} T_N I_{N-1} T_{N-1} ... I1 T1,

and the short path keeps only the forward half T1 I1 ... T_N.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import gates as g
from .core import (HilbertSpace, Operator, embed, embed_matrix, restrict_computational,
                   distance_up_to_global_phase, STRUCT_TOL)

TRANSITION = "T"
INTERNAL = "I"


class PathError(ValueError):
    pass


def computational_projector(space: HilbertSpace) -> np.ndarray:
    p = np.zeros(space.dim)
    p[space.computational_indices()] = 1
    return np.diag(p)


def is_block_diagonal(op: Operator, tol: float = STRUCT_TOL) -> bool:
    p = computational_projector(op.space)
    m = op.matrix
    return bool(np.abs(p @ m - m @ p).max() <= tol)


@dataclass(frozen=True)
class PathStep:
    kind: str
    op: Operator
    label: str = ""
    # optional distinct gate for the mirrored half (e.g. X01 with phi2 vs phi1)
    mirror: Optional[Operator] = None

    @property
    def moves_population(self) -> bool:
        """False for degenerate parameter points (e.g. X12 at theta=0)."""
        return not is_block_diagonal(self.op)


@dataclass(frozen=True)
class PathSpec:
    steps: tuple
    space: HilbertSpace

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise PathError("empty path")
        for i, st in enumerate(steps):
            if st.op.space != self.space:
                raise PathError(f"step {i} ({st.label}) acts on {st.op.space.dims}, path space is {self.space.dims}")
        object.__setattr__(self, "steps", steps)

    def validate(self) -> None:
        for i, st in enumerate(self.steps):
            if st.kind not in (TRANSITION, INTERNAL):
                raise PathError(f"step {i} ({st.label}) has unknown kind {st.kind!r}")
            ops = [st.op] + ([st.mirror] if st.mirror is not None else [])
            if st.kind == INTERNAL and not all(is_block_diagonal(op) for op in ops):
                raise PathError(f"step {i} ({st.label}) declared internal but mixes S_c and S_uc")

    def reversed(self) -> "PathSpec":
        return PathSpec(tuple(reversed(self.steps)), self.space)


@dataclass(frozen=True)
class ComposedGate:
    name: str
    operator: Operator
    restricted: Operator
    symmetric: bool
    provenance: Optional[PathSpec] = field(default=None, repr=False)
    params: dict = field(default_factory=dict)

    @property
    def restricted_unitary(self) -> bool:
        return self.restricted.unitary

    def leakage(self) -> float:
        """Largest population left outside S_c over all S_c basis inputs."""
        idx = self.operator.space.computational_indices()
        cols = self.operator.matrix[:, idx]
        inside = np.abs(cols[idx, :]) ** 2
        return float(np.max(1 - inside.sum(axis=0)))


def _product(factors) -> np.ndarray:
    out = np.eye(factors[0].space.dim, dtype=complex)
    for f in factors:
        out = out @ f.matrix
    return out


def compose_symmetric(path: PathSpec, name: str = "U_s", params: Optional[dict] = None) -> ComposedGate:
    path.validate()
    forward = [st.op for st in path.steps]
    mirrored = [st.mirror if st.mirror is not None else st.op for st in reversed(path.steps[:-1])]
    full = Operator(path.space, _product(forward + mirrored))
    return ComposedGate(name, full, restrict_computational(full), True, path, dict(params or {}))


def compose_short_path(path: PathSpec, name: str = "U_SP", params: Optional[dict] = None) -> ComposedGate:
    path.validate()
    full = Operator(path.space, _product([st.op for st in path.steps]))
    return ComposedGate(name, full, restrict_computational(full), False, path, dict(params or {}))


def _on(op: Operator, site: int, dims) -> Operator:
    return embed(op, [site], HilbertSpace(dims))


def _other(site: int) -> int:
    return 1 - site


def cu_path(theta, phi, phi_c1=0.0, phi_c2=0.0, control_site=0, bare_sin=False, phi_q=0.0) -> PathSpec:
    dims = (3, 3)
    sp = HilbertSpace(dims)
    sq = g.sqrt_cz(excursion_site=control_site, phi_q=phi_q)
    mid = _on(g.x12(theta, phi, bare_sin=bare_sin), control_site, dims)
    if phi_c1 or phi_c2:
        # Z(phi_c2) on the target's |1>, Z(phi_c1) on the control's |2> after X12
        z = (_on(g.z_phases([0, phi_c2, 0]), _other(control_site), dims)
             @ _on(g.z_phases([0, 0, phi_c1]), control_site, dims))
        mid = z @ mid
    return PathSpec((PathStep(TRANSITION, sq, "sqrt_cz"), PathStep(TRANSITION, mid, "x12")), sp)


def cu(theta: float, phi: float = 0.0, phi_c1: float = 0.0, phi_c2: float = 0.0,
       control_site: int = 0, bare_sin: bool = False, phi_q: float = 0.0) -> ComposedGate:
    """CU = sqrt(CZ) . X12(theta, phi) on the control . sqrt(CZ).

    The control site hosts the |2> excursion; control_site=0 gives the
    rotation block on {|10>,|11>}.
    """
    path = cu_path(theta, phi, phi_c1, phi_c2, control_site, bare_sin, phi_q)
    return compose_symmetric(path, "cu", dict(theta=theta, phi=phi, phi_c1=phi_c1, phi_c2=phi_c2))


def spcu(theta: float, phi: float = 0.0, control_site: int = 0, bare_sin: bool = False,
         phi_q: float = 0.0) -> ComposedGate:
    """Short-path CU as the operator product X12 . sqrt(CZ) (sqrt(CZ) acts first)."""
    dims = (3, 3)
    path = PathSpec((PathStep(TRANSITION, _on(g.x12(theta, phi, bare_sin=bare_sin), control_site, dims), "x12"),
                     PathStep(TRANSITION, g.sqrt_cz(control_site, phi_q), "sqrt_cz")), HilbertSpace(dims))
    return compose_short_path(path, "spcu", dict(theta=theta, phi=phi))


def spcu_prep(theta: float, phi: float = 0.0, control_site: int = 0, bare_sin: bool = False,
              phi_q: float = 0.0) -> ComposedGate:
    """Short path of the CU pathway, sqrt(CZ) . X12: drives |10> -> |11> for state preparation."""
    path = cu_path(theta, phi, 0.0, 0.0, control_site, bare_sin, phi_q)
    return compose_short_path(path, "spcu_prep", dict(theta=theta, phi=phi))


def cu_prime(theta: float, phi1: float = 0.0, phi2: float = 0.0, control_site: int = 0,
             bare_sin: bool = False, phi_q: float = 0.0) -> ComposedGate:
    """CU' = sqrt(CZ) . X01(pi, phi1) . CP(theta) . X01(pi, phi2) . sqrt(CZ).

    The target (non-control) site hosts the excursion and receives the X01 pulses.
    """
    dims = (3, 3)
    exc = _other(control_site)
    x1 = _on(g.x01(np.pi, phi1, bare_sin=bare_sin), exc, dims)
    x2 = _on(g.x01(np.pi, phi2, bare_sin=bare_sin), exc, dims)
    path = PathSpec((PathStep(TRANSITION, g.sqrt_cz(exc, phi_q), "sqrt_cz"),
                     PathStep(INTERNAL, x1, "x01", mirror=x2),
                     PathStep(TRANSITION, g.cp(theta, 0.0, exc), "cp")), HilbertSpace(dims))
    return compose_symmetric(path, "cu_prime", dict(theta=theta, phi1=phi1, phi2=phi2))


def cu_qutrit(theta: float, phi1: float = 0.0, phi2: float = 0.0, phi_q: float = 0.0,
              excursion_site: int = 1, bare_sin: bool = False) -> ComposedGate:
    """sqrt(CZ) . X12(pi, phi1) . CP(theta, phi_q) . X12(pi, phi2) . sqrt(CZ): exchanges |01> and |12>."""
    dims = (3, 3)
    e = excursion_site
    x1 = _on(g.x12(np.pi, phi1, bare_sin=bare_sin), e, dims)
    x2 = _on(g.x12(np.pi, phi2, bare_sin=bare_sin), e, dims)
    path = PathSpec((PathStep(TRANSITION, g.sqrt_cz(e), "sqrt_cz"),
                     PathStep(TRANSITION, x1, "x12", mirror=x2),
                     PathStep(TRANSITION, g.cp(theta, phi_q, e), "cp")), HilbertSpace(dims))
    return compose_symmetric(path, "cu_qutrit", dict(theta=theta, phi1=phi1, phi2=phi2, phi_q=phi_q))


def swap_phases(phi1, phi2, phi3, phi4):
    phi_x = -phi1 + phi2 - phi3 + phi4
    phi_y = phi1 + 2 * phi2 - 2 * phi3 - phi4
    return phi_x, phi_y


def swap_family(theta: float, phi1: float = 0.0, phi2: float = 0.0, phi3: float = 0.0,
                phi4: float = 0.0, phi_q: float = 0.0, excursion_site: int = 1,
                bare_sin: bool = False) -> ComposedGate:
    """X12(pi,phi1) . X01(pi,phi2) . CP(theta,phi_q) . X01(pi,phi3) . X12(pi,phi4)."""
    dims = (3, 3)
    e = excursion_site
    on = lambda op: _on(op, e, dims)
    path = PathSpec((PathStep(TRANSITION, on(g.x12(np.pi, phi1, bare_sin=bare_sin)), "x12",
                              mirror=on(g.x12(np.pi, phi4, bare_sin=bare_sin))),
                     PathStep(INTERNAL, on(g.x01(np.pi, phi2, bare_sin=bare_sin)), "x01",
                              mirror=on(g.x01(np.pi, phi3, bare_sin=bare_sin))),
                     PathStep(TRANSITION, g.cp(theta, phi_q, e), "cp")), HilbertSpace(dims))
    phi_x, phi_y = swap_phases(phi1, phi2, phi3, phi4)
    return compose_symmetric(path, "swap_family", dict(theta=theta, phi1=phi1, phi2=phi2, phi3=phi3,
                                                        phi4=phi4, phi_x=phi_x, phi_y=phi_y))


def ccu(theta: float, phi1: float = 0.0, phi2: float = 0.0, mix_a: complex = 1.0,
        mix_b: complex = 0.0, bare_sin: bool = False) -> ComposedGate:
    """sqrt(CCZ) . X01(pi,phi1) . CCP(theta) . X01(pi,phi2) . sqrt(CCZ) with X01 on the middle site."""
    sq = g.sqrt_ccz(mix_a, mix_b)
    dims = sq.space.dims
    x1 = embed(g.x01(np.pi, phi1, dim=dims[1], bare_sin=bare_sin), [1], HilbertSpace(dims))
    x2 = embed(g.x01(np.pi, phi2, dim=dims[1], bare_sin=bare_sin), [1], HilbertSpace(dims))
    path = PathSpec((PathStep(TRANSITION, sq, "sqrt_ccz"),
                     PathStep(INTERNAL, x1, "x01", mirror=x2),
                     PathStep(TRANSITION, g.ccp(theta, mix_a, mix_b, dims), "ccp")), HilbertSpace(dims))
    return compose_symmetric(path, "ccu", dict(theta=theta, phi1=phi1, phi2=phi2))


def cnot_frame_correction(zeta: float, control_site: int = 0) -> np.ndarray:
    """Single-site Z on the target |1> level, restricted to S_c (4x4)."""
    z = np.diag([1.0, np.exp(1j * zeta)])
    return np.kron(np.eye(2), z) if control_site == 0 else np.kron(z, np.eye(2))


def path_independence_check(zeta: float, control_site: int = 0) -> float:
    """Residual between CNOT built with sqrt(CZ) phase phi_q=zeta and the
    zeta=0 CNOT seen in a target frame rotated by Z(zeta).

    CNOT_zeta = Z_zeta . CNOT_0 . Z_zeta^dag on the target site.
    """
    a = cu(np.pi, 0.0, control_site=control_site, phi_q=zeta).restricted.matrix
    b = cu(np.pi, 0.0, control_site=control_site).restricted.matrix
    z = cnot_frame_correction(zeta, control_site)
    return distance_up_to_global_phase(a, z @ b @ z.conj().T)
