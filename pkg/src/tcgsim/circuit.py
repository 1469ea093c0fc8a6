"""Circuit representation, ASAP scheduling, gate accounting and execution.

Gate instances are stored in time order.  Composite gates take their sites as
[control, target] (or [a, b] / [a, mid, b]) and can be expanded into the
component pulses they are built from.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import composer as comp
from . import gates as g
from .core import (DensityMatrix, HilbertSpace, Operator, StateVector, embed_matrix)

SCHEMES = ("CZ", "CU", "SPCU", "TCG", "Clifford")


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class GateSpec:
    name: str
    arity: int
    gate_class: str  # single_qudit | two_qudit | three_qudit | composite
    defaults: dict
    build: Callable  # (params, dims) -> ndarray
    duration_ns: float
    expand: Optional[Callable] = None  # (params, sites) -> list of GateInstance


@dataclass(frozen=True)
class GateInstance:
    gate: str
    params: dict
    sites: tuple

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        object.__setattr__(self, "params", dict(self.params))

    def __hash__(self):
        return hash((self.gate, tuple(sorted(self.params.items())), self.sites))

    @property
    def spec(self) -> GateSpec:
        return gate_spec(self.gate)

    def full_params(self) -> dict:
        p = dict(self.spec.defaults)
        p.update(self.params)
        return p

    def matrix(self, dims: Sequence[int]) -> np.ndarray:
        return _cached_matrix(self.gate, _freeze(self.full_params()), tuple(dims))

    @property
    def duration_ns(self) -> float:
        return float(self.params.get("duration_ns", self.spec.duration_ns))


def _freeze(p: dict) -> tuple:
    return tuple(sorted((k, tuple(v) if isinstance(v, list) else v) for k, v in p.items()))


@lru_cache(maxsize=4096)
def _cached_matrix(name, frozen, dims):
    p = {k: (list(v) if isinstance(v, tuple) else v) for k, v in frozen}
    m = gate_spec(name).build(p, dims)
    m = np.asarray(m, dtype=complex)
    m.setflags(write=False)
    return m


# ---------------------------------------------------------------- registry

def _pauli_x(dim):
    m = np.eye(dim, dtype=complex)
    m[:2, :2] = [[0, 1], [1, 0]]
    return m


def _diag01(dim, phase):
    m = np.eye(dim, dtype=complex)
    m[1, 1] = np.exp(1j * phase)
    return m


def _cnot(dims):
    """Textbook CNOT on {0,1} labels, identity on every state with a level >= 2."""
    sp = HilbertSpace(dims)
    m = np.eye(sp.dim, dtype=complex)
    for c in range(2):
        for t in range(2):
            if c == 1:
                i, j = sp.index((1, t)), sp.index((1, 1 - t))
                m[i, i] = 0
                m[j, i] = 1
    return m


def _cp_build(p, dims):
    if len(dims) != 2 or min(dims) < 3:
        raise ValueError(f"two-qudit exchange needs local dims >= 3, got {tuple(dims)}")
    return g.cp(p["theta"], p["phi_q"], p["excursion"], tuple(dims)).matrix


def _composite(builder, expand):
    def build(p, dims):
        try:
            cg = builder(p)
        except ValueError:
            cg = None
        if cg is not None and tuple(dims) == cg.operator.space.dims:
            return cg.operator.matrix
        # other local dims (e.g. a |3> level for leakage): product of the components
        local = tuple(range(len(dims)))
        u = np.eye(int(np.prod(dims)), dtype=complex)
        for op in expand(p, local):
            u = embed_matrix(op.matrix([dims[s] for s in op.sites]), op.sites, dims) @ u
        return u
    return build


def _gi(name, sites, **params):
    return GateInstance(name, params, tuple(sites))


def _expand_cu(p, s):
    c, t = s
    out = [_gi("sqrt_cz", (c, t), excursion=0, phi_q=p["phi_q"]),
           _gi("x12", (c,), theta=p["theta"], phi=p["phi"])]
    if p["phi_c1"]:
        out.append(_gi("z", (c,), phases=[0.0, 0.0, p["phi_c1"]]))
    if p["phi_c2"]:
        out.append(_gi("z", (t,), phases=[0.0, p["phi_c2"], 0.0]))
    out.append(_gi("sqrt_cz", (c, t), excursion=0, phi_q=p["phi_q"]))
    return out


def _expand_spcu(p, s):
    c, t = s
    return [_gi("sqrt_cz", (c, t), excursion=0, phi_q=p["phi_q"]),
            _gi("x12", (c,), theta=p["theta"], phi=p["phi"])]


def _expand_spcu_prep(p, s):
    c, t = s
    return [_gi("x12", (c,), theta=p["theta"], phi=p["phi"]),
            _gi("sqrt_cz", (c, t), excursion=0, phi_q=p["phi_q"])]


def _expand_cu_prime(p, s):
    c, t = s
    return [_gi("sqrt_cz", (c, t), excursion=1, phi_q=p["phi_q"]),
            _gi("x01", (t,), theta=np.pi, phi=p["phi2"]),
            _gi("cp", (c, t), theta=p["theta"], phi_q=0.0, excursion=1),
            _gi("x01", (t,), theta=np.pi, phi=p["phi1"]),
            _gi("sqrt_cz", (c, t), excursion=1, phi_q=p["phi_q"])]


def _expand_cu_qutrit(p, s):
    e = p["excursion"]
    es = s[e]
    return [_gi("sqrt_cz", s, excursion=e, phi_q=0.0),
            _gi("x12", (es,), theta=np.pi, phi=p["phi2"]),
            _gi("cp", s, theta=p["theta"], phi_q=p["phi_q"], excursion=e),
            _gi("x12", (es,), theta=np.pi, phi=p["phi1"]),
            _gi("sqrt_cz", s, excursion=e, phi_q=0.0)]


def _expand_swap(p, s):
    e = p["excursion"]
    es = s[e]
    return [_gi("x12", (es,), theta=np.pi, phi=p["phi4"]),
            _gi("x01", (es,), theta=np.pi, phi=p["phi3"]),
            _gi("cp", s, theta=p["theta"], phi_q=p["phi_q"], excursion=e),
            _gi("x01", (es,), theta=np.pi, phi=p["phi2"]),
            _gi("x12", (es,), theta=np.pi, phi=p["phi1"])]


def _expand_ccu(p, s):
    mix = dict(mix_re=p["mix_re"], mix_im=p["mix_im"])
    return [_gi("sqrt_ccz", s, **mix),
            _gi("x01", (s[1],), theta=np.pi, phi=p["phi2"]),
            _gi("ccp", s, theta=p["theta"], **mix),
            _gi("x01", (s[1],), theta=np.pi, phi=p["phi1"]),
            _gi("sqrt_ccz", s, **mix)]


def _mix(p):
    a = complex(p["mix_re"], p["mix_im"])
    b = np.sqrt(max(0.0, 1 - abs(a) ** 2))
    return a, b


def _ccp_build(theta_key=None):
    def build(p, dims):
        a, b = _mix(p)
        theta = np.pi if theta_key is None else p[theta_key]
        return g.ccp(theta, a, b, tuple(dims)).matrix
    return build


def _ccu_builder(p):
    a, b = _mix(p)
    return comp.ccu(p["theta"], p["phi1"], p["phi2"], a, b)


S30, T40 = g.DURATION_NS["single_qudit"], g.DURATION_NS["two_qudit"]
TCG_SLOT_NS = g.CU_DURATION_NS / 3
_REGISTRY: Dict[str, GateSpec] = {}


def register(spec: GateSpec) -> None:
    _REGISTRY[spec.name] = spec


def gate_spec(name: str) -> GateSpec:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown gate {name!r}") from None


def gate_names() -> List[str]:
    return sorted(_REGISTRY)


for _spec in [
    GateSpec("x01", 1, "single_qudit", dict(theta=np.pi, phi=0.0),
             lambda p, d: g.x01(p["theta"], p["phi"], d[0]).matrix, S30),
    GateSpec("x12", 1, "single_qudit", dict(theta=np.pi, phi=0.0),
             lambda p, d: g.x12(p["theta"], p["phi"], d[0]).matrix, S30),
    GateSpec("ry", 1, "single_qudit", dict(theta=0.0),
             lambda p, d: g.x01(p["theta"], np.pi / 2, d[0]).matrix, S30),
    GateSpec("su2", 1, "single_qudit", dict(theta=0.0, phi=0.0, lam=0.0),
             lambda p, d: g.su2(p["theta"], p["phi"], p["lam"], d[0]).matrix, S30),
    GateSpec("z", 1, "single_qudit", dict(phases=[0.0, 0.0, 0.0]),
             lambda p, d: np.diag(np.exp(1j * np.array(list(p["phases"]) + [0.0] * (d[0] - len(p["phases"]))))), S30),
    GateSpec("h", 1, "single_qudit", {}, lambda p, d: g.hadamard(d[0]).matrix, S30),
    GateSpec("x", 1, "single_qudit", {}, lambda p, d: _pauli_x(d[0]), S30),
    GateSpec("t", 1, "single_qudit", {}, lambda p, d: _diag01(d[0], np.pi / 4), S30),
    GateSpec("tdg", 1, "single_qudit", {}, lambda p, d: _diag01(d[0], -np.pi / 4), S30),
    GateSpec("cp", 2, "two_qudit", dict(theta=np.pi, phi_q=0.0, excursion=1), _cp_build, T40),
    GateSpec("sqrt_cz", 2, "two_qudit", dict(phi_q=0.0, excursion=1),
             lambda p, d: _cp_build(dict(p, theta=np.pi), d), T40),
    GateSpec("cz", 2, "two_qudit", dict(excursion=1),
             lambda p, d: _cp_build(dict(p, theta=2 * np.pi, phi_q=0.0), d), T40),
    GateSpec("cnot", 2, "two_qudit", {}, lambda p, d: _cnot(d), T40),
    GateSpec("ccp", 3, "three_qudit", dict(theta=np.pi, mix_re=1.0, mix_im=0.0), _ccp_build("theta"), T40),
    GateSpec("sqrt_ccz", 3, "three_qudit", dict(mix_re=1.0, mix_im=0.0), _ccp_build(), T40),
    GateSpec("cu", 2, "composite", dict(theta=np.pi, phi=0.0, phi_c1=0.0, phi_c2=0.0, phi_q=0.0),
             _composite(lambda p: comp.cu(p["theta"], p["phi"], p["phi_c1"], p["phi_c2"], phi_q=p["phi_q"]), _expand_cu),
             g.CU_DURATION_NS, _expand_cu),
    GateSpec("spcu", 2, "composite", dict(theta=np.pi, phi=0.0, phi_q=0.0),
             _composite(lambda p: comp.spcu(p["theta"], p["phi"], phi_q=p["phi_q"]), _expand_spcu), 2 * S30, _expand_spcu),
    GateSpec("spcu_prep", 2, "composite", dict(theta=np.pi, phi=0.0, phi_q=0.0),
             _composite(lambda p: comp.spcu_prep(p["theta"], p["phi"], phi_q=p["phi_q"]), _expand_spcu_prep), 2 * S30,
             _expand_spcu_prep),
    GateSpec("cu_prime", 2, "composite", dict(theta=np.pi, phi1=0.0, phi2=0.0, phi_q=0.0),
             _composite(lambda p: comp.cu_prime(p["theta"], p["phi1"], p["phi2"], phi_q=p["phi_q"]), _expand_cu_prime),
             5 * S30, _expand_cu_prime),
    GateSpec("cu_qutrit", 2, "composite", dict(theta=np.pi, phi1=0.0, phi2=0.0, phi_q=0.0, excursion=1),
             _composite(lambda p: comp.cu_qutrit(p["theta"], p["phi1"], p["phi2"], p["phi_q"], p["excursion"]),
                        _expand_cu_qutrit),
             5 * S30, _expand_cu_qutrit),
    GateSpec("swap_family", 2, "composite",
             dict(theta=np.pi, phi1=0.0, phi2=0.0, phi3=0.0, phi4=0.0, phi_q=0.0, excursion=1),
             _composite(lambda p: comp.swap_family(p["theta"], p["phi1"], p["phi2"], p["phi3"], p["phi4"],
                                                   p["phi_q"], p["excursion"]), _expand_swap),
             5 * S30, _expand_swap),
    GateSpec("ccu", 3, "composite", dict(theta=np.pi, phi1=0.0, phi2=0.0, mix_re=1.0, mix_im=0.0),
             _composite(_ccu_builder, _expand_ccu), 5 * S30, _expand_ccu),
]:
    register(_spec)


# ---------------------------------------------------------------- circuit

@dataclass(frozen=True)
class Circuit:
    dims: tuple
    ops: tuple = ()
    names: tuple = ()
    topology: tuple = ()
    scheme: str = "TCG"
    enforce_topology: bool = False

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        names = tuple(self.names) or tuple(f"q{i}" for i in range(len(dims)))
        topo = tuple(tuple(sorted((int(a), int(b)))) for a, b in self.topology) if self.topology \
            else tuple((i, i + 1) for i in range(len(dims) - 1))
        if len(names) != len(dims):
            raise ValueError("one name per qudit required")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "topology", topo)
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            self._check(op)

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace(self.dims)

    def _check(self, op: GateInstance) -> None:
        spec = op.spec
        if len(op.sites) != spec.arity:
            raise ValueError(f"{op.gate} takes {spec.arity} sites, got {op.sites}")
        if len(set(op.sites)) != len(op.sites) or any(s < 0 or s >= len(self.dims) for s in op.sites):
            raise ValueError(f"bad sites {op.sites} for {op.gate}")
        if self.enforce_topology and len(op.sites) > 1:
            edges = set(self.topology)
            for a, b in zip(op.sites, op.sites[1:]):
                if tuple(sorted((a, b))) not in edges:
                    raise TopologyError(f"{op.gate} on {op.sites}: ({a},{b}) not in topology")

    def append(self, gate: str, sites, **params) -> "Circuit":
        op = GateInstance(gate, params, tuple(sites))
        return Circuit(self.dims, self.ops + (op,), self.names, self.topology, self.scheme, self.enforce_topology)

    def extend(self, ops) -> "Circuit":
        return Circuit(self.dims, self.ops + tuple(ops), self.names, self.topology, self.scheme,
                       self.enforce_topology)

    def expanded(self) -> "Circuit":
        out = []
        for op in self.ops:
            spec = op.spec
            if spec.expand is None:
                out.append(op)
            else:
                # pulses inside a composite run at the single-qudit slot length
                out.extend(GateInstance(c.gate, dict(c.params, duration_ns=TCG_SLOT_NS), c.sites)
                           for c in spec.expand(op.full_params(), op.sites))
        return Circuit(self.dims, out, self.names, self.topology, self.scheme, self.enforce_topology)

    # serialization
    def to_dict(self) -> dict:
        return {
            "qudits": [{"name": n, "dim": d} for n, d in zip(self.names, self.dims)],
            "topology": [list(e) for e in self.topology],
            "ops": [{"gate": op.gate, "params": {k: (list(v) if isinstance(v, tuple) else v)
                                                  for k, v in op.params.items()},
                     "sites": list(op.sites)} for op in self.ops],
            "scheme": self.scheme,
            "enforce_topology": self.enforce_topology,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        ops = [GateInstance(o["gate"], o.get("params", {}), tuple(o["sites"])) for o in d["ops"]]
        return cls(tuple(q["dim"] for q in d["qudits"]), ops, tuple(q["name"] for q in d["qudits"]),
                   tuple(tuple(e) for e in d.get("topology", [])), d.get("scheme", "TCG"),
                   bool(d.get("enforce_topology", False)))

    @classmethod
    def from_json(cls, s: str) -> "Circuit":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class Schedule:
    moments: tuple  # tuple of tuples of GateInstance

    @property
    def depth(self) -> int:
        return len(self.moments)

    def moment_duration_ns(self, k: int) -> float:
        return max(op.duration_ns for op in self.moments[k])


def schedule(circuit: Circuit, expand_composites: bool = False) -> Schedule:
    c = circuit.expanded() if expand_composites else circuit
    level: Dict[int, int] = {}
    moments: List[list] = []
    for op in c.ops:
        k = max(level.get(s, 0) for s in op.sites)
        if k == len(moments):
            moments.append([])
        moments[k].append(op)
        for s in op.sites:
            level[s] = k + 1
    return Schedule(tuple(tuple(m) for m in moments))


def depth_and_counts(circuit: Circuit, expand_composites: bool = False) -> dict:
    """N1q single-site ops, N2q multi-site ops (composites count once unless expanded), depth."""
    c = circuit.expanded() if expand_composites else circuit
    n1 = sum(1 for op in c.ops if len(op.sites) == 1)
    n2 = sum(1 for op in c.ops if len(op.sites) > 1)
    return {"N1q": n1, "N2q": n2, "depth": schedule(c).depth}


# ---------------------------------------------------------------- execution

def op_matrix(op: GateInstance, dims: Sequence[int]) -> np.ndarray:
    local = [dims[s] for s in op.sites]
    return embed_matrix(op.matrix(local), op.sites, dims)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    u = np.eye(circuit.space.dim, dtype=complex)
    for op in circuit.ops:
        u = op_matrix(op, circuit.dims) @ u
    return u


def final_state(circuit: Circuit, initial: Optional[StateVector] = None) -> StateVector:
    if initial is None:
        initial = StateVector.basis(circuit.space, (0,) * len(circuit.dims))
    if initial.space != circuit.space:
        raise ValueError("initial state does not match circuit space")
    psi = np.array(initial.amps)
    for op in circuit.ops:
        psi = op_matrix(op, circuit.dims) @ psi
    return StateVector(circuit.space, psi)


def simulate(circuit: Circuit, initial=None, noise=None) -> DensityMatrix:
    """Noiseless: pure-state propagation.  Noisy: per-moment unitary then the
    idle/working channel of every qudit for that moment's duration."""
    if initial is None:
        initial = StateVector.basis(circuit.space, (0,) * len(circuit.dims))
    if initial.space != circuit.space:
        raise ValueError("initial state does not match circuit space")
    if noise is None:
        if isinstance(initial, StateVector):
            return final_state(circuit, initial).density()
        u = circuit_unitary(circuit)
        return DensityMatrix(circuit.space, u @ initial.matrix @ u.conj().T)
    from .noise import apply_noise
    rho = initial.density() if isinstance(initial, StateVector) else initial
    return apply_noise(rho, schedule(circuit, expand_composites=True), noise)


# ---------------------------------------------------------------- truth tables

@dataclass(frozen=True)
class TruthTable:
    matrix: np.ndarray  # rows: outputs, cols: inputs over S_c labels
    labels: tuple

    def column_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=0)


def computational_labels(n: int) -> list:
    return [tuple(int(b) for b in np.binary_repr(k, n)) for k in range(2 ** n)]


def output_populations(circuit: Circuit, labels, noise=None) -> np.ndarray:
    """Columns: S_c output populations for each basis input; leak bin is the last row."""
    sp = circuit.space
    idx = sp.computational_indices()
    u = circuit_unitary(circuit) if noise is None else None
    cols = []
    for lab in labels:
        if u is not None:
            p = np.abs(u[:, sp.index(lab)]) ** 2
        else:
            p = simulate(circuit, StateVector.basis(sp, lab), noise).probabilities()
        sc = p[idx]
        cols.append(np.append(sc, max(0.0, 1 - sc.sum())))
    return np.array(cols).T


def truth_table(circuit: Circuit, shots: Optional[int] = None, seed: int = 0, noise=None) -> TruthTable:
    from .tomography import sample_counts, spawn_rngs
    n = len(circuit.dims)
    labels = computational_labels(n)
    pops = output_populations(circuit, labels, noise)
    if shots is None:
        return TruthTable(pops[:-1], tuple(labels))
    rngs = spawn_rngs(seed, len(labels))
    out = np.zeros((2 ** n, len(labels)))
    for j, rng in enumerate(rngs):
        p = np.clip(pops[:, j], 0, None)
        counts = sample_counts(p / p.sum(), shots, rng)
        out[:, j] = counts[:-1] / shots
    return TruthTable(out, tuple(labels))
