"""Reference circuits: GHZ/W preparation, the four-qubit comparator and its
Clifford baseline, rotation/phase/echo scans and the identity-sequence
decoherence harness."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .circuit import Circuit, GateInstance, depth_and_counts, final_state, simulate, truth_table
from .core import HilbertSpace, StateVector
from .noise import NoiseModel, QuditNoise

PREP_SCHEMES = ("CZ", "CU", "SPCU")


def _gi(name, sites, **params):
    return GateInstance(name, params, tuple(sites))


def _cnot_cz(c: int, t: int) -> list:
    return [_gi("h", (t,)), _gi("cz", (c, t)), _gi("h", (t,))]


# ---------------------------------------------------------------- GHZ / W

def ghz_state(m: int, tau: float = 0.0, dim: int = 3) -> StateVector:
    sp = HilbertSpace((dim,) * m)
    amps = np.zeros(sp.dim, dtype=complex)
    amps[sp.index((0,) * m)] = 1 / np.sqrt(2)
    amps[sp.index((1,) * m)] = np.exp(1j * tau) / np.sqrt(2)
    return StateVector(sp, amps)


def ghz_circuit(m: int, tau: float = 0.0, scheme: str = "CU", dim: int = 3) -> Circuit:
    if m < 3:
        raise ValueError("GHZ preparation needs m >= 3")
    if scheme not in PREP_SCHEMES:
        raise ValueError(f"scheme must be one of {PREP_SCHEMES}")
    # (|0> + e^{i tau}|1>)/sqrt2 on the first site
    ops = [_gi("x01", (0,), theta=np.pi / 2, phi=tau + np.pi / 2)]
    for k in range(m - 1):
        if scheme == "CZ":
            ops += _cnot_cz(k, k + 1)
        else:
            ops.append(_gi("cu" if scheme == "CU" else "spcu_prep", (k, k + 1), theta=np.pi, phi=np.pi))
    return Circuit((dim,) * m, ops, scheme=scheme)


def w_amplitudes(m: int, lam: float = 1.0) -> np.ndarray:
    """Amplitude of the term with site k excited."""
    if m == 3:
        if not 0 <= lam <= np.sqrt(2) + 1e-12:
            raise ValueError("lambda must lie in [0, sqrt(2)]")
        return np.array([np.sqrt(max(0.0, 2 - lam ** 2)), lam, 1.0]) / np.sqrt(3)
    if lam != 1.0:
        raise ValueError("the lambda family is defined for m = 3 only")
    return np.full(m, 1 / np.sqrt(m))


def w_state(m: int, lam: float = 1.0, dim: int = 3) -> StateVector:
    sp = HilbertSpace((dim,) * m)
    amps = np.zeros(sp.dim, dtype=complex)
    for k, a in enumerate(w_amplitudes(m, lam)):
        amps[sp.index(tuple(int(j == k) for j in range(m)))] = a
    return StateVector(sp, amps)


def _split_angles(amp: np.ndarray) -> list:
    """theta_k with cos(theta_k/2) = amp[k] / ||amp[k:]|| for k = 0..m-2."""
    tails = np.sqrt(np.cumsum((amp ** 2)[::-1])[::-1])
    return [2 * np.arctan2(tails[k + 1], amp[k]) for k in range(len(amp) - 1)]


def w_circuit(m: int, lam: float = 1.0, scheme: str = "CU", dim: int = 3) -> Circuit:
    if m < 3:
        raise ValueError("W preparation needs m >= 3")
    if scheme not in PREP_SCHEMES:
        raise ValueError(f"scheme must be one of {PREP_SCHEMES}")
    amp = w_amplitudes(m, lam)
    th = _split_angles(amp)
    if scheme == "CZ":
        # q0 keeps the |0> branch: R, CNOT, X leaves a|10> + b|01>
        ops = [_gi("ry", (0,), theta=th[0])]
        ops += _cnot_cz(0, 1) + [_gi("x", (0,))]
        for k in range(1, m - 1):
            t = k + 1
            # controlled Ry(theta): Z Ry(-theta/2) Z Ry(theta/2) = Ry(theta) when the control is |1>
            ops += [_gi("ry", (t,), theta=th[k] / 2), _gi("cz", (k, t)),
                    _gi("ry", (t,), theta=-th[k] / 2), _gi("cz", (k, t))]
            ops += _cnot_cz(t, k)
            ops.append(_gi("su2", (t,), theta=0.0, phi=0.0, lam=0.0))  # R_gamma slot
        return Circuit((dim,) * m, ops, scheme=scheme)
    fwd = "cu" if scheme == "CU" else "spcu_prep"
    # here q0 keeps the |1> branch: R, CNOT, X on q1 leaves b|10> + a|01>
    ops = [_gi("ry", (0,), theta=np.pi - th[0]), _gi(fwd, (0, 1), theta=np.pi, phi=np.pi), _gi("x", (1,))]
    for k in range(1, m - 1):
        ops.append(_gi(fwd, (k, k + 1), theta=th[k], phi=np.pi))
        ops.append(_gi("cu", (k + 1, k), theta=np.pi, phi=np.pi))
    return Circuit((dim,) * m, ops, scheme=scheme)


# ---------------------------------------------------------------- comparator

COMPARATOR_SITES = {"gt": 0, "a": 1, "b": 2, "lt": 3}
COMPARATOR_NAMES = ("Q3", "Q1", "Q2", "Q4")


def comparator_circuit(dim: int = 3) -> Circuit:
    """Outputs gt = a AND NOT b on Q3 and lt = NOT a AND b on Q4 from ancillas |00>.

    Both CNOT-type CU blocks fire only when a != b: the leading sqrt(CZ) parks
    |1a 1b> in |2a 0b>, and the X01 layers turn the remaining inputs into the
    control patterns of the two CUs."""
    gt, a, b, lt = 0, 1, 2, 3
    ops = [_gi("sqrt_cz", (a, b), excursion=0),
           _gi("x01", (a,), theta=np.pi), _gi("x01", (b,), theta=np.pi),
           _gi("cu", (a, gt), theta=np.pi, phi=np.pi), _gi("cu", (b, lt), theta=np.pi, phi=np.pi),
           _gi("x01", (a,), theta=np.pi), _gi("x01", (b,), theta=np.pi),
           _gi("sqrt_cz", (a, b), excursion=0),
           _gi("x01", (gt,), theta=np.pi), _gi("x01", (lt,), theta=np.pi)]
    return Circuit((dim,) * 4, ops, names=COMPARATOR_NAMES, scheme="TCG")


def _toffoli_tail(a, b, t) -> list:
    return [_gi(*x) for x in [("h", (t,)), ("cnot", (b, t)), ("tdg", (t,)), ("cnot", (a, t)), ("t", (t,)),
                              ("cnot", (b, t)), ("tdg", (t,)), ("cnot", (a, t)), ("t", (b,)), ("t", (t,)),
                              ("h", (t,)), ("cnot", (a, b)), ("t", (a,)), ("tdg", (b,)), ("cnot", (a, b))]]


def _toffoli_head(a, b, t) -> list:
    return [_gi(*x) for x in [("cnot", (a, b)), ("tdg", (b,)), ("cnot", (a, b)), ("t", (a,)), ("t", (b,)),
                              ("h", (t,)), ("cnot", (b, t)), ("tdg", (t,)), ("cnot", (a, t)), ("t", (t,)),
                              ("cnot", (b, t)), ("tdg", (t,)), ("cnot", (a, t)), ("t", (t,)), ("h", (t,))]]


def clifford_comparator_circuit(dim: int = 3) -> Circuit:
    """Baseline from two Clifford+T Toffolis with X-conjugated controls."""
    gt, a, b, lt = 0, 1, 2, 3
    ops = [_gi("x", (b,))] + _toffoli_tail(a, b, gt) + [_gi("x", (b,)), _gi("x", (a,))]
    ops += _toffoli_head(a, b, lt) + [_gi("x", (a,))]
    return Circuit((dim,) * 4, ops, names=COMPARATOR_NAMES, scheme="Clifford")


def comparator_reference_table() -> np.ndarray:
    """Ideal 16x16 permutation over (gt, a, b, lt) labels: ancillas XORed with
    the comparison flags."""
    m = np.zeros((16, 16))
    for j in range(16):
        g, a, b, l = (int(x) for x in np.binary_repr(j, 4))
        g ^= a & (1 - b)
        l ^= (1 - a) & b
        m[int(f"{g}{a}{b}{l}", 2), j] = 1
    return m


def comparator_truth_table(shots: Optional[int] = None, seed: int = 0, noise=None, circuit=None):
    return truth_table(circuit or comparator_circuit(), shots, seed, noise)


# ---------------------------------------------------------------- depth tables

def depth_rows(m_max: int = 10, expand_composites: bool = False) -> list:
    if m_max < 3:
        raise ValueError("m_max must be >= 3")
    rows = []
    for m in range(3, m_max + 1):
        for fam, build in (("GHZ", ghz_circuit), ("W", w_circuit)):
            for scheme in ("CZ", "CU"):
                c = build(m, scheme=scheme)
                rows.append(dict(circuit=fam, scheme=scheme, m=m, **depth_and_counts(c, expand_composites)))
    for scheme, c in (("Clifford", clifford_comparator_circuit()), ("TCG", comparator_circuit())):
        rows.append(dict(circuit="comparator", scheme=scheme, m=4, **depth_and_counts(c, True)))
    return rows


# ---------------------------------------------------------------- scans

def _two_site_pops(rho) -> dict:
    p = rho.probabilities()
    sp = rho.space
    out = {f"P{i}{j}": float(p[sp.index((i, j))]) for i in (0, 1) for j in (0, 1)}
    out["leak"] = float(max(0.0, 1 - sum(out.values())))
    return out


def rotation_scan(theta_grid: Sequence[float], phi: float = 0.0, noise=None) -> list:
    """CU(theta, phi) on |11>."""
    sp = HilbertSpace((3, 3))
    rows = []
    for th in theta_grid:
        c = Circuit((3, 3), [_gi("cu", (0, 1), theta=float(th), phi=phi)])
        rows.append(dict(theta=float(th), **_two_site_pops(simulate(c, StateVector.basis(sp, (1, 1)), noise))))
    return rows


def _one_plus() -> list:
    return [_gi("x01", (0,), theta=np.pi), _gi("ry", (1,), theta=np.pi / 2)]


def phase_scan_circuit(phi: float, phi0: float = 0.0) -> Circuit:
    ops = _one_plus() + [_gi("cu", (0, 1), theta=np.pi, phi=phi),
                         _gi("x01", (1,), theta=np.pi / 2, phi=-np.pi / 2 - 2 * phi0)]
    return Circuit((3, 3), ops)


def echo_scan_circuit(phi: float, phi0: float = 0.0) -> Circuit:
    ops = _one_plus() + [_gi("cu", (0, 1), theta=np.pi, phi=phi), _gi("x01", (1,), theta=np.pi, phi=0.0),
                         _gi("cu", (0, 1), theta=np.pi, phi=phi),
                         _gi("x01", (1,), theta=np.pi / 2, phi=-np.pi / 2 - 4 * phi0)]
    return Circuit((3, 3), ops)


def phase_scan(phi_grid: Sequence[float], phi0: float = 0.0, noise=None) -> list:
    """|1+>, CU(pi, phi), X01(pi/2) projection; phi0 is the X12/X01 frame offset."""
    return [dict(phi=float(p), **_two_site_pops(simulate(phase_scan_circuit(float(p), phi0), noise=noise)))
            for p in phi_grid]


def echo_phase_scan(phi_grid: Sequence[float], phi0: float = 0.0, noise=None) -> list:
    """|1+>, CU(pi, phi), X01(pi) on the target, CU(pi, phi), projection."""
    return [dict(phi=float(p), **_two_site_pops(simulate(echo_scan_circuit(float(p), phi0), noise=noise)))
            for p in phi_grid]


# ---------------------------------------------------------------- decoherence harness

def identity_sequences() -> dict:
    """Each sequence composes to the identity on the computational subspace."""
    cz = [_gi("cz", (0, 1)), _gi("cz", (0, 1))]
    cu = [_gi("cu", (0, 1), theta=np.pi, phi=np.pi)] * 2
    cnot = _cnot_cz(0, 1) * 2
    return {k: Circuit((3, 3), v) for k, v in (("CZ", cz), ("CU", cu), ("CNOT", cnot))}


def _recovered(c: Circuit, init: StateVector, noise: NoiseModel) -> float:
    rho = simulate(c, init, noise).matrix
    return float(np.real(init.amps.conj() @ rho @ init.amps))


def decoherence_comparison(t1_grid: Sequence[float] = (), tphi_grid: Sequence[float] = (),
                           kappa: float = np.sqrt(2), base: Optional[NoiseModel] = None) -> list:
    """T1 scan from |11> with dephasing off; Tphi scan from |1+> with damping off.
    With `base`, the device model itself is used (kind='device', both initial states)."""
    seqs = identity_sequences()
    sp = HilbertSpace((3, 3))
    one_one = StateVector.basis(sp, (1, 1))
    one_plus = final_state(Circuit((3, 3), _one_plus()))
    rows = []
    for t1 in t1_grid:
        nm = NoiseModel((QuditNoise(float(t1), np.inf, kappa),), dephasing=False)
        rows.append(dict(kind="T1", value=float(t1), initial="11",
                         **{k: _recovered(c, one_one, nm) for k, c in seqs.items()}))
    for tp in tphi_grid:
        nm = NoiseModel((QuditNoise(np.inf, float(tp), kappa),), amplitude=False)
        rows.append(dict(kind="Tphi", value=float(tp), initial="1+",
                         **{k: _recovered(c, one_plus, nm) for k, c in seqs.items()}))
    if base is not None:
        for name, init in (("11", one_one), ("1+", one_plus)):
            rows.append(dict(kind="device", value=float("nan"), initial=name,
                             **{k: _recovered(c, init, base) for k, c in seqs.items()}))
    return rows
