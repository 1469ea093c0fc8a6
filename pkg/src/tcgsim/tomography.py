"""State and process tomography on the computational subspace, truth-table
fidelity, shot sampling and the QPT feedback-calibration loop.

Readout maps every level >= 2 of any site to one extra "leak" bin that is
excluded from the inversion.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from . import composer as comp
from . import gates as g
from .circuit import Circuit, circuit_unitary, simulate
from .core import DensityMatrix, HilbertSpace, StateVector

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}
# pre-measurement rotations on {|0>,|1>}: identity, X(pi/2), Y(pi/2)
SETTINGS = ("I", "X90", "Y90")


# ---------------------------------------------------------------- sampling

def spawn_rngs(seed: int, n: int) -> list:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def sample_counts(probabilities, shots: int, rng=None) -> np.ndarray:
    p = np.asarray(probabilities, dtype=float)
    if p.min() < -1e-12:
        raise ValueError("negative probability")
    p = np.clip(p, 0, None)
    if abs(p.sum() - 1) > 1e-9:
        raise ValueError(f"probabilities sum to {p.sum()}")
    if shots == 0:
        return np.zeros(p.size, dtype=int)
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return rng.multinomial(shots, p / p.sum())


# ---------------------------------------------------------------- measurement model

def _rot(name: str, dim: int) -> np.ndarray:
    if name == "I":
        return np.eye(dim, dtype=complex)
    if name == "X90":
        return g.x01(np.pi / 2, 0.0, dim).matrix
    return g.x01(np.pi / 2, np.pi / 2, dim).matrix


def setting_list(n: int) -> list:
    return list(itertools.product(SETTINGS, repeat=n))


def _rotation(setting, dims) -> np.ndarray:
    r = np.array([[1.0 + 0j]])
    for name, d in zip(setting, dims):
        r = np.kron(r, _rot(name, d))
    return r


def setting_probabilities(rho: np.ndarray, dims) -> np.ndarray:
    """Rows: settings; columns: 2^n S_c outcomes then the leak bin."""
    sp = HilbertSpace(dims)
    idx = sp.computational_indices()
    out = []
    for s in setting_list(len(dims)):
        r = _rotation(s, dims)
        p = np.clip(np.real(np.diag(r @ rho @ r.conj().T)), 0, None)
        sc = p[idx]
        out.append(np.append(sc, max(0.0, 1 - sc.sum())))
    return np.array(out)


def _design(n: int) -> np.ndarray:
    """Maps vec(rho_c) (row-major) to S_c outcome probabilities for each setting."""
    rows = []
    for s in setting_list(n):
        r = _rotation(s, (2,) * n)
        for o in range(2 ** n):
            e = r.conj().T[:, o]  # R^dag |o>
            # p = <o|R rho R^dag|o> = sum_ij conj(e_i) rho_ij e_j with e = R^dag|o>
            rows.append(np.outer(e.conj(), e).reshape(-1))
    return np.array(rows)


_DESIGN_CACHE: dict = {}


def _pinv_design(n: int) -> np.ndarray:
    if n not in _DESIGN_CACHE:
        a = _design(n)
        if np.linalg.matrix_rank(a) < 4 ** n:
            raise RuntimeError("measurement settings are not informationally complete")
        _DESIGN_CACHE[n] = np.linalg.pinv(a)
    return _DESIGN_CACHE[n]


def invert_probabilities(table: np.ndarray, n: int) -> np.ndarray:
    """Linear inversion to the (unnormalized) S_c block."""
    p = table[:, : 2 ** n].reshape(-1)
    rho = (_pinv_design(n) @ p).reshape(2 ** n, 2 ** n)
    return (rho + rho.conj().T) / 2


def project_psd(rho: np.ndarray) -> np.ndarray:
    """Nearest unit-trace PSD matrix in Frobenius norm: after scaling to unit
    trace, negative eigenvalues are zeroed and their weight is taken evenly
    from the remaining ones (Smolin, Gambetta, Smith 2012)."""
    rho = (rho + rho.conj().T) / 2
    tr = float(np.real(np.trace(rho)))
    if tr <= 0:
        raise ValueError("state estimate has no positive weight")
    w, v = np.linalg.eigh(rho / tr)
    w, v = w[::-1].copy(), v[:, ::-1]
    acc, i = 0.0, len(w)
    while i > 0 and w[i - 1] + acc / i < 0:
        acc += w[i - 1]
        w[i - 1] = 0.0
        i -= 1
    w[:i] += acc / i
    return (v * w) @ v.conj().T


def measured_table(rho: np.ndarray, dims, shots: Optional[int] = None, rng=None) -> np.ndarray:
    table = setting_probabilities(rho, dims)
    if not shots:
        return table
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return np.array([sample_counts(row / row.sum(), shots, rng) / shots for row in table])


def qst_from_rho(rho: np.ndarray, dims, shots: Optional[int] = None, rng=None) -> DensityMatrix:
    n = len(dims)
    est = project_psd(invert_probabilities(measured_table(rho, dims, shots, rng), n))
    return DensityMatrix(HilbertSpace((2,) * n), est)


def qst(prepare: Circuit, shots: Optional[int] = None, seed: Optional[int] = None, noise=None) -> DensityMatrix:
    if len(prepare.dims) > 4:
        raise ValueError("state tomography limited to 4 sites")
    rho = simulate(prepare, noise=noise).matrix
    return qst_from_rho(rho, prepare.dims, shots, seed)


def restrict_state(psi: StateVector) -> StateVector:
    idx = psi.space.computational_indices()
    return StateVector(HilbertSpace((2,) * psi.space.n_sites), psi.amps[idx])


# ---------------------------------------------------------------- process tomography

PAULI_LABELS = tuple(a + b for a in "IXYZ" for b in "IXYZ")
PAULI_2Q = tuple(np.kron(PAULI[a], PAULI[b]) for a in "IXYZ" for b in "IXYZ")
_INPUT_VECS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "+i": np.array([1, 1j], dtype=complex) / np.sqrt(2),
}
INPUT_LABELS = tuple(itertools.product(_INPUT_VECS, repeat=2))


@dataclass(frozen=True)
class ChiMatrix:
    chi: np.ndarray  # trace-normalized
    survival: float = 1.0  # trace before normalization (S_c retention)
    labels: tuple = PAULI_LABELS

    def fidelity(self, other: "ChiMatrix") -> float:
        return process_fidelity(self.chi, other.chi)

    def fidelity_with_loss(self, chi0: np.ndarray) -> float:
        """Tr(chi chi0) weighted by the S_c survival, so leakage counts as error."""
        return self.survival * process_fidelity(self.chi, chi0)

    def cp_projected(self) -> np.ndarray:
        return project_psd(self.chi)


def chi_of_unitary(u: np.ndarray) -> np.ndarray:
    coeff = np.array([np.trace(p.conj().T @ u) / 4 for p in PAULI_2Q])
    return np.outer(coeff, coeff.conj())


def process_fidelity(chi_exp: np.ndarray, chi0: np.ndarray) -> float:
    return float(np.real(np.trace(chi_exp @ chi0)))


_CHI_BASIS_CACHE: dict = {}


def _chi_design() -> np.ndarray:
    if "a" not in _CHI_BASIS_CACHE:
        rows = []
        ins = [np.outer(np.kron(_INPUT_VECS[a], _INPUT_VECS[b]), np.kron(_INPUT_VECS[a], _INPUT_VECS[b]).conj())
               for a, b in INPUT_LABELS]
        cols = []
        for m in range(16):
            for k in range(16):
                cols.append(np.concatenate([(PAULI_2Q[m] @ r @ PAULI_2Q[k].conj().T).reshape(-1) for r in ins]))
        a = np.array(cols).T
        _CHI_BASIS_CACHE["a"] = np.linalg.pinv(a)
    return _CHI_BASIS_CACHE["a"]


def chi_from_outputs(outputs: Sequence[np.ndarray]) -> ChiMatrix:
    """Linear inversion of E(rho_in) = sum_mk chi_mk P_m rho_in P_k^dag."""
    b = np.concatenate([o.reshape(-1) for o in outputs])
    chi = (_chi_design() @ b).reshape(16, 16)
    chi = (chi + chi.conj().T) / 2
    tr = float(np.real(np.trace(chi)))
    return ChiMatrix(chi / tr, tr)


def _input_state(a: str, b: str, dims) -> np.ndarray:
    v = []
    for lab, d in zip((a, b), dims):
        x = np.zeros(d, dtype=complex)
        x[:2] = _INPUT_VECS[lab]
        v.append(x)
    psi = np.kron(v[0], v[1])
    return np.outer(psi, psi.conj())


def qpt(gate, shots: Optional[int] = None, seed: Optional[int] = None, noise=None) -> ChiMatrix:
    """gate: a two-site Circuit, a ComposedGate or a two-qudit unitary matrix."""
    if isinstance(gate, Circuit):
        dims = gate.dims
        u = circuit_unitary(gate) if noise is None else None
    else:
        if noise is not None:
            raise ValueError("noisy tomography needs a Circuit")
        if isinstance(gate, comp.ComposedGate):
            dims, u = gate.operator.space.dims, gate.operator.matrix
        else:
            u = np.asarray(gate, dtype=complex)
            d = int(round(np.sqrt(u.shape[0])))
            dims = (d, d)
    if len(dims) != 2:
        raise ValueError("process tomography is two-qubit only")
    rngs = spawn_rngs(0 if seed is None else seed, len(INPUT_LABELS))
    outs = []
    for (a, b), rng in zip(INPUT_LABELS, rngs):
        rho_in = _input_state(a, b, dims)
        if u is not None:
            rho = u @ rho_in @ u.conj().T
        else:
            rho = simulate(gate, DensityMatrix(gate.space, rho_in), noise).matrix
        table = measured_table(rho, dims, shots, rng)
        outs.append(invert_probabilities(table, 2))
    return chi_from_outputs(outs)


# ---------------------------------------------------------------- truth-table fidelity

def truth_table_fidelity(me: np.ndarray, m0: np.ndarray) -> float:
    me, m0 = np.asarray(me, dtype=float), np.asarray(m0, dtype=float)
    if me.shape != m0.shape or me.shape[0] != me.shape[1]:
        raise ValueError("truth tables must be square and of equal size")
    d = me.shape[0]
    return float((np.trace(me.T @ me) + abs(np.trace(m0.T @ me)) ** 2) / (d * (d + 1)))


# ---------------------------------------------------------------- feedback calibration

@dataclass
class FeedbackState:
    theta: float
    phi: float
    iterations: int = 0
    history: list = field(default_factory=list)  # Tr(chi_exp chi0), linear-inversion chi
    cp_history: list = field(default_factory=list)  # same with the CP-projected chi
    param_history: list = field(default_factory=list)  # exact F of the applied parameters
    estimates: list = field(default_factory=list)
    converged: bool = False

    @property
    def fidelity(self) -> float:
        return self.history[-1] if self.history else float("nan")


def _cu_s_c(theta, phi, za=0.0, zb=0.0) -> np.ndarray:
    u = comp.cu(theta, phi).restricted.matrix
    return np.kron(np.diag([1, np.exp(1j * za)]), np.diag([1, np.exp(1j * zb)])) @ u


def fit_cu_parameters(chi: ChiMatrix, guess=(np.pi / 2, 0.0), local_z: bool = False):
    """Least-squares fit of (theta, phi[, z_a, z_b]) to the measured chi."""
    def resid(x):
        d = chi_of_unitary(_cu_s_c(*x)) - chi.chi
        return np.concatenate([d.real.ravel(), d.imag.ravel()])
    x0 = list(guess) + ([0.0, 0.0] if local_z else [])
    best = None
    for dt in (0.0, 0.3, -0.3):
        start = np.array(x0, dtype=float)
        start[0] += dt
        r = least_squares(resid, start, xtol=1e-14, ftol=1e-14, gtol=1e-14)
        if best is None or r.cost < best.cost:
            best = r
    return tuple(best.x)


def feedback_calibrate(theta: float, phi: float, dtheta: float = 0.0, dphi: float = 0.0, noise=None,
                       max_iter: int = 5, threshold: float = 0.999, shots: Optional[int] = None,
                       seed: int = 0, local_z: bool = False) -> FeedbackState:
    """The device applies X12 with (theta + dtheta, phi + dphi) for requested (theta, phi).
    Each round runs QPT, fits the effective parameters and shifts the request by
    the estimated error."""
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    target = chi_of_unitary(comp.cu(theta, phi).restricted.matrix)
    st = FeedbackState(theta, phi)
    rngs = np.random.SeedSequence(seed).spawn(max_iter)
    for k in range(max_iter):
        c = Circuit((3, 3)).append("cu", (0, 1), theta=st.theta + dtheta, phi=st.phi + dphi)
        chi = qpt(c, shots=shots, seed=int(rngs[k].generate_state(1)[0]), noise=noise)
        f = process_fidelity(chi.chi, target)
        st.history.append(f)
        st.cp_history.append(process_fidelity(chi.cp_projected(), target))
        st.param_history.append(process_fidelity(
            chi_of_unitary(comp.cu(st.theta + dtheta, st.phi + dphi).restricted.matrix), target))
        st.iterations = k + 1
        if f >= threshold:
            st.converged = True
            break
        est = fit_cu_parameters(chi, (st.theta, st.phi), local_z)
        st.estimates.append(est)
        st.theta += theta - est[0]
        st.phi += phi - est[1]
    return st


def depolarized_chi(chi0: np.ndarray, lam: float) -> np.ndarray:
    return (1 - lam) * chi0 + lam * np.eye(16) / 16
