"""Phenomenological decoherence and leakage channels applied per scheduled moment.

Per qudit and per moment of length dt, the channel is the exact solution of a
single-site Lindblad generator:

* ladder decay k -> k-1 at rate gamma_1 = 1/T1 and gamma_k = kappa^(k-1)/T1 above,
* pure dephasing as a Schur multiplier: coherence (0,1) decays at 1/Tphi,
  every coherence touching a level >= 2 at 2/Tphi,

with 1/Tphi = 1/T2* - 1/(2 T1).  An X12 pulse of angle theta additionally moves
|2> population to |3> with probability leak_rate * min(1, |theta|/pi) when the
site carries a fourth level.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .core import DensityMatrix, embed_matrix

KAPPA = float(np.sqrt(2.0))
HIGH_LEVEL_DEPHASING = 2.0


class NoiseConfigError(ValueError):
    pass


def tphi_from(t1: float, t2star: float) -> float:
    rate = 1.0 / t2star - 1.0 / (2.0 * t1)
    if rate <= 0:
        raise NoiseConfigError(f"T2*={t2star} us with T1={t1} us gives a non-positive dephasing rate")
    return 1.0 / rate


@dataclass(frozen=True)
class QuditNoise:
    T1: float  # us, |1> -> |0>
    Tphi: float  # us
    kappa: float = KAPPA
    leak_rate: float = 0.0
    T1_work: Optional[float] = None
    Tphi_work: Optional[float] = None

    def __post_init__(self):
        if not self.T1 > 0 or not self.Tphi > 0:
            raise NoiseConfigError("T1 and Tphi must be positive")
        if self.kappa < 1:
            raise NoiseConfigError("kappa must be >= 1")
        if not 0 <= self.leak_rate <= 0.01:
            raise NoiseConfigError("leak_rate must lie in [0, 0.01]")

    @classmethod
    def from_t2(cls, t1, t2star, kappa=KAPPA, leak_rate=0.0, t1_work=None, t2_work=None):
        tpw = tphi_from(t1_work or t1, t2_work) if t2_work is not None else None
        return cls(t1, tphi_from(t1, t2star), kappa, leak_rate, t1_work, tpw)


@dataclass(frozen=True)
class NoiseModel:
    qudits: tuple  # QuditNoise per site
    amplitude: bool = True
    dephasing: bool = True
    leakage: bool = True
    working_point_aware: bool = False

    def for_site(self, k: int) -> QuditNoise:
        return self.qudits[k % len(self.qudits)]

    def with_leak(self, rate: float) -> "NoiseModel":
        return replace(self, qudits=tuple(replace(q, leak_rate=rate) for q in self.qudits))

    def scaled(self, t1: Optional[float] = None, tphi: Optional[float] = None) -> "NoiseModel":
        qs = []
        for q in self.qudits:
            qs.append(replace(q, T1=t1 if t1 is not None else q.T1, Tphi=tphi if tphi is not None else q.Tphi,
                              T1_work=None, Tphi_work=None))
        return replace(self, qudits=tuple(qs))


# ---------------------------------------------------------------- device config

DEFAULT_DEVICE = {
    "qubits": ["Q1", "Q2", "Q3", "Q4"],
    "f01_GHz": [4.659, 4.280, 4.098, 3.954],
    "f12_GHz": [4.421, 4.030, 3.852, 3.710],
    "f_int_GHz": [[4.498, 4.055], [4.324, 4.280], [4.093], [3.865]],
    "T1_us": [11.019, 10.677, 11.259, 13.512],
    "T1_work_us": [[8.604, 7.956], [11.777, 10.677], [11.259], [13.512]],
    "T2star_us": [6.051, 2.264, 3.134, 2.256],
    "T2star_work_us": [[1.403, 1.222], [2.533, 2.264], [3.134], [2.256]],
}


@dataclass(frozen=True)
class DeviceConfig:
    qubits: tuple
    f01_GHz: tuple
    f12_GHz: tuple
    T1_us: tuple
    T2star_us: tuple
    T1_work_us: tuple
    T2star_work_us: tuple
    f_int_GHz: tuple = ()

    def __post_init__(self):
        n = len(self.qubits)
        for name in ("f01_GHz", "f12_GHz", "T1_us", "T2star_us", "T1_work_us", "T2star_work_us"):
            if len(getattr(self, name)) != n:
                raise NoiseConfigError(f"{name} needs {n} entries")
        flat = list(self.T1_us) + list(self.T2star_us)
        flat += [v for w in self.T1_work_us for v in w] + [v for w in self.T2star_work_us for v in w]
        if any(not v > 0 for v in flat):
            raise NoiseConfigError("coherence times must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "DeviceConfig":
        tup = lambda v: tuple(tuple(x) if isinstance(x, list) else x for x in v)
        return cls(tuple(d["qubits"]), tup(d["f01_GHz"]), tup(d["f12_GHz"]), tup(d["T1_us"]),
                   tup(d["T2star_us"]), tup(d.get("T1_work_us", [[t] for t in d["T1_us"]])),
                   tup(d.get("T2star_work_us", [[t] for t in d["T2star_us"]])), tup(d.get("f_int_GHz", [])))

    @classmethod
    def default(cls) -> "DeviceConfig":
        return cls.from_dict(DEFAULT_DEVICE)

    @classmethod
    def load(cls, path) -> "DeviceConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        lst = lambda v: [list(x) if isinstance(x, tuple) else x for x in v]
        return {"qubits": list(self.qubits), "f01_GHz": list(self.f01_GHz), "f12_GHz": list(self.f12_GHz),
                "f_int_GHz": lst(self.f_int_GHz), "T1_us": list(self.T1_us), "T1_work_us": lst(self.T1_work_us),
                "T2star_us": list(self.T2star_us), "T2star_work_us": lst(self.T2star_work_us)}

    def noise_model(self, order: Optional[Sequence[int]] = None, kappa: float = KAPPA, leak_rate: float = 0.0,
                    working_point_aware: bool = True) -> NoiseModel:
        """One QuditNoise per circuit site; `order` maps sites to device qubits."""
        order = list(range(len(self.qubits))) if order is None else list(order)
        qs = [QuditNoise.from_t2(self.T1_us[i], self.T2star_us[i], kappa, leak_rate,
                                 self.T1_work_us[i][0], self.T2star_work_us[i][0]) for i in order]
        return NoiseModel(tuple(qs), working_point_aware=working_point_aware)


# ---------------------------------------------------------------- channels

def _dephasing_rates(dim: int, tphi: float) -> np.ndarray:
    g = np.full((dim, dim), HIGH_LEVEL_DEPHASING / tphi)
    g[0, 1] = g[1, 0] = 1.0 / tphi
    np.fill_diagonal(g, 0.0)
    return g


def _liouvillian(dim, t1, kappa, tphi, amplitude, dephasing):
    """Column-stacked superoperator: vec(d rho/dt) = L vec(rho)."""
    eye = np.eye(dim)
    L = np.zeros((dim * dim, dim * dim), dtype=complex)
    if amplitude:
        for k in range(1, dim):
            rate = kappa ** (k - 1) / t1
            a = np.zeros((dim, dim))
            a[k - 1, k] = np.sqrt(rate)
            ada = a.T @ a
            L += np.kron(a.conj(), a) - 0.5 * np.kron(eye, ada) - 0.5 * np.kron(ada.T, eye)
    if dephasing:
        L -= np.diag(_dephasing_rates(dim, tphi).reshape(-1, order="F"))
    return L


def _choi_kraus(S: np.ndarray, dim: int, tol=1e-14) -> list:
    """Kraus operators from the eigen-decomposition of the Choi matrix."""
    C = np.zeros((dim * dim, dim * dim), dtype=complex)
    for j in range(dim):
        for l in range(dim):
            e = np.zeros((dim, dim))
            e[j, l] = 1
            C[j * dim:(j + 1) * dim, l * dim:(l + 1) * dim] = (S @ e.reshape(-1, order="F")).reshape(
                dim, dim, order="F")
    C = (C + C.conj().T) / 2
    w, v = np.linalg.eigh(C)
    # eigenvector index (j, i) -> K[i, j]
    return [np.sqrt(val) * vec.reshape(dim, dim).T for val, vec in zip(w, v.T) if val > tol]


@lru_cache(maxsize=2048)
def _superop(dim, dt_ns, t1, kappa, tphi, amplitude, dephasing):
    L = _liouvillian(dim, t1, kappa, tphi, amplitude, dephasing)
    return expm(L * (dt_ns * 1e-3))


def kraus_for_moment(qn: QuditNoise, dim: int, dt_ns: float, working: bool = False,
                     amplitude: bool = True, dephasing: bool = True) -> list:
    if dt_ns < 0:
        raise ValueError("dt must be non-negative")
    if dt_ns == 0 or not (amplitude or dephasing):
        return [np.eye(dim, dtype=complex)]
    t1 = qn.T1_work if (working and qn.T1_work) else qn.T1
    tphi = qn.Tphi_work if (working and qn.Tphi_work) else qn.Tphi
    S = _superop(dim, float(dt_ns), float(t1), float(qn.kappa), float(tphi), amplitude, dephasing)
    return _choi_kraus(S, dim)


def leak_kraus(dim: int, p: float) -> list:
    if dim < 4 or p <= 0:
        return [np.eye(dim, dtype=complex)]
    k0 = np.eye(dim, dtype=complex)
    k0[2, 2] = np.sqrt(1 - p)
    k1 = np.zeros((dim, dim), dtype=complex)
    k1[3, 2] = np.sqrt(p)
    return [k0, k1]


def _apply_local_superop(rho: np.ndarray, S: np.ndarray, site: int, dims) -> np.ndarray:
    n = len(dims)
    d = dims[site]
    t = rho.reshape(list(dims) * 2)
    # move (row site, col site) axes to front, apply S on vec, move back
    t = np.moveaxis(t, (site, n + site), (0, 1))
    shp = t.shape
    flat = t.reshape(d, d, -1)
    vec = flat.transpose(1, 0, 2).reshape(d * d, -1)  # column-stacked index j*d + i
    out = (S @ vec).reshape(d, d, -1).transpose(1, 0, 2).reshape(shp)
    out = np.moveaxis(out, (0, 1), (site, n + site))
    return out.reshape(rho.shape)


def _apply_kraus(rho: np.ndarray, ks: list, site: int, dims) -> np.ndarray:
    out = np.zeros_like(rho)
    for k in ks:
        m = embed_matrix(k, [site], dims)
        out += m @ rho @ m.conj().T
    return out


def apply_moment(rho: np.ndarray, moment, model: NoiseModel, dims, dt_ns: float) -> np.ndarray:
    dims = tuple(dims)
    busy2 = {s for op in moment if len(op.sites) > 1 for s in op.sites}
    for site, d in enumerate(dims):
        qn = model.for_site(site)
        working = model.working_point_aware and site in busy2
        if model.amplitude or model.dephasing:
            t1 = qn.T1_work if (working and qn.T1_work) else qn.T1
            tphi = qn.Tphi_work if (working and qn.Tphi_work) else qn.Tphi
            S = _superop(d, float(dt_ns), float(t1), float(qn.kappa), float(tphi), model.amplitude, model.dephasing)
            rho = _apply_local_superop(rho, S, site, dims)
    if model.leakage:
        for op in moment:
            if op.gate == "x12":
                s = op.sites[0]
                p = model.for_site(s).leak_rate * min(1.0, abs(op.full_params()["theta"]) / np.pi)
                if p > 0 and dims[s] >= 4:
                    rho = _apply_kraus(rho, leak_kraus(dims[s], p), s, dims)
    return rho


def apply_noise(rho: DensityMatrix, sched, model: NoiseModel) -> DensityMatrix:
    from .circuit import op_matrix
    dims = rho.space.dims
    m = np.array(rho.matrix)
    for k, moment in enumerate(sched.moments):
        for op in moment:
            u = op_matrix(op, dims)
            m = u @ m @ u.conj().T
        m = apply_moment(m, moment, model, dims, sched.moment_duration_ns(k))
    m = (m + m.conj().T) / 2
    return DensityMatrix(rho.space, m)


def idle(rho: DensityMatrix, model: NoiseModel, dt_ns: float) -> DensityMatrix:
    m = apply_moment(np.array(rho.matrix), (), model, rho.space.dims, dt_ns)
    return DensityMatrix(rho.space, m)
