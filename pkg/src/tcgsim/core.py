"""Dense linear algebra over small multi-qudit Hilbert spaces.

Basis ordering: site 0 is the most significant label, so |k0 k1 ... k_{m-1}>
has index sum_i k_i * prod_{j>i} d_j.  For two qutrits this gives the listing
|00>, |01>, |02>, |10>, |11>, |12>, |20>, |21>, |22>.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

STRUCT_TOL = 1e-10
GOLDEN_TOL = 1e-12


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class HilbertSpace:
    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise DimensionError("empty space")
        if any(d < 2 for d in dims):
            raise DimensionError(f"local dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def index(self, labels: Sequence[int]) -> int:
        if len(labels) != self.n_sites:
            raise DimensionError("label count does not match site count")
        idx = 0
        for k, d in zip(labels, self.dims):
            if not 0 <= k < d:
                raise DimensionError(f"level {k} out of range for dim {d}")
            idx = idx * d + int(k)
        return idx

    def labels(self, index: int) -> tuple:
        out = []
        for d in reversed(self.dims):
            out.append(index % d)
            index //= d
        return tuple(reversed(out))

    def basis_labels(self):
        return list(itertools.product(*[range(d) for d in self.dims]))

    def computational_indices(self) -> np.ndarray:
        """Indices of basis states with every label in {0,1}, ordered |0..0> .. |1..1>."""
        return _computational_indices(self.dims)

    def sub(self, sites: Sequence[int]) -> "HilbertSpace":
        return HilbertSpace(tuple(self.dims[s] for s in sites))


@lru_cache(maxsize=256)
def _computational_indices(dims: tuple) -> np.ndarray:
    sp = HilbertSpace(dims)
    idx = np.array([sp.index(l) for l in itertools.product((0, 1), repeat=len(dims))])
    idx.setflags(write=False)
    return idx


def _as_space(space) -> HilbertSpace:
    if isinstance(space, HilbertSpace):
        return space
    return HilbertSpace(tuple(space))


@dataclass(frozen=True)
class StateVector:
    space: HilbertSpace
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        space = _as_space(self.space)
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size != space.dim:
            raise DimensionError("amplitude count does not match space")
        nrm = np.linalg.norm(amps)
        if nrm == 0:
            raise ValueError("zero state")
        if abs(nrm - 1) > STRUCT_TOL:
            amps = amps / nrm
        amps.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def basis(cls, space, labels: Sequence[int]) -> "StateVector":
        space = _as_space(space)
        a = np.zeros(space.dim, dtype=complex)
        a[space.index(labels)] = 1
        return cls(space, a)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amps, self.amps.conj()))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    space: HilbertSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        space = _as_space(self.space)
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (space.dim, space.dim):
            raise DimensionError("matrix shape does not match space")
        m.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", m)

    def check(self, tol: float = STRUCT_TOL, eig_tol: float = 1e-8) -> None:
        m = self.matrix
        if np.abs(m - m.conj().T).max() > tol:
            raise ValueError("density matrix not Hermitian")
        if abs(np.trace(m).real - 1) > tol:
            raise ValueError(f"trace {np.trace(m).real} != 1")
        if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -eig_tol:
            raise ValueError("density matrix not positive")

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.matrix)), 0.0, None)


@dataclass(frozen=True)
class Operator:
    space: HilbertSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        space = _as_space(self.space)
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (space.dim, space.dim):
            raise DimensionError(f"matrix shape {m.shape} does not match space {space.dims}")
        m.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", m)

    @property
    def unitary(self) -> bool:
        m = self.matrix
        return bool(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max() <= STRUCT_TOL)

    def __matmul__(self, other: "Operator") -> "Operator":
        if other.space != self.space:
            raise DimensionError("space mismatch in operator product")
        return Operator(self.space, self.matrix @ other.matrix)

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def apply(self, state: Union[StateVector, DensityMatrix]):
        if state.space != self.space:
            raise DimensionError("space mismatch")
        if isinstance(state, StateVector):
            return StateVector(self.space, self.matrix @ state.amps)
        u = self.matrix
        return DensityMatrix(self.space, u @ state.matrix @ u.conj().T)


def identity(space) -> Operator:
    space = _as_space(space)
    return Operator(space, np.eye(space.dim))


def tensor(a, b):
    """Kronecker composition, a's sites first."""
    if type(a) is not type(b):
        raise TypeError("tensor needs two objects of the same kind")
    space = HilbertSpace(a.space.dims + b.space.dims)
    if isinstance(a, StateVector):
        return StateVector(space, np.kron(a.amps, b.amps))
    if isinstance(a, DensityMatrix):
        return DensityMatrix(space, np.kron(a.matrix, b.matrix))
    return Operator(space, np.kron(a.matrix, b.matrix))


def embed_matrix(mat: np.ndarray, sites: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    dims = tuple(dims)
    sites = list(sites)
    n = len(dims)
    if len(set(sites)) != len(sites):
        raise DimensionError(f"duplicate site in {sites}")
    if any(s < 0 or s >= n for s in sites):
        raise DimensionError(f"site out of range in {sites}")
    sub = [dims[s] for s in sites]
    k = math.prod(sub)
    if mat.shape != (k, k):
        raise DimensionError(f"operator of shape {mat.shape} does not fit sites {sites} with dims {sub}")
    rest = [s for s in range(n) if s not in sites]
    full = np.kron(mat, np.eye(math.prod(dims[s] for s in rest)))
    # axes of `full` are ordered sites + rest; permute back to natural order
    order = sites + rest
    t = full.reshape([dims[s] for s in order] * 2)
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(math.prod(dims), math.prod(dims))


def embed(op: Operator, sites: Sequence[int], space) -> Operator:
    space = _as_space(space)
    if tuple(space.dims[s] for s in sites if 0 <= s < space.n_sites) != op.space.dims:
        raise DimensionError(f"operator dims {op.space.dims} do not match sites {list(sites)}")
    return Operator(space, embed_matrix(op.matrix, sites, space.dims))


def restrict_computational(op: Operator) -> Operator:
    idx = op.space.computational_indices()
    sub = op.matrix[np.ix_(idx, idx)]
    return Operator(HilbertSpace((2,) * op.space.n_sites), sub)


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    keep = list(keep)
    n = rho.space.n_sites
    if not keep or len(set(keep)) != len(keep) or any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"bad keep sites {keep}")
    dims = rho.space.dims
    t = rho.matrix.reshape(list(dims) * 2)
    traced = [s for s in range(n) if s not in keep]
    # contract traced sites pairwise
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = [letters[i] for i in range(n)]
    col = [letters[n + i] for i in range(n)]
    for s in traced:
        col[s] = row[s]
    out = "".join(row[s] for s in keep) + "".join(col[s] for s in keep)
    m = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    kd = int(np.prod([dims[s] for s in keep]))
    return DensityMatrix(HilbertSpace(tuple(dims[s] for s in keep)), m.reshape(kd, kd))


def state_fidelity(rho: DensityMatrix, psi: StateVector) -> float:
    if rho.space != psi.space:
        raise DimensionError("space mismatch")
    f = float(np.real(psi.amps.conj() @ rho.matrix @ psi.amps))
    if -1e-9 <= f < 0:
        f = 0.0
    elif 1 < f <= 1 + 1e-9:
        f = 1.0
    return f


def distance_up_to_global_phase(u, v, return_flag: bool = False):
    """Max-norm distance after aligning v to u by the phase of Tr(v^dag u).

    A vanishing overlap leaves the phase at 0 and marks the pair incomparable.
    """
    a = u.matrix if isinstance(u, Operator) else np.asarray(u)
    b = v.matrix if isinstance(v, Operator) else np.asarray(v)
    if a.shape != b.shape:
        raise DimensionError("shape mismatch")
    tr = np.trace(b.conj().T @ a)
    incomparable = abs(tr) < 1e-12
    g = 1.0 if incomparable else tr / abs(tr)
    d = float(np.abs(a - g * b).max())
    if return_flag:
        return d, incomparable
    return d


def max_abs_diff(a, b) -> float:
    a = a.matrix if isinstance(a, Operator) else np.asarray(a)
    b = b.matrix if isinstance(b, Operator) else np.asarray(b)
    return float(np.abs(a - b).max())
