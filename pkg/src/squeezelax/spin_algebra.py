"""Collective spin operators and states in the symmetric Dicke subspace.

Basis convention: index k = 0..n counts excited spins, so the collective
inversion operator is diagonal with eigenvalues 2k - n. Pauli operators are
unhalved (sigma_z eigenvalues +-1, sigma_- = |g><e|), which makes the
lowering/raising commutator [S-, S+] = -Sz exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DickeSpace",
    "BlochAngles",
    "CollectiveOps",
    "QuantumState",
    "build_collective_ops",
    "spin_coherent_state",
    "expectation",
    "sym_covariance",
    "third_moment",
    "hpa_residual",
]


@dataclass(frozen=True)
class DickeSpace:
    """Symmetric subspace of n spin-1/2 particles (dimension n + 1)."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"spin count must be an integer >= 1, got {self.n!r}")

    @property
    def dim(self) -> int:
        return self.n + 1


@dataclass(frozen=True)
class BlochAngles:
    """Polar and azimuthal angles (radians) on the collective Bloch sphere."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not np.isfinite(self.phi):
            raise ValueError("phi must be finite")


@dataclass(frozen=True)
class CollectiveOps:
    """Dense collective spin matrices over a Dicke space."""

    space: DickeSpace
    sm: np.ndarray
    sp: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray


class QuantumState:
    """Pure state vector or density matrix over a Dicke (or Fock) basis."""

    __slots__ = ("data", "kind")

    def __init__(self, data: np.ndarray, kind: str):
        if kind not in ("vector", "matrix"):
            raise ValueError(f"kind must be 'vector' or 'matrix', got {kind!r}")
        self.data = np.asarray(data, dtype=complex)
        self.kind = kind

    @classmethod
    def from_vector(cls, amplitudes, atol: float = 1e-12) -> "QuantumState":
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.ndim != 1:
            raise ValueError("state vector must be one-dimensional")
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > atol:
            raise ValueError(f"state vector norm deviates from 1 by {abs(norm - 1.0):.3g}")
        return cls(amplitudes, "vector")

    @classmethod
    def from_matrix(cls, rho, atol: float = 1e-12, eig_floor: float = -1e-10) -> "QuantumState":
        rho = np.asarray(rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(rho - rho.conj().T)) > atol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > atol:
            raise ValueError("density matrix trace deviates from 1")
        if np.min(np.linalg.eigvalsh(rho)) < eig_floor:
            raise ValueError("density matrix has a significantly negative eigenvalue")
        return cls(rho, "matrix")

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def density(self) -> np.ndarray:
        """Return the state as a density matrix."""
        if self.kind == "vector":
            return np.outer(self.data, self.data.conj())
        return self.data


def build_collective_ops(space: DickeSpace) -> CollectiveOps:
    """Construct S-, S+, Sx, Sy, Sz as dense complex matrices.

    S- lowers the excitation number: S-|k> = sqrt(k (n-k+1)) |k-1>.
    """
    n, dim = space.n, space.dim
    sm = np.zeros((dim, dim), dtype=complex)
    for k in range(1, n + 1):
        sm[k - 1, k] = math.sqrt(k * (n - k + 1))
    sp = sm.conj().T
    sx = sm + sp
    sy = 1j * (sm - sp)
    sz = np.diag([2.0 * k - n for k in range(dim)]).astype(complex)
    return CollectiveOps(space=space, sm=sm, sp=sp, sx=sx, sy=sy, sz=sz)


def spin_coherent_state(space: DickeSpace, angles: BlochAngles) -> QuantumState:
    """Product state of n spins pointing along (theta, phi).

    Amplitude at k excited spins: sqrt(C(n,k)) cos(theta/2)^k sin(theta/2)^(n-k)
    exp(i (n-k) phi). Expectation values are (n sin t cos p, n sin t sin p, n cos t).
    """
    n = space.n
    c = math.cos(angles.theta / 2.0)
    s = math.sin(angles.theta / 2.0)
    amps = np.zeros(space.dim, dtype=complex)
    if c == 0.0:
        amps[0] = 1.0  # south pole: all spins in the ground state
    elif s == 0.0:
        amps[n] = 1.0  # north pole: all spins excited
    else:
        # log-space magnitudes avoid under/overflow of binomials at large n
        lc, ls = math.log(c), math.log(s)
        for k in range(n + 1):
            log_mag = 0.5 * (math.lgamma(n + 1) - math.lgamma(k + 1)
                             - math.lgamma(n - k + 1)) + k * lc + (n - k) * ls
            amps[k] = math.exp(log_mag) * np.exp(1j * (n - k) * angles.phi)
        amps /= np.linalg.norm(amps)
    return QuantumState.from_vector(amps)


def _check_shape(op: np.ndarray, state: QuantumState):
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError("operator must be a square matrix")
    if op.shape[0] != state.dim:
        raise ValueError(f"operator dimension {op.shape[0]} != state dimension {state.dim}")


def expectation(op: np.ndarray, state: QuantumState) -> complex:
    """<psi|A|psi> for a vector state, Tr(A rho) for a density matrix."""
    op = np.asarray(op)
    _check_shape(op, state)
    if state.kind == "vector":
        return complex(np.vdot(state.data, op @ state.data))
    return complex(np.trace(op @ state.data))


def sym_covariance(a: np.ndarray, b: np.ndarray, state: QuantumState) -> float:
    """Symmetrized covariance (1/2)<AB + BA> - <A><B> of Hermitian A, B."""
    a = np.asarray(a)
    b = np.asarray(b)
    _check_shape(a, state)
    _check_shape(b, state)
    anti = 0.5 * expectation(a @ b + b @ a, state)
    return (anti - expectation(a, state) * expectation(b, state)).real


def third_moment(a: np.ndarray, b: np.ndarray, c: np.ndarray, state: QuantumState) -> float:
    """Symmetrized third moment of A against the product BC.

    (1/2) ( <A (BC) + (CB) A> - <A> <BC + CB> ); symmetric in B and C.
    """
    a, b, c = np.asarray(a), np.asarray(b), np.asarray(c)
    for op in (a, b, c):
        _check_shape(op, state)
    bc = b @ c
    cb = c @ b
    val = 0.5 * (expectation(a @ bc + cb @ a, state)
                 - expectation(a, state) * expectation(bc + cb, state))
    return val.real


def hpa_residual(space: DickeSpace, k_max: int) -> float:
    """Deviation of S-/sqrt(n) from a truncated bosonic annihilation operator.

    max over k <= k_max of |sqrt(k (n-k+1) / n) - sqrt(k)|; tends to zero as
    n grows at fixed k_max.
    """
    n = space.n
    if k_max > n:
        raise ValueError(f"k_max={k_max} exceeds spin count n={n}")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    return max(abs(math.sqrt(k * (n - k + 1) / n) - math.sqrt(k))
               for k in range(1, k_max + 1))
