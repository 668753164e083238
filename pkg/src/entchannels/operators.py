"""Swap operators, swap Hamiltonians and a dense evolver.

The block swap S exchanges register A with register B. Because S is a
Hermitian involution, exp(-i theta S) = cos(theta) - i sin(theta) S, so every
evolution under S or under the shifted Hamiltonian pi*hbar*(1 - S)/(2*dt)
reduces to one index permutation and two scalars.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .statevec import PureState, RegisterLayout

MAX_DENSE_QUBITS = 14
HERMITIAN_TOL = 1e-10


@lru_cache(maxsize=64)
def _permutation(n: int, reg_a: tuple[int, ...], reg_b: tuple[int, ...]) -> np.ndarray:
    idx = np.arange(1 << n)
    out = idx.copy()
    for qa, qb in zip(reg_a, reg_b):
        sa, sb = n - 1 - qa, n - 1 - qb
        diff = ((idx >> sa) ^ (idx >> sb)) & 1
        out ^= (diff << sa) | (diff << sb)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BlockSwap:
    """Swap of A's qubits with B's qubits, pairwise in layout order."""

    layout: RegisterLayout

    @classmethod
    def of_pairs(cls, pairs, qubit_count: int = -1) -> "BlockSwap":
        a, b = zip(*pairs)
        return cls(RegisterLayout(a, b, qubit_count))

    @property
    def qubit_count(self) -> int:
        return self.layout.qubit_count

    def permutation(self, n: int | None = None) -> np.ndarray:
        n = self.qubit_count if n is None else n
        if n < self.qubit_count:
            raise ValueError(
                f"layout needs {self.qubit_count} qubits, state has {n}")
        return _permutation(n, self.layout.register_A, self.layout.register_B)

    def matrix(self, n: int | None = None) -> np.ndarray:
        n = self.qubit_count if n is None else n
        if n > MAX_DENSE_QUBITS:
            raise ValueError(f"refusing to materialize a {n}-qubit matrix")
        perm = self.permutation(n)
        mat = np.zeros((perm.size, perm.size), dtype=complex)
        mat[perm, np.arange(perm.size)] = 1.0
        return mat


@dataclass(frozen=True)
class SwapHamiltonian:
    """pi*hbar*(1 - S)/(2*delta_t); spectrum {0, pi*hbar/delta_t}."""

    swap: BlockSwap
    delta_t: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.delta_t > 0:
            raise ValueError("delta_t must be positive")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    @property
    def scale(self) -> float:
        """Energy of the antisymmetric (S = -1) half of the spectrum, halved."""
        return math.pi * self.hbar / (2.0 * self.delta_t)

    @property
    def qubit_count(self) -> int:
        return self.swap.qubit_count


@dataclass(frozen=True)
class DenseHamiltonian:
    matrix: np.ndarray

    def __post_init__(self):
        h = np.array(self.matrix, dtype=complex, copy=True)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("Hamiltonian must be a square matrix")
        asym = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
        if asym > HERMITIAN_TOL:
            raise ValueError(f"Hamiltonian is not Hermitian (asymmetry {asym:.3g})")
        h = (h + h.conj().T) / 2
        h.setflags(write=False)
        object.__setattr__(self, "matrix", h)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.matrix)


def _swapped(amps: np.ndarray, s: BlockSwap, n: int) -> np.ndarray:
    # S is an involution, so gathering through the permutation is the same as scattering
    return amps[s.permutation(n)]


def apply_block_swap(psi: PureState, s: BlockSwap) -> PureState:
    return PureState(_swapped(psi.amplitudes, s, psi.qubit_count))


def evolve_swap_array(amps: np.ndarray, s: BlockSwap, theta: float, n: int) -> np.ndarray:
    return math.cos(theta) * amps - 1j * math.sin(theta) * _swapped(amps, s, n)


def evolve_swap(psi: PureState, s: BlockSwap, theta: float) -> PureState:
    """exp(-i theta S) |psi>."""
    return PureState(evolve_swap_array(psi.amplitudes, s, theta, psi.qubit_count))


def swap_hamiltonian_propagator(h: SwapHamiltonian, t: float) -> tuple[complex, complex]:
    """Coefficients (c0, c1) with exp(-i H t / hbar) = c0 + c1 S."""
    phi = math.pi * t / (2.0 * h.delta_t)
    phase = complex(math.cos(phi), -math.sin(phi))
    return phase * math.cos(phi), phase * 1j * math.sin(phi)


def evolve_swap_hamiltonian_array(amps: np.ndarray, h: SwapHamiltonian, t: float,
                                  n: int) -> np.ndarray:
    c0, c1 = swap_hamiltonian_propagator(h, t)
    return c0 * amps + c1 * _swapped(amps, h.swap, n)


def evolve_swap_hamiltonian(psi: PureState, h: SwapHamiltonian, t: float) -> PureState:
    """Exact evolution under the swap Hamiltonian for time ``t``.

    At ``t == h.delta_t`` the result is the block swap of ``psi``; at half
    that time each basis input ``|b>_A|0>_B`` sits in the equal-weight
    superposition ``e^{-i pi/4}/sqrt(2) (|b,0> + i|0,b>)``.
    """
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    return PureState(evolve_swap_hamiltonian_array(psi.amplitudes, h, t, psi.qubit_count))


def dense_matrix_of(h: SwapHamiltonian, n: int | None = None) -> DenseHamiltonian:
    n = h.qubit_count if n is None else n
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"{n} qubits is too many to materialize")
    s = h.swap.matrix(n)
    return DenseHamiltonian(h.scale * (np.eye(s.shape[0]) - s))


def propagator_from_eigh(evals: np.ndarray, evecs: np.ndarray, t: float,
                         hbar: float) -> np.ndarray:
    phases = np.exp(-1j * evals * (t / hbar))
    return (evecs * phases) @ evecs.conj().T


def evolve_dense(psi: PureState, h: DenseHamiltonian, t: float, hbar: float = 1.0) -> PureState:
    if h.dim != psi.dim:
        raise ValueError(f"Hamiltonian dimension {h.dim} does not match state {psi.dim}")
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    evals, evecs = h.eigh()
    coeffs = evecs.conj().T @ psi.amplitudes
    out = evecs @ (np.exp(-1j * evals * (t / hbar)) * coeffs)
    return PureState(out)


def spin_chain_hamiltonian(sites: int, coupling_scale: float) -> DenseHamiltonian:
    """coupling_scale * sum_k S_{k,k+1} over nearest neighbours of an open chain."""
    if not 2 <= sites <= MAX_DENSE_QUBITS:
        raise ValueError(f"sites must be in [2, {MAX_DENSE_QUBITS}], got {sites}")
    dim = 1 << sites
    h = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for k in range(sites - 1):
        perm = _permutation(sites, (k,), (k + 1,))
        h[perm, cols] += coupling_scale
    return DenseHamiltonian(h)


def hamming_weights(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return np.array([bin(i).count("1") for i in idx], dtype=float)
