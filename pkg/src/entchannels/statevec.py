"""Pure and mixed qubit-register states.

Basis indices are big-endian: qubit 0 is the most significant bit, so the
bit string ``b_0 b_1 ... b_{n-1}`` lives at index ``sum(b_k << (n - 1 - k))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-10
ENTROPY_FLOOR = 1e-12


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


def _qubits_for(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two >= 2")
    return n


@dataclass(frozen=True)
class PureState:
    """Unit-norm state vector of an ``qubit_count``-qubit register."""

    amplitudes: np.ndarray
    qubit_count: int = field(default=-1)

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        n = _qubits_for(amps.size)
        if self.qubit_count not in (-1, n):
            raise ValueError(
                f"{amps.size} amplitudes do not describe {self.qubit_count} qubits")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "qubit_count", n)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def __len__(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class MixedState:
    """Density operator on ``qubit_count`` qubits."""

    matrix: np.ndarray
    qubit_count: int = field(default=-1)

    def __post_init__(self):
        rho = _frozen(self.matrix)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        n = _qubits_for(rho.shape[0])
        if self.qubit_count not in (-1, n):
            raise ValueError(f"matrix does not describe {self.qubit_count} qubits")
        if np.max(np.abs(rho - rho.conj().T)) > NORM_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > NORM_TOL:
            raise ValueError("density matrix does not have unit trace")
        if np.linalg.eigvalsh(rho).min() < -NORM_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "matrix", rho)
        object.__setattr__(self, "qubit_count", n)

    @classmethod
    def from_pure(cls, psi: PureState) -> "MixedState":
        a = psi.amplitudes
        return cls(np.outer(a, a.conj()))


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered A and B qubit registers; ``register_A[k]`` pairs with ``register_B[k]``."""

    register_A: tuple[int, ...]
    register_B: tuple[int, ...]
    qubit_count: int = -1

    def __post_init__(self):
        a = tuple(int(q) for q in self.register_A)
        b = tuple(int(q) for q in self.register_B)
        if not a or len(a) != len(b):
            raise ValueError("registers must be nonempty and of equal size")
        if len(set(a) | set(b)) != 2 * len(a):
            raise ValueError("register indices must be distinct and disjoint")
        n = self.qubit_count if self.qubit_count != -1 else max(a + b) + 1
        if min(a + b) < 0 or max(a + b) >= n:
            raise ValueError(f"register indices out of range for {n} qubits")
        object.__setattr__(self, "register_A", a)
        object.__setattr__(self, "register_B", b)
        object.__setattr__(self, "qubit_count", n)

    @property
    def m(self) -> int:
        return len(self.register_A)

    @classmethod
    def contiguous(cls, m: int) -> "RegisterLayout":
        """A = qubits 0..m-1, B = qubits m..2m-1."""
        return cls(tuple(range(m)), tuple(range(m, 2 * m)))


def bits_to_index(bits: Sequence[int]) -> int:
    index = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bit values must be 0 or 1, got {b!r}")
        index = (index << 1) | int(b)
    return index


def index_to_bits(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> (n - 1 - k)) & 1 for k in range(n))


def basis_state(bits: Sequence[int]) -> PureState:
    if len(bits) == 0:
        raise ValueError("bits must be nonempty")
    amps = np.zeros(1 << len(bits), dtype=complex)
    amps[bits_to_index(bits)] = 1.0
    return PureState(amps)


def inner(a: PureState, b: PureState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.qubit_count != b.qubit_count:
        raise ValueError(
            f"qubit count mismatch: {a.qubit_count} vs {b.qubit_count}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def tensor(a: PureState, b: PureState) -> PureState:
    # np.kron on big-endian vectors puts ``a`` on the high-order qubits
    return PureState(np.kron(a.amplitudes, b.amplitudes))


def _check_subset(indices: Iterable[int], n: int) -> list[int]:
    idx = sorted(set(int(q) for q in indices))
    if not idx:
        raise ValueError("qubit index set must be nonempty")
    if idx[0] < 0 or idx[-1] >= n:
        raise ValueError(f"qubit indices {idx} out of range for {n} qubits")
    return idx


def partial_trace(rho: MixedState, keep: Iterable[int]) -> MixedState:
    """Reduced state on ``keep`` (kept qubits in ascending index order)."""
    n = rho.qubit_count
    kept = _check_subset(keep, n)
    traced = [q for q in range(n) if q not in kept]
    dk, dt = 1 << len(kept), 1 << len(traced)
    t = rho.matrix.reshape((2,) * (2 * n))
    order = kept + traced + [q + n for q in kept] + [q + n for q in traced]
    t = t.transpose(order).reshape(dk, dt, dk, dt)
    reduced = np.einsum("ajbj->ab", t)
    return MixedState((reduced + reduced.conj().T) / 2)


def schmidt_probabilities(psi: PureState, cut: Iterable[int]) -> np.ndarray:
    n = psi.qubit_count
    side = _check_subset(cut, n)
    if len(side) == n:
        raise ValueError("cut must be a proper subset of the register")
    rest = [q for q in range(n) if q not in side]
    mat = psi.amplitudes.reshape((2,) * n).transpose(side + rest)
    mat = mat.reshape(1 << len(side), 1 << len(rest))
    return np.linalg.svd(mat, compute_uv=False) ** 2


def entanglement_entropy(psi: PureState, cut: Iterable[int]) -> float:
    """Von Neumann entropy in bits of the reduced state on ``cut``."""
    lam = schmidt_probabilities(psi, cut)
    lam = lam[lam > ENTROPY_FLOOR]
    return float(-np.sum(lam * np.log2(lam)))


def haar_random(n: int, seed: int) -> PureState:
    if n < 1:
        raise ValueError("need at least one qubit")
    rng = np.random.default_rng(seed)
    dim = 1 << n
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(z / np.linalg.norm(z))
