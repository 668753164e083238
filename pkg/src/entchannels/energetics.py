"""Energy bookkeeping and Margolus-Levitin checks."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .operators import DenseHamiltonian, SwapHamiltonian, _swapped
from .statevec import PureState

ORTHOGONAL_THRESHOLD = 1e-8
MC_CHUNK = 10_000


@dataclass(frozen=True)
class EnergyAccount:
    mean_energy: float
    ground_energy: float
    duration: float
    power: float

    def __post_init__(self):
        if self.mean_energy < self.ground_energy - 1e-9:
            raise ValueError("mean energy below ground energy")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if abs(self.power - self.mean_energy / self.duration) > 1e-12 * max(1.0, abs(self.power)):
            raise ValueError("power must equal mean_energy / duration")

    @classmethod
    def over_window(cls, mean_energy: float, duration: float,
                    ground_energy: float = 0.0) -> "EnergyAccount":
        return cls(mean_energy, ground_energy, duration, mean_energy / duration)


def swap_expectation(amps: np.ndarray, h: SwapHamiltonian, n: int) -> float:
    """<psi| pi hbar (1 - S) / 2 dt |psi> from the permutation, no matrix."""
    s_exp = np.vdot(amps, _swapped(amps, h.swap, n))
    # <S> is real for an involution; the imaginary part is roundoff
    return h.scale * (float(np.vdot(amps, amps).real) - float(s_exp.real))


def expectation_energy(psi: PureState, h: SwapHamiltonian | DenseHamiltonian) -> float:
    if isinstance(h, SwapHamiltonian):
        if h.qubit_count > psi.qubit_count:
            raise ValueError("swap layout does not fit the state")
        return swap_expectation(psi.amplitudes, h, psi.qubit_count)
    if h.dim != psi.dim:
        raise ValueError(f"Hamiltonian dimension {h.dim} does not match state {psi.dim}")
    value = complex(np.vdot(psi.amplitudes, h.matrix @ psi.amplitudes))
    if abs(value.imag) > 1e-8:
        raise ValueError(f"energy has imaginary part {value.imag:.3g}; H is not Hermitian")
    return value.real


def ground_energy(h: SwapHamiltonian | DenseHamiltonian) -> float:
    if isinstance(h, SwapHamiltonian):
        return 0.0
    return float(np.linalg.eigvalsh(h.matrix)[0])


def swap_energy_closed_form(overlap_sq: float, delta_t: float, hbar: float = 1.0) -> float:
    """Mean swap energy pi*hbar*(1 - |<0|psi>|^2)/(2*delta_t)."""
    if not 0.0 <= overlap_sq <= 1.0:
        raise ValueError(f"overlap_sq must lie in [0, 1], got {overlap_sq}")
    if not delta_t > 0 or not hbar > 0:
        raise ValueError("delta_t and hbar must be positive")
    return math.pi * hbar * (1.0 - overlap_sq) / (2.0 * delta_t)


def _overlap_chunk(m: int, count: int, seed: int, chunk: int) -> np.ndarray:
    rng = np.random.default_rng([seed, chunk])
    dim = 1 << m
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    norms = np.einsum("ij,ij->i", z, z.conj()).real
    return np.abs(z[:, 0]) ** 2 / norms


def haar_overlap_samples(m: int, samples: int, seed: int = 0, workers: int = 1) -> np.ndarray:
    """|<0|psi>|^2 for ``samples`` Haar-random m-qubit states.

    Samples are drawn in fixed-size chunks seeded by (seed, chunk index), so
    the result does not depend on ``workers``.
    """
    if m < 1 or samples < 1:
        raise ValueError("m and samples must be positive")
    sizes = [min(MC_CHUNK, samples - k) for k in range(0, samples, MC_CHUNK)]
    jobs = [(m, size, seed, i) for i, size in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _overlap_chunk(*job), jobs))
    else:
        parts = [_overlap_chunk(*job) for job in jobs]
    return np.concatenate(parts)


def average_overlap(m: int, mode: str = "exact", samples: int = 100_000, seed: int = 0,
                    workers: int = 1) -> float:
    if m < 1:
        raise ValueError("m must be >= 1")
    if mode == "exact":
        return 2.0 ** -m
    if mode == "monte_carlo":
        return float(haar_overlap_samples(m, samples, seed, workers).mean())
    raise ValueError(f"unknown mode {mode!r}")


def _spectral_weights(psi: PureState, h: SwapHamiltonian | DenseHamiltonian):
    """Energies and Born weights of ``psi`` in the eigenbasis of ``h``."""
    if isinstance(h, SwapHamiltonian):
        amps = psi.amplitudes
        s_exp = float(np.vdot(amps, _swapped(amps, h.swap, psi.qubit_count)).real)
        return (np.array([0.0, 2.0 * h.scale]),
                np.array([(1.0 + s_exp) / 2.0, (1.0 - s_exp) / 2.0]))
    if h.dim != psi.dim:
        raise ValueError("Hamiltonian and state dimensions differ")
    evals, evecs = h.eigh()
    return evals, np.abs(evecs.conj().T @ psi.amplitudes) ** 2


def survival_probability(psi: PureState, h, times, hbar: float = 1.0) -> np.ndarray:
    """|<psi|psi(t)>|^2 at each time."""
    energies, weights = _spectral_weights(psi, h)
    amp = np.exp(-1j * np.outer(np.atleast_1d(times), energies) / hbar) @ weights
    return np.abs(amp) ** 2


def orthogonality_time(psi: PureState, h, hbar: float = 1.0, t_max: float = 1.0,
                       grid: int = 1000) -> float | None:
    """First time at which ``psi`` evolves to an orthogonal state, or None.

    The survival probability f(t) is scanned on a uniform grid. Its exact
    zeros are touching minima, so the scan looks for grid cells where df/dt
    turns from negative to non-negative, bisects df/dt inside the cell, and
    accepts the minimum when f there is below ``ORTHOGONAL_THRESHOLD``.
    """
    if grid < 100:
        raise ValueError("grid must be >= 100")
    energies, weights = _spectral_weights(psi, h)
    omega = energies / hbar

    def f_and_slope(t):
        ph = np.exp(-1j * np.multiply.outer(t, omega))
        amp = ph @ weights
        d_amp = ph @ (-1j * omega * weights)
        return np.abs(amp) ** 2, 2.0 * np.real(np.conj(amp) * d_amp)

    times = np.linspace(0.0, t_max, grid + 1)
    f, g = f_and_slope(times)
    for k in range(grid):
        if g[k] < 0 <= g[k + 1]:
            lo, hi = times[k], times[k + 1]
            while hi - lo > 1e-10 * hi:
                mid = 0.5 * (lo + hi)
                if f_and_slope(mid)[1] < 0:
                    lo = mid
                else:
                    hi = mid
            t_star = 0.5 * (lo + hi)
            if f_and_slope(t_star)[0] < ORTHOGONAL_THRESHOLD:
                return float(t_star)
        elif k + 1 == grid and f[grid] < ORTHOGONAL_THRESHOLD:
            # still descending at the end of the window
            return float(times[grid])
    return None


def ml_bound(mean_energy: float, ground_energy: float = 0.0, hbar: float = 1.0) -> float:
    """Margolus-Levitin minimum orthogonalization time pi*hbar/(2(E - E0)).

    Returns ``math.inf`` for a state at its ground energy.
    """
    gap = mean_energy - ground_energy
    if gap < -1e-12:
        raise ValueError("mean energy is below the ground energy")
    if abs(gap) <= 1e-12:
        return math.inf
    return math.pi * hbar / (2.0 * gap)


@dataclass(frozen=True)
class MLCheckReport:
    cases: int
    detected: int
    violations: int
    min_margin: float
    seed: int
    saturation: tuple = ()


def random_hermitian(dim: int, rng: np.random.Generator) -> DenseHamiltonian:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return DenseHamiltonian((g + g.conj().T) / 2.0)


def ml_universality_check(cases: int = 1000, max_qubits: int = 3, seed: int = 0,
                          grid: int = 1000, hbar: float = 1.0) -> MLCheckReport:
    """Search random Hamiltonians for orthogonality times below the ML bound.

    Even cases start from a Haar-random state, which rarely reaches an
    orthogonal state; odd cases start from an equal superposition of two
    random eigenvectors, which always does. ``min_margin`` is the smallest
    (tau - bound)/tau over detected cases.
    """
    detected = violations = 0
    min_margin = math.inf
    for case in range(cases):
        rng = np.random.default_rng([seed, case])
        n = int(rng.integers(1, max_qubits + 1))
        h = random_hermitian(1 << n, rng)
        evals, evecs = h.eigh()
        if case % 2 == 0:
            z = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
            psi = PureState(z / np.linalg.norm(z))
            t_max = 4.0 * math.pi * hbar / (evals[-1] - evals[0])
        else:
            i, j = rng.choice(1 << n, size=2, replace=False)
            phase = np.exp(2j * math.pi * rng.random())
            psi = PureState((evecs[:, i] + phase * evecs[:, j]) / math.sqrt(2.0))
            t_max = 1.25 * math.pi * hbar / abs(evals[i] - evals[j])
        tau = orthogonality_time(psi, h, hbar, t_max, grid)
        if tau is None:
            continue
        detected += 1
        bound = ml_bound(expectation_energy(psi, h), float(evals[0]), hbar)
        margin = (tau - bound) / tau
        min_margin = min(min_margin, margin)
        if tau < bound - 1e-6 * tau:
            violations += 1
    return MLCheckReport(cases, detected, violations, min_margin, seed)
