"""End-to-end transfer protocols with energy and power accounting."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import capacity
from .energetics import swap_expectation
from .operators import (
    BlockSwap,
    SwapHamiltonian,
    evolve_swap_hamiltonian_array,
    hamming_weights,
    spin_chain_hamiltonian,
    swap_hamiltonian_propagator,
)
from .statevec import (
    PureState,
    RegisterLayout,
    bits_to_index,
    entanglement_entropy,
    index_to_bits,
)

MAX_QUBITS = 14
MIDPOINT_PREFACTOR = complex(math.cos(math.pi / 4), -math.sin(math.pi / 4)) / math.sqrt(2.0)


@dataclass(frozen=True)
class ChannelConfig:
    m: int = 1
    delta_t: float = 1.0
    hbar: float = 1.0
    power_budget: float | None = None

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if not self.delta_t > 0:
            raise ValueError(f"delta_t must be positive, got {self.delta_t}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if self.power_budget is not None and not self.power_budget > 0:
            raise ValueError("power_budget must be positive")

    @classmethod
    def for_power(cls, m: int, power: float, hbar: float = 1.0) -> "ChannelConfig":
        """Window in which an m-qubit block swap spends ``power`` on average."""
        rate = capacity.capacity_entangled(power, m, hbar)
        return cls(m=m, delta_t=m / rate, hbar=hbar, power_budget=power)


@dataclass(frozen=True)
class TransferReport:
    bits: tuple[int, ...]
    latency: float
    mean_energy: float
    power: float
    midpoint_residual: float
    midpoint_entropy: float
    energy_drift: float
    final_fidelity: float
    bits_delivered: int


@dataclass(frozen=True)
class ChainReport:
    bit: int
    sites: int
    latency: float
    hop_count: int
    per_hop_energy: float
    average_power: float
    pipelined_rate: float
    final_fidelity: float


@dataclass(frozen=True)
class SpinWaveCurve:
    bit: int
    sites: int
    coupling: float
    times: tuple[float, ...]
    fidelities: tuple[float, ...]
    peak_fidelity: float
    peak_time: float
    max_norm_error: float
    max_excitation_drift: float


@dataclass(frozen=True)
class DecoherenceReport:
    bits: tuple[int, ...]
    dephase_probability: float
    trials: int
    corrupted_count: int
    mean_attempts: float
    attempt_histogram: tuple[int, ...]
    success_probability: float
    max_branch_leakage: float
    seed: int


def _check_bits(bits: Sequence[int], m: int) -> tuple[int, ...]:
    bits = tuple(int(b) for b in bits)
    if len(bits) != m:
        raise ValueError(f"bits length must equal m ({len(bits)} != {m})")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    return bits


def _register_input(bits: tuple[int, ...]) -> np.ndarray:
    """|b>_A |0...0>_B on the contiguous layout."""
    m = len(bits)
    amps = np.zeros(1 << (2 * m), dtype=complex)
    amps[bits_to_index(bits) << m] = 1.0
    return amps


def midpoint_state(bits: Sequence[int]) -> np.ndarray:
    """(e^{-i pi/4}/sqrt 2)(|b>_A|0>_B + i|0>_A|b>_B), written out directly."""
    bits = tuple(bits)
    m = len(bits)
    out = np.zeros(1 << (2 * m), dtype=complex)
    k = bits_to_index(bits)
    out[k << m] += MIDPOINT_PREFACTOR
    out[k] += 1j * MIDPOINT_PREFACTOR
    return out


def _sample_times(window: float, samples: int) -> np.ndarray:
    if samples < 3:
        raise ValueError("time_samples must be >= 3")
    return np.union1d(np.linspace(0.0, window, samples), [window / 2.0])


def run_entangled_transfer(bits: Sequence[int], cfg: ChannelConfig,
                           time_samples: int = 101) -> TransferReport:
    """Transfer ``bits`` with one application of the 2M-qubit block swap Hamiltonian."""
    bits = _check_bits(bits, cfg.m)
    m, n = cfg.m, 2 * cfg.m
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the simulator limit of {MAX_QUBITS}")
    h = SwapHamiltonian(BlockSwap(RegisterLayout.contiguous(m)), cfg.delta_t, cfg.hbar)
    psi0 = _register_input(bits)

    energies = []
    for t in _sample_times(cfg.delta_t, time_samples):
        energies.append(swap_expectation(evolve_swap_hamiltonian_array(psi0, h, t, n), h, n))
    mean_energy = energies[0]

    mid = evolve_swap_hamiltonian_array(psi0, h, cfg.delta_t / 2.0, n)
    final = evolve_swap_hamiltonian_array(psi0, h, cfg.delta_t, n)
    return TransferReport(
        bits=bits,
        latency=cfg.delta_t,
        mean_energy=mean_energy,
        power=mean_energy / cfg.delta_t,
        midpoint_residual=float(np.max(np.abs(mid - midpoint_state(bits)))),
        midpoint_entropy=entanglement_entropy(PureState(mid), range(m)),
        energy_drift=float(np.max(np.abs(np.array(energies) - mean_energy))),
        final_fidelity=min(1.0, float(abs(final[bits_to_index(bits)]) ** 2)),
        bits_delivered=m,
    )


def _pairwise_midpoint(bits: tuple[int, ...]) -> np.ndarray:
    # build in (A1 B1 A2 B2 ...) order, then regroup into (A..., B...)
    m = len(bits)
    out = np.ones(1, dtype=complex)
    for b in bits:
        pair = midpoint_state((b,))
        out = np.kron(out, pair)
    order = list(range(0, 2 * m, 2)) + list(range(1, 2 * m, 2))
    return out.reshape((2,) * (2 * m)).transpose(order).reshape(-1)


def run_unentangled_transfer(bits: Sequence[int], cfg: ChannelConfig,
                             time_samples: int = 101) -> TransferReport:
    """Transfer ``bits`` with M independent two-qubit swaps running side by side."""
    bits = _check_bits(bits, cfg.m)
    m, n = cfg.m, 2 * cfg.m
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the simulator limit of {MAX_QUBITS}")
    pair_hams = [SwapHamiltonian(BlockSwap.of_pairs([(i, m + i)], n), cfg.delta_t, cfg.hbar)
                 for i in range(m)]
    psi0 = _register_input(bits)

    def evolve(t):
        amps = psi0
        for h in pair_hams:  # terms act on disjoint pairs and commute
            amps = evolve_swap_hamiltonian_array(amps, h, t, n)
        return amps

    def energy(amps):
        return sum(swap_expectation(amps, h, n) for h in pair_hams)

    energies = [energy(evolve(t)) for t in _sample_times(cfg.delta_t, time_samples)]
    mean_energy = energies[0]
    mid, final = evolve(cfg.delta_t / 2.0), evolve(cfg.delta_t)
    return TransferReport(
        bits=bits,
        latency=cfg.delta_t,
        mean_energy=mean_energy,
        power=mean_energy / cfg.delta_t,
        midpoint_residual=float(np.max(np.abs(mid - _pairwise_midpoint(bits)))),
        midpoint_entropy=entanglement_entropy(PureState(mid), range(m)),
        energy_drift=float(np.max(np.abs(np.array(energies) - mean_energy))),
        final_fidelity=min(1.0, float(abs(final[bits_to_index(bits)]) ** 2)),
        bits_delivered=m,
    )


def average_energy_ratio(m: int) -> float:
    """Uniform-input mean energy of M pair swaps over that of one block swap: (M/2)/(1 - 2^-M)."""
    return (m / 2.0) / -math.expm1(-m * math.log(2.0))


def run_chain_relay(bit: int, sites: int, cfg: ChannelConfig) -> ChainReport:
    """Relay one bit down A1 B1 ... An Bn by 2n-1 nearest-neighbour swaps.

    Each hop is a full swap in a window of dt/2, so its energy is twice the
    single-window swap energy. Average power is reported against the bit
    period dt, the interval at which a pipelined chain admits a new bit.
    """
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    if sites < 1:
        raise ValueError("sites must be >= 1")
    n = 2 * sites
    if n > MAX_QUBITS:
        raise ValueError(f"a {sites}-site chain needs {n} qubits (limit {MAX_QUBITS})")
    window = cfg.delta_t / 2.0
    amps = np.zeros(1 << n, dtype=complex)
    amps[bit << (n - 1)] = 1.0
    hop_energies = []
    for k in range(n - 1):
        h = SwapHamiltonian(BlockSwap.of_pairs([(k, k + 1)], n), window, cfg.hbar)
        hop_energies.append(swap_expectation(amps, h, n))
        amps = evolve_swap_hamiltonian_array(amps, h, window, n)
    per_hop = float(np.mean(hop_energies))
    return ChainReport(
        bit=bit,
        sites=sites,
        latency=(n - 1) * window,
        hop_count=n - 1,
        per_hop_energy=per_hop,
        average_power=per_hop / cfg.delta_t,
        pipelined_rate=1.0 / cfg.delta_t,
        final_fidelity=min(1.0, float(abs(amps[bit]) ** 2)),
    )


def chain_power_ratio(delta_t: float = 1.0, hbar: float = 1.0) -> float:
    """Bit-averaged relay power over the minimum power for rate 1/dt (closed form)."""
    hop_energy = 0.5 * math.pi * hbar / delta_t  # half of pi*hbar/dt, bits equiprobable
    chain_power = hop_energy / delta_t
    min_power = math.pi * hbar / (4.0 * delta_t ** 2)  # inverse of capacity_single at rate 1/dt
    return chain_power / min_power


def chain_rate_deficit(delta_t: float = 1.0, hbar: float = 1.0) -> float:
    """Rate lost at fixed power: rates scale as sqrt(P)."""
    return math.sqrt(chain_power_ratio(delta_t, hbar))


def run_spin_wave(bit: int, sites: int, cfg: ChannelConfig, t_max: float | None = None,
                  grid: int = 401) -> SpinWaveCurve:
    """Arrival curve of ``bit`` at the far end of an always-on swap chain.

    The coupling pi*hbar/(2 dt) makes the two-site chain a plain swap at t = dt.
    """
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    if not 2 <= sites <= 10:
        raise ValueError(f"sites must be in [2, 10], got {sites}")
    if grid < 2:
        raise ValueError("grid must be >= 2")
    t_max = sites * cfg.delta_t if t_max is None else t_max
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    coupling = math.pi * cfg.hbar / (2.0 * cfg.delta_t)
    evals, evecs = spin_chain_hamiltonian(sites, coupling).eigh()
    psi0 = np.zeros(1 << sites, dtype=complex)
    psi0[bit << (sites - 1)] = 1.0

    times = np.linspace(0.0, t_max, grid)
    coeffs = evecs.conj().T @ psi0
    states = (np.exp(-1j * np.outer(times, evals) / cfg.hbar) * coeffs) @ evecs.T
    probs = np.abs(states) ** 2
    fid = probs[:, bit]
    norms = probs.sum(axis=1)
    weight = probs @ hamming_weights(sites)
    peak = int(np.argmax(fid))
    return SpinWaveCurve(
        bit=bit,
        sites=sites,
        coupling=coupling,
        times=tuple(float(t) for t in times),
        fidelities=tuple(float(f) for f in fid),
        peak_fidelity=float(fid[peak]),
        peak_time=float(times[peak]),
        max_norm_error=float(np.max(np.abs(norms - 1.0))),
        max_excitation_drift=float(np.max(np.abs(weight - bit))),
    )


class _DephasedSwap:
    """Every trajectory an attempt can follow, simulated once on the full register.

    An attempt is: half window of block-swap evolution, an optional
    projection onto one of the two branches |b,0> and |0,b>, the remaining
    half window, then a computational-basis measurement of register B. Given
    the branch choice the state is deterministic, so the B-outcome
    distribution is cached per trajectory class.
    """

    def __init__(self, bits: tuple[int, ...], cfg: ChannelConfig, checkpoints: int = 11):
        m, n = cfg.m, 2 * cfg.m
        self.m = m
        self.b_index = bits_to_index(bits)
        h = SwapHamiltonian(BlockSwap(RegisterLayout.contiguous(m)), cfg.delta_t, cfg.hbar)
        branches = (self.b_index << m, self.b_index)
        half = cfg.delta_t / 2.0
        self.leakage = 0.0

        def run(start):
            for t in np.linspace(0.0, half, checkpoints):
                amps = evolve_swap_hamiltonian_array(start, h, t, n)
                inside = sum(abs(amps[i]) ** 2 for i in branches)
                self.leakage = max(self.leakage, abs(1.0 - inside))
            return amps

        def b_distribution(amps):
            probs = (np.abs(amps) ** 2).reshape(1 << m, 1 << m).sum(axis=0)
            return np.cumsum(probs / probs.sum())

        mid = run(_register_input(bits))
        weights = np.array([abs(mid[i]) ** 2 for i in branches])
        self.branch_cdf = np.cumsum(weights / weights.sum())
        self.coherent_cdf = b_distribution(run(mid))
        self.dephased_cdfs = []
        for i in branches:
            collapsed = np.zeros_like(mid)
            collapsed[i] = mid[i] / abs(mid[i])
            self.dephased_cdfs.append(b_distribution(run(collapsed)))

    def success_probability(self, p: float) -> float:
        def p_b(cdf):
            return cdf[self.b_index] - (cdf[self.b_index - 1] if self.b_index else 0.0)
        w = np.diff(np.concatenate(([0.0], self.branch_cdf)))
        dephased = sum(wi * p_b(c) for wi, c in zip(w, self.dephased_cdfs))
        return float((1 - p) * p_b(self.coherent_cdf) + p * dephased)

    def outcome(self, rng: np.random.Generator, p: float) -> int:
        if rng.random() < p:
            branch = int(np.searchsorted(self.branch_cdf, rng.random(), side="right"))
            cdf = self.dephased_cdfs[min(branch, 1)]
        else:
            cdf = self.coherent_cdf
        return min(int(np.searchsorted(cdf, rng.random(), side="right")), cdf.size - 1)


MAX_ATTEMPTS = 10_000


def _run_trials(model: _DephasedSwap, p: float, seed: int, trial_ids) -> tuple[dict, int]:
    histogram: dict[int, int] = {}
    corrupted = 0
    for trial in trial_ids:
        rng = np.random.default_rng([seed, trial])
        for attempt in range(1, MAX_ATTEMPTS + 1):
            got = model.outcome(rng, p)
            if got == 0:
                continue  # B reads 0...0 and waits for the next attempt
            if got != model.b_index:
                corrupted += 1
            break
        else:
            raise RuntimeError(f"trial {trial} did not finish in {MAX_ATTEMPTS} attempts")
        histogram[attempt] = histogram.get(attempt, 0) + 1
    return histogram, corrupted


def run_decoherence_trials(bits: Sequence[int], cfg: ChannelConfig, dephase_probability: float,
                           trials: int, seed: int = 0, workers: int = 1) -> DecoherenceReport:
    """Retransmit until B reads ``bits``, with midpoint dephasing of the branches.

    Trial ``k`` draws from its own generator seeded by (seed, k), so the
    result is independent of how trials are split over ``workers``.
    """
    bits = _check_bits(bits, cfg.m)
    if not any(bits):
        raise ValueError("the all-zero message cannot be sent: B reads it as 'not yet'")
    if not 0.0 <= dephase_probability <= 1.0:
        raise ValueError("dephase_probability must lie in [0, 1]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if 2 * cfg.m > MAX_QUBITS:
        raise ValueError("register too large")

    model = _DephasedSwap(bits, cfg)
    blocks = np.array_split(np.arange(trials), max(1, workers))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda ids: _run_trials(model, dephase_probability, seed, ids), blocks))
    else:
        results = [_run_trials(model, dephase_probability, seed, blocks[0])]

    merged: dict[int, int] = {}
    corrupted = 0
    for hist, bad in results:
        corrupted += bad
        for k, v in hist.items():
            merged[k] = merged.get(k, 0) + v
    top = max(merged)
    histogram = tuple(merged.get(k, 0) for k in range(1, top + 1))
    total_attempts = sum(k * v for k, v in merged.items())
    return DecoherenceReport(
        bits=bits,
        dephase_probability=float(dephase_probability),
        trials=trials,
        corrupted_count=corrupted,
        mean_attempts=total_attempts / trials,
        attempt_histogram=histogram,
        success_probability=model.success_probability(dephase_probability),
        max_branch_leakage=float(model.leakage),
        seed=seed,
    )


def measured_outcomes(bits: Sequence[int], cfg: ChannelConfig, dephase_probability: float,
                      attempts: int, seed: int = 0) -> set[tuple[int, ...]]:
    """Distinct B-register readings over ``attempts`` independent attempts."""
    bits = _check_bits(bits, cfg.m)
    model = _DephasedSwap(bits, cfg)
    rng = np.random.default_rng([seed, 0])
    return {index_to_bits(model.outcome(rng, dephase_probability), cfg.m)
            for _ in range(attempts)}
