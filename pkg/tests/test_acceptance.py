"""Acceptance criteria, one test each, every tolerance fixed here.

Each test records a one-line verdict; ``conftest.py`` prints them at the end
of the run (or run this file directly for the same lines).
"""
import itertools
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg
from scipy.optimize import brentq

from entchannels.capacity import (
    capacity_entangled,
    capacity_single,
    capacity_unentangled,
)
from entchannels.energetics import (
    expectation_energy,
    haar_overlap_samples,
    ml_bound,
    ml_universality_check,
    orthogonality_time,
    swap_energy_closed_form,
)
from entchannels.operators import BlockSwap, SwapHamiltonian, evolve_swap_hamiltonian
from entchannels.protocols import (
    ChannelConfig,
    chain_power_ratio,
    chain_rate_deficit,
    run_chain_relay,
    run_decoherence_trials,
    run_spin_wave,
)
from entchannels.statevec import RegisterLayout, basis_state, entanglement_entropy, haar_random, tensor

VERDICTS: list[str] = []
PI = math.pi


def verdict(number, title, ok, detail):
    VERDICTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}")
    assert ok, detail


def swap_ham(m, dt=1.0, hbar=1.0):
    return SwapHamiltonian(BlockSwap(RegisterLayout.contiguous(m)), dt, hbar)


def test_criterion_01_swap_exactness():
    worst = 0.0
    for m in (1, 2, 3, 4):
        h = swap_ham(m, dt=1.0)
        for seed in range(50):
            a = haar_random(m, seed=1000 * m + seed)
            out = evolve_swap_hamiltonian(tensor(a, basis_state([0] * m)), h, 1.0)
            expected = tensor(basis_state([0] * m), a)
            worst = max(worst, float(np.max(np.abs(out.amplitudes - expected.amplitudes))))
    verdict(1, "full-window evolution is the block swap", worst < 1e-12,
            f"max amplitude error {worst:.2e} < 1e-12")


def test_criterion_02_swap_energy_formula():
    worst = 0.0
    for m in (1, 2, 3, 4):
        h = swap_ham(m, dt=1.0, hbar=1.0)
        for seed in range(100):
            a = haar_random(m, seed=5000 * m + seed)
            e_sim = expectation_energy(tensor(a, basis_state([0] * m)), h)
            e_formula = swap_energy_closed_form(abs(a.amplitudes[0]) ** 2, 1.0, 1.0)
            worst = max(worst, abs(e_sim - e_formula))
    verdict(2, "simulated swap energy equals pi*hbar(1-|<0|psi>|^2)/2dt", worst < 1e-10,
            f"max deviation {worst:.2e} < 1e-10")


def test_criterion_03_midpoint_state():
    psi = evolve_swap_hamiltonian(basis_state([1, 0, 0, 0]), swap_ham(2), 0.5)
    pref = np.exp(-1j * PI / 4) / math.sqrt(2)
    expected = pref * (basis_state([1, 0, 0, 0]).amplitudes + 1j * basis_state([0, 0, 1, 0]).amplitudes)
    residual = float(np.max(np.abs(psi.amplitudes - expected)))
    entropy = entanglement_entropy(psi, {0, 1})
    ok = residual < 1e-12 and abs(entropy - 1.0) < 1e-9
    verdict(3, "half-window state for M=2, b=10", ok,
            f"residual {residual:.2e} < 1e-12, A:B entropy {entropy:.12f} bit")


def test_criterion_04_margolus_levitin():
    worst_sat = 0.0
    for m in (1, 2, 3, 4):
        h = swap_ham(m)
        for k in range(1, 1 << m):
            bits = [(k >> (m - 1 - i)) & 1 for i in range(m)]
            psi = basis_state(bits + [0] * m)
            tau = orthogonality_time(psi, h, 1.0, 2.0, 1000)
            bound = PI / (2 * expectation_energy(psi, h))
            assert bound == ml_bound(expectation_energy(psi, h), 0.0, 1.0)
            worst_sat = max(worst_sat, abs(tau - bound) / bound)
    report = ml_universality_check(cases=1000, max_qubits=3, seed=0, grid=1000)
    ok = worst_sat < 1e-6 and report.violations == 0 and report.detected > 0
    verdict(4, "swap saturates Margolus-Levitin; random H never beat it", ok,
            f"saturation rel. error {worst_sat:.2e} < 1e-6; {report.detected}/{report.cases} "
            f"orthogonal cases, {report.violations} violations, min margin {report.min_margin:.2e}")


def test_criterion_05_capacity_laws():
    reduction = max(abs(capacity_entangled(p, 1, h) - capacity_single(p, h))
                    for p in (0.01, 0.5, 1.0, 3.0, 100.0) for h in (0.5, 1.0, 2.0))
    ratio_err = max(abs(capacity_entangled(1.7, m) / capacity_unentangled(1.7, m)
                        - math.sqrt(m / (2 * (1 - 2.0 ** -m)))) for m in range(1, 17))
    ratio8 = capacity_entangled(1.0, 8) / capacity_unentangled(1.0, 8)

    def oracle_rate(power, m):
        # independent route: solve P = E(dt)/dt with E from the swap energy at mean overlap 2^-m
        f = lambda log_dt: swap_energy_closed_form(2.0 ** -m, math.exp(log_dt), 1.0) / math.exp(log_dt) - power
        return m / math.exp(brentq(f, -30, 30, xtol=1e-15, rtol=1e-15))

    rng = np.random.default_rng(2024)
    pairs = [(float(10 ** rng.uniform(-2, 2)), int(rng.integers(1, 13))) for _ in range(20)]
    oracle_err = max(abs(capacity_entangled(p, m) - oracle_rate(p, m)) / oracle_rate(p, m)
                     for p, m in pairs)
    ok = reduction < 1e-12 and ratio_err < 1e-12 and oracle_err < 1e-10 and abs(ratio8 - 2.003918) < 1e-6
    verdict(5, "capacity laws", ok,
            f"M=1 reduction {reduction:.1e}, ratio-law error {ratio_err:.1e} (M<=16, "
            f"M=8 ratio {ratio8:.6f}), energy-accounting oracle rel. error {oracle_err:.1e} on 20 pairs")


def test_criterion_06_haar_statistics():
    n = 100_000
    lines, ok = [], True
    for m in (1, 2, 3):
        x = haar_overlap_samples(m, n, seed=m)
        se = x.std(ddof=1) / math.sqrt(n)
        z = abs(x.mean() - 2.0 ** -m) / se
        ok &= z < 5
        lines.append(f"M={m}: {x.mean():.5f} ({z:.2f} SE)")
    verdict(6, "Haar mean overlap is 2^-M", ok, ", ".join(lines))


def test_criterion_07_chain():
    worst_fid, worst_lat = 0.0, 0.0
    for sites in range(1, 7):
        for bit in (0, 1):
            r = run_chain_relay(bit, sites, ChannelConfig(delta_t=1.0))
            worst_fid = max(worst_fid, abs(r.final_fidelity - 1))
            worst_lat = max(worst_lat, abs(r.latency - (2 * sites - 1) / 2))
    deficit = chain_rate_deficit(1.0, 1.0)
    ok = worst_fid < 1e-10 and worst_lat == 0.0 and abs(deficit - math.sqrt(2)) < 1e-12
    verdict(7, "swap-chain relay", ok,
            f"fidelity error {worst_fid:.1e}, latency error {worst_lat}, power ratio "
            f"{chain_power_ratio():.15f}, rate deficit {deficit:.15f} vs sqrt 2")


def test_criterion_08_decoherence():
    trials = 100_000
    lines, ok = [], True
    for m in (1, 2, 3):
        bits = [1] + [0] * (m - 1)
        full = run_decoherence_trials(bits, ChannelConfig(m=m), 1.0, trials, seed=100 + m)
        none = run_decoherence_trials(bits, ChannelConfig(m=m), 0.0, 1000, seed=m)
        z = abs(full.mean_attempts - 2.0) / math.sqrt(2.0 / trials)
        ok &= full.corrupted_count == 0 and z < 5 and none.mean_attempts == 1.0
        lines.append(f"M={m}: corrupted {full.corrupted_count}, attempts {full.mean_attempts:.4f} "
                     f"({z:.2f} SE), p=0 attempts {none.mean_attempts}")
    verdict(8, "dephasing never corrupts, only delays", ok, "; ".join(lines))


def test_criterion_09_spin_wave():
    cfg = ChannelConfig(delta_t=1.0)
    two = run_spin_wave(1, 2, cfg, t_max=2.0, grid=201)
    four = run_spin_wave(1, 4, cfg, t_max=6.0, grid=121)
    swap = np.zeros((4, 4))
    for i, j in itertools.product((0, 1), repeat=2):
        swap[2 * j + i, 2 * i + j] = 1
    h = (PI / 2) * sum(np.kron(np.kron(np.eye(1 << k), swap), np.eye(1 << (2 - k))) for k in range(3))
    psi0 = np.zeros(16)
    psi0[8] = 1
    oracle = [abs((scipy.linalg.expm(-1j * h * t) @ psi0)[1]) ** 2 for t in four.times]
    pointwise = float(np.max(np.abs(np.array(four.fidelities) - oracle)))
    conserved = max(two.max_norm_error, four.max_norm_error,
                    two.max_excitation_drift, four.max_excitation_drift)
    ok = abs(two.peak_fidelity - 1) < 1e-10 and pointwise < 1e-9 and conserved < 1e-9
    verdict(9, "spin-wave propagation", ok,
            f"two-site peak {two.peak_fidelity:.12f} at t={two.peak_time}, four-site vs expm "
            f"{pointwise:.1e}, norm/excitation drift {conserved:.1e}")


COMMANDS = [
    ["swap", "--m", "3", "--bits", "101", "--seed", "5"],
    ["capacity", "--seed", "5"],
    ["chain", "--sites", "5", "--seed", "5"],
    ["spinwave", "--sites", "5", "--seed", "5"],
    ["decohere", "--m", "2", "--bits", "01", "--p", "0.4", "--trials", "5000", "--seed", "5"],
    ["mlcheck", "--trials", "100", "--seed", "5"],
]


def test_criterion_10_determinism():
    def run(args):
        out = subprocess.run([sys.executable, "-m", "entchannels", *args], capture_output=True)
        assert out.returncode == 0, out.stderr
        return out.stdout

    same = [run(args) == run(args) for args in COMMANDS]
    golden = Path(__file__).parent / "fixtures" / "capacity_golden.csv"
    golden_ok = run(["capacity"]) == golden.read_bytes()
    verdict(10, "byte-identical CLI output and golden sweep", all(same) and golden_ok,
            f"{sum(same)}/{len(same)} commands identical across runs, golden fixture "
            f"{'matches' if golden_ok else 'differs'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
