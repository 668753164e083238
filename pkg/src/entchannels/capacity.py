"""Power-limited rate laws for single, parallel and entangled qubit channels.

All rates are in bits per unit time for power ``P`` in units of hbar/time^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

MODES = ("single", "unentangled", "entangled", "bosonic_ref")

# sqrt(pi/3)/ln 2: broadband bosonic channel coefficient, used only as a reference curve
ALPHA = math.sqrt(math.pi / 3.0) / math.log(2.0)


def _check(power: float, hbar: float, m: int = 1) -> None:
    if not power > 0:
        raise ValueError(f"power must be positive, got {power}")
    if not hbar > 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    if int(m) != m or m < 1:
        raise ValueError(f"channel count must be a positive integer, got {m}")


@dataclass(frozen=True)
class CapacityPoint:
    power: float
    m: int
    mode: str
    rate: float
    hbar: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode in ("single", "bosonic_ref") and self.m != 1:
            raise ValueError(f"mode {self.mode} requires m == 1")
        if not (self.power > 0 and self.rate > 0 and self.m >= 1):
            raise ValueError("power and rate must be positive, m >= 1")

    def sort_key(self):
        return (MODES.index(self.mode), self.m, self.power)


def capacity_single(power: float, hbar: float = 1.0) -> float:
    """One qubit channel: 1/dt = (2/sqrt(pi)) sqrt(P/hbar)."""
    _check(power, hbar)
    return 2.0 / math.sqrt(math.pi) * math.sqrt(power / hbar)


def beta(m: int) -> float:
    """sqrt(2 / (pi (1 - 2^-m))); equals 2/sqrt(pi) at m = 1."""
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    return math.sqrt(2.0 / (math.pi * -math.expm1(-m * math.log(2.0))))


def capacity_entangled(power: float, m: int, hbar: float = 1.0) -> float:
    """m bits per block swap, window set by the mean swap energy."""
    _check(power, hbar, m)
    return m * beta(m) * math.sqrt(power / hbar)


def capacity_unentangled(power: float, m: int, hbar: float = 1.0) -> float:
    """Power split evenly over m independent channels."""
    _check(power, hbar, m)
    return math.sqrt(m) * capacity_single(power, hbar)


def capacity_bosonic_ref(power: float, hbar: float = 1.0) -> float:
    _check(power, hbar)
    return ALPHA * math.sqrt(power / hbar)


def entangled_advantage(m: int) -> float:
    """Exact entangled/unentangled rate ratio sqrt(m / (2 (1 - 2^-m)))."""
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    return math.sqrt(m / (2.0 * -math.expm1(-m * math.log(2.0))))


def capacity_sweep(power_grid: Iterable[float], m_values: Iterable[int],
                  hbar: float = 1.0) -> list[CapacityPoint]:
    """Rate-vs-power table for every mode.

    ``single`` and ``bosonic_ref`` rows appear once per power at m = 1;
    ``unentangled`` and ``entangled`` rows once per (power, m). Rows are
    ordered by (mode, m, power) with modes in ``MODES`` order.
    """
    powers = sorted(set(float(p) for p in power_grid))
    ms = sorted(set(int(m) for m in m_values))
    if not powers or not ms:
        raise ValueError("power grid and m values must be nonempty")
    points = []
    for p in powers:
        points.append(CapacityPoint(p, 1, "single", capacity_single(p, hbar), hbar))
        points.append(CapacityPoint(p, 1, "bosonic_ref", capacity_bosonic_ref(p, hbar), hbar))
        for m in ms:
            points.append(CapacityPoint(p, m, "unentangled", capacity_unentangled(p, m, hbar), hbar))
            points.append(CapacityPoint(p, m, "entangled", capacity_entangled(p, m, hbar), hbar))
    return sorted(points, key=CapacityPoint.sort_key)
