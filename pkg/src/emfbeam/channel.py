"""Propagation channels: scatterer paths, RIS paths, near-field probes, powers.

All channel vectors are length-M complex rows (one entry per BS element).
Far-field paths carry unit-power random gains and pure steering phases;
the near-field probe row additionally carries the spherical 1/(4*pi*d)
amplitude. Phases are never wrapped before summation; only complex
exponentials of them are formed, which is safe at limit-circle distances.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .scenario import Scenario

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RisPhaseSet:
    phi: np.ndarray   # (K, M, P) BS->RIS side phases, radians
    psi: np.ndarray   # (K, P) RIS->UE side phases, radians


@dataclass(frozen=True)
class PowerSample:
    value: float                 # nonnegative, chi_max-normalized linear power
    location: tuple | None = None


def scatter_channel(scenario: Scenario) -> np.ndarray:
    """Multipath row through the scatterers: sum of plane-wave steering terms."""
    phases = TWO_PI * (scenario.scatter_dirs @ scenario.bs_elements.T)  # (N, M)
    return scenario.scatter_gains @ np.exp(1j * phases)


def ris_phases(scenario: Scenario) -> RisPhaseSet:
    """Plane-wave phases on both sides of every RIS (empty arrays when K = 0)."""
    cfg = scenario.config
    K, M, P = len(scenario.ris_list), cfg.M, cfg.P
    phi = np.zeros((K, M, P))
    psi = np.zeros((K, P))
    for k, ris in enumerate(scenario.ris_list):
        a_dot_v = TWO_PI * (scenario.bs_elements @ ris.bs_dir)      # (M,)
        a_dot_c = TWO_PI * (ris.element_offsets @ ris.bs_dir)       # (P,)
        phi[k] = a_dot_v[:, None] + a_dot_c[None, :]
        psi[k] = TWO_PI * (ris.element_offsets @ ris.ue_dir)
    return RisPhaseSet(phi=phi, psi=psi)


def ris_self_configure(phases: RisPhaseSet) -> np.ndarray:
    """Unit-modulus RIS weights that cancel the UE-side phase exactly."""
    return np.exp(-1j * phases.psi)


def ris_channel(scenario: Scenario, weights: np.ndarray) -> np.ndarray:
    """RIS-assisted row: per RIS, gain/P times the weighted element-phase sum.

    With the self-configured weights and the default broadside orientation
    this collapses to one scatterer-like term per RIS, carrying the full
    gain at every BS element.
    """
    cfg = scenario.config
    h = np.zeros(cfg.M, dtype=np.complex128)
    if not scenario.ris_list:
        return h
    weights = np.asarray(weights)
    if weights.shape != (len(scenario.ris_list), cfg.P):
        raise ValueError(f"weights shape {weights.shape} does not match "
                         f"(K, P) = ({len(scenario.ris_list)}, {cfg.P})")
    phases = ris_phases(scenario)
    for k, ris in enumerate(scenario.ris_list):
        elem_sum = np.exp(1j * (phases.phi[k] + phases.psi[k][None, :])) @ weights[k]
        h += (ris.gain / cfg.P) * elem_sum
    return h


def total_channel(s: np.ndarray, h: np.ndarray) -> np.ndarray:
    if s.shape != h.shape:
        raise ValueError(f"channel length mismatch: {s.shape} vs {h.shape}")
    return s + h


def near_field_channel(scenario: Scenario, point) -> np.ndarray:
    """Spherical-wave row from each BS element to a nearby probe point."""
    point = np.asarray(point, dtype=np.float64)
    d = np.hypot(*(point - scenario.bs_elements).T)
    if np.min(d) < 1e-9:
        raise ValueError(f"probe point {point.tolist()} coincides with a BS element")
    return kernels.nearfield_rows(scenario.bs_elements, point[None, :])[0]


def received_power(row: np.ndarray, b: np.ndarray, chi: float,
                   location=None) -> PowerSample:
    """|row . b|^2 * chi for a unit-norm precoder b and transmit power chi."""
    row = np.asarray(row)
    b = np.asarray(b)
    if row.shape != b.shape:
        raise ValueError(f"dimension mismatch: channel {row.shape} vs precoder {b.shape}")
    if chi < 0:
        raise ValueError("chi must be >= 0")
    amp = row @ b
    return PowerSample(value=float((amp.real ** 2 + amp.imag ** 2) * chi),
                       location=location)
