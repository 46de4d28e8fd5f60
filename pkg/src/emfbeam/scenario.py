"""Scenario configuration, units and geometry.

Conventions used throughout the package: the wavelength is the length unit
(lambda = 1) and the maximum transmit power is the power unit (chi_max = 1);
dB values appear only at I/O boundaries. Propagation is two-dimensional in
the x-y plane, the base-station array lies on the x axis with its first
element at the origin, and all scatterer/RIS directions point into the
upper half plane (a sector about +y).
"""

import json
import math
import warnings
from dataclasses import dataclass, asdict

import numpy as np

X_AXIS = np.array([1.0, 0.0])

# fixed sub-seed indices so e.g. adding RISs never perturbs scatterer draws
_SEED_SCATTER_DIRS = 0
_SEED_SCATTER_GAINS = 1
_SEED_RIS_DIRS = 2
_SEED_RIS_GAINS = 3
_SEED_RIS_UE_DIRS = 4


@dataclass(frozen=True)
class ScenarioConfig:
    M: int = 64                  # BS antenna elements (ULA on x axis)
    N: int = 3                   # scatterers
    K: int = 3                   # RISs (0 = no RIS assistance)
    P: int = 16                  # elements per RIS (irrelevant when K = 0)
    R: float = 650.0             # exposure limit-circle radius (wavelengths)
    element_spacing: float = 0.5         # ULA pitch (wavelengths)
    omega_thresh_db: float = -70.0       # exposure threshold re chi_max
    square_half_width: float = 700.0     # half side of the scanned square
    sector_half_angle: float = math.pi / 6  # direction sector about +y (radians)
    circle_samples: int = 4096           # scan points on the upper half circle
    grid_step: float = 5.0               # area-scan pitch (wavelengths)
    seed: int = 0                        # root RNG seed

    def __post_init__(self):
        for name in ("R", "element_spacing", "square_half_width",
                     "sector_half_angle", "grid_step"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        if not math.isfinite(self.omega_thresh_db):
            raise ValueError("omega_thresh_db must be finite")
        if self.M < 1 or self.N < 1 or self.P < 1:
            raise ValueError("M, N and P must be >= 1")
        if self.K < 0:
            raise ValueError("K must be >= 0")
        if self.circle_samples < 2:
            raise ValueError("circle_samples must be >= 2")
        if self.sector_half_angle > math.pi / 2:
            raise ValueError("sector_half_angle must be <= pi/2 "
                             "(directions must stay in the upper half plane)")
        if self.R < 50:
            warnings.warn(f"limit-circle radius R = {self.R} is small; beam-peak "
                          "positions are only meaningful for R >> 1 wavelength",
                          stacklevel=2)

    @property
    def omega_thresh(self) -> float:
        """Exposure threshold as linear power (chi_max-normalized)."""
        return 10.0 ** (self.omega_thresh_db / 10.0)


@dataclass(frozen=True)
class RisDescriptor:
    bs_dir: np.ndarray        # unit vector, BS -> RIS
    ue_dir: np.ndarray        # unit vector, RIS -> target UE
    gain: complex
    element_offsets: np.ndarray   # (P, 2), first element at the RIS origin
    orientation: np.ndarray       # unit vector along the RIS array axis


@dataclass(frozen=True)
class Scenario:
    config: ScenarioConfig
    bs_elements: np.ndarray       # (M, 2)
    scatter_dirs: np.ndarray      # (N, 2) unit vectors
    scatter_gains: np.ndarray     # (N,) complex
    ris_list: tuple = ()          # K RisDescriptor


def element_positions(count, spacing, axis=X_AXIS):
    """Uniform linear array: point i at (i-1)*spacing along axis, first at origin."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if not (spacing > 0):
        raise ValueError("spacing must be > 0")
    axis = np.asarray(axis, dtype=np.float64)
    return np.arange(count)[:, None] * spacing * axis[None, :]


def _sector_directions(rng, n, half_angle):
    # angles measured from +y, uniform in [-half_angle, +half_angle]
    theta = rng.uniform(-half_angle, half_angle, size=n)
    return np.stack([np.sin(theta), np.cos(theta)], axis=1)


def _complex_gains(rng, n):
    # circularly-symmetric complex Gaussian, unit variance
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)


def _purpose_rng(seed, purpose):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(purpose,)))


def build_scenario(config: ScenarioConfig) -> Scenario:
    """Draw a random scenario; deterministic in config.seed.

    Scatterer and RIS directions are uniform in angle within the sector
    about +y; path gains are i.i.d. unit-variance complex Gaussian. Each RIS
    also gets a RIS-to-UE direction drawn in the same sector convention (it
    is phase-compensated away by the RIS weights, so only the draw itself
    matters) and a default orientation broadside to the incoming BS
    direction. The target UE never needs coordinates: after RIS
    self-configuration the RIS channel depends only on the BS-side
    directions.
    """
    cfg = config
    half = cfg.sector_half_angle

    scatter_dirs = _sector_directions(_purpose_rng(cfg.seed, _SEED_SCATTER_DIRS), cfg.N, half)
    scatter_gains = _complex_gains(_purpose_rng(cfg.seed, _SEED_SCATTER_GAINS), cfg.N)

    ris_list = []
    if cfg.K > 0:
        bs_dirs = _sector_directions(_purpose_rng(cfg.seed, _SEED_RIS_DIRS), cfg.K, half)
        gains = _complex_gains(_purpose_rng(cfg.seed, _SEED_RIS_GAINS), cfg.K)
        ue_dirs = _sector_directions(_purpose_rng(cfg.seed, _SEED_RIS_UE_DIRS), cfg.K, half)
        for k in range(cfg.K):
            a = bs_dirs[k]
            orientation = np.array([-a[1], a[0]])  # broadside to the BS
            ris_list.append(RisDescriptor(
                bs_dir=a,
                ue_dir=ue_dirs[k],
                gain=complex(gains[k]),
                element_offsets=element_positions(cfg.P, cfg.element_spacing, orientation),
                orientation=orientation,
            ))

    return Scenario(
        config=cfg,
        bs_elements=element_positions(cfg.M, cfg.element_spacing),
        scatter_dirs=scatter_dirs,
        scatter_gains=scatter_gains,
        ris_list=tuple(ris_list),
    )


def _complex_pairs(values):
    return [[float(v.real), float(v.imag)] for v in values]


def scenario_to_dict(scenario: Scenario) -> dict:
    ris = [{
        "bs_dir": r.bs_dir.tolist(),
        "ue_dir": r.ue_dir.tolist(),
        "gain": [r.gain.real, r.gain.imag],
        "element_offsets": r.element_offsets.tolist(),
        "orientation": r.orientation.tolist(),
    } for r in scenario.ris_list]
    return {
        "config": asdict(scenario.config),
        "bs_elements": scenario.bs_elements.tolist(),
        "scatter_dirs": scenario.scatter_dirs.tolist(),
        "scatter_gains": _complex_pairs(scenario.scatter_gains),
        "ris_list": ris,
    }


def scenario_from_dict(data: dict) -> Scenario:
    cfg = ScenarioConfig(**data["config"])
    ris_list = tuple(RisDescriptor(
        bs_dir=np.array(r["bs_dir"], dtype=np.float64),
        ue_dir=np.array(r["ue_dir"], dtype=np.float64),
        gain=complex(r["gain"][0], r["gain"][1]),
        element_offsets=np.array(r["element_offsets"], dtype=np.float64),
        orientation=np.array(r["orientation"], dtype=np.float64),
    ) for r in data["ris_list"])
    gains = np.array([complex(re, im) for re, im in data["scatter_gains"]])
    return Scenario(
        config=cfg,
        bs_elements=np.array(data["bs_elements"], dtype=np.float64),
        scatter_dirs=np.array(data["scatter_dirs"], dtype=np.float64),
        scatter_gains=gains,
        ris_list=ris_list,
    )


def dump_scenario(scenario: Scenario, path):
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=1)


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))
