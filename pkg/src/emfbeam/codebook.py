"""DFT beam codebook, beam-peak positions on the limit circle, arc partition.

The codebook is the unitary DFT basis over the array elements; each column
is one beam. A beam's peak is located by scanning the upper half circle,
and the half circle is partitioned into per-beam arcs whose boundaries sit
halfway (in angle) between neighboring peaks. Beam-domain projection uses
the Hermitian transpose of the codebook so that projection and synthesis
are exact inverses.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import exposure
from .scenario import Scenario


@dataclass(frozen=True)
class BeamFrame:
    size: int
    dft: np.ndarray          # (M, M), columns are beams
    beam_peaks: np.ndarray   # (M, 2) peak points on the limit circle
    peak_angles: np.ndarray  # (M,) polar angle of each peak
    arcs: np.ndarray         # (M, 2) [lo, hi] arc of each beam, radians


def dft_matrix(m: int) -> np.ndarray:
    """Unitary DFT codebook; entry (l, k) = exp(2j*pi*l*k/m)/sqrt(m) (0-based)."""
    if m < 1:
        raise ValueError("codebook size must be >= 1")
    idx = np.arange(m)
    return np.exp(2j * math.pi * np.outer(idx, idx) / m) / math.sqrt(m)


def project(b, frame: BeamFrame) -> np.ndarray:
    """Element-domain vector -> beam-domain coefficients (Hermitian transform)."""
    return frame.dft.conj().T @ np.asarray(b, dtype=np.complex128)


def synthesize(y, frame: BeamFrame) -> np.ndarray:
    """Beam-domain coefficients -> element-domain vector (not normalized)."""
    return frame.dft @ np.asarray(y, dtype=np.complex128)


def beam_peak_angles(dft, scenario: Scenario, circle_samples=None) -> np.ndarray:
    """Scan angle of the strongest circle point of every beam.

    Ties resolve to the smallest polar angle. Peak positions only indicate
    beam directions meaningfully when the circle radius is much larger than
    the wavelength.
    """
    angles, rows = exposure.circle_rows(scenario, circle_samples)
    amp = rows @ dft
    powers = amp.real ** 2 + amp.imag ** 2
    return angles[np.argmax(powers, axis=0)]


def beam_peak(frame: BeamFrame, m: int, scenario: Scenario,
              circle_samples=None) -> np.ndarray:
    """Peak point of beam m on the limit circle (2-D coordinates)."""
    theta = beam_peak_angles(frame.dft[:, m:m + 1], scenario, circle_samples)[0]
    return exposure.circle_points(scenario.config.R, np.array([theta]))[0]


def build_arcs(peak_angles) -> np.ndarray:
    """Partition the half circle into per-beam arcs split at mid-peak angles.

    arcs[m] is the [lo, hi] interval owned by beam m; the outermost arcs
    extend to the half-circle endpoints 0 and pi.
    """
    peak_angles = np.asarray(peak_angles, dtype=np.float64)
    order = np.argsort(peak_angles, kind="stable")
    srt = peak_angles[order]
    if np.any(np.diff(srt) == 0.0):
        raise ValueError("duplicate beam-peak angles; arcs would be ambiguous")
    mids = 0.5 * (srt[:-1] + srt[1:])
    lo = np.concatenate(([0.0], mids))
    hi = np.concatenate((mids, [math.pi]))
    arcs = np.empty((peak_angles.size, 2))
    arcs[order, 0] = lo
    arcs[order, 1] = hi
    return arcs


_FRAME_CACHE: dict = {}


def build_frame(scenario: Scenario, circle_samples=None) -> BeamFrame:
    """Codebook + peaks + arcs for the scenario's array and limit circle.

    Depends only on the element layout and circle discretization, so frames
    are cached and shared across channel samples.
    """
    cfg = scenario.config
    n = cfg.circle_samples if circle_samples is None else circle_samples
    key = (scenario.bs_elements.tobytes(), cfg.R, n)
    frame = _FRAME_CACHE.get(key)
    if frame is None:
        dft = dft_matrix(cfg.M)
        peak_angles = beam_peak_angles(dft, scenario, n)
        arcs = build_arcs(peak_angles)
        peaks = exposure.circle_points(cfg.R, peak_angles)
        for arr in (dft, peak_angles, arcs, peaks):
            arr.setflags(write=False)
        frame = BeamFrame(size=cfg.M, dft=dft, beam_peaks=peaks,
                          peak_angles=peak_angles, arcs=arcs)
        _FRAME_CACHE[key] = frame
    return frame


def clear_caches():
    _FRAME_CACHE.clear()
