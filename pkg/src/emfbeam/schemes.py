"""The four precoding schemes: matched filter, power reduction in place,
beam-domain truncation, and truncation followed by boosting.

All schemes share the matched-filter beam shape as a starting point. The
reduced scheme scales transmit power so the strongest circle point lands on
the threshold. The truncated scheme scales down only the beam-domain
coefficients whose arcs exceed the threshold; the boosted scheme then
scales up coefficients whose arcs stay strictly below it, stopping when the
total transmit power would pass the cap. Threshold-set membership and the
scale factors are read off arc maxima of circle scans; the boost factors
come from a single scan of the truncated scheme and are not re-scanned
inside the loop, so neighboring-arc coupling shows up as small residual
violations rather than being iterated away.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import PowerSample
from .codebook import BeamFrame, project, synthesize
from .exposure import (ArcMaxima, CircleScan, arc_maxima, arc_maxima_refined,
                       scan_circle)

CHI_MAX = 1.0

# arcs whose max sits below this fraction of the threshold are never
# boosted (the scale factor would blow up on a near-null direction)
BOOST_POWER_FLOOR = 1e-12

# leakage between neighboring beams makes a single scale-down pass land up
# to a few dB off, so truncation rebalances the affected beams until every
# arc sits just under the threshold, then trims the whole vector to the
# refined circle maximum (an exact residual reduction of at most ~0.05 dB)
TRUNC_TRIM_REL = 1e-2     # acceptable excess above threshold before the trim
TRUNC_BAL_REL = 5e-2      # acceptable shortfall below threshold for landed beams
TRUNC_MAX_PASSES = 24


@dataclass(frozen=True)
class Precoder:
    b: np.ndarray        # unit-norm complex beamforming vector
    chi: float           # transmit power, chi_max-normalized
    scheme: str

    def __post_init__(self):
        norm = float(np.linalg.norm(self.b))
        if not math.isclose(norm, 1.0, rel_tol=0, abs_tol=1e-9):
            raise ValueError(f"precoder norm {norm} is not 1")
        if not -1e-12 <= self.chi <= CHI_MAX + 1e-12:
            raise ValueError(f"chi {self.chi} outside [0, {CHI_MAX}]")


@dataclass(frozen=True)
class TruncationReport:
    exceed_set: np.ndarray        # beams whose arc max was above threshold
    boost_set: np.ndarray         # beams boosted (always disjoint from exceed_set)
    y_before: np.ndarray          # beam-domain coefficients before this step
    y_after: np.ndarray           # coefficients after scaling
    scale: np.ndarray             # per-beam factor applied (<=1 truncating, >=1 boosting)
    chi_base: float               # transmit power of the underlying matched filter
    passes: int = 0               # truncation scale-down passes applied
    converged: bool = True        # truncation reached a compliant circle
    boost_iterations: int = 0
    power_cap_hit: bool = False
    skipped: tuple = ()           # beams excluded by the near-null power floor


def mrt(g) -> Precoder:
    """Matched filter: conjugated channel at full transmit power."""
    g = np.asarray(g, dtype=np.complex128)
    norm = np.linalg.norm(g)
    if norm == 0:
        raise ValueError("zero channel has no matched-filter direction")
    return Precoder(b=g.conj() / norm, chi=CHI_MAX, scheme="mrt")


def reduced_mrt(precoder: Precoder, omega_max, omega_thresh) -> Precoder:
    """Same beam, power scaled so the circle maximum meets the threshold.

    omega_max is the chi-normalized circle maximum of the input precoder
    (a PowerSample or a bare float). A zero maximum means the constraint is
    inactive and the power stays at its cap.
    """
    peak = omega_max.value if isinstance(omega_max, PowerSample) else float(omega_max)
    if peak <= 0:
        chi = precoder.chi
    else:
        chi = min(omega_thresh / peak * precoder.chi, precoder.chi)
    return Precoder(b=precoder.b, chi=chi, scheme="reduced")


def truncated_mrt(scenario, precoder: Precoder, frame: BeamFrame, scan: CircleScan,
                  omega_thresh, arc_max: ArcMaxima | None = None,
                  max_passes=TRUNC_MAX_PASSES):
    """Scale down beams whose arcs exceed the threshold until none does.

    The scan must have been taken with (precoder.b, precoder.chi). Each
    exceeding beam coefficient is scaled by sqrt(thresh / arc max), which
    would land its arc exactly on the threshold if the beam owned the arc
    alone; leakage between neighboring beams leaves residues, so further
    passes rebalance the already-truncated beams toward the threshold from
    either side (never above their original coefficient) and pick up arcs
    newly pushed over, and one final uniform scale-down to the refined
    circle maximum removes what is left. Untouched beams keep their
    coefficients (up to the final trim), making the scheme a no-op on
    compliant inputs. arc_max overrides the maxima read from the scan
    (callers may pass refined values). max_passes=1 gives the plain single
    application of the rule, with no repair passes and no trim.
    """
    am_power = (arc_maxima(scan, frame.arcs) if arc_max is None else arc_max).power
    y = project(precoder.b, frame)
    norm_ref = np.linalg.norm(synthesize(y, frame))
    y_t = y.copy()
    scale = np.ones(frame.size)
    member = am_power > omega_thresh   # strict crossing, first-pass membership
    hi = omega_thresh * (1.0 + TRUNC_TRIM_REL)
    lo = omega_thresh * (1.0 - TRUNC_BAL_REL)
    passes = 0
    b_cur, chi_cur, scan_cur = precoder.b, precoder.chi, scan
    while passes < max_passes:
        member |= am_power > hi
        fix = member & ((am_power > (omega_thresh if passes == 0 else hi))
                        | ((am_power < lo) & (scale < 1.0)))
        idx = np.flatnonzero(fix)
        if idx.size == 0:
            break
        scale[idx] = np.minimum(1.0, scale[idx] * np.sqrt(omega_thresh / am_power[idx]))
        y_t[idx] = y[idx] * scale[idx]
        passes += 1
        fy_t = synthesize(y_t, frame)
        norm_t = np.linalg.norm(fy_t)
        b_cur = fy_t / norm_t
        chi_cur = precoder.chi * (norm_t / norm_ref) ** 2
        scan_cur = scan_circle(scenario, b_cur, chi_cur,
                               circle_samples=scan.angles.size, tag="truncating")
        am_power = arc_maxima(scan_cur, frame.arcs).power

    converged = not (am_power > hi).any()
    if passes > 0 and max_passes > 1:
        am_ref = arc_maxima_refined(scenario, b_cur, scan_cur, frame.arcs,
                                    omega_thresh)
        peak = am_ref.power.max()
        if peak > omega_thresh:
            trim = math.sqrt(omega_thresh / peak)
            y_t *= trim
            scale *= trim
        converged = True
    ever_exceeded = member

    fy_t = synthesize(y_t, frame)
    norm_t = np.linalg.norm(fy_t)
    chi = precoder.chi * (norm_t / norm_ref) ** 2
    report = TruncationReport(exceed_set=np.flatnonzero(ever_exceeded),
                              boost_set=np.array([], dtype=int),
                              y_before=y, y_after=y_t, scale=scale,
                              chi_base=precoder.chi, passes=passes,
                              converged=converged)
    return Precoder(b=fy_t / norm_t, chi=chi, scheme="truncated"), report


def truncated_boosted_mrt(trunc: Precoder, trunc_report: TruncationReport,
                          frame: BeamFrame, scan: CircleScan, omega_thresh,
                          arc_max: ArcMaxima | None = None):
    """Scale up beams whose arcs stay strictly below the threshold.

    The scan must have been taken with (trunc.b, trunc.chi). Candidate
    beams are those strictly below the threshold, excluding the truncated
    ones (their re-scanned arcs sit essentially on the threshold, and
    re-raising them would undo the truncation). Beams are processed in
    ascending index order, each rescaling the original matched-filter
    coefficient, while the projected transmit power stays below the cap;
    afterwards the power is clamped to the cap.
    """
    am = arc_maxima(scan, frame.arcs) if arc_max is None else arc_max
    y = trunc_report.y_before
    below = am.power < omega_thresh
    below[trunc_report.exceed_set] = False
    floor = omega_thresh * BOOST_POWER_FLOOR
    skipped = tuple(np.flatnonzero(below & (am.power < floor)))
    boost_set = np.flatnonzero(below & (am.power >= floor))

    y_b = trunc_report.y_after.copy()
    scale = np.ones(frame.size)
    norm_ref = np.linalg.norm(synthesize(y, frame))
    chi_base = trunc_report.chi_base
    iterations = 0
    cap_hit = False
    for m in boost_set:
        ratio = np.linalg.norm(synthesize(y_b, frame)) / norm_ref
        if not chi_base * ratio ** 2 < CHI_MAX:
            cap_hit = True
            break
        factor = math.sqrt(omega_thresh / am.power[m])
        y_b[m] = y[m] * factor
        scale[m] = factor
        iterations += 1

    fy_b = synthesize(y_b, frame)
    norm_b = np.linalg.norm(fy_b)
    chi = min(chi_base * (norm_b / norm_ref) ** 2, CHI_MAX)
    report = TruncationReport(exceed_set=trunc_report.exceed_set,
                              boost_set=boost_set, y_before=y, y_after=y_b,
                              scale=scale, chi_base=chi_base,
                              boost_iterations=iterations,
                              power_cap_hit=cap_hit, skipped=skipped)
    return Precoder(b=fy_b / norm_b, chi=chi, scheme="boosted"), report
