"""Exposure evaluation around the base station.

Received power is probed on the upper half of the limit circle (the array
radiates mirror-symmetrically about its axis and all path directions lie in
the upper half plane) and on a square grid around the BS. Circle scans feed
the precoder schemes; the grid scan yields the over-threshold mask and the
violation percentage.

Near-field rows for a given point set depend only on the element layout, so
they are cached and shared by every scheme and every channel sample.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .channel import PowerSample
from .scenario import Scenario

# circle points within this distance of the radius count as outside the
# protected region (boundary belongs to the constrained side)
CIRCLE_EDGE_TOL = 1e-9

# default relative slack of the over-threshold test, absorbing the float
# error of schemes that land exactly on the threshold
OVER_REL_TOL = 1e-6

# arcs whose discrete max lies within this relative band of the threshold or
# of the global max get their maxima refined off the angular grid
REFINE_BAND = 5e-3


@dataclass(frozen=True)
class CircleScan:
    angles: np.ndarray    # strictly increasing polar angles in [0, pi]
    powers: np.ndarray    # received power at each angle, scan's chi
    chi: float
    tag: str = ""


@dataclass(frozen=True)
class ArcMaxima:
    power: np.ndarray     # per beam index, max power over its arc
    angle: np.ndarray     # arg-max angle per beam


@dataclass(frozen=True)
class ExposureMap:
    xs: np.ndarray        # grid x coordinates (nx,)
    ys: np.ndarray        # grid y coordinates (ny,)
    powers: np.ndarray    # (ny, nx) received power
    outside: np.ndarray   # (ny, nx) True where the point is outside the circle
    over: np.ndarray      # (ny, nx) outside & power above threshold
    violation_pct: float  # 100 * over / outside
    chi: float
    thresh: float
    tag: str = ""


def half_circle_angles(n):
    return np.linspace(0.0, math.pi, n)


def circle_points(radius, angles):
    return radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)


_ROWS_CACHE: dict = {}


def clear_caches():
    _ROWS_CACHE.clear()


def _cached_rows(elements, points, key):
    full_key = (elements.tobytes(),) + key
    rows = _ROWS_CACHE.get(full_key)
    if rows is None:
        rows = kernels.nearfield_rows(elements, points)
        rows.setflags(write=False)
        _ROWS_CACHE[full_key] = rows
    return rows


def circle_rows(scenario: Scenario, n=None):
    """Cached near-field rows for the half-circle discretization."""
    cfg = scenario.config
    n = cfg.circle_samples if n is None else n
    angles = half_circle_angles(n)
    rows = _cached_rows(scenario.bs_elements, circle_points(cfg.R, angles),
                        ("circle", cfg.R, n))
    return angles, rows


def grid_coords(half_width, step):
    n = int(math.floor(2.0 * half_width / step + 1e-9)) + 1
    return -half_width + step * np.arange(n)


def grid_rows(scenario: Scenario, step=None):
    """Cached near-field rows for the square grid; also the singular-point mask."""
    cfg = scenario.config
    step = cfg.grid_step if step is None else step
    xs = grid_coords(cfg.square_half_width, step)
    key = (scenario.bs_elements.tobytes(), "grid", cfg.square_half_width, step)
    cached = _ROWS_CACHE.get(key)
    if cached is None:
        points = np.stack(np.meshgrid(xs, xs, indexing="xy"), axis=-1).reshape(-1, 2)
        rows = kernels.nearfield_rows(scenario.bs_elements, points)
        bad = ~np.isfinite(rows).all(axis=1)   # grid point sits on an element
        rows.setflags(write=False)
        bad.setflags(write=False)
        cached = (rows, bad)
        _ROWS_CACHE[key] = cached
    return xs, cached[0], cached[1]


def scan_circle(scenario: Scenario, b, chi, circle_samples=None, tag="") -> CircleScan:
    """Received power along the limit circle for precoder b at power chi."""
    angles, rows = circle_rows(scenario, circle_samples)
    return CircleScan(angles=angles, powers=kernels.scan_powers(rows, b, chi),
                      chi=float(chi), tag=tag)


def circle_max(scan: CircleScan) -> PowerSample:
    """Largest scanned circle power, normalized by the scan's chi."""
    if scan.angles.size == 0:
        raise ValueError("empty circle scan")
    i = int(np.argmax(scan.powers))   # ties resolve to the smallest angle
    value = float(scan.powers[i] / scan.chi) if scan.chi > 0 else 0.0
    theta = float(scan.angles[i])
    return PowerSample(value=value, location=(math.cos(theta), math.sin(theta)))


def _assign_beams(angles, arcs):
    """Beam index owning each scan angle; shared boundaries go to the lower index."""
    order = np.argsort(arcs[:, 0], kind="stable")
    inner = arcs[order, 1][:-1]            # interior boundaries, ascending
    pos = np.searchsorted(inner, angles, side="left")
    beam = order[pos]
    # exact hits on an interior boundary belong to the smaller beam index
    hit = np.flatnonzero(np.isin(angles, inner))
    for i in hit:
        j = np.searchsorted(inner, angles[i])
        beam[i] = min(order[j], order[j + 1])
    return beam


def arc_maxima(scan: CircleScan, arcs) -> ArcMaxima:
    """Per-arc maximum of the scanned powers (discrete, same grid as the scan)."""
    arcs = np.asarray(arcs)
    m_beams = arcs.shape[0]
    beam = _assign_beams(scan.angles, arcs)
    power = np.empty(m_beams)
    angle = np.empty(m_beams)
    for m in range(m_beams):
        sel = np.flatnonzero(beam == m)
        if sel.size == 0:
            raise ValueError(f"arc of beam {m} contains no scan point; "
                             "increase circle_samples")
        k = sel[np.argmax(scan.powers[sel])]
        power[m] = scan.powers[k]
        angle[m] = scan.angles[k]
    return ArcMaxima(power=power, angle=angle)


def _omega_on_circle(elements, b, radius, chi, theta):
    d = np.hypot(radius * math.cos(theta) - elements[:, 0],
                 radius * math.sin(theta) - elements[:, 1])
    amp = (np.exp(2j * math.pi * d) / (4.0 * math.pi * d)) @ b
    return (amp.real ** 2 + amp.imag ** 2) * chi


def _refine_bracket(elements, b, radius, chi, lo, hi):
    if not hi > lo:
        return -math.inf, lo
    res = minimize_scalar(lambda t: -_omega_on_circle(elements, b, radius, chi, t),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10})
    return -float(res.fun), float(res.x)


def refine_arc_maxima(scenario: Scenario, b, scan: CircleScan, arcs,
                      maxima: ArcMaxima, beams) -> ArcMaxima:
    """Re-locate the listed beams' arc maxima off the scan grid.

    Around every in-arc local maximum of the scan (plus the slivers between
    the arc edges and the first/last scan point) a bounded scalar search
    finds the continuous peak; the reported value never drops below the
    discrete one.
    """
    arcs = np.asarray(arcs)
    b = np.asarray(b, dtype=np.complex128)
    elements = scenario.bs_elements
    radius = scenario.config.R
    beam = _assign_beams(scan.angles, arcs)
    power = maxima.power.copy()
    angle = maxima.angle.copy()
    for m in beams:
        sel = np.flatnonzero(beam == m)
        p = scan.powers[sel]
        lo, hi = arcs[m]
        interior = np.flatnonzero((p[1:-1] >= p[:-2]) & (p[1:-1] >= p[2:])) + 1
        cand = list(interior)
        if p.size >= 2:
            if p[0] >= p[1]:
                cand.append(0)
            if p[-1] >= p[-2]:
                cand.append(p.size - 1)
        brackets = [(max(lo, scan.angles[sel[max(i - 1, 0)]]),
                     min(hi, scan.angles[sel[min(i + 1, p.size - 1)]]))
                    for i in cand]
        brackets.append((lo, scan.angles[sel[0]]))
        brackets.append((scan.angles[sel[-1]], hi))
        best_p, best_t = power[m], angle[m]
        for blo, bhi in brackets:
            val, t = _refine_bracket(elements, b, radius, scan.chi, blo, bhi)
            if val > best_p:
                best_p, best_t = val, t
        power[m], angle[m] = best_p, best_t
    return ArcMaxima(power=power, angle=angle)


def arc_maxima_refined(scenario: Scenario, b, scan: CircleScan, arcs,
                       omega_thresh, band=REFINE_BAND) -> ArcMaxima:
    """Arc maxima with off-grid refinement where grid error could matter.

    Refines arcs whose discrete max sits within `band` (relative) of the
    threshold or of the global scan max, so threshold-set membership and the
    power scalings derived from these maxima are grid-independent.
    """
    coarse = arc_maxima(scan, arcs)
    top = coarse.power.max()
    sel = np.flatnonzero((coarse.power >= omega_thresh * (1.0 - band))
                         | (coarse.power >= top * (1.0 - band)))
    return refine_arc_maxima(scenario, b, scan, arcs, coarse, sel)


def scan_area(scenario: Scenario, b, chi, grid_step=None,
              rel_tol=OVER_REL_TOL, tag="") -> ExposureMap:
    """Received power on the square grid and the outside-circle violation stats.

    Grid points inside the limit circle are shown in the map but excluded
    from the over-threshold mask and the percentage. Points on an antenna
    element (singular spherical model) report infinite power; they are
    always inside the circle for sane configurations.
    """
    cfg = scenario.config
    xs, rows, bad = grid_rows(scenario, grid_step)
    n = xs.size
    if chi == 0:
        powers = np.zeros(n * n)
    else:
        powers = kernels.scan_powers(rows, b, chi)
        powers[bad] = np.inf
    powers = powers.reshape(n, n)
    r2 = xs[None, :] ** 2 + xs[:, None] ** 2
    outside = r2 >= (cfg.R - CIRCLE_EDGE_TOL) ** 2
    over = outside & (powers > cfg.omega_thresh * (1.0 + rel_tol))
    return ExposureMap(
        xs=xs, ys=xs.copy(), powers=powers, outside=outside, over=over,
        violation_pct=float(100.0 * over.sum() / outside.sum()),
        chi=float(chi), thresh=cfg.omega_thresh, tag=tag,
    )


def exposure_csv(emap: ExposureMap) -> str:
    """CSV dump of the map: x, y, omega_db, over_flag (one row per grid point)."""
    lines = ["x,y,omega_db,over_flag"]
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(emap.powers)
    for iy, y in enumerate(emap.ys):
        for ix, x in enumerate(emap.xs):
            lines.append(f"{float(x)!r},{float(y)!r},{float(db[iy, ix])!r},"
                         f"{int(emap.over[iy, ix])}")
    return "\n".join(lines) + "\n"


# fixed dB color scale of the heatmaps; values outside clamp to the end bands
HEATMAP_DB_MIN = -100.0
HEATMAP_DB_MAX = -20.0
HEATMAP_DB_BAND = 5.0


def heatmap_svg(emap: ExposureMap, radius, title="") -> str:
    """Self-contained SVG heatmap: banded grayscale power in dB, yellow
    over-threshold cells, red limit circle, legend with the fixed scale."""
    n_bands = int((HEATMAP_DB_MAX - HEATMAP_DB_MIN) / HEATMAP_DB_BAND)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(emap.powers)
    band = np.clip(np.floor((db - HEATMAP_DB_MIN) / HEATMAP_DB_BAND), 0, n_bands - 1)
    band = np.where(np.isfinite(db), band, np.where(db > 0, n_bands - 1, 0)).astype(int)

    step_x = emap.xs[1] - emap.xs[0] if emap.xs.size > 1 else 1.0
    ny, nx = emap.powers.shape
    width, height = 640, 640
    legend_h = 70
    sx = width / nx
    sy = height / ny

    def shade(k):
        g = int(round(25 + 230 * k / max(n_bands - 1, 1)))
        return f"rgb({g},{g},{g})"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height + legend_h}" viewBox="0 0 {width} {height + legend_h}">',
        f'<rect width="{width}" height="{height + legend_h}" fill="white"/>',
        '<g shape-rendering="crispEdges">',
    ]
    for iy in range(ny):
        # y axis points up; SVG rows grow downward
        py = (ny - 1 - iy) * sy
        row_band = band[iy]
        row_over = emap.over[iy]
        ix = 0
        while ix < nx:
            j = ix
            while (j + 1 < nx and row_band[j + 1] == row_band[ix]
                   and row_over[j + 1] == row_over[ix]):
                j += 1
            color = "#ffd700" if row_over[ix] else shade(row_band[ix])
            parts.append(f'<rect x="{ix * sx:.2f}" y="{py:.2f}" '
                         f'width="{(j - ix + 1) * sx:.2f}" height="{sy + 0.5:.2f}" '
                         f'fill="{color}"/>')
            ix = j + 1
    parts.append("</g>")

    # limit circle, in pixel coordinates (grid is centered on the BS)
    cx = (0.0 - emap.xs[0]) / step_x * sx + sx / 2
    cy = height - ((0.0 - emap.ys[0]) / step_x * sy + sy / 2)
    pr = radius / step_x * sx
    parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{pr:.2f}" '
                 'fill="none" stroke="red" stroke-width="2"/>')

    if title:
        parts.append(f'<text x="10" y="22" font-family="monospace" font-size="16" '
                     f'fill="black" stroke="white" stroke-width="0.6" '
                     f'paint-order="stroke">{title}</text>')

    # legend: one swatch per band plus the over-threshold color
    sw = width / (n_bands + 1)
    y0 = height + 14
    for k in range(n_bands):
        parts.append(f'<rect x="{k * sw:.2f}" y="{y0}" width="{sw:.2f}" '
                     f'height="16" fill="{shade(k)}"/>')
        if k % 4 == 0:
            parts.append(f'<text x="{k * sw:.2f}" y="{y0 + 30}" '
                         f'font-family="monospace" font-size="10" fill="black">'
                         f'{HEATMAP_DB_MIN + k * HEATMAP_DB_BAND:.0f}</text>')
    parts.append(f'<rect x="{n_bands * sw:.2f}" y="{y0}" width="{sw:.2f}" '
                 'height="16" fill="#ffd700"/>')
    parts.append(f'<text x="{n_bands * sw:.2f}" y="{y0 + 30}" '
                 'font-family="monospace" font-size="10" fill="black">over</text>')
    parts.append(f'<text x="10" y="{y0 + 46}" font-family="monospace" '
                 f'font-size="11" fill="black">received power, dB re max transmit '
                 f'power; scale {HEATMAP_DB_MIN:.0f}..{HEATMAP_DB_MAX:.0f} dB in '
                 f'{HEATMAP_DB_BAND:.0f} dB bands</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
