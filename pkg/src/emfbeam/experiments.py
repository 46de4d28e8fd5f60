"""Snapshot and Monte-Carlo experiments over random channel samples.

A snapshot evaluates one seeded channel draw with every scheme and keeps
the full exposure maps. The Monte-Carlo run repeats the per-sample metric
extraction over many independently seeded draws and aggregates empirical
CDFs. Samples are independent work units: a process pool may evaluate them
in any order, results are re-sorted by sample index, and per-sample seeds
are derived from the root seed alone, so outputs are identical for any
worker count.
"""

import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import (PowerSample, received_power, ris_channel, ris_phases,
                      ris_self_configure, scatter_channel, total_channel)
from .codebook import build_frame
from .exposure import ExposureMap, arc_maxima_refined, scan_area, scan_circle
from .scenario import Scenario, ScenarioConfig, build_scenario
from .schemes import (Precoder, TruncationReport, mrt, reduced_mrt,
                      truncated_boosted_mrt, truncated_mrt)

ALL_SCHEMES = ("mrt", "reduced", "truncated", "boosted")
METRICS = ("violation_pct", "chi", "rho_db")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig = ScenarioConfig()
    n_samples: int = 1000
    schemes: tuple = ALL_SCHEMES
    workers: int = 1
    out_dir: str | None = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        unknown = set(self.schemes) - set(ALL_SCHEMES)
        if unknown:
            raise ValueError(f"unknown schemes: {sorted(unknown)}")


@dataclass(frozen=True)
class SchemeResult:
    rho: float            # received power at the target, linear
    chi: float
    violation_pct: float
    flags: str            # "|"-joined subset of {clamp, cap, boost}


@dataclass(frozen=True)
class MetricSample:
    sample_id: int
    per_scheme: dict       # scheme tag -> SchemeResult


@dataclass(frozen=True)
class CdfSeries:
    name: str
    values: np.ndarray     # nondecreasing
    probs: np.ndarray      # i/n, strictly increasing in (0, 1]


@dataclass(frozen=True)
class SnapshotScheme:
    precoder: Precoder
    report: TruncationReport | None
    emap: ExposureMap
    rho: float
    violation_pct: float
    flags: str


@dataclass(frozen=True)
class SnapshotResult:
    scenario: Scenario
    per_scheme: dict       # scheme tag -> SnapshotScheme
    report_text: str


def sample_seed(root_seed: int, index: int) -> int:
    """Fixed per-sample seed derivation, reproducible for one sample alone."""
    state = np.random.SeedSequence(root_seed, spawn_key=(index,)).generate_state(2)
    return int(state[0]) | (int(state[1]) << 32)


def rho_db(rho: float) -> float:
    return 10.0 * math.log10(rho) if rho > 0 else -math.inf


def build_channel(scenario: Scenario):
    """Total BS-to-UE row for a scenario (scatterers plus self-configured RISs)."""
    s = scatter_channel(scenario)
    h = ris_channel(scenario, ris_self_configure(ris_phases(scenario)))
    return total_channel(s, h)


def compute_precoders(scenario: Scenario, schemes=ALL_SCHEMES, g=None):
    """Run the requested schemes (and their prerequisites) for one scenario.

    Returns scheme tag -> (Precoder, TruncationReport | None, flags). The
    matched filter is always computed; reduced/truncated need its circle
    scan, boosted additionally needs the truncated scheme's scan. Arc maxima
    of the matched-filter scan are refined off the scan grid so threshold
    crossings are not grid artifacts.
    """
    thresh = scenario.config.omega_thresh
    if g is None:
        g = build_channel(scenario)
    frame = build_frame(scenario)
    p_mrt = mrt(g)
    out = {"mrt": (p_mrt, None, "")}

    if {"reduced", "truncated", "boosted"} & set(schemes):
        scan0 = scan_circle(scenario, p_mrt.b, p_mrt.chi, tag="mrt")
        am0 = arc_maxima_refined(scenario, p_mrt.b, scan0, frame.arcs, thresh)
        omega_max = PowerSample(value=float(am0.power.max() / scan0.chi))

        p_red = reduced_mrt(p_mrt, omega_max, thresh)
        out["reduced"] = (p_red, None, "clamp" if p_red.chi == p_mrt.chi else "")

        if {"truncated", "boosted"} & set(schemes):
            p_tr, rep_tr = truncated_mrt(scenario, p_mrt, frame, scan0, thresh,
                                         arc_max=am0)
            out["truncated"] = (p_tr, rep_tr, "")
            if "boosted" in schemes:
                scan1 = scan_circle(scenario, p_tr.b, p_tr.chi, tag="truncated")
                p_bo, rep_bo = truncated_boosted_mrt(p_tr, rep_tr, frame, scan1, thresh)
                flags = [t for t, on in (("cap", rep_bo.power_cap_hit),
                                         ("boost", rep_bo.boost_iterations > 0)) if on]
                out["boosted"] = (p_bo, rep_bo, "|".join(flags))
    return {k: v for k, v in out.items() if k in schemes}


def evaluate_sample(config: ScenarioConfig, schemes=ALL_SCHEMES):
    """One seeded draw: precoders, exposure maps, target power per scheme."""
    scenario = build_scenario(config)
    g = build_channel(scenario)
    results = compute_precoders(scenario, schemes, g=g)
    per_scheme = {}
    for tag in [s for s in ALL_SCHEMES if s in results]:
        precoder, report, flags = results[tag]
        emap = scan_area(scenario, precoder.b, precoder.chi, tag=tag)
        per_scheme[tag] = SnapshotScheme(
            precoder=precoder, report=report, emap=emap,
            rho=received_power(g, precoder.b, precoder.chi).value,
            violation_pct=emap.violation_pct, flags=flags)
    return scenario, per_scheme


def _metric_sample(sample_id, per_scheme) -> MetricSample:
    return MetricSample(sample_id=sample_id, per_scheme={
        tag: SchemeResult(rho=s.rho, chi=s.precoder.chi,
                          violation_pct=s.violation_pct, flags=s.flags)
        for tag, s in per_scheme.items()})


def _mc_worker(payload):
    config, schemes, sample_id = payload
    _, per_scheme = evaluate_sample(config, schemes)
    return _metric_sample(sample_id, per_scheme)


def run_monte_carlo(config: ExperimentConfig):
    """Per-sample metrics plus per-metric, per-scheme empirical CDFs."""
    payloads = [(replace(config.scenario, seed=sample_seed(config.scenario.seed, i)),
                 config.schemes, i)
                for i in range(config.n_samples)]
    if config.workers > 1:
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=config.workers, mp_context=ctx) as pool:
            samples = list(pool.map(_mc_worker, payloads, chunksize=8))
    else:
        samples = [_mc_worker(p) for p in payloads]
    samples.sort(key=lambda s: s.sample_id)

    cdfs = {}
    for scheme in config.schemes:
        for metric in METRICS:
            if metric == "rho_db":
                vals = [rho_db(s.per_scheme[scheme].rho) for s in samples]
            else:
                vals = [getattr(s.per_scheme[scheme], metric) for s in samples]
            cdfs[(metric, scheme)] = cdf(vals, name=f"{metric}_{scheme}")
    return samples, cdfs


def run_snapshot(config: ScenarioConfig, seed=None, schemes=ALL_SCHEMES) -> SnapshotResult:
    """Evaluate one channel draw with full exposure maps and a report table."""
    if seed is not None:
        config = replace(config, seed=seed)
    scenario, per_scheme = evaluate_sample(config, schemes)
    return SnapshotResult(scenario=scenario, per_scheme=per_scheme,
                          report_text=snapshot_report(config, per_scheme))


def cdf(values, name="") -> CdfSeries:
    """Empirical CDF: probability i/n at the i-th smallest value (stable sort)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cdf of an empty sample")
    srt = np.sort(values, kind="stable")
    n = srt.size
    return CdfSeries(name=name, values=srt, probs=np.arange(1, n + 1) / n)


def snapshot_report(config: ScenarioConfig, per_scheme) -> str:
    lines = [
        f"scenario: M={config.M} N={config.N} K={config.K} P={config.P} "
        f"R={config.R:g} thresh={config.omega_thresh_db:g}dB seed={config.seed}",
        f"{'scheme':<10} {'chi':>12} {'rho_db':>10} {'violation_pct':>14}  flags",
    ]
    for tag in [s for s in ALL_SCHEMES if s in per_scheme]:
        r = per_scheme[tag]
        lines.append(f"{tag:<10} {r.precoder.chi:>12.6f} {rho_db(r.rho):>10.2f} "
                     f"{r.violation_pct:>14.4f}  {r.flags}")
    return "\n".join(lines) + "\n"


def samples_csv(samples, schemes=ALL_SCHEMES) -> str:
    lines = ["sample_id,scheme,rho_db,chi,violation_pct,flags"]
    for s in samples:
        for tag in [t for t in ALL_SCHEMES if t in schemes and t in s.per_scheme]:
            r = s.per_scheme[tag]
            lines.append(f"{s.sample_id},{tag},{float(rho_db(r.rho))!r},"
                         f"{float(r.chi)!r},{float(r.violation_pct)!r},{r.flags}")
    return "\n".join(lines) + "\n"


def cdf_csv(series: CdfSeries) -> str:
    lines = ["value,probability"]
    lines.extend(f"{float(v)!r},{float(p)!r}"
                 for v, p in zip(series.values, series.probs))
    return "\n".join(lines) + "\n"
