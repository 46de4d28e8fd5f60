"""Exposure-aware downlink beamforming simulator.

Synthesizes multipath and RIS-assisted channels for a uniform linear array,
computes matched-filter, power-reduced, truncated and boosted precoders,
and scans near-field received power around the base station against an
exposure threshold on a limit circle.
"""

__version__ = "0.1.0"

from .scenario import Scenario, ScenarioConfig, RisDescriptor, build_scenario
from .channel import (PowerSample, RisPhaseSet, near_field_channel,
                      received_power, ris_channel, ris_phases,
                      ris_self_configure, scatter_channel, total_channel)
from .codebook import BeamFrame, build_frame, dft_matrix, project, synthesize
from .exposure import (ArcMaxima, CircleScan, ExposureMap, arc_maxima,
                       circle_max, scan_area, scan_circle)
from .schemes import (Precoder, TruncationReport, mrt, reduced_mrt,
                      truncated_boosted_mrt, truncated_mrt)
from .experiments import (ExperimentConfig, MetricSample, CdfSeries, cdf,
                          run_monte_carlo, run_snapshot)
