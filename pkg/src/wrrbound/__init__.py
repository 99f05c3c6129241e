"""Worst-case delay bounds, weight selection and simulation for WRR output ports."""
from ._kernels import BACKEND
from .analysis import (ControlFlowAtPort, DepartureMode, HopDelayBound, PortConfig,
                       burst_phase, delay_bound_burst, delay_bound_mean, delay_bound_overall,
                       delay_bound_rate_latency, departure_curve, frame_service_time, mean_phase,
                       min_weight_burst, min_weight_mean)
from .config import ConfigDocument, format_config, parse_config
from .curves import (AffineArrivalCurve, PeriodicSource, RateLatencyCurve, WrrServicePattern,
                     affine_from_periodic, deconvolve_affine_ratelatency, horizontal_deviation)
from .optimizer import OptimizerSettings, SearchMode, WeightPlan, min_feasible_w1, optimize
from .simulator import SimTrace, max_observed_delay, run_simulation
from .topology import (FlowSpec, PathReport, Topology, background_bandwidth, propagate_analysis,
                       validate_topology)

__version__ = "0.1.0"
