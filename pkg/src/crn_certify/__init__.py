"""Structural analysis and ergodicity certificates for stochastic reaction networks."""

from .endotactic import endotactic_verdict, is_endotactic_first_order, jkl_sets, monomerize
from .graph import summarize, zero_split
from .model import Complex, MassAction, Reaction, ReactionNetwork, Tabulated, join, propensity
from .parser import ParseError, parse, parse_file, serialize
from .sim import exp_rate_estimate, poisson_product, ssa_run, truncated_stationary, tv_distance
from .stability import (
    drift,
    find_lyapunov_vector,
    is_hurwitz,
    net_flow,
    verify_drift_direct,
    verify_drift_linear,
    verify_drift_sub,
)
from .statespace import Box, check_embedding, classes, essential_verdict, reachable

__version__ = "0.1.0"
