"""Influence blocking under the competitive linear threshold model."""

from ._backend import BACKEND
from .graph import (Digraph, GraphParseError, GraphValidationError, InfluenceGraph, RateConfig, TieRule,
                    apply_rates, load_edge_list, load_influence_graph, load_signed_edge_list,
                    normalize_weights)
from .sim import (DiffusionOutcome, LivePathGraph, NirEstimate, SeedOverlapError, activation_from_live_path,
                  estimate_negative_spread, estimate_nir, estimate_nir_threshold, exact_nir, ibs,
                  sample_live_path, simulate_clt)

__version__ = "0.1.0"
