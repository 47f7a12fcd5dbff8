"""Experiment orchestration: configs, channel ensembles, pipelines, protocols."""

from .channels import generate_channels, instance_rng
from .config import ExperimentConfig, ScenarioSpec
from .experiment import (SCHEMA, EnsembleRecord, ExperimentSummary, load_rows,
                         run_experiment, solve_instance)
from .montecarlo import (CdfResult, TwoPlayerBatch, batch_from_config,
                         empirical_cdf, follower_response_batch,
                         leader_ascent_batch, monte_carlo_cdf)
from .protocol import (CandidateReport, LeaderSelection,
                       cooperative_leaders_nse, demote_to_single_leader,
                       full_power_profile, heuristic_leader_selection)

__all__ = [name for name in dir() if not name.startswith("_")]
