"""Regret scoring, certified bounds, configs and the trial runner."""

from .bounds import certified_bound, chain_terms, lemma1_bound, schedule_chain, sqrt_t_envelope
from .comparator import comparator_objective, minimize_sum, regret, solve_comparator
from .config import ConfigError, ExperimentConfig, build_experiment, load_config, parse_config
from .io import read_transcript, transcript_from_csv, transcript_to_csv, write_transcript
from .trials import RegretReport, gradcheck, lemma_exceedances, run_one, run_trials

__all__ = [
    "certified_bound", "chain_terms", "lemma1_bound", "schedule_chain", "sqrt_t_envelope",
    "comparator_objective", "minimize_sum", "regret", "solve_comparator",
    "ConfigError", "ExperimentConfig", "build_experiment", "load_config", "parse_config",
    "read_transcript", "transcript_from_csv", "transcript_to_csv", "write_transcript",
    "RegretReport", "gradcheck", "lemma_exceedances", "run_one", "run_trials",
]
