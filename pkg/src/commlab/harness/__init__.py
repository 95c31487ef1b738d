"""Config-driven experiment suites, report persistence and the CLI."""
from .config import ConfigError, config_hash, read_config
from .report import CSV_HEADER, RatioRow, Report, read_report, summarize, write_report
from .suites import (RUNNERS, estimate_maximal_opnorm, run_bmo, run_constants, run_decomposition,
                     run_endpoint_orlicz, run_extrapolation_check, run_grand_maximal_domination,
                     run_hst_contrast, run_opnorm, run_osc_sweep, run_sharp_check, run_suite)
