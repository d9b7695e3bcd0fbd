"""Configuration, sweep orchestration and CSV output."""
from .config import ConfigError, RunConfig, SweepAxis, parse_config, serialize_config
from .runner import RUNNERS, SweepResult, run_couplings, run_crosstalk, run_exchange, run_spectrum, to_csv
