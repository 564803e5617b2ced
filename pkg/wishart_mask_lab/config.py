"""Configuration management for wishart-mask-lab."""

import os
import tomllib
from contextlib import suppress
from dataclasses import dataclass
from pathlib import Path
from typing import Any

WISHART_METHODS = ("latent", "bartlett")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class SamplingConfig:
    """Masked ensemble sampling settings."""

    wishart_method: str = "latent"

    # Edge inner products
    edge_block_elements: int = 1 << 22
    dense_gram_fraction: float = 0.125

    # Gram-Schmidt
    reorthogonalize_ratio: float = 0.5
    degeneracy_tolerance: float = 1e-12

    def __post_init__(self) -> None:
        if self.wishart_method not in WISHART_METHODS:
            raise ValueError(f"Wishart method must be one of {WISHART_METHODS}")
        if not (0 < self.dense_gram_fraction <= 1.0):
            raise ValueError("Dense Gram fraction must be between 0 and 1")


@dataclass
class ExperimentConfig:
    """Monte Carlo experiment settings."""

    seed: int = 0
    trials: int = 2000
    threads: int | None = None  # None uses every available core
    regime_cutoff: float = 0.1
    batch_size: int = 256


@dataclass
class VerificationConfig:
    """Settings of the bundled verification suites."""

    z_limit: float = 5.0
    trials: int = 100_000
    min_trials: int = 1000

    # Pairwise-product table suite
    tables_d: int = 20
    tables_shapes: tuple[int, ...] = (1, 3, 5, 10, 19, 20)

    # Trace and determinant moments
    trace_pairs: tuple[tuple[int, int], ...] = ((3, 30), (6, 60))

    # Bartlett law
    bartlett_d: int = 30
    bartlett_k: int = 5

    # kappa_r laws
    law_degree: int = 100
    law_d: int = 30
    ks_alpha: float = 0.01

    def __post_init__(self) -> None:
        if not (0 < self.ks_alpha < 1):
            raise ValueError("KS significance level must be between 0 and 1")


@dataclass
class OutputConfig:
    """Report rendering settings."""

    significant_digits: int = 6
    json_indent: int = 2


@dataclass
class LoggingConfig:
    """Logging configuration."""

    level: str = "WARNING"
    format: str = "%(message)s"
    rich_tracebacks: bool = True


class Config:
    """Main configuration class."""

    def __init__(self, project_path: Path | None = None) -> None:
        self.sampling = SamplingConfig()
        self.experiment = ExperimentConfig()
        self.verification = VerificationConfig()
        self.output = OutputConfig()
        self.logging = LoggingConfig()
        self._load_from_pyproject(project_path or Path.cwd())
        self._load_from_environment()
        self._validate()

    def _load_from_pyproject(self, project_path: Path) -> None:
        """Load settings from the ``[tool.wishart-mask-lab]`` table."""
        pyproject_path = project_path / "pyproject.toml"
        if not pyproject_path.exists():
            return

        with suppress(Exception):
            with pyproject_path.open("rb") as f:
                pyproject_data = tomllib.load(f)

            tool_config: dict[str, Any] = pyproject_data.get("tool", {}).get(
                "wishart-mask-lab", {}
            )
            if tool_config:
                self.experiment.seed = tool_config.get("seed", self.experiment.seed)
                self.experiment.trials = tool_config.get("trials", self.experiment.trials)
                self.experiment.threads = tool_config.get("threads", self.experiment.threads)
                self.experiment.regime_cutoff = tool_config.get(
                    "regime_cutoff", self.experiment.regime_cutoff
                )
                self.sampling.wishart_method = tool_config.get(
                    "wishart_method", self.sampling.wishart_method
                )
                self.verification.z_limit = tool_config.get(
                    "z_limit", self.verification.z_limit
                )
                self.output.significant_digits = tool_config.get(
                    "significant_digits", self.output.significant_digits
                )
                self.logging.level = tool_config.get("log_level", self.logging.level)

    def _load_experiment_config_from_environment(self) -> None:
        """Load experiment settings from environment variables."""
        seed = os.getenv("WML_SEED")
        if seed:
            with suppress(ValueError):
                self.experiment.seed = int(seed, 0)

        trials = os.getenv("WML_TRIALS")
        if trials:
            with suppress(ValueError):
                self.experiment.trials = int(trials)

        threads = os.getenv("WML_THREADS")
        if threads:
            with suppress(ValueError):
                self.experiment.threads = int(threads)

    def _load_sampling_config_from_environment(self) -> None:
        """Load sampling settings from environment variables."""
        self.sampling.wishart_method = os.getenv(
            "WML_WISHART_METHOD", self.sampling.wishart_method
        ).lower()

    def _load_logging_config_from_environment(self) -> None:
        """Load logging settings from environment variables."""
        self.logging.level = os.getenv("WML_LOG_LEVEL", self.logging.level).upper()

    def _load_from_environment(self) -> None:
        """Load configuration from environment variables."""
        self._load_experiment_config_from_environment()
        self._load_sampling_config_from_environment()
        self._load_logging_config_from_environment()

    def _validate_sampling_config(self, errors: list[str]) -> None:
        if self.sampling.wishart_method not in WISHART_METHODS:
            errors.append(f"Wishart method must be one of {', '.join(WISHART_METHODS)}")

        if self.sampling.edge_block_elements <= 0:
            errors.append("Edge block size must be positive")

        if self.sampling.degeneracy_tolerance <= 0:
            errors.append("Degeneracy tolerance must be positive")

    def _validate_experiment_config(self, errors: list[str]) -> None:
        if not 0 <= self.experiment.seed < 1 << 64:
            errors.append("Seed must be an unsigned 64-bit integer")

        if self.experiment.trials <= 0:
            errors.append("Trial count must be positive")

        if self.experiment.threads is not None and self.experiment.threads <= 0:
            errors.append("Thread count must be positive")

        if self.experiment.batch_size <= 0:
            errors.append("Batch size must be positive")

        if self.experiment.regime_cutoff <= 0:
            errors.append("Regime cutoff must be positive")

    def _validate_verification_config(self, errors: list[str]) -> None:
        if self.verification.z_limit <= 0:
            errors.append("z-score limit must be positive")

        if self.verification.min_trials <= 0:
            errors.append("Minimum verification trial count must be positive")

    def _validate(self) -> None:
        """Validate configuration values."""
        errors: list[str] = []
        self._validate_sampling_config(errors)
        self._validate_experiment_config(errors)
        self._validate_verification_config(errors)

        if self.output.significant_digits <= 0:
            errors.append("Significant digits must be positive")

        if self.logging.level not in LOG_LEVELS:
            errors.append(f"Log level must be one of {', '.join(LOG_LEVELS)}")

        if errors:
            raise ValueError(f"Configuration validation failed: {'; '.join(errors)}")


# Global configuration instance
config = Config()
