"""Bundled Monte Carlo verification suites.

Each suite compares closed-form predictions against simulation and reports
one :class:`CheckResult` per quantity. Exact identities pass when the
z-score stays within the configured limit; bounds pass when the empirical
value does not exceed the bound by more than that many standard errors.

Suites:

- ``tables``: pairwise-product expectations of selected two-copy shapes;
- ``appendixA``: trace, determinant and entry-covariance moments of Wishart
  matrices;
- ``bartlett``: coefficient laws of the Gram-Schmidt factor and its
  independence from the orthonormal part;
- ``kappa_laws``: two-sample KS comparison of kappa_r with its reference law.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import stats

from .config import VerificationConfig, config
from .ensembles import Ensemble, bartlett_decompose
from .experiments import simulate_statistics
from .graphs import star_graph
from .moments import (
    PAIR_SHAPES,
    PairShape,
    edge_fourth_moment,
    entry_covariance,
    wishart_trace_moments,
)
from .seeding import Stream, derive_seed, trial_rng
from .statistics import Statistic, kappa_r_law

logger = logging.getLogger(__name__)

CheckKind = Literal["identity", "bound", "tolerance", "ks"]
SUITE_NAMES = ("tables", "appendixA", "bartlett", "kappa_laws")

# draws materialized at once per check
_BLOCK = 20_000


@dataclass(frozen=True)
class CheckResult:
    name: str
    kind: CheckKind
    predicted: float
    empirical: float
    stderr: float
    z: float | None
    passed: bool


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    trials: int
    seed: int
    z_limit: float
    checks: tuple[CheckResult, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> tuple[CheckResult, ...]:
        return tuple(check for check in self.checks if not check.passed)


class _Accumulator:
    """Sample blocks collected for mean and variance estimates."""

    def __init__(self) -> None:
        self.blocks: list[np.ndarray] = []

    def add(self, values: np.ndarray) -> None:
        self.blocks.append(np.asarray(values, dtype=np.float64).ravel())

    @property
    def values(self) -> np.ndarray:
        return np.concatenate(self.blocks)

    def mean_and_stderr(self) -> tuple[float, float]:
        values = self.values
        return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))

    def variance_and_stderr(self) -> tuple[float, float]:
        values = self.values
        centered = values - values.mean()
        variance = float(np.mean(centered**2))
        fourth = float(np.mean(centered**4))
        return variance, math.sqrt(max(fourth - variance**2, 0.0) / values.size)


def _z_score(empirical: float, predicted: float, stderr: float) -> float:
    if stderr > 0:
        return (empirical - predicted) / stderr
    return 0.0 if empirical == predicted else math.inf


def _identity(name: str, predicted: float, empirical: float, stderr: float, limit: float) -> CheckResult:
    z = _z_score(empirical, predicted, stderr)
    return CheckResult(name, "identity", predicted, empirical, stderr, z, abs(z) <= limit)


def _bound(name: str, bound: float, empirical: float, stderr: float, limit: float) -> CheckResult:
    z = _z_score(empirical, bound, stderr)
    return CheckResult(name, "bound", bound, empirical, stderr, z, z <= limit)


def _blocks(trials: int) -> Iterator[int]:
    for start in range(0, trials, _BLOCK):
        yield min(_BLOCK, trials - start)


def _copy_product(
    latent: np.ndarray, shape: PairShape, edges: tuple[tuple[int, int], ...]
) -> np.ndarray:
    d = latent.shape[1]
    product = np.ones(latent.shape[0])
    for u, v in edges:
        inner = np.einsum("bt,bt->b", latent[:, :, u], latent[:, :, v])
        product *= shape.transform.apply(inner / math.sqrt(d))
    return product


def _tables_suite(trials: int, seed: int, settings: VerificationConfig) -> list[CheckResult]:
    d = settings.tables_d
    checks: list[CheckResult] = []
    for shape_id in settings.tables_shapes:
        shape = PAIR_SHAPES[shape_id]
        rng = trial_rng(seed, Stream.VERIFY, shape_id)
        acc = _Accumulator()
        for size in _blocks(trials):
            latent = rng.standard_normal((size, d, shape.n_vertices))
            first = _copy_product(latent, shape, shape.first)
            acc.add(first * _copy_product(latent, shape, shape.second))
        mean, stderr = acc.mean_and_stderr()
        checks.append(
            _identity(f"shape_{shape_id}", shape.expectation(d), mean, stderr, settings.z_limit)
        )

    rng = trial_rng(seed, Stream.VERIFY, len(PAIR_SHAPES) + 1)
    acc = _Accumulator()
    for size in _blocks(trials):
        latent = rng.standard_normal((size, d, 2))
        entry = np.einsum("bt,bt->b", latent[:, :, 0], latent[:, :, 1]) / math.sqrt(d)
        acc.add(entry**4)
    mean, stderr = acc.mean_and_stderr()
    checks.append(_identity("edge_fourth_moment", edge_fourth_moment(d), mean, stderr, settings.z_limit))
    return checks


def _appendix_suite(trials: int, seed: int, settings: VerificationConfig) -> list[CheckResult]:
    checks: list[CheckResult] = []
    limit = settings.z_limit
    for pair_index, (k, d) in enumerate(settings.trace_pairs):
        report = wishart_trace_moments(k, d)
        rng = trial_rng(seed, Stream.VERIFY, pair_index)
        names = ("tr_sq_centered", "tr_sq", "tr_delta_sq", "inv_det", "log2_det")
        acc = {name: _Accumulator() for name in names}
        covariances = {key: _Accumulator() for key in ((0, 0, 0, 0), (0, 1, 0, 1), (0, 0, 1, 1))}
        for size in _blocks(trials):
            latent = rng.standard_normal((size, d, k))
            gram = np.einsum("bti,btj->bij", latent, latent) / d
            delta = gram - np.eye(k)
            trace_delta = np.trace(delta, axis1=1, axis2=2)
            acc["tr_sq_centered"].add(trace_delta**2)
            acc["tr_sq"].add(np.trace(gram, axis1=1, axis2=2) ** 2)
            acc["tr_delta_sq"].add(np.einsum("bij,bij->b", delta, delta))
            _, logdet = np.linalg.slogdet(gram)
            acc["inv_det"].add(np.exp(-logdet))
            acc["log2_det"].add(logdet**2)
            if k >= 2:
                for i, j, a, b in covariances:
                    covariances[(i, j, a, b)].add(delta[:, i, j] * delta[:, a, b])

        prefix = f"k={k},d={d}"
        for name, predicted in (
            ("tr_sq_centered", report.e_tr_sq_centered),
            ("tr_sq", report.e_tr_sq),
            ("tr_delta_sq", report.e_tr_delta_sq),
        ):
            mean, stderr = acc[name].mean_and_stderr()
            checks.append(_identity(f"{prefix}:{name}", predicted, mean, stderr, limit))
        if report.var_tr_delta_sq_bound is not None:
            variance, stderr = acc["tr_delta_sq"].variance_and_stderr()
            checks.append(
                _bound(f"{prefix}:var_tr_delta_sq", report.var_tr_delta_sq_bound, variance, stderr, limit)
            )
        for name, bound in (
            ("inv_det", report.e_inv_det_bound),
            ("log2_det", report.e_log2_det_bound),
        ):
            if bound is None:
                logger.info(f"Skipping {prefix}:{name}; d < 2k + 2")
                continue
            mean, stderr = acc[name].mean_and_stderr()
            checks.append(_bound(f"{prefix}:{name}", bound, mean, stderr, limit))
        if k >= 2:
            for (i, j, a, b), samples in covariances.items():
                mean, stderr = samples.mean_and_stderr()
                checks.append(
                    _identity(
                        f"{prefix}:cov_{i}{j}_{a}{b}",
                        entry_covariance(i, j, a, b, d),
                        mean,
                        stderr,
                        limit,
                    )
                )
    return checks


def reconstruction_error(reconstructed: np.ndarray, original: np.ndarray) -> np.ndarray:
    """Max-norm error relative to the max-norm of ``original``, per batch item."""
    axes = (-2, -1)
    return np.max(np.abs(reconstructed - original), axis=axes) / np.max(np.abs(original), axis=axes)


def independence_checks(
    factor: np.ndarray, functionals: np.ndarray, labels: list[str], limit: float = 4.0
) -> list[CheckResult]:
    """Sample correlation of each factor column against fixed functionals.

    ``factor`` is ``(N, m)`` and ``functionals`` is ``(N, f)``. Each column of
    ``factor`` yields one check holding its largest correlation in absolute
    value; the standard error of a null correlation is ``1 / sqrt(N)``.
    """
    size = factor.shape[0]
    stderr = 1.0 / math.sqrt(size)
    standardized = (factor - factor.mean(axis=0)) / factor.std(axis=0)
    reference = (functionals - functionals.mean(axis=0)) / functionals.std(axis=0)
    correlation = standardized.T @ reference / size
    checks = []
    for label, row in zip(labels, correlation, strict=True):
        worst = float(row[np.argmax(np.abs(row))])
        z = worst / stderr
        checks.append(CheckResult(label, "identity", 0.0, worst, stderr, z, abs(z) <= limit))
    return checks


def _bartlett_suite(trials: int, seed: int, settings: VerificationConfig) -> list[CheckResult]:
    d, k = settings.bartlett_d, settings.bartlett_k
    limit = settings.z_limit
    rng = trial_rng(seed, Stream.VERIFY, 0)
    diagonal = [_Accumulator() for _ in range(k)]
    below = _Accumulator()
    factor_blocks: list[np.ndarray] = []
    functional_blocks: list[np.ndarray] = []
    worst_error = 0.0
    rows, cols = np.tril_indices(k, -1)
    lower_rows, lower_cols = np.tril_indices(k)
    # first coordinate and normalized coordinate sum of every U column
    mean_direction = np.full(d, 1.0 / math.sqrt(d))
    for size in _blocks(trials):
        latent = rng.standard_normal((size, d, k))
        decomposition = bartlett_decompose(
            latent,
            reorthogonalize_ratio=config.sampling.reorthogonalize_ratio,
            tolerance=config.sampling.degeneracy_tolerance,
        )
        for i in range(k):
            diagonal[i].add(decomposition.W[:, i, i] ** 2)
        below.add(decomposition.W[:, rows, cols])
        factor_blocks.append(decomposition.W[:, lower_rows, lower_cols])
        functional_blocks.append(
            np.concatenate(
                [decomposition.U[:, 0, :], np.einsum("t,btc->bc", mean_direction, decomposition.U)],
                axis=1,
            )
        )
        error = reconstruction_error(decomposition.reconstruct(), latent)
        worst_error = max(worst_error, float(np.max(error)))

    checks: list[CheckResult] = []
    for i, acc in enumerate(diagonal):
        mean, stderr = acc.mean_and_stderr()
        # 1-based row i + 1 has d + 1 - (i + 1) degrees of freedom
        checks.append(_identity(f"W_{i + 1}{i + 1}^2", float(d - i), mean, stderr, limit))
    if k >= 2:
        mean, stderr = below.mean_and_stderr()
        checks.append(_identity("offdiag_mean", 0.0, mean, stderr, limit))
        variance, stderr = below.variance_and_stderr()
        checks.append(_identity("offdiag_variance", 1.0, variance, stderr, limit))
    labels = [f"independence_W_{i + 1}{j + 1}" for i, j in zip(lower_rows, lower_cols, strict=True)]
    checks.extend(
        independence_checks(np.concatenate(factor_blocks), np.concatenate(functional_blocks), labels)
    )
    checks.append(
        CheckResult("reconstruction", "tolerance", 1e-8, worst_error, 0.0, None, worst_error <= 1e-8)
    )
    return checks


def ks_critical_value(n: int, m: int, alpha: float) -> float:
    """Asymptotic two-sample KS critical value at significance ``alpha``."""
    return math.sqrt(-math.log(alpha / 2) / 2) * math.sqrt((n + m) / (n * m))


def _kappa_laws_suite(trials: int, seed: int, settings: VerificationConfig) -> list[CheckResult]:
    graph = star_graph(settings.law_degree)
    d = settings.law_d
    critical = ks_critical_value(trials, trials, settings.ks_alpha)
    checks: list[CheckResult] = []
    for index, ensemble in enumerate((Ensemble.GOE, Ensemble.WISHART)):
        law = kappa_r_law(graph, d, ensemble)
        observed = simulate_statistics(
            graph,
            ensemble,
            d,
            trials,
            derive_seed(seed, Stream.VERIFY, index),
            (Statistic.KAPPA_R,),
        )[Statistic.KAPPA_R]
        reference = law.sample(trial_rng(seed, Stream.LAW, index), trials)
        result = stats.ks_2samp(observed, reference)
        ks_statistic = float(result.statistic)
        checks.append(
            CheckResult(
                f"{ensemble}:ks",
                "ks",
                critical,
                ks_statistic,
                0.0,
                None,
                ks_statistic < critical,
            )
        )
        acc = _Accumulator()
        acc.add(reference)
        variance, stderr = acc.variance_and_stderr()
        checks.append(
            _identity(f"{ensemble}:law_variance", law.variance, variance, stderr, settings.z_limit)
        )
    return checks


SUITES: dict[str, Callable[[int, int, VerificationConfig], list[CheckResult]]] = {
    "tables": _tables_suite,
    "appendixA": _appendix_suite,
    "bartlett": _bartlett_suite,
    "kappa_laws": _kappa_laws_suite,
}


def run_suite(
    name: str,
    trials: int,
    seed: int,
    *,
    settings: VerificationConfig | None = None,
) -> SuiteReport:
    """Run one bundled suite.

    Raises:
        ValueError: On an unknown suite or fewer trials than the configured
            minimum.
    """
    settings = settings or config.verification
    if name not in SUITES:
        raise ValueError(f"Unknown suite: {name}; expected one of {', '.join(SUITE_NAMES)}")
    if trials < settings.min_trials:
        raise ValueError(f"Suite {name} needs at least {settings.min_trials} trials, got {trials}")
    logger.info(f"Running suite {name} with {trials} trials, seed {seed}")
    checks = SUITES[name](trials, seed, settings)
    report = SuiteReport(name, trials, seed, settings.z_limit, tuple(checks))
    for failure in report.failures:
        logger.warning(f"{name}:{failure.name} failed (z={failure.z})")
    logger.info(f"Suite {name}: {len(checks) - len(report.failures)}/{len(checks)} checks passed")
    return report
