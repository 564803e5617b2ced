"""Distinguishing tests, Monte Carlo error estimates and phase sweeps.

The three tests threshold kappa3, kappa4 and kappa_r. Error estimates draw
``trials`` samples under each hypothesis, each from its own generator
seeded by ``(base_seed, hypothesis, trial index)``, so results do not depend
on the worker count.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Literal

import numpy as np
import psutil

from .census import SubgraphCensus, census
from .config import config
from .ensembles import Ensemble, MaskedMatrix, WishartMethod, masked_goe, masked_wishart
from .graphs import (
    Graph,
    bipartite_erdos_renyi,
    complete_bipartite,
    complete_graph,
    erdos_renyi,
    max_degree_vertex,
)
from .seeding import Stream, derive_seed, trial_rng
from .statistics import Statistic, kappa3, kappa4, kappa_r, statistic_samples

logger = logging.getLogger(__name__)


class InapplicableTestError(ValueError):
    """The requested test has no decision rule on this mask."""


class DistinguishingTest(StrEnum):
    DEG3 = "deg3"
    DEG4 = "deg4"
    MAXDEG = "maxdeg"

    @property
    def statistic(self) -> Statistic:
        return _TEST_STATISTICS[self]


_TEST_STATISTICS = {
    DistinguishingTest.DEG3: Statistic.KAPPA3,
    DistinguishingTest.DEG4: Statistic.KAPPA4,
    DistinguishingTest.MAXDEG: Statistic.KAPPA_R,
}


class Verdict(StrEnum):
    WISHART = "wishart"
    GOE = "goe"
    INAPPLICABLE = "inapplicable"


@dataclass(frozen=True)
class TestVerdict:
    __test__ = False

    test: DistinguishingTest
    predicted: Verdict
    statistic_value: float | None
    threshold: float | None


def decision_threshold(
    graph: Graph, d: int, test: DistinguishingTest, *, counts: SubgraphCensus | None = None
) -> float | None:
    """Threshold of ``test`` on ``graph`` at ``d``, or ``None`` when inapplicable.

    ``counts`` is a census of ``graph`` computed earlier; it is looked up when
    omitted.

    For ``maxdeg`` the value is the half-width ``(d * D) ** -0.25`` of the
    acceptance band around 1.
    """
    if d < 1:
        raise ValueError(f"Degrees of freedom must be positive, got {d}")
    c = counts if counts is not None else census(graph)
    match DistinguishingTest(test):
        case DistinguishingTest.DEG3:
            return 0.5 * c.num_c3 / math.sqrt(d) if c.num_c3 else None
        case DistinguishingTest.DEG4:
            total = c.total("num_c4", "num_p2", "num_e")
            return 0.5 * total / d if total else None
        case DistinguishingTest.MAXDEG:
            if graph.n_vertices == 0:
                return None
            _, max_degree = max_degree_vertex(graph)
            return (d * max_degree) ** -0.25 if max_degree else None


def predicts_wishart(test: DistinguishingTest, values: np.ndarray, threshold: float) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if DistinguishingTest(test) == DistinguishingTest.MAXDEG:
        inside = (1.0 - threshold <= values) & (values <= 1.0 + threshold)
        return ~inside
    return values >= threshold


def decide(test: DistinguishingTest, value: float, threshold: float | None) -> Verdict:
    if threshold is None:
        return Verdict.INAPPLICABLE
    return Verdict.WISHART if bool(predicts_wishart(test, value, threshold)) else Verdict.GOE


def _run_test(
    matrix: MaskedMatrix,
    d: int,
    test: DistinguishingTest,
    evaluate: Callable[[MaskedMatrix], float],
    counts: SubgraphCensus | None,
) -> TestVerdict:
    threshold = decision_threshold(matrix.graph, d, test, counts=counts)
    if threshold is None:
        return TestVerdict(test, Verdict.INAPPLICABLE, None, None)
    value = evaluate(matrix)
    return TestVerdict(test, decide(test, value, threshold), value, threshold)


def deg3_test(matrix: MaskedMatrix, d: int, *, counts: SubgraphCensus | None = None) -> TestVerdict:
    """Predict Wishart iff ``kappa3 >= d^{-1/2} num(C3) / 2``."""
    return _run_test(matrix, d, DistinguishingTest.DEG3, kappa3, counts)


def deg4_test(matrix: MaskedMatrix, d: int, *, counts: SubgraphCensus | None = None) -> TestVerdict:
    """Predict Wishart iff ``kappa4 >= d^{-1} num(C4, P2, E) / 2``."""
    return _run_test(matrix, d, DistinguishingTest.DEG4, lambda m: kappa4(m).total, counts)


def maxdeg_test(matrix: MaskedMatrix, d: int, *, counts: SubgraphCensus | None = None) -> TestVerdict:
    """Predict GOE iff ``|kappa_r - 1| <= (d D)^{-1/4}``."""
    return _run_test(matrix, d, DistinguishingTest.MAXDEG, kappa_r, counts)


TESTS: dict[DistinguishingTest, Callable[..., TestVerdict]] = {
    DistinguishingTest.DEG3: deg3_test,
    DistinguishingTest.DEG4: deg4_test,
    DistinguishingTest.MAXDEG: maxdeg_test,
}


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = config.experiment.threads
    if threads is None:
        threads = psutil.cpu_count(logical=True) or 1
    return max(1, threads)


def _hypothesis_stream(ensemble: Ensemble) -> Stream:
    return Stream.GOE if Ensemble(ensemble) == Ensemble.GOE else Stream.WISHART


def simulate_statistics(
    graph: Graph,
    ensemble: Ensemble,
    d: int | None,
    trials: int,
    base_seed: int,
    statistics: Sequence[Statistic],
    *,
    threads: int | None = None,
    method: WishartMethod | None = None,
    batch_size: int | None = None,
) -> dict[Statistic, np.ndarray]:
    """Sample ``trials`` masked matrices and evaluate ``statistics`` on each.

    Trial ``i`` is drawn from the generator seeded by ``(base_seed, stream,
    i)``, where the stream is the ensemble's. Blocks of trials run on a
    thread pool and are reassembled in index order.
    """
    if trials < 1:
        raise ValueError(f"Need at least one trial, got {trials}")
    ensemble = Ensemble(ensemble)
    if ensemble == Ensemble.WISHART and (d is None or d < 1):
        raise ValueError(f"The Wishart ensemble needs d >= 1, got {d}")
    method = method or config.sampling.wishart_method
    batch_size = batch_size or config.experiment.batch_size
    stream = _hypothesis_stream(ensemble)
    wanted = tuple(Statistic(s) for s in statistics)

    def draw(index: int) -> np.ndarray:
        rng = trial_rng(base_seed, stream, index)
        if ensemble == Ensemble.GOE:
            return masked_goe(graph, rng).values
        assert d is not None
        return masked_wishart(
            graph,
            d,
            rng,
            method=method,
            block_elements=config.sampling.edge_block_elements,
            dense_fraction=config.sampling.dense_gram_fraction,
        ).values

    def run_block(start: int) -> dict[Statistic, np.ndarray]:
        stop = min(start + batch_size, trials)
        rows = np.empty((stop - start, graph.num_edges))
        for offset, index in enumerate(range(start, stop)):
            rows[offset] = draw(index)
        return statistic_samples(graph, rows, wanted)

    starts = range(0, trials, batch_size)
    workers = min(resolve_threads(threads), len(starts))
    if workers == 1:
        blocks = [run_block(start) for start in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run_block, starts))
    return {s: np.concatenate([block[s] for block in blocks]) for s in wanted}


@dataclass(frozen=True)
class ErrorEstimate:
    """Monte Carlo Type I / Type II error of one test at one ``d``."""

    test: DistinguishingTest
    d: int
    trials: int
    base_seed: int
    threshold: float
    type1: float
    type2: float
    tv_lower: float
    stderr1: float
    stderr2: float


def _binomial_stderr(fraction: float, trials: int) -> float:
    return math.sqrt(fraction * (1.0 - fraction) / trials)


def estimate_test_error(
    graph: Graph,
    d: int,
    test: DistinguishingTest,
    trials: int,
    base_seed: int,
    *,
    threads: int | None = None,
    method: WishartMethod | None = None,
    batch_size: int | None = None,
) -> ErrorEstimate:
    """Estimate both error rates of ``test`` and the implied TV lower bound.

    ``tv_lower = max(0, 1 - type1 - type2)``. GOE draws ignore ``d``, so two
    calls that differ only in ``d`` replay identical GOE samples.

    Raises:
        ValueError: If ``trials < 1`` or ``d < 1``.
        InapplicableTestError: If the test has no threshold on ``graph``.
    """
    test = DistinguishingTest(test)
    if trials < 1:
        raise ValueError(f"Need at least one trial, got {trials}")
    threshold = decision_threshold(graph, d, test)
    if threshold is None:
        raise InapplicableTestError(f"Test {test} is inapplicable on {graph!r}")

    logger.info(f"Estimating {test} error at d={d} with {trials} trials per hypothesis")
    options = {"threads": threads, "method": method, "batch_size": batch_size}
    statistic = test.statistic
    goe = simulate_statistics(graph, Ensemble.GOE, d, trials, base_seed, (statistic,), **options)
    wishart = simulate_statistics(
        graph, Ensemble.WISHART, d, trials, base_seed, (statistic,), **options
    )
    false_wishart = int(np.count_nonzero(predicts_wishart(test, goe[statistic], threshold)))
    false_goe = trials - int(
        np.count_nonzero(predicts_wishart(test, wishart[statistic], threshold))
    )
    type1 = false_wishart / trials
    type2 = false_goe / trials
    estimate = ErrorEstimate(
        test=test,
        d=d,
        trials=trials,
        base_seed=base_seed,
        threshold=threshold,
        type1=type1,
        type2=type2,
        tv_lower=max(0.0, 1.0 - type1 - type2),
        stderr1=_binomial_stderr(type1, trials),
        stderr2=_binomial_stderr(type2, trials),
    )
    logger.info(
        f"{test} at d={d}: type1={estimate.type1:.4f} type2={estimate.type2:.4f} "
        f"tv_lower={estimate.tv_lower:.4f}"
    )
    return estimate


RatioGroup = Literal["convergence", "bipartite", "regularity", "divergence"]


@dataclass(frozen=True)
class Ratio:
    name: str
    group: RatioGroup
    numerator: float
    denominator: float
    ratio: float | None
    regime_suggestive: bool


@dataclass(frozen=True)
class HypothesisReport:
    """Descriptive ratios behind the asymptotic conditions.

    A ratio well below 1 suggests the corresponding ``>>`` condition holds.
    ``regime_suggestive`` marks ratios below the cutoff; it is a heuristic
    label, not a finite-n guarantee.
    """

    d: int
    n_vertices: int
    log_n: float
    cutoff: float
    ratios: tuple[Ratio, ...] = field(default_factory=tuple)

    def ratio(self, name: str) -> Ratio:
        for entry in self.ratios:
            if entry.name == name:
                return entry
        raise KeyError(name)

    def names(self) -> tuple[str, ...]:
        return tuple(entry.name for entry in self.ratios)

    @property
    def suggestive(self) -> tuple[str, ...]:
        return tuple(entry.name for entry in self.ratios if entry.regime_suggestive)


def convergence_report(graph: Graph, d: int, *, cutoff: float | None = None) -> HypothesisReport:
    """Materialize every hypothesis ratio for ``graph`` at ``d``.

    Bipartite ratios need an oriented mask and are omitted otherwise. Ratios
    with a zero denominator are reported as ``None``.
    """
    if d < 1:
        raise ValueError(f"Degrees of freedom must be positive, got {d}")
    cutoff = config.experiment.regime_cutoff if cutoff is None else cutoff
    c = census(graph)
    n = graph.n_vertices
    log_n = math.log(n) if n > 1 else 0.0
    quartic = float(c.total("num_c4", "num_p2", "num_e"))
    edges = float(c.num_e)
    _, max_degree = max_degree_vertex(graph) if n else (0, 0)
    ratios: list[Ratio] = []

    def add(name: str, group: RatioGroup, numerator: float, denominator: float) -> None:
        value = numerator / denominator if denominator else None
        suggestive = value is not None and value < cutoff
        ratios.append(Ratio(name, group, float(numerator), float(denominator), value, suggestive))

    dd = float(d)
    add("r_tri", "convergence", c.num_c3, dd)
    add("r_4cyc", "convergence", quartic, dd**2)
    add("r_k18", "convergence", c.num_k18 + log_n**8 * (c.num_k14 + edges), dd**4)
    if graph.is_oriented:
        ok13, ok14, ok24, op4 = (
            float(c.total(name)) for name in ("onum_k13", "onum_k14", "onum_k24", "onum_p4")
        )
        add("r_bip_4cyc", "bipartite", quartic, dd**2)
        add("r_bip_k14", "bipartite", ok14 + edges * log_n**3, dd**3)
        add(
            "r_bip_d8",
            "bipartite",
            ok13**2 * ok24 + edges**2 * (ok14 + ok24) * log_n**4,
            dd**8,
        )
        add("r_bip_d9", "bipartite", edges**2 * op4 * log_n**4, dd**9)
    add("reg_tri", "regularity", c.num_c3_2e + c.num_c3_2v, float(c.num_c3) ** 2)
    add(
        "reg_4cyc",
        "regularity",
        c.num_k14 + c.num_k24 + c.num_c4_2e + c.num_c4_2v,
        quartic**2,
    )
    add("div_tri", "divergence", dd, c.num_c3)
    add("div_4cyc", "divergence", dd**2, quartic)
    add("div_maxdeg", "divergence", dd, max_degree)

    report = HypothesisReport(d=d, n_vertices=n, log_n=log_n, cutoff=cutoff, ratios=tuple(ratios))
    if report.suggestive:
        logger.warning(
            f"Ratios below {cutoff} (heuristic, not a finite-n guarantee): "
            f"{', '.join(report.suggestive)}"
        )
    return report


def _check_threshold_domain(n: int, p: float, m: int | None = None) -> None:
    if n < 2:
        raise ValueError(f"Threshold formulas need n >= 2, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Edge probability must lie in [0, 1], got {p}")
    if m is not None and m < 1:
        raise ValueError(f"Threshold formulas need m >= 1, got {m}")


def er_threshold_terms(n: int, p: float) -> tuple[float, ...]:
    _check_threshold_domain(n, p)
    log_n = math.log(n)
    return (
        n**3 * p**3,
        n**1.5 * p,
        n * p**0.5,
        n**0.5 * p**0.25 * log_n**2,
        log_n**3,
    )


def bip_threshold_terms(n: int, m: int, p: float) -> tuple[float, ...]:
    _check_threshold_domain(n, p, m)
    log_n = math.log(n)
    nmp = n * m * p
    return (
        n * m * p**2,
        n * m**0.5 * p,
        nmp**0.5,
        nmp ** (1 / 3) * log_n,
        nmp**0.25 * log_n**1.25,
        log_n**1.5,
    )


def er_threshold(n: int, p: float) -> float:
    """Value of ``d`` above which TV vanishes for Erdos-Renyi masks ``G(n, p)``."""
    return math.fsum(er_threshold_terms(n, p))


def bip_threshold(n: int, m: int, p: float) -> float:
    """Same for bipartite Erdos-Renyi masks ``G(n, m, p)``."""
    return math.fsum(bip_threshold_terms(n, m, p))


def er_divergence_threshold(n: int, p: float) -> float:
    """Polynomial part of the threshold; TV tends to 1 when ``d`` is well below it."""
    return math.fsum(er_threshold_terms(n, p)[:3])


def bip_divergence_threshold(n: int, m: int, p: float) -> float:
    return math.fsum(bip_threshold_terms(n, m, p)[:3])


SweepFamily = Literal["er", "biper", "kbip", "complete"]
SWEEP_FAMILIES: tuple[str, ...] = ("er", "biper", "kbip", "complete")


@dataclass(frozen=True)
class SweepConfig:
    family: SweepFamily
    n: int
    p_grid: tuple[float, ...]
    d_grid: tuple[int, ...]
    test: DistinguishingTest
    trials: int
    base_seed: int
    m: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "test", DistinguishingTest(self.test))
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))
        object.__setattr__(self, "d_grid", tuple(int(d) for d in self.d_grid))
        if self.family not in SWEEP_FAMILIES:
            raise ValueError(f"Unknown sweep family: {self.family}")
        if not self.p_grid or not self.d_grid:
            raise ValueError("Sweep grids must be nonempty")
        if self.trials < 1:
            raise ValueError(f"Need at least one trial, got {self.trials}")
        if self.n < 1:
            raise ValueError(f"Need n >= 1, got {self.n}")
        if self.family in ("biper", "kbip") and (self.m is None or self.m < 1):
            raise ValueError(f"Family {self.family} needs m >= 1")
        if any(not 0.0 <= p <= 1.0 for p in self.p_grid):
            raise ValueError(f"Edge probabilities must lie in [0, 1]: {self.p_grid}")
        if any(d < 1 for d in self.d_grid):
            raise ValueError(f"Degrees of freedom must be positive: {self.d_grid}")

    @property
    def is_bipartite(self) -> bool:
        return self.family in ("biper", "kbip")

    def mask(self, p: float, rng: np.random.Generator) -> Graph:
        match self.family:
            case "er":
                return erdos_renyi(self.n, p, rng)
            case "biper":
                assert self.m is not None
                return bipartite_erdos_renyi(self.n, self.m, p, rng)
            case "kbip":
                assert self.m is not None
                return complete_bipartite(self.n, self.m)
            case _:
                return complete_graph(self.n)

    def theory_threshold(self, p: float) -> float | None:
        effective_p = 1.0 if self.family in ("kbip", "complete") else p
        if self.n < 2:
            return None
        if self.is_bipartite:
            assert self.m is not None
            return bip_threshold(self.n, self.m, effective_p)
        return er_threshold(self.n, effective_p)


@dataclass(frozen=True)
class SweepRow:
    family: str
    n: int
    m: int | None
    p: float
    d: int
    test: DistinguishingTest
    type1: float | None
    type2: float | None
    tv_lower: float | None
    stderr1: float | None
    stderr2: float | None
    trials: int
    seed: int
    theory_threshold: float | None
    applicable: bool = True


def phase_sweep(
    sweep: SweepConfig,
    *,
    threads: int | None = None,
    method: WishartMethod | None = None,
    batch_size: int | None = None,
) -> list[SweepRow]:
    """Estimate test errors on every ``(p, d)`` grid point, in grid order.

    One mask is drawn per ``p`` (seed from ``(base_seed, MASK, p_index)``)
    and reused across the ``d`` grid, as is the trial seed
    ``(base_seed, TRIALS, p_index)``. Inapplicable grid points produce rows
    with ``applicable=False`` and empty error fields.
    """
    logger.info(
        f"Sweeping {sweep.family} n={sweep.n} over {len(sweep.p_grid)} x {len(sweep.d_grid)} "
        f"grid points with {sweep.test}"
    )
    rows: list[SweepRow] = []
    for p_index, p in enumerate(sweep.p_grid):
        mask = sweep.mask(p, trial_rng(sweep.base_seed, Stream.MASK, p_index))
        trial_seed = derive_seed(sweep.base_seed, Stream.TRIALS, p_index)
        theory = sweep.theory_threshold(p)
        for d in sweep.d_grid:
            common = {
                "family": sweep.family,
                "n": sweep.n,
                "m": sweep.m,
                "p": p,
                "d": d,
                "test": sweep.test,
                "trials": sweep.trials,
                "seed": trial_seed,
                "theory_threshold": theory,
            }
            try:
                estimate = estimate_test_error(
                    mask,
                    d,
                    sweep.test,
                    sweep.trials,
                    trial_seed,
                    threads=threads,
                    method=method,
                    batch_size=batch_size,
                )
            except InapplicableTestError:
                logger.info(f"{sweep.test} inapplicable at p={p}, d={d}")
                rows.append(
                    SweepRow(
                        **common,  # type: ignore[arg-type]
                        type1=None,
                        type2=None,
                        tv_lower=None,
                        stderr1=None,
                        stderr2=None,
                        applicable=False,
                    )
                )
                continue
            rows.append(
                SweepRow(
                    **common,  # type: ignore[arg-type]
                    type1=estimate.type1,
                    type2=estimate.type2,
                    tv_lower=estimate.tv_lower,
                    stderr1=estimate.stderr1,
                    stderr2=estimate.stderr2,
                )
            )
    return rows
