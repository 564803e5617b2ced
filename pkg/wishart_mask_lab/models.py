"""Pydantic models for every JSON document the CLI writes.

Models ignore unknown fields so that documents written by newer versions
still load, and they are frozen once built.
"""

from __future__ import annotations

from collections.abc import Sequence

from pydantic import BaseModel, ConfigDict, Field

from .census import CENSUS_PATTERNS, SubgraphCensus
from .experiments import HypothesisReport, SweepRow, TestVerdict
from .graphs import Graph
from .moments import MomentPrediction
from .statistics import Kappa4Breakdown
from .verification import CheckResult, SuiteReport

MOMENT_COLUMNS = (
    "statistic",
    "ensemble",
    "d",
    "n_trials",
    "predicted_mean",
    "predicted_var",
    "mean_kind",
    "variance_kind",
    "empirical_mean",
    "empirical_var",
    "stderr",
    "var_stderr",
    "z_mean",
    "z_variance",
)

SWEEP_COLUMNS = (
    "family",
    "n",
    "m",
    "p",
    "d",
    "test",
    "type1",
    "type2",
    "tv_lower",
    "stderr1",
    "stderr2",
    "trials",
    "seed",
    "theory_threshold",
)


class _Document(BaseModel):
    model_config = ConfigDict(extra="ignore", frozen=True)


class RunMetadata(_Document):
    tool: str = "wishart-mask-lab"
    version: str
    command: str
    argv: list[str] = Field(default_factory=list)
    seed: int | None = None


class TabularDocument(_Document):
    """A report that also renders as one CSV table."""

    metadata: RunMetadata

    def csv_table(self) -> tuple[tuple[str, ...], list[dict[str, object]]]:
        raise NotImplementedError


class GraphSummary(_Document):
    spec: str
    n_vertices: int
    num_edges: int
    oriented: bool

    @classmethod
    def from_graph(cls, spec: str, graph: Graph) -> GraphSummary:
        return cls(
            spec=spec,
            n_vertices=graph.n_vertices,
            num_edges=graph.num_edges,
            oriented=graph.is_oriented,
        )


class RatioModel(_Document):
    name: str
    group: str
    numerator: float
    denominator: float
    ratio: float | None
    regime_suggestive: bool


class CensusDocument(TabularDocument):
    """Census counts at the top level, beside run metadata and the optional ratios."""

    graph: GraphSummary
    num_e: int
    num_p2: int
    num_p3: int
    num_p4: int
    num_c3: int
    num_c4: int
    num_c3_plus: int
    num_k13_plus: int
    num_k13: int
    num_k14: int
    num_k18: int
    num_k23: int
    num_k24: int
    num_c3_2e: int
    num_c3_2v: int
    num_c4_2e: int
    num_c4_2v: int
    num_c4_2ev: int
    onum_k13: int | None = None
    onum_k14: int | None = None
    onum_k24: int | None = None
    onum_p4: int | None = None
    d: int | None = None
    hypotheses: list[RatioModel] | None = None

    @property
    def counts(self) -> dict[str, int | None]:
        return {name: getattr(self, name) for name in CENSUS_PATTERNS}

    def csv_table(self) -> tuple[tuple[str, ...], list[dict[str, object]]]:
        ratios = {r.name: r.ratio for r in self.hypotheses or []}
        columns = ("graph", *CENSUS_PATTERNS, "d", *ratios)
        return columns, [{"graph": self.graph.spec, **self.counts, "d": self.d, **ratios}]

    @classmethod
    def build(
        cls,
        metadata: RunMetadata,
        graph: GraphSummary,
        counts: SubgraphCensus,
        report: HypothesisReport | None = None,
    ) -> CensusDocument:
        hypotheses = None
        if report is not None:
            hypotheses = [
                RatioModel(
                    name=r.name,
                    group=r.group,
                    numerator=r.numerator,
                    denominator=r.denominator,
                    ratio=r.ratio,
                    regime_suggestive=r.regime_suggestive,
                )
                for r in report.ratios
            ]
        return cls(
            metadata=metadata,
            graph=graph,
            **counts.as_dict(),
            d=report.d if report is not None else None,
            hypotheses=hypotheses,
        )


class PredictedMoments(_Document):
    mean: float
    var: float
    mean_kind: str
    variance_kind: str
    notes: dict[str, float] = Field(default_factory=dict)

    @classmethod
    def from_prediction(cls, prediction: MomentPrediction) -> PredictedMoments:
        return cls(
            mean=prediction.mean,
            var=prediction.variance,
            mean_kind=str(prediction.mean_kind),
            variance_kind=str(prediction.variance_kind),
            notes=dict(prediction.notes),
        )


class EmpiricalMoments(_Document):
    mean: float
    var: float
    stderr: float
    var_stderr: float


class MomentReport(_Document):
    statistic: str
    predicted: PredictedMoments
    empirical: EmpiricalMoments
    z_scores: dict[str, float | None]


class MomentsDocument(TabularDocument):
    graph: GraphSummary
    ensemble: str
    d: int | None
    n_trials: int
    reports: list[MomentReport]

    def csv_table(self) -> tuple[tuple[str, ...], list[dict[str, object]]]:
        records = [
            {
                "statistic": r.statistic,
                "ensemble": self.ensemble,
                "d": self.d,
                "n_trials": self.n_trials,
                "predicted_mean": r.predicted.mean,
                "predicted_var": r.predicted.var,
                "mean_kind": r.predicted.mean_kind,
                "variance_kind": r.predicted.variance_kind,
                "empirical_mean": r.empirical.mean,
                "empirical_var": r.empirical.var,
                "stderr": r.empirical.stderr,
                "var_stderr": r.empirical.var_stderr,
                "z_mean": r.z_scores.get("mean"),
                "z_variance": r.z_scores.get("variance"),
            }
            for r in self.reports
        ]
        return MOMENT_COLUMNS, records


class Kappa4Model(_Document):
    c4_part: float
    p2_part: float
    e_part: float
    total: float

    @classmethod
    def from_breakdown(cls, breakdown: Kappa4Breakdown) -> Kappa4Model:
        return cls(
            c4_part=breakdown.c4_part,
            p2_part=breakdown.p2_part,
            e_part=breakdown.e_part,
            total=breakdown.total,
        )


class VerdictModel(_Document):
    predicted: str
    statistic_value: float | None
    threshold: float | None

    @classmethod
    def from_verdict(cls, verdict: TestVerdict) -> VerdictModel:
        return cls(
            predicted=str(verdict.predicted),
            statistic_value=verdict.statistic_value,
            threshold=verdict.threshold,
        )


class KappaDocument(TabularDocument):
    graph: GraphSummary
    ensemble: str
    d: int | None
    kappa3: float
    kappa4: Kappa4Model
    kappa_r: float | None
    verdicts: dict[str, VerdictModel] = Field(default_factory=dict)

    def csv_table(self) -> tuple[tuple[str, ...], list[dict[str, object]]]:
        record: dict[str, object] = {
            "ensemble": self.ensemble,
            "d": self.d,
            "kappa3": self.kappa3,
            "kappa4": self.kappa4.total,
            "kappa4_c4": self.kappa4.c4_part,
            "kappa4_p2": self.kappa4.p2_part,
            "kappa4_e": self.kappa4.e_part,
            "kappa_r": self.kappa_r,
        }
        for test, verdict in self.verdicts.items():
            for key, value in verdict.model_dump().items():
                record[f"{test}_{key}"] = value
        return tuple(record), [record]


class CheckModel(_Document):
    name: str
    kind: str
    predicted: float
    empirical: float
    stderr: float
    z: float | None
    passed: bool

    @classmethod
    def from_check(cls, check: CheckResult) -> CheckModel:
        return cls(**vars(check))


class VerificationDocument(TabularDocument):
    suite: str
    trials: int
    seed: int
    z_limit: float
    passed: bool
    checks: list[CheckModel]

    @classmethod
    def from_report(cls, metadata: RunMetadata, report: SuiteReport) -> VerificationDocument:
        return cls(
            metadata=metadata,
            suite=report.suite,
            trials=report.trials,
            seed=report.seed,
            z_limit=report.z_limit,
            passed=report.passed,
            checks=[CheckModel.from_check(check) for check in report.checks],
        )

    def csv_table(self) -> tuple[tuple[str, ...], list[dict[str, object]]]:
        return tuple(CheckModel.model_fields), [check.model_dump() for check in self.checks]


class SweepRowModel(_Document):
    family: str
    n: int
    m: int | None
    p: float
    d: int
    test: str
    type1: float | None
    type2: float | None
    tv_lower: float | None
    stderr1: float | None
    stderr2: float | None
    trials: int
    seed: int
    theory_threshold: float | None
    applicable: bool

    @classmethod
    def from_row(cls, row: SweepRow) -> SweepRowModel:
        return cls(**{**vars(row), "test": str(row.test)})


class SweepDocument(TabularDocument):
    rows: list[SweepRowModel]

    @classmethod
    def build(cls, metadata: RunMetadata, rows: Sequence[SweepRow]) -> SweepDocument:
        return cls(metadata=metadata, rows=[SweepRowModel.from_row(row) for row in rows])

    def csv_table(self) -> tuple[tuple[str, ...], list[dict[str, object]]]:
        return SWEEP_COLUMNS, [row.model_dump() for row in self.rows]
