"""Deterministic regeneration of the two-covariate numerical study.

Cells are correlation triples (r12, r1y, r2y) crossed with sample sizes.
Each cell is scored with the unit-information g-prior (g = n), the 1/sigma^2
variance prior, and equal prior probabilities on the four models, then
tallied by how the MPM and HPM relate to the risk-optimal model.  The whole
pipeline is a pure function of the configuration: no randomness anywhere.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import DesignStats, GPrior, JeffreysSigma
from .geometry2d import Case, classify_case
from .posterior import posterior_summary
from .priors import UniformOverModels
from .risk import posterior_means, risk_report

#: r12 never includes 0: the MPM is guaranteed optimal there.
R12_GRID: tuple[float, ...] = tuple(
    round(v * 0.1, 1) for v in list(range(-9, 0)) + list(range(1, 10))
)

_RY_STEPS: tuple[float, ...] = tuple(round(0.1 * i, 1) for i in range(1, 10))
_NULL_STEPS: tuple[float, ...] = tuple(round(0.2 * i, 1) for i in range(1, 10))
_ONEVAR_OFFSETS: tuple[float, ...] = tuple(
    round(h, 1) for h in (-0.9, -0.7, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.7, 0.9)
)

#: determinant of the 3x3 correlation matrix must exceed this
PSD_TOL = 1e-12


class Scenario(enum.Enum):
    FULL = "full"
    ONEVAR = "onevar"
    NULL = "null"


@dataclass(frozen=True)
class StudyConfig:
    """Scenario, sample sizes, and predictor-correlation grid.

    The remaining study conventions are fixed: unit-information g-prior
    (g = n), the 1/sigma^2 variance prior, and equal prior probabilities on
    the four models.
    """

    scenario: Scenario
    sample_sizes: tuple[int, ...] = (10, 50, 100)
    r12_grid: tuple[float, ...] = R12_GRID

    def __post_init__(self):
        if not self.sample_sizes or not self.r12_grid:
            raise ValueError("grids must be nonempty")


def _corr_det(r12: float, r1y: float, r2y: float) -> float:
    return 1.0 + 2.0 * r12 * r1y * r2y - r12**2 - r1y**2 - r2y**2


def correlation_grid(
    scenario: Scenario, n: int, r12_grid: tuple[float, ...] = R12_GRID
) -> list[tuple[float, float, float]]:
    """PSD-filtered correlation triples for one scenario and sample size.

    Full: r1y, r2y on the 0.1..0.9 grid with r1y <= r2y.  Null: both on the
    0.2/sqrt(n)..1.8/sqrt(n) grid.  One-variable: r2y on 0.1..0.9 and
    r1y = r12 r2y + h/sqrt(n) over the h offsets, kept when 0 < r1y <= r2y.
    """
    cells: list[tuple[float, float, float]] = []
    root_n = math.sqrt(n)
    for r12 in r12_grid:
        if scenario is Scenario.FULL:
            pairs = [
                (r1y, r2y)
                for r1y in _RY_STEPS
                for r2y in _RY_STEPS
                if r1y <= r2y
            ]
        elif scenario is Scenario.NULL:
            vals = [v / root_n for v in _NULL_STEPS]
            pairs = [(r1y, r2y) for r1y in vals for r2y in vals if r1y <= r2y]
        else:
            # r1y stays in the positive band, mirroring the full-model grid;
            # the h offsets model the sampling noise around r12 * r2y
            pairs = []
            for r2y in _RY_STEPS:
                for h in _ONEVAR_OFFSETS:
                    r1y = r12 * r2y + h / root_n
                    if 0.0 < r1y <= r2y:
                        pairs.append((r1y, r2y))
        for r1y, r2y in pairs:
            if _corr_det(r12, r1y, r2y) > PSD_TOL:
                cells.append((r12, r1y, r2y))
    return cells


_CASE_LABEL = {Case.CASE1: "case1", Case.CASE2: "case2", Case.CASE3: "case3"}

#: outcome column order used everywhere
COLUMNS = ("MHO", "MH_notO", "MO_notH", "HO_notM", "HgtM", "MgtH")


@dataclass
class _Tally:
    """Outcome counts plus per-cell log relative risks.

    Every evaluated cell contributes one log ratio per selector (0 when the
    selector picked the optimal model), so the geometric means are normalized
    over all cells of a row, matching the reference tables.
    """

    counts: dict[str, int] = field(default_factory=lambda: {c: 0 for c in COLUMNS})
    log_rel_mpm: list[float] = field(default_factory=list)
    log_rel_hpm: list[float] = field(default_factory=list)

    def add(self, other: "_Tally") -> None:
        for c in COLUMNS:
            self.counts[c] += other.counts[c]
        self.log_rel_mpm.extend(other.log_rel_mpm)
        self.log_rel_hpm.extend(other.log_rel_hpm)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def gm_mpm(self) -> float:
        return math.exp(np.mean(self.log_rel_mpm)) if self.log_rel_mpm else 1.0

    def gm_hpm(self) -> float:
        return math.exp(np.mean(self.log_rel_hpm)) if self.log_rel_hpm else 1.0


@dataclass(frozen=True)
class StudyRow:
    scenario: str
    case: str
    n: str
    counts: dict[str, int]
    gm_mpm: float
    gm_hpm: float

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class SkippedCell:
    n: int
    triple: tuple[float, float, float]
    reason: str


@dataclass(frozen=True)
class StudyTable:
    scenario: str
    rows: tuple[StudyRow, ...]
    skipped: tuple[SkippedCell, ...]

    def row(self, case: str, n: str) -> StudyRow:
        for r in self.rows:
            if r.case == case and r.n == n:
                return r
        raise KeyError(f"no row for case={case}, n={n}")

    @property
    def overall(self) -> StudyRow:
        return self.row("combined", "overall")

    def share(self, column: str) -> float:
        """Overall share of one outcome column, in percent."""
        row = self.overall
        return 100.0 * row.counts[column] / row.total

    def to_records(self) -> list[dict]:
        recs = []
        for r in self.rows:
            rec = {"scenario": r.scenario, "case": r.case, "n": r.n}
            rec.update({c: r.counts[c] for c in COLUMNS})
            rec["gm_mpm"] = r.gm_mpm
            rec["gm_hpm"] = r.gm_hpm
            recs.append(rec)
        return recs

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["scenario", "case", "n", *COLUMNS, "gm_mpm", "gm_hpm"])
        for rec in self.to_records():
            writer.writerow(
                [rec["scenario"], rec["case"], rec["n"]]
                + [rec[c] for c in COLUMNS]
                + [f"{rec['gm_mpm']:.6f}", f"{rec['gm_hpm']:.6f}"]
            )
        return buf.getvalue()


def _evaluate_cell(args: tuple[int, tuple[float, float, float]]):
    n, triple = args
    r12, r1y, r2y = triple
    geom = classify_case(r12, r1y, r2y)
    if geom.tag not in _CASE_LABEL:
        return SkippedCell(n=n, triple=triple, reason=f"classification {geom.tag.value}")
    stats = DesignStats.from_correlations(r12, r1y, r2y, n)
    prior = GPrior(g=float(n), sigma=JeffreysSigma())
    post = posterior_summary(stats, prior, UniformOverModels())
    means = posterior_means(stats, post, prior)
    report = risk_report(stats, post, means)
    mpm, hpm, opt = report.mpm, report.hpm, report.optimal
    tally = _Tally()
    if mpm == hpm:
        tally.counts["MHO" if mpm == opt else "MH_notO"] += 1
    elif mpm == opt:
        tally.counts["MO_notH"] += 1
    elif hpm == opt:
        tally.counts["HO_notM"] += 1
    elif report.risk_for(hpm) < report.risk_for(mpm):
        tally.counts["HgtM"] += 1
    else:
        tally.counts["MgtH"] += 1
    r_opt = report.risk_for(opt)
    lr_m = math.log(report.risk_for(mpm) / r_opt) if (mpm != opt and r_opt > 0) else 0.0
    lr_h = math.log(report.risk_for(hpm) / r_opt) if (hpm != opt and r_opt > 0) else 0.0
    tally.log_rel_mpm.append(lr_m)
    tally.log_rel_hpm.append(lr_h)
    return (_CASE_LABEL[geom.tag], n, tally)


def run_study(config: StudyConfig) -> StudyTable:
    """Evaluate every grid cell and aggregate per (case, n), per n, and overall.

    Deterministic: cells are evaluated and reduced in a fixed order, whether
    serially or on the MEDSEL_THREADS-capped thread pool.
    """
    cells: list[tuple[int, tuple[float, float, float]]] = []
    for n in config.sample_sizes:
        for triple in correlation_grid(config.scenario, n, config.r12_grid):
            cells.append((n, triple))
    threads = int(os.environ.get("MEDSEL_THREADS", "1") or "1")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_evaluate_cell, cells))
    else:
        results = [_evaluate_cell(c) for c in cells]

    skipped: list[SkippedCell] = []
    tallies: dict[tuple[str, str], _Tally] = {}

    def bucket(case: str, n: str) -> _Tally:
        return tallies.setdefault((case, n), _Tally())

    for res in results:
        if isinstance(res, SkippedCell):
            skipped.append(res)
            continue
        case, n, tally = res
        for key in (
            (case, str(n)),
            ("combined", str(n)),
            (case, "overall"),
            ("combined", "overall"),
        ):
            bucket(*key).add(tally)

    scen = config.scenario.value
    rows = []
    cases = ["case1", "case2", "case3", "combined"]
    ns = [str(n) for n in config.sample_sizes] + ["overall"]
    for case in cases:
        for n in ns:
            t = tallies.get((case, n))
            if t is None:
                continue
            rows.append(
                StudyRow(
                    scenario=scen,
                    case=case,
                    n=n,
                    counts=dict(t.counts),
                    gm_mpm=t.gm_mpm(),
                    gm_hpm=t.gm_hpm(),
                )
            )
    return StudyTable(scenario=scen, rows=tuple(rows), skipped=tuple(skipped))
