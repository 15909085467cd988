"""Area loss (ALP), population with access (PCTAS), and city-level CDFs."""

from __future__ import annotations

import bisect
import csv
import io
import math
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Sequence

TRACT_COLUMNS = ("geoid", "area_ct_m2", "area_cbrs_m2", "alp", "population", "pctas", "validity")


class MetricsError(ValueError):
    pass


def alp(area_cbrs_m2: float, area_ct_m2: float) -> float:
    """Fraction of the tract area lost to the set-back, clamped to [0, 1]."""
    if area_ct_m2 <= 0:
        raise MetricsError("tract area must be positive")
    value = min(1.0, max(0.0, 1.0 - area_cbrs_m2 / area_ct_m2))
    if area_cbrs_m2 > 0:
        # any allowed area at all must not round to total loss
        value = min(value, math.nextafter(1.0, 0.0))
    return value


def pctas(alp_value: float, population: float) -> float:
    """People in the tract with access, assuming uniform population density."""
    if not 0.0 <= alp_value <= 1.0:
        raise MetricsError(f"ALP must be in [0, 1], got {alp_value}")
    if population < 0:
        raise MetricsError(f"population must be non-negative, got {population}")
    return (1.0 - alp_value) * population


@dataclass(frozen=True)
class TractRecord:
    geoid: str
    area_ct_m2: float
    area_cbrs_m2: float
    alp: float
    population: int
    pctas: float
    setback_m: float
    validity: str = "clean"

    @classmethod
    def build(cls, geoid, area_ct_m2, area_cbrs_m2, population, setback_m, validity="clean"):
        a = alp(area_cbrs_m2, area_ct_m2)
        return cls(geoid, area_ct_m2, area_cbrs_m2, a, population, pctas(a, population), setback_m, validity)


@dataclass(frozen=True)
class CdfTable:
    """Right-continuous step CDF over the distinct sample values."""

    values: tuple[float, ...]
    probs: tuple[float, ...]
    n: int

    def __call__(self, x: float) -> float:
        k = bisect.bisect_right(self.values, x)
        return self.probs[k - 1] if k else 0.0

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.values, self.probs))


def empirical_cdf(values: Iterable[float]) -> CdfTable:
    data = sorted(values)
    if not data:
        raise MetricsError("cannot build a CDF from no values")
    n = len(data)
    xs, ps = [], []
    for k, v in enumerate(data, start=1):
        if xs and v == xs[-1]:
            ps[-1] = k / n
        else:
            xs.append(v)
            ps.append(k / n)
    return CdfTable(tuple(xs), tuple(ps), n)


@dataclass
class CityReport:
    city: str
    setback_m: float
    records: list[TractRecord]
    metadata: dict = field(default_factory=dict)

    @property
    def tract_count(self) -> int:
        return len(self.records)

    @property
    def nonempty_count(self) -> int:
        return sum(r.alp < 1.0 for r in self.records)

    @property
    def empty_fraction(self) -> float:
        return sum(r.alp == 1.0 for r in self.records) / self.tract_count

    @property
    def prob_alp_below_half(self) -> float:
        return sum(r.alp < 0.5 for r in self.records) / self.tract_count

    @property
    def mean_population(self) -> float:
        return statistics.fmean(r.population for r in self.records)

    @property
    def median_population(self) -> float:
        return statistics.median(r.population for r in self.records)

    @property
    def total_pctas(self) -> float:
        return sum(r.pctas for r in self.records)

    @property
    def fallback_geoids(self) -> list[str]:
        return [r.geoid for r in self.records if r.validity == "raster_fallback"]

    @property
    def alp_cdf(self) -> CdfTable:
        return empirical_cdf(r.alp for r in self.records)

    @property
    def pctas_cdf(self) -> CdfTable:
        return empirical_cdf(r.pctas for r in self.records)

    def aggregates(self) -> dict:
        return {
            "tract_count": self.tract_count,
            "nonempty_count": self.nonempty_count,
            "empty_fraction": self.empty_fraction,
            "prob_alp_below_half": self.prob_alp_below_half,
            "mean_population": self.mean_population,
            "median_population": self.median_population,
            "total_pctas": self.total_pctas,
        }


def build_city_report(city: str, tracts: Sequence, erosions: Sequence, setback_m: float) -> CityReport:
    """Tract records sorted by GEOID from paired tracts and erosion results."""
    if not tracts:
        raise MetricsError("a city report needs at least one tract")
    if len(tracts) != len(erosions):
        raise MetricsError("every tract needs exactly one erosion result")
    records = [
        TractRecord.build(t.geoid, e.area_ct_m2, e.area_cbrs_m2, t.population or 0, setback_m, e.validity)
        for t, e in zip(tracts, erosions)
    ]
    records.sort(key=lambda r: r.geoid)
    return CityReport(city, setback_m, records)


def tracts_csv(records: Iterable[TractRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACT_COLUMNS)
    for r in records:
        w.writerow([r.geoid, repr(r.area_ct_m2), repr(r.area_cbrs_m2), repr(r.alp), r.population, repr(r.pctas), r.validity])
    return buf.getvalue()


def read_tracts_csv(text: str, setback_m: float = float("nan")) -> list[TractRecord]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(TRACT_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise MetricsError(f"tract CSV lacks columns: {', '.join(sorted(missing))}")
    return [
        TractRecord(
            row["geoid"], float(row["area_ct_m2"]), float(row["area_cbrs_m2"]), float(row["alp"]),
            int(row["population"]), float(row["pctas"]), setback_m, row["validity"],
        )
        for row in reader
    ]


def cdf_csv(cdf: CdfTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["value", "cum_prob"])
    for v, p in cdf.rows():
        w.writerow([repr(v), repr(p)])
    return buf.getvalue()


def format_summary(report: CityReport) -> str:
    agg = report.aggregates()
    lines = [
        f"city: {report.city}",
        f"setback_m: {report.setback_m:.1f}",
        f"tracts: {agg['tract_count']}",
        f"non-empty tracts: {agg['nonempty_count']} of {agg['tract_count']}",
        f"empty-tract fraction: {agg['empty_fraction']:.4f}",
        f"prob(ALP < 0.5): {agg['prob_alp_below_half']:.4f}",
        f"population per tract: mean {agg['mean_population']:.1f}, median {agg['median_population']:.1f}",
        f"total PCTAS: {agg['total_pctas']:.1f}",
    ]
    for key, value in sorted(report.metadata.items()):
        lines.append(f"{key}: {value}")
    fallback = report.fallback_geoids
    lines.append("")
    lines.append("diagnostics:")
    lines.append(f"  raster-fallback tracts: {len(fallback)}")
    for g in fallback:
        lines.append(f"    {g}")
    return "\n".join(lines) + "\n"
