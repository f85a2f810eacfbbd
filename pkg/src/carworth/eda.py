"""Exploratory statistics over a cleaned dataset, as plain report data.

Emits the numbers behind the usual first look at the listings: overall
averages, group means by vehicle type and brand, the age distribution, fuel
type counts, and price five-number summaries split by damage status. No
plotting here; the JSON report is meant to feed external tooling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import CleanDataset, DatasetError

GROUPABLE_FIELDS = ("vehicleType", "brand")


@dataclass(frozen=True)
class SummaryStats:
    mean_price: float
    mean_kilometer: float
    median_age: int


@dataclass(frozen=True)
class FiveNumber:
    """Box plot numbers: whiskers at 1.5*IQR clamped to observed values."""

    whisker_low: float
    q1: float
    median: float
    q3: float
    whisker_high: float

    def to_dict(self) -> dict:
        return {
            "whisker_low": self.whisker_low,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "whisker_high": self.whisker_high,
        }


@dataclass(frozen=True)
class EdaReport:
    rows: int
    summary: SummaryStats
    vehicle_type_mean_price: list[tuple[str, float]]
    brand_top10_mean_price: list[tuple[str, float]]
    age_histogram: list[tuple[int, int]]
    fuel_type_counts: list[tuple[str, int]]
    price_by_damage_repaired: dict[int, FiveNumber]

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "summary": {
                "mean_price": self.summary.mean_price,
                "mean_kilometer": self.summary.mean_kilometer,
                "median_age": self.summary.median_age,
            },
            "vehicle_type_mean_price": [
                {"category": c, "mean_price": m} for c, m in self.vehicle_type_mean_price
            ],
            "brand_top10_mean_price": [
                {"category": c, "mean_price": m} for c, m in self.brand_top10_mean_price
            ],
            "age_histogram": {
                "bin_width": 1,
                "bins": [{"age": a, "count": c} for a, c in self.age_histogram],
            },
            "fuel_type_counts": [
                {"category": c, "count": n} for c, n in self.fuel_type_counts
            ],
            "price_by_damage_repaired": {
                str(g): f.to_dict() for g, f in self.price_by_damage_repaired.items()
            },
        }


def summary_stats(dataset: CleanDataset) -> SummaryStats:
    """Mean price, mean kilometres, and the (lower) median age."""
    if dataset.n_rows == 0:
        raise DatasetError("empty dataset")
    ages = np.sort(dataset.column("age"))
    return SummaryStats(
        mean_price=float(dataset.target().mean()),
        mean_kilometer=float(dataset.column("kilometer").mean()),
        median_age=int(ages[(len(ages) - 1) // 2]),
    )


def group_mean_price(dataset: CleanDataset, group_field: str) -> list[tuple[str, float]]:
    """Mean price per category, sorted descending (ties by category code)."""
    if group_field not in GROUPABLE_FIELDS:
        raise DatasetError(
            f"cannot group by {group_field!r}; expected one of {GROUPABLE_FIELDS}"
        )
    codes = dataset.column(group_field)
    prices = dataset.target()
    out = []
    for code in range(dataset.vocab.size(group_field)):
        mask = codes == code
        if mask.any():
            out.append((code, float(prices[mask].mean())))
    out.sort(key=lambda cm: (-cm[1], cm[0]))
    return [(dataset.vocab.decode(group_field, code), mean) for code, mean in out]


def age_histogram(dataset: CleanDataset, bin_width: int = 1) -> list[tuple[int, int]]:
    """Counts over contiguous age bins [0,w), [w,2w), ...; empty bins shown."""
    if bin_width < 1:
        raise DatasetError("bin width must be at least 1")
    ages = dataset.column("age")
    if len(ages) == 0:
        return []
    n_bins = int(ages.max()) // bin_width + 1
    counts = np.bincount(ages // bin_width, minlength=n_bins)
    return [(b * bin_width, int(c)) for b, c in enumerate(counts)]


def _five_number(prices: np.ndarray) -> FiveNumber:
    q1, med, q3 = (float(q) for q in np.quantile(prices, [0.25, 0.5, 0.75], method="linear"))
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    return FiveNumber(
        whisker_low=float(prices[prices >= lo_fence].min()),
        q1=q1,
        median=med,
        q3=q3,
        whisker_high=float(prices[prices <= hi_fence].max()),
    )


def boxplot_stats(dataset: CleanDataset) -> dict[int, FiveNumber]:
    """Price five-number summary for each damage-repaired group (0 and 1)."""
    flags = dataset.column("damageRepaired")
    prices = dataset.target()
    out: dict[int, FiveNumber] = {}
    for group in (0, 1):
        group_prices = prices[flags == group]
        if len(group_prices) == 0:
            raise DatasetError(f"damageRepaired={group} group is empty")
        out[group] = _five_number(group_prices)
    return out


def fuel_counts(dataset: CleanDataset) -> list[tuple[str, int]]:
    """Listing count per fuel type, sorted descending (ties by code)."""
    codes = dataset.column("fuelType")
    k = dataset.vocab.size("fuelType")
    counts = np.bincount(codes, minlength=k) if len(codes) else np.zeros(k, dtype=int)
    pairs = [(code, int(c)) for code, c in enumerate(counts) if c > 0]
    pairs.sort(key=lambda cn: (-cn[1], cn[0]))
    return [(dataset.vocab.decode("fuelType", code), c) for code, c in pairs]


def eda_report(dataset: CleanDataset) -> EdaReport:
    """All six statistic blocks in one report."""
    return EdaReport(
        rows=dataset.n_rows,
        summary=summary_stats(dataset),
        vehicle_type_mean_price=group_mean_price(dataset, "vehicleType"),
        brand_top10_mean_price=group_mean_price(dataset, "brand")[:10],
        age_histogram=age_histogram(dataset, 1),
        fuel_type_counts=fuel_counts(dataset),
        price_by_damage_repaired=boxplot_stats(dataset),
    )
