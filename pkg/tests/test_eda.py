import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carworth.config import CleaningConfig
from carworth.dataset import CleanDataset, DatasetError, DerivedRecord, encode_categoricals
from carworth.eda import (
    age_histogram,
    boxplot_stats,
    eda_report,
    fuel_counts,
    group_mean_price,
    summary_stats,
)

from conftest import make_dataset, make_records


def dataset_from_records(records) -> CleanDataset:
    X, y, vocab = encode_categoricals(records)
    return CleanDataset(features=X, price=y, vocab=vocab, config=CleaningConfig())


def record(price=5000, age=3, km=90000, brand="audi", fuel="benzin",
           vehicle="suv", damage_repaired=1) -> DerivedRecord:
    return DerivedRecord(
        price=price, vehicleType=vehicle, age=age, powerPS=100, model="golf",
        kilometer=km, fuelType=fuel, brand=brand, damageRepaired=damage_repaired,
        isAutomatic=0,
    )


def interp_quantile(values, q):
    """Independent order-statistic interpolation: sort, index h=(n-1)q."""
    xs = sorted(values)
    h = (len(xs) - 1) * q
    lo = int(h)
    if lo == h:
        return float(xs[lo])
    return xs[lo] + (h - lo) * (xs[lo + 1] - xs[lo])


class TestSummaryStats:
    def test_singleton(self):
        ds = dataset_from_records([record(price=5000, age=3, km=90000)])
        stats = summary_stats(ds)
        assert (stats.mean_price, stats.mean_kilometer, stats.median_age) == (5000, 90000, 3)

    def test_lower_median_for_even_count(self):
        ds = dataset_from_records([record(age=4), record(age=8)])
        assert summary_stats(ds).median_age == 4

    def test_empty_rejected(self):
        ds = make_dataset(12)
        empty = CleanDataset(
            features=ds.features[:0], price=ds.price[:0],
            vocab=ds.vocab, config=ds.config,
        )
        with pytest.raises(DatasetError):
            summary_stats(empty)


class TestGroupMeanPrice:
    def test_mean_of_two(self):
        ds = dataset_from_records([record(price=1000), record(price=3000)])
        assert group_mean_price(ds, "brand") == [("audi", 2000.0)]

    def test_sorted_descending_with_code_tiebreak(self):
        ds = dataset_from_records([
            record(price=1000, brand="bmw"),
            record(price=9000, brand="audi"),
            record(price=1000, brand="volkswagen"),
        ])
        assert group_mean_price(ds, "brand") == [
            ("audi", 9000.0), ("bmw", 1000.0), ("volkswagen", 1000.0),
        ]

    def test_unknown_field_rejected(self):
        with pytest.raises(DatasetError, match="fuelType"):
            group_mean_price(make_dataset(20), "fuelType")

    @given(st.integers(0, 10_000))
    def test_group_means_within_group_price_range(self, seed):
        ds = make_dataset(40, seed=seed)
        for field in ("brand", "vehicleType"):
            for name, mean in group_mean_price(ds, field):
                code = ds.vocab.encode(field, name)
                prices = ds.target()[ds.column(field) == code]
                assert prices.min() <= mean <= prices.max()


class TestAgeHistogram:
    def test_small_counts(self):
        ds = dataset_from_records([record(age=0), record(age=0), record(age=1)])
        assert age_histogram(ds, 1) == [(0, 2), (1, 1)]

    def test_empty_bins_reported(self):
        ds = dataset_from_records([record(age=0), record(age=3)])
        assert age_histogram(ds, 1) == [(0, 1), (1, 0), (2, 0), (3, 1)]

    def test_wider_bins(self):
        ds = dataset_from_records([record(age=0), record(age=4), record(age=5)])
        assert age_histogram(ds, 5) == [(0, 2), (5, 1)]

    def test_invalid_width(self):
        with pytest.raises(DatasetError):
            age_histogram(make_dataset(12), 0)

    @given(st.integers(0, 10_000), st.integers(1, 7))
    def test_counts_conserved(self, seed, width):
        ds = make_dataset(50, seed=seed)
        assert sum(c for _, c in age_histogram(ds, width)) == ds.n_rows


class TestBoxplotStats:
    def test_interpolated_quartiles_1234(self):
        # Oracle: hand interpolation over the exhaustive sort of {1,2,3,4}
        prices = [1, 2, 3, 4]
        assert interp_quantile(prices, 0.25) == 1.75
        assert interp_quantile(prices, 0.5) == 2.5
        assert interp_quantile(prices, 0.75) == 3.25

        ds = dataset_from_records(
            [record(price=p, damage_repaired=1) for p in prices]
            + [record(price=10, damage_repaired=0)]
        )
        five = boxplot_stats(ds)[1]
        assert (five.q1, five.median, five.q3) == (1.75, 2.5, 3.25)

    def test_degenerate_group_all_equal(self):
        ds = dataset_from_records(
            [record(price=77, damage_repaired=1) for _ in range(3)]
            + [record(price=10, damage_repaired=0)]
        )
        five = boxplot_stats(ds)[1]
        assert (five.whisker_low, five.q1, five.median, five.q3, five.whisker_high) \
            == (77, 77, 77, 77, 77)

    def test_whiskers_clamped_to_observed_values(self):
        # 100 is far outside q3 + 1.5*IQR of {1..5}, so the upper whisker
        # falls back to the largest value inside the fence.
        ds = dataset_from_records(
            [record(price=p, damage_repaired=1) for p in (1, 2, 3, 4, 5, 100)]
            + [record(price=10, damage_repaired=0)]
        )
        five = boxplot_stats(ds)[1]
        assert five.whisker_high == 5
        assert five.whisker_low == 1

    def test_empty_group_rejected_with_name(self):
        ds = dataset_from_records([record(damage_repaired=1)])
        with pytest.raises(DatasetError, match="damageRepaired=0"):
            boxplot_stats(ds)

    @given(st.integers(0, 10_000))
    def test_five_numbers_monotone(self, seed):
        ds = make_dataset(60, seed=seed)
        flags = ds.column("damageRepaired")
        if not (flags == 0).any() or not (flags == 1).any():
            return
        for five in boxplot_stats(ds).values():
            assert five.whisker_low <= five.q1 <= five.median <= five.q3 <= five.whisker_high

    @given(st.integers(0, 10_000))
    def test_matches_independent_interpolation(self, seed):
        ds = make_dataset(60, seed=seed)
        flags = ds.column("damageRepaired")
        if not (flags == 0).any() or not (flags == 1).any():
            return
        for group, five in boxplot_stats(ds).items():
            prices = ds.target()[flags == group].tolist()
            assert five.q1 == pytest.approx(interp_quantile(prices, 0.25))
            assert five.median == pytest.approx(interp_quantile(prices, 0.5))
            assert five.q3 == pytest.approx(interp_quantile(prices, 0.75))


class TestFuelCounts:
    def test_multiplicities(self):
        ds = dataset_from_records([
            record(fuel="benzin"), record(fuel="benzin"), record(fuel="diesel"),
        ])
        assert fuel_counts(ds) == [("benzin", 2), ("diesel", 1)]

    def test_sorted_descending(self):
        ds = dataset_from_records(
            [record(fuel="diesel")] * 3 + [record(fuel="benzin")]
        )
        assert fuel_counts(ds)[0] == ("diesel", 3)

    @given(st.integers(0, 10_000))
    def test_counts_sum_to_rows(self, seed):
        ds = make_dataset(45, seed=seed)
        assert sum(c for _, c in fuel_counts(ds)) == ds.n_rows


class TestEdaReport:
    def test_report_blocks_and_serialization(self, small_dataset):
        report = eda_report(small_dataset)
        d = report.to_dict()
        assert d["rows"] == small_dataset.n_rows
        assert set(d) == {
            "rows", "summary", "vehicle_type_mean_price", "brand_top10_mean_price",
            "age_histogram", "fuel_type_counts", "price_by_damage_repaired",
        }
        assert len(d["brand_top10_mean_price"]) <= 10
        assert sum(b["count"] for b in d["age_histogram"]["bins"]) == d["rows"]
        assert {"0", "1"} == set(d["price_by_damage_repaired"])
