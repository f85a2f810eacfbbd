"""Parse the raw listings dump, filter it, derive features, and split it.

The pipeline is: ``parse_csv`` -> ``apply_filters`` -> ``derive_features``
-> ``encode_categoricals``, orchestrated by :func:`ingest`. Every stage is a
pure transformation; filtering only removes rows and attributes each removal
to the first failing rule (1..9).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from . import container
from .config import CleaningConfig

# Column names of the raw dump, in canonical order. parse_csv locates them
# by name, so extra columns and reordered headers are tolerated.
RAW_COLUMNS = (
    "dateCrawled", "name", "seller", "offerType", "price", "abtest",
    "vehicleType", "yearOfRegistration", "gearbox", "powerPS", "model",
    "kilometer", "monthOfRegistration", "fuelType", "brand",
    "notRepairedDamage", "dateCreated", "nrOfPictures", "postalCode",
    "lastSeen",
)

# Predictor order of the encoded feature matrix; price is the target.
FEATURE_COLUMNS = (
    "vehicleType", "age", "powerPS", "model", "kilometer",
    "fuelType", "brand", "damageRepaired", "isAutomatic",
)
CATEGORICAL_COLUMNS = ("vehicleType", "model", "fuelType", "brand")

# Code handed out for category values first seen at predict time. Known
# values always encode to 0..k-1, so -1 can never collide.
UNKNOWN_CATEGORY_CODE = -1

RULE_LABELS = {
    1: "private_sellers_only",
    2: "sale_offers_only",
    3: "registration_year_range",
    4: "power_ps_range",
    5: "missing_price",
    6: "unavailable_listing",
    7: "invalid_registration_date",
    8: "boolean_conversion",  # transformation step; never removes rows
    9: "missing_values",
}


class DatasetError(ValueError):
    pass


class MissingFieldError(DatasetError):
    def __init__(self, field_name: str):
        super().__init__(f"listing is missing required field {field_name!r}")
        self.field_name = field_name


@dataclass(slots=True)
class RawListing:
    """One CSV row of the dump; numeric cells that fail to parse become None."""

    dateCrawled: str = ""
    name: str = ""
    seller: str = ""
    offerType: str = ""
    price: int | None = None
    abtest: str = ""
    vehicleType: str | None = None
    yearOfRegistration: int | None = None
    gearbox: str | None = None
    powerPS: int | None = None
    model: str | None = None
    kilometer: int | None = None
    monthOfRegistration: int | None = None
    fuelType: str | None = None
    brand: str | None = None
    notRepairedDamage: str | None = None
    dateCreated: str = ""
    nrOfPictures: int = 0
    postalCode: str = ""
    lastSeen: str = ""


@dataclass(slots=True)
class DerivedRecord:
    """A surviving listing with derived fields, categories still as strings."""

    price: int
    vehicleType: str
    age: int
    powerPS: int
    model: str
    kilometer: int
    fuelType: str
    brand: str
    damageRepaired: int
    isAutomatic: int


@dataclass
class FilterReport:
    """Per-rule removal counts; every removed row belongs to exactly one rule."""

    input_rows: int = 0
    surviving_rows: int = 0
    removed: dict[int, int] = field(default_factory=lambda: {r: 0 for r in RULE_LABELS})

    def check_conservation(self) -> None:
        total = self.surviving_rows + sum(self.removed.values())
        if total != self.input_rows:
            raise AssertionError(
                f"filter counts not conserved: {self.input_rows} in, "
                f"{self.surviving_rows} survivors + {sum(self.removed.values())} removed"
            )

    def to_dict(self) -> dict:
        return {
            "input_rows": self.input_rows,
            "surviving_rows": self.surviving_rows,
            "rules": [
                {"rule": r, "label": RULE_LABELS[r], "removed": self.removed[r]}
                for r in sorted(RULE_LABELS)
            ],
        }


class CategoryVocab:
    """Bijection between raw category strings and dense integer codes.

    Codes are assigned 0..k-1 in lexicographic order of the raw value, per
    categorical field. ``UNKNOWN_CATEGORY_CODE`` is reserved for values that
    only show up at predict time.
    """

    def __init__(self, values: dict[str, Sequence[str]]):
        self.values: dict[str, tuple[str, ...]] = {
            f: tuple(v) for f, v in values.items()
        }
        for f, vals in self.values.items():
            if list(vals) != sorted(set(vals)):
                raise DatasetError(f"vocabulary for {f!r} is not sorted and distinct")
        self._index = {f: {v: i for i, v in enumerate(vals)} for f, vals in self.values.items()}

    @classmethod
    def from_records(cls, records: Sequence[DerivedRecord]) -> "CategoryVocab":
        return cls({
            f: sorted({getattr(r, f) for r in records}) for f in CATEGORICAL_COLUMNS
        })

    def fields(self) -> tuple[str, ...]:
        return tuple(self.values)

    def size(self, field_name: str) -> int:
        return len(self.values[field_name])

    def encode(self, field_name: str, value: str) -> int:
        try:
            return self._index[field_name][value]
        except KeyError:
            raise DatasetError(
                f"unknown {field_name} value {value!r}; not in the training vocabulary"
            ) from None

    def encode_lenient(self, field_name: str, value: str) -> int:
        return self._index[field_name].get(value, UNKNOWN_CATEGORY_CODE)

    def decode(self, field_name: str, code: int) -> str:
        return self.values[field_name][code]

    def to_dict(self) -> dict[str, list[str]]:
        return {f: list(v) for f, v in self.values.items()}

    def __eq__(self, other) -> bool:
        return isinstance(other, CategoryVocab) and self.values == other.values


@dataclass(frozen=True)
class CleanDataset:
    """Encoded feature matrix plus target and the vocabulary that built it."""

    features: np.ndarray  # int64, shape (n, 9), columns per FEATURE_COLUMNS
    price: np.ndarray  # int64, shape (n,)
    vocab: CategoryVocab
    config: CleaningConfig
    columns: tuple[str, ...] = FEATURE_COLUMNS

    def __post_init__(self):
        if self.features.shape != (len(self.price), len(self.columns)):
            raise DatasetError("feature matrix and target lengths disagree")

    @property
    def n_rows(self) -> int:
        return len(self.price)

    def feature_matrix(self) -> np.ndarray:
        return self.features.astype(np.float64)

    def target(self) -> np.ndarray:
        return self.price.astype(np.float64)

    def column(self, name: str) -> np.ndarray:
        return self.features[:, self.columns.index(name)]

    def save(self, path: str | Path) -> bytes:
        meta = {
            "columns": list(self.columns),
            "target": "price",
            "vocab": self.vocab.to_dict(),
            "cleaning": self.config.to_dict(),
            "rows": self.n_rows,
        }
        arrays = {
            "features": self.features.astype(np.int64),
            "price": self.price.astype(np.int64),
        }
        return container.write(path, "clean_dataset", meta, arrays)

    @classmethod
    def load(cls, path: str | Path) -> "CleanDataset":
        meta, arrays = container.read(path, expected_kind="clean_dataset")
        return cls(
            features=arrays["features"].astype(np.int64),
            price=arrays["price"].astype(np.int64),
            vocab=CategoryVocab(meta["vocab"]),
            config=CleaningConfig.from_dict(meta["cleaning"]),
            columns=tuple(meta["columns"]),
        )


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint, exhaustive train/test/cv index partition of 0..n-1."""

    train: np.ndarray
    test: np.ndarray
    cv: np.ndarray
    seed: int
    ratios: tuple[float, float, float] = (0.7, 0.2, 0.1)


_INT_COLUMNS = ("price", "yearOfRegistration", "powerPS", "kilometer", "monthOfRegistration")
_OPTIONAL_TEXT_COLUMNS = ("vehicleType", "gearbox", "model", "fuelType", "brand", "notRepairedDamage")


def _opt_int(cell: str) -> int | None:
    cell = cell.strip()
    if not cell:
        return None
    try:
        return int(cell)
    except ValueError:
        return None


def parse_csv(
    source: BinaryIO | bytes, config: CleaningConfig | None = None
) -> tuple[list[RawListing], int]:
    """Read the dump into RawListings; returns ``(rows, skipped_row_count)``.

    Rows whose cell count disagrees with the header are skipped and counted.
    Blank lines are ignored. A header that lacks one of the 20 expected
    columns is fatal and the error names the first missing column.
    """
    config = config or CleaningConfig()
    data = source if isinstance(source, bytes) else source.read()
    text = data.decode(config.encoding, errors="replace")
    if text.startswith("﻿"):
        text = text[1:]
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError("source is empty: no header row") from None
    header = [h.strip() for h in header]
    positions = {name: i for i, name in enumerate(header)}
    for name in RAW_COLUMNS:
        if name not in positions:
            raise DatasetError(f"header is missing required column {name!r}")
    width = len(header)

    listings: list[RawListing] = []
    skipped = 0
    for row in reader:
        if not row:
            continue
        if len(row) != width:
            skipped += 1
            continue
        kwargs: dict = {}
        for name in RAW_COLUMNS:
            cell = row[positions[name]]
            if name in _INT_COLUMNS:
                kwargs[name] = _opt_int(cell)
            elif name == "nrOfPictures":
                kwargs[name] = _opt_int(cell) or 0
            elif name in _OPTIONAL_TEXT_COLUMNS:
                kwargs[name] = cell if cell else None
            else:
                kwargs[name] = cell
        listings.append(RawListing(**kwargs))
    return listings, skipped


def _first_failing_rule(row: RawListing, cfg: CleaningConfig) -> int | None:
    """Rule number (1..9) that rejects the row, or None if it survives."""
    if row.seller != cfg.private_seller_token:
        return 1
    if row.offerType != cfg.sale_offer_token:
        return 2
    if row.yearOfRegistration is not None and not (
        cfg.year_min <= row.yearOfRegistration <= cfg.year_max
    ):
        return 3
    if row.powerPS is not None and not (cfg.power_ps_min <= row.powerPS <= cfg.power_ps_max):
        return 4
    # "No associated price" covers absent, unparseable and non-positive
    # prices alike; no upper cap is applied.
    if row.price is None or row.price <= 0:
        return 5
    if cfg.unavailable_column is not None:
        if getattr(row, cfg.unavailable_column) in cfg.unavailable_tokens:
            return 6
    if row.monthOfRegistration is not None and not (
        cfg.month_min <= row.monthOfRegistration <= cfg.month_max
    ):
        return 7
    # Rule 8 is the boolean-to-0/1 conversion; it never removes rows.
    # Rule 9: anything derive_features needs must be present and usable.
    for name in (
        "vehicleType", "yearOfRegistration", "gearbox", "powerPS", "model",
        "kilometer", "monthOfRegistration", "fuelType", "brand", "notRepairedDamage",
    ):
        if getattr(row, name) is None:
            return 9
    if row.kilometer is not None and row.kilometer <= 0:
        return 9
    return None


def apply_filters(
    rows: Iterable[RawListing], config: CleaningConfig | None = None
) -> tuple[list[RawListing], FilterReport]:
    """Drop rows that violate any of the nine preprocessing rules."""
    cfg = config or CleaningConfig()
    if cfg.unavailable_column is not None and cfg.unavailable_column not in RAW_COLUMNS:
        raise DatasetError(
            f"unavailable_column {cfg.unavailable_column!r} is not a listing column"
        )
    report = FilterReport()
    survivors: list[RawListing] = []
    for row in rows:
        report.input_rows += 1
        rule = _first_failing_rule(row, cfg)
        if rule is None:
            survivors.append(row)
        else:
            report.removed[rule] += 1
    report.surviving_rows = len(survivors)
    report.check_conservation()
    return survivors, report


def derive_features(row: RawListing, config: CleaningConfig | None = None) -> DerivedRecord:
    """Turn a surviving listing into a record of the nine predictors + price."""
    cfg = config or CleaningConfig()
    for name in (
        "price", "vehicleType", "yearOfRegistration", "gearbox", "powerPS",
        "model", "kilometer", "fuelType", "brand", "notRepairedDamage",
    ):
        if getattr(row, name) is None:
            raise MissingFieldError(name)
    return DerivedRecord(
        price=row.price,
        vehicleType=row.vehicleType,
        age=cfg.reference_year - row.yearOfRegistration,
        powerPS=row.powerPS,
        model=row.model,
        kilometer=row.kilometer,
        fuelType=row.fuelType,
        brand=row.brand,
        damageRepaired=int(row.notRepairedDamage == cfg.no_damage_token),
        isAutomatic=int(row.gearbox == cfg.automatic_gearbox_token),
    )


def encode_categoricals(
    records: Sequence[DerivedRecord],
) -> tuple[np.ndarray, np.ndarray, CategoryVocab]:
    """Replace category strings with vocabulary codes; returns (X, y, vocab)."""
    if not records:
        raise DatasetError("empty dataset")
    vocab = CategoryVocab.from_records(records)
    n = len(records)
    X = np.empty((n, len(FEATURE_COLUMNS)), dtype=np.int64)
    y = np.empty(n, dtype=np.int64)
    for i, rec in enumerate(records):
        for j, col in enumerate(FEATURE_COLUMNS):
            v = getattr(rec, col)
            X[i, j] = vocab.encode(col, v) if col in CATEGORICAL_COLUMNS else v
        y[i] = rec.price
    return X, y, vocab


def split_dataset(n: int, seed: int) -> DatasetSplit:
    """Shuffle 0..n-1 uniformly and slice it 70:20:10.

    The seed is taken modulo 2^64, so signed 64-bit values are accepted.
    """
    if n < 10:
        raise DatasetError(f"need at least 10 rows to split 70:20:10, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed & 0xFFFFFFFFFFFFFFFF))
    perm = rng.permutation(n)
    n_train = round(0.7 * n)
    n_test = round(0.2 * n)
    return DatasetSplit(
        train=perm[:n_train],
        test=perm[n_train:n_train + n_test],
        cv=perm[n_train + n_test:],
        seed=seed,
    )


def ingest(
    source: BinaryIO | bytes, config: CleaningConfig | None = None
) -> tuple[CleanDataset, FilterReport, int]:
    """Full cleaning pipeline; returns (dataset, filter report, parse skips)."""
    cfg = config or CleaningConfig()
    rows, skipped = parse_csv(source, cfg)
    survivors, report = apply_filters(rows, cfg)
    records: list[DerivedRecord] = []
    for row in survivors:
        try:
            records.append(derive_features(row, cfg))
        except MissingFieldError:
            # Unreachable after apply_filters, but a derive-stage rejection
            # is by definition a missing-values (rule 9) removal.
            report.removed[9] += 1
    report.surviving_rows = len(records)
    report.check_conservation()
    if not records:
        raise DatasetError("no rows survived filtering")
    X, y, vocab = encode_categoricals(records)
    return CleanDataset(features=X, price=y, vocab=vocab, config=cfg), report, skipped
