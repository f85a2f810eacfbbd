import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from carworth.config import CleaningConfig
from carworth.dataset import (
    RAW_COLUMNS,
    CleanDataset,
    DerivedRecord,
    encode_categoricals,
)

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

# A fully valid listing, cell by cell; tests override single cells to hit
# individual filter rules.
VALID_ROW = {
    "dateCrawled": "2016-03-24 11:52:17",
    "name": "Golf_3_1.6",
    "seller": "privat",
    "offerType": "Angebot",
    "price": "1500",
    "abtest": "test",
    "vehicleType": "kleinwagen",
    "yearOfRegistration": "2005",
    "gearbox": "manuell",
    "powerPS": "75",
    "model": "golf",
    "kilometer": "150000",
    "monthOfRegistration": "6",
    "fuelType": "benzin",
    "brand": "volkswagen",
    "notRepairedDamage": "nein",
    "dateCreated": "2016-03-24 00:00:00",
    "nrOfPictures": "0",
    "postalCode": "70435",
    "lastSeen": "2016-04-07 03:16:57",
}

CSV_HEADER = ",".join(RAW_COLUMNS)


def csv_line(**overrides) -> str:
    cells = {**VALID_ROW, **overrides}
    return ",".join(cells[c] for c in RAW_COLUMNS)


def csv_bytes(*lines: str) -> bytes:
    return ("\n".join([CSV_HEADER, *lines]) + "\n").encode("utf-8")


def make_records(n: int, seed: int = 0) -> list[DerivedRecord]:
    """Synthetic derived records with price loosely driven by the features."""
    rng = np.random.Generator(np.random.PCG64(seed))
    vehicle_types = ["bus", "coupe", "kleinwagen", "suv"]
    models = ["3er", "golf", "polo"]
    fuels = ["benzin", "diesel"]
    brands = ["audi", "bmw", "porsche", "volkswagen"]
    records = []
    for _ in range(n):
        age = int(rng.integers(0, 30))
        power = int(rng.integers(40, 400))
        km = int(rng.integers(1, 31) * 5000)
        brand = brands[rng.integers(0, len(brands))]
        price = max(
            100,
            int(
                25000
                + 90 * power
                - 700 * age
                - km // 20
                + (20000 if brand == "porsche" else 0)
                + rng.integers(-2000, 2000)
            ),
        )
        records.append(DerivedRecord(
            price=price,
            vehicleType=vehicle_types[rng.integers(0, len(vehicle_types))],
            age=age,
            powerPS=power,
            model=models[rng.integers(0, len(models))],
            kilometer=km,
            fuelType=fuels[rng.integers(0, len(fuels))],
            brand=brand,
            damageRepaired=int(rng.integers(0, 2)),
            isAutomatic=int(rng.integers(0, 2)),
        ))
    return records


def make_dataset(n: int = 120, seed: int = 0) -> CleanDataset:
    X, y, vocab = encode_categoricals(make_records(n, seed))
    return CleanDataset(features=X, price=y, vocab=vocab, config=CleaningConfig())


@pytest.fixture
def small_dataset() -> CleanDataset:
    return make_dataset(120, seed=7)


def kaggle_csv_path() -> Path | None:
    candidate = os.environ.get("CARWORTH_DATASET", "data/autos.csv")
    path = Path(candidate)
    return path if path.exists() else None


requires_dataset = pytest.mark.skipif(
    kaggle_csv_path() is None,
    reason="public listings CSV not available (set CARWORTH_DATASET to autos.csv)",
)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One line per acceptance criterion at the end of every run."""
    lines = {}
    for status in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            if rep.when == "call" or (rep.when == "setup" and status == "skipped"):
                lines[nodeid.split("::")[-1]] = status.upper()
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(lines.items()):
            terminalreporter.write_line(f"{status:<8} {name}")
