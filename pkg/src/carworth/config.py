"""Cleaning configuration for the eBay-Kleinanzeigen listings dump.

All tokens default to the vocabulary of the public Kaggle dump (German
category values). Every knob can be overridden from a JSON file passed to
``carworth ingest --config``.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

# Listing ages are measured against the crawl year of the dump, not the
# wall clock, so reruns of the pipeline stay comparable.
REFERENCE_YEAR = 2017


@dataclass(frozen=True)
class CleaningConfig:
    """Tokens and plausibility bounds used by the filtering rules."""

    private_seller_token: str = "privat"
    sale_offer_token: str = "Angebot"
    automatic_gearbox_token: str = "automatik"
    # notRepairedDamage carries this token when there is NO outstanding
    # damage, i.e. the car counts as damage-repaired.
    no_damage_token: str = "nein"
    power_ps_min: int = 10
    power_ps_max: int = 1000
    year_min: int = 1863
    year_max: int = 2017
    month_min: int = 1
    month_max: int = 12
    reference_year: int = REFERENCE_YEAR
    # The public dump has no explicit availability column; configure one
    # (plus the tokens that mark a listing unavailable) to activate rule 6.
    unavailable_column: str | None = None
    unavailable_tokens: tuple[str, ...] = ()
    # The dump is 8-bit text that is not uniformly UTF-8; undecodable bytes
    # are replaced rather than fatal.
    encoding: str = "utf-8"

    def __post_init__(self) -> None:
        if self.power_ps_min > self.power_ps_max:
            raise ValueError("power_ps_min must not exceed power_ps_max")
        if self.year_min > self.year_max:
            raise ValueError("year_min must not exceed year_max")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["unavailable_tokens"] = list(self.unavailable_tokens)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CleaningConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "unavailable_tokens" in d:
            d = dict(d, unavailable_tokens=tuple(d["unavailable_tokens"]))
        return cls(**d)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "CleaningConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
