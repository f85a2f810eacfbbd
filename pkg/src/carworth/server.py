"""HTTP prediction service: one POST endpoint, metadata, and a health probe.

The loaded model lives in an atomically swappable slot; request handling
never mutates shared state, so responses are a pure function of (model,
request body). Error bodies are always ``{"code", "message"}`` plus a
``"field"`` key when a specific input is to blame.
"""
from __future__ import annotations

from pathlib import Path

from starlette.applications import Starlette
from starlette.requests import Request
from starlette.responses import JSONResponse
from starlette.routing import Mount, Route
from starlette.staticfiles import StaticFiles

from .config import CleaningConfig
from .dataset import CATEGORICAL_COLUMNS, FEATURE_COLUMNS
from .forest import ForestModel, predict
from .model_io import load_model, model_fingerprint

_BOOL_FIELDS = ("damageRepaired", "isAutomatic")


class ServingState:
    """Swappable holder for the currently served model.

    The (model, version) pair lives in one slot so a reload is a single
    reference assignment: concurrent requests see either the old pair or the
    new one, never a mix.
    """

    def __init__(self):
        self._slot: tuple[ForestModel, str] | None = None

    def set_model(self, model: ForestModel, version: str) -> None:
        if model.vocab is None or model.columns is None:
            raise ValueError("model has no embedded vocabulary; cannot serve it")
        self._slot = (model, version)

    def snapshot(self) -> tuple[ForestModel, str] | None:
        return self._slot

    @property
    def model(self) -> ForestModel | None:
        slot = self._slot
        return slot[0] if slot else None

    @property
    def version(self) -> str | None:
        slot = self._slot
        return slot[1] if slot else None

    def cleaning(self) -> CleaningConfig:
        slot = self._slot
        return _cleaning_of(slot[0]) if slot else CleaningConfig()


def _cleaning_of(model: ForestModel) -> CleaningConfig:
    raw = model.build_info.get("cleaning")
    return CleaningConfig.from_dict(raw) if raw else CleaningConfig()


def load_state(model_path: str | Path) -> ServingState:
    model = load_model(model_path)
    state = ServingState()
    state.set_model(model, model_fingerprint(Path(model_path).read_bytes()))
    return state


def _error(status: int, code: str, message: str, field: str | None = None) -> JSONResponse:
    body: dict = {"code": code, "message": message}
    if field is not None:
        body["field"] = field
    return JSONResponse(body, status_code=status)


def _no_model() -> JSONResponse:
    return _error(503, "model_unavailable", "no model is loaded")


def _bounds(cfg: CleaningConfig) -> dict:
    return {
        "age": {"min": 0, "max": cfg.reference_year - cfg.year_min},
        "yearOfRegistration": {"min": cfg.year_min, "max": cfg.year_max},
        "powerPS": {"min": cfg.power_ps_min, "max": cfg.power_ps_max},
        "kilometer": {"min": 1, "max": None},
    }


def _check_int(value, field: str, lo, hi) -> tuple[int | None, JSONResponse | None]:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
        return None, _error(400, "invalid_type", f"{field} must be an integer", field)
    value = int(value)
    if (lo is not None and value < lo) or (hi is not None and value > hi):
        bounds = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
        return None, _error(
            422, "out_of_bounds", f"{field}={value} is outside the allowed range {bounds}", field
        )
    return value, None


def _validate(body: dict, model: ForestModel, cfg: CleaningConfig):
    """Returns (feature vector, None) or (None, error response)."""
    if not isinstance(body, dict):
        return None, _error(400, "invalid_body", "request body must be a JSON object")
    required = [f for f in FEATURE_COLUMNS if f != "age"]
    for field in required:
        if field not in body:
            return None, _error(400, "missing_field", f"missing required field {field!r}", field)
    if "age" not in body and "yearOfRegistration" not in body:
        return None, _error(
            400, "missing_field", "provide either 'age' or 'yearOfRegistration'", "age"
        )

    values: dict[str, float] = {}
    if "age" in body:
        age, err = _check_int(body["age"], "age", 0, cfg.reference_year - cfg.year_min)
        if err:
            return None, err
        values["age"] = age
    else:
        year, err = _check_int(
            body["yearOfRegistration"], "yearOfRegistration", cfg.year_min, cfg.year_max
        )
        if err:
            return None, err
        values["age"] = cfg.reference_year - year

    power, err = _check_int(body["powerPS"], "powerPS", cfg.power_ps_min, cfg.power_ps_max)
    if err:
        return None, err
    values["powerPS"] = power
    km, err = _check_int(body["kilometer"], "kilometer", 1, None)
    if err:
        return None, err
    values["kilometer"] = km

    for field in CATEGORICAL_COLUMNS:
        value = body[field]
        if not isinstance(value, str):
            return None, _error(400, "invalid_type", f"{field} must be a string", field)
        known = model.vocab.values[field]
        if value not in known:
            return None, _error(
                422,
                "unknown_category",
                f"unknown {field} {value!r}; valid values: {', '.join(known)}",
                field,
            )
        values[field] = model.vocab.encode(field, value)

    for field in _BOOL_FIELDS:
        if not isinstance(body[field], bool):
            return None, _error(400, "invalid_type", f"{field} must be a boolean", field)
        values[field] = int(body[field])

    return [float(values[c]) for c in model.columns], None


def build_app(state: ServingState, static_dir: str | Path | None = None) -> Starlette:
    async def predict_endpoint(request: Request) -> JSONResponse:
        slot = state.snapshot()
        if slot is None:
            return _no_model()
        model, version = slot
        try:
            body = await request.json()
        except Exception:
            return _error(400, "invalid_json", "request body is not valid JSON")
        vector, err = _validate(body, model, _cleaning_of(model))
        if err is not None:
            return err
        result = predict(model, vector)
        return JSONResponse({
            "price": result.price,
            "spread": {"min": result.tree_min, "max": result.tree_max, "std": result.tree_std},
            "modelVersion": version,
        })

    async def metadata_endpoint(request: Request) -> JSONResponse:
        slot = state.snapshot()
        if slot is None:
            return _no_model()
        model, version = slot
        return JSONResponse({
            "modelVersion": version,
            "columns": list(model.columns),
            "vocabularies": model.vocab.to_dict(),
            "bounds": _bounds(_cleaning_of(model)),
            "booleans": list(_BOOL_FIELDS),
        })

    async def healthz(request: Request) -> JSONResponse:
        if state.snapshot() is None:
            return _no_model()
        return JSONResponse({"status": "ok", "modelVersion": state.version})

    routes = [
        Route("/api/v1/predict", predict_endpoint, methods=["POST"]),
        Route("/api/v1/metadata", metadata_endpoint, methods=["GET"]),
        Route("/healthz", healthz, methods=["GET"]),
    ]
    if static_dir is not None:
        routes.append(Mount("/", app=StaticFiles(directory=static_dir, html=True)))
    return Starlette(routes=routes)
