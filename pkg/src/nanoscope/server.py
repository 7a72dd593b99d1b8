"""HTTP/JSON facade over risk sessions and uniqueness reports.

One population (or one cached audience table) is loaded at startup and
shared read-only across requests. The only mutable state is the in-memory
session map keyed by user id; restarting the server resets all sessions.
Remove/restore commands carry the client's last seen session version and
are rejected with 409 when it is stale, so concurrent editors cannot
silently overwrite each other.

Response bodies round-trip through the JSON Schema files under
``nanoscope/schemas/``; the tests validate them against live responses.
"""

from __future__ import annotations

import hashlib
import threading
from pathlib import Path

from fastapi import APIRouter, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from .engine import CensorPolicy, FLOOR_PRESETS
from .errors import (
    DataFormatError,
    NanoscopeError,
    NumericalError,
    StaleVersionError,
    UnknownEntityError,
)
from .estimator import uniqueness_report
from .reportio import report_to_dict
from .risk import (
    ProfileSession,
    check_version,
    entry_to_dict,
    open_session,
    remove_interest,
    restore_interest,
    risk_list,
    whatif_to_dict,
    whatif_uniqueness,
)
from .selection import STRATEGY_KINDS, SelectionStrategy

# Routes answer under both prefixes; v1 is the pinned alias clients
# should prefer, /api the unversioned convenience.
API_PREFIX = "/api"
API_V1_PREFIX = "/api/v1"
LOCALHOST_ORIGIN_REGEX = r"^https?://(localhost|127\.0\.0\.1)(:\d+)?$"

_STATUS_CODES = {
    400: "invalid_request",
    404: "unknown_entity",
    405: "method_not_allowed",
    409: "stale_version",
    500: "internal",
}


def schema_path(name: str) -> Path:
    """Filesystem path of a shipped response schema, e.g. ``schema_path("report")``."""
    return Path(__file__).parent / "schemas" / f"{name}.schema.json"


def _api_error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _source_digest(source) -> str:
    if source.supports_whatif:
        from .population.io import population_digest
        return population_digest(source.population)
    h = hashlib.sha256()
    for iid in sorted(source.audiences):
        h.update(f"{iid},{source.audiences[iid]}\n".encode())
    return h.hexdigest()


class VersionPayload(BaseModel):
    version: int


def _parse_floor(floor: int) -> CensorPolicy:
    if floor not in FLOOR_PRESETS:
        raise DataFormatError(f"floor must be one of {list(FLOOR_PRESETS)}, got {floor}")
    return CensorPolicy(floor=floor)


def _parse_strategy(kind: str, seed: int) -> SelectionStrategy:
    if kind not in STRATEGY_KINDS:
        raise DataFormatError(f"strategy must be one of {sorted(STRATEGY_KINDS)}, got {kind!r}")
    return SelectionStrategy(kind, seed=seed)


def create_app(source, *, report_resamples: int = 500, report_seed: int = 0,
               cors_origins=None, ui_dir: str | None = None,
               digest: str | None = None) -> FastAPI:
    """Build the application around one risk source.

    ``source`` is a PopulationRiskSource or AudienceTableSource. Report
    and what-if endpoints need the population-backed source and answer
    400 on a table-backed one. ``report_resamples`` bounds how much work
    the cached report endpoint may do per distinct query.
    """
    app = FastAPI(title="nanoscope", docs_url=None, redoc_url=None, openapi_url=None)

    if cors_origins is None:
        app.add_middleware(CORSMiddleware, allow_origin_regex=LOCALHOST_ORIGIN_REGEX,
                           allow_methods=["*"], allow_headers=["*"])
    else:
        app.add_middleware(CORSMiddleware, allow_origins=list(cors_origins),
                           allow_methods=["*"], allow_headers=["*"])

    population_digest_value = digest if digest is not None else _source_digest(source)

    sessions: dict[int, ProfileSession] = {}
    session_lock = threading.Lock()
    report_lock = threading.Lock()
    report_cache: dict[tuple, dict] = {}

    def get_session(user_id: int) -> ProfileSession:
        # open_session raises UnknownEntityError for ids outside the source
        with session_lock:
            session = sessions.get(user_id)
            if session is None:
                session = open_session(source, user_id)
                sessions[user_id] = session
            return session

    def session_summary(session: ProfileSession) -> dict:
        return {
            "user_id": session.user_id,
            "version": session.version,
            "removed": sorted(session.removed),
            "entries": [entry_to_dict(e) for e in risk_list(session, source)],
        }

    # -- error mapping ------------------------------------------------------

    @app.exception_handler(UnknownEntityError)
    async def _unknown(request: Request, exc: UnknownEntityError):
        return _api_error(404, "unknown_entity", str(exc))

    @app.exception_handler(StaleVersionError)
    async def _stale(request: Request, exc: StaleVersionError):
        return _api_error(409, "stale_version", str(exc))

    @app.exception_handler(DataFormatError)
    async def _bad_request(request: Request, exc: DataFormatError):
        return _api_error(400, "invalid_request", str(exc))

    @app.exception_handler(NumericalError)
    async def _numerical(request: Request, exc: NumericalError):
        return _api_error(500, "numerical_error", str(exc))

    @app.exception_handler(NanoscopeError)
    async def _internal(request: Request, exc: NanoscopeError):
        return _api_error(500, "internal", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _validation(request: Request, exc: RequestValidationError):
        return _api_error(400, "invalid_request", str(exc.errors()))

    @app.exception_handler(StarletteHTTPException)
    async def _http(request: Request, exc: StarletteHTTPException):
        code = _STATUS_CODES.get(exc.status_code, "error")
        return _api_error(exc.status_code, code, str(exc.detail))

    # -- endpoints ----------------------------------------------------------

    router = APIRouter()

    @router.get("/health")
    def health():
        return {"status": "ok", "population_digest": population_digest_value}

    @router.get("/users/{user_id}/risks")
    def user_risks(user_id: int):
        session = get_session(user_id)
        with session_lock:
            return [entry_to_dict(e) for e in risk_list(session, source)]

    @router.post("/users/{user_id}/interests/{interest_id}/remove")
    def remove(user_id: int, interest_id: int, payload: VersionPayload):
        session = get_session(user_id)
        with session_lock:
            check_version(session, payload.version)
            remove_interest(session, interest_id)
            return session_summary(session)

    @router.post("/users/{user_id}/interests/{interest_id}/restore")
    def restore(user_id: int, interest_id: int, payload: VersionPayload):
        session = get_session(user_id)
        with session_lock:
            check_version(session, payload.version)
            restore_interest(session, interest_id)
            return session_summary(session)

    @router.get("/users/{user_id}/whatif")
    def whatif(user_id: int, strategy: str = "lp", floor: int = 20, seed: int = 0):
        policy = _parse_floor(floor)
        chosen = _parse_strategy(strategy, seed)
        session = get_session(user_id)
        with session_lock:
            report = whatif_uniqueness(session, source, chosen, policy)
            body = whatif_to_dict(report)
            body["user_id"] = session.user_id
            body["version"] = session.version
            return body

    @router.get("/report")
    def report(strategy: str = "lp,random", p: str = "0.5,0.8,0.9,0.95",
               floor: int = 20, seed: int = 0):
        if not source.supports_whatif:
            raise DataFormatError("reports need a full population, not a cached table")
        kinds = [s.strip() for s in strategy.split(",") if s.strip()]
        if not kinds:
            raise DataFormatError("strategy list is empty")
        strategies = tuple(_parse_strategy(k, seed) for k in kinds)
        try:
            p_values = tuple(float(part) for part in p.split(",") if part.strip())
        except ValueError:
            raise DataFormatError(f"p must be comma-separated floats, got {p!r}") from None
        policy = _parse_floor(floor)
        key = (tuple(kinds), p_values, policy.floor, seed, report_resamples)
        with report_lock:
            cached = report_cache.get(key)
            if cached is None:
                result = uniqueness_report(
                    source.population, source.index, strategies, p_values, policy,
                    n_resamples=report_resamples, seed=seed,
                )
                cached = report_to_dict(result)
                report_cache[key] = cached
            return cached

    app.include_router(router, prefix=API_V1_PREFIX)
    app.include_router(router, prefix=API_PREFIX)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
