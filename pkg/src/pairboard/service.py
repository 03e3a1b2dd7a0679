"""HTTP boundary: the annotation workflow plus leaderboard/report queries.

Blinding holds end to end: open tasks expose only slot-local ids ("a"/"b")
and proxied audio URLs, never system or voice names. Analytics run on
immutable log snapshots; leaderboard responses embed the bootstrap seed
and snapshot length for reproducibility audits, and identical queries on
an unchanged log return byte-identical bodies.
"""

from __future__ import annotations

import hashlib
import secrets
import threading
from dataclasses import dataclass
from datetime import timedelta
from typing import Sequence

import numpy as np
from fastapi import Depends, FastAPI, Header, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .domain import (
    Axis,
    Choice,
    ComparisonRecord,
    RaterEntry,
    RaterState,
    utcnow_ms,
)
from .errors import (
    BadTokenError,
    NonIdentifiableError,
    PairboardError,
    RaterNotActiveError,
    UnknownTaskError,
)
from .interpret import (
    build_feature_dataset,
    evaluate_cross_lingual,
    mean_abs_shapley_report,
    train_preference_classifier,
)
from .ranking import (
    LeaderboardConfig,
    SubgroupFilter,
    axis_win_rates,
    build_leaderboard,
    compute_win_matrix,
    leaderboard_to_dicts,
    win_rates,
)
from .reliability import rater_subsample_curve, sentence_subsample_curve
from .scheduling import PairPlan, QualificationStage, Scheduler, Task
from .storage import BenchmarkManifest, LogWriter, PreferenceLog

#: HTTP status per machine-readable error code.
_STATUS_BY_CODE = {
    "validation": 400,
    "unknown_reference": 404,
    "unknown_id": 404,
    "bad_token": 401,
    "already_locked": 409,
    "not_locked": 409,
    "task_expired": 409,
    "out_of_order_stage": 409,
    "duplicate_id": 409,
}
_DEFAULT_ERROR_STATUS = 422


@dataclass
class Session:
    token: str
    rater_id: str
    expires_at: object


class EvaluationService:
    """In-process state behind the HTTP app: scheduler, log, caches."""

    def __init__(
        self,
        manifest: BenchmarkManifest,
        raters: Sequence[RaterEntry],
        plan: PairPlan | None = None,
        seed: int = 0,
        log_writer: LogWriter | None = None,
        initial_records: Sequence[ComparisonRecord] = (),
        session_ttl: timedelta = timedelta(hours=12),
        default_replicates: int = 500,
    ):
        self.manifest = manifest
        registry = manifest.registry()
        if plan is None:
            plan = PairPlan.balanced(registry, raters)
        self.records: list[ComparisonRecord] = list(initial_records)
        self._writer = log_writer
        self.scheduler = Scheduler(
            registry, plan, raters, seed=seed, sink=self._on_record
        )
        self.seed = seed
        self.session_ttl = session_ttl
        self.default_replicates = default_replicates
        self.sessions: dict[str, Session] = {}
        self.lock = threading.Lock()
        self._query_cache: dict[tuple, dict] = {}

    def _on_record(self, record: ComparisonRecord) -> None:
        self.records.append(record)
        if self._writer is not None:
            self._writer.append(record)

    # -- sessions ---------------------------------------------------------

    def authenticate(self, token: str | None) -> Session:
        if not token:
            raise BadTokenError("missing bearer token")
        session = self.sessions.get(token)
        if session is None or session.expires_at < utcnow_ms():
            raise BadTokenError("unknown or expired token")
        return session

    # -- analytics snapshots ------------------------------------------------

    def snapshot(self) -> PreferenceLog:
        return PreferenceLog(records=tuple(self.records), manifest=self.manifest)

    def snapshot_seed(self, n_records: int) -> int:
        """Deterministic bootstrap seed for a log snapshot length."""
        return int(np.random.SeedSequence([self.seed, n_records]).generate_state(1)[0])

    def cached_query(self, key: tuple, compute) -> dict:
        hit = self._query_cache.get(key)
        if hit is None:
            hit = compute()
            self._query_cache[key] = hit
        return hit


class SessionRequest(BaseModel):
    rater_id: str


class OverallRequest(BaseModel):
    choice: str
    playback_proof: bool = False


class AxesRequest(BaseModel):
    axes: dict[str, str]


class QualificationRequest(BaseModel):
    stage: str
    passed: bool


def _error_response(code: str, message: str, details: dict | None = None) -> JSONResponse:
    status = _STATUS_BY_CODE.get(code, _DEFAULT_ERROR_STATUS)
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "details": details or {}},
    )


def _task_view(service: EvaluationService, task: Task) -> dict:
    """Client view of a task: slot-local ids only, no system identities."""
    rater = service.scheduler.raters[task.rater_id]
    sentence = service.scheduler.registry.sentences[task.sentence_id]
    return {
        "task_id": task.id,
        "state": task.state.value,
        "sentence": {
            "id": sentence.id,
            "text": sentence.text,
            "language": sentence.language,
        },
        "slots": {
            "a": {"audio_url": f"/tasks/{task.id}/audio/a"},
            "b": {"audio_url": f"/tasks/{task.id}/audio/b"},
        },
        "overall": task.overall.value if task.overall else None,
        "quota": {
            "completed": rater.quota_completed,
            "total": rater.quota_total,
        },
    }


def _parse_filter(
    language: str | None = None,
    domain: str | None = None,
    subset: str | None = None,
    systems: str | None = None,
) -> SubgroupFilter:
    return SubgroupFilter(
        language=language,
        domain=domain,
        subset=subset,
        systems=frozenset(systems.split(",")) if systems else None,
    )


def create_app(service: EvaluationService) -> FastAPI:
    app = FastAPI(title="pairboard", docs_url=None, redoc_url=None)

    @app.exception_handler(PairboardError)
    async def domain_error_handler(request: Request, exc: PairboardError):
        return _error_response(exc.code, str(exc), exc.details)

    @app.exception_handler(RequestValidationError)
    async def body_error_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={
                "code": "validation",
                "message": "malformed request body",
                "details": {"errors": exc.errors()},
            },
        )

    def bearer(authorization: str | None = Header(default=None)) -> Session:
        token = None
        if authorization and authorization.startswith("Bearer "):
            token = authorization.split(" ", 1)[1]
        return service.authenticate(token)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions")
    def open_session(body: SessionRequest):
        with service.lock:
            rater = service.scheduler.raters.get(body.rater_id)
            if rater is None:
                raise UnknownTaskError(f"unknown rater {body.rater_id!r}")
            if rater.state != RaterState.ACTIVE:
                raise RaterNotActiveError(
                    f"rater {body.rater_id!r} is {rater.state.value}, not active"
                )
            session = Session(
                token=secrets.token_urlsafe(24),
                rater_id=body.rater_id,
                expires_at=utcnow_ms() + service.session_ttl,
            )
            service.sessions[session.token] = session
            return {
                "token": session.token,
                "rater_id": session.rater_id,
                "expires_at": session.expires_at.isoformat(),
            }

    @app.post("/raters/{rater_id}/qualification")
    def qualification(rater_id: str, body: QualificationRequest):
        try:
            stage = QualificationStage(body.stage)
        except ValueError:
            return _error_response(
                "validation", f"unknown stage {body.stage!r}", {"field": "stage"}
            )
        with service.lock:
            rater = service.scheduler.advance_qualification(
                rater_id, stage, body.passed
            )
            return {"rater_id": rater.id, "state": rater.state.value}

    @app.get("/tasks/next")
    def next_task(session: Session = Depends(bearer)):
        with service.lock:
            task = service.scheduler.next_task(session.rater_id)
            if task is None:
                return {"status": "quota_exhausted"}
            return _task_view(service, task)

    def _owned_task(session: Session, task_id: str) -> Task:
        task = service.scheduler.tasks.get(task_id)
        if task is None or task.rater_id != session.rater_id:
            raise UnknownTaskError(f"unknown task {task_id!r}")
        return task

    @app.post("/tasks/{task_id}/overall")
    def submit_overall(
        task_id: str, body: OverallRequest, session: Session = Depends(bearer)
    ):
        try:
            choice = Choice(body.choice)
        except ValueError:
            return _error_response(
                "validation",
                f"unknown choice {body.choice!r}",
                {"field": "choice"},
            )
        with service.lock:
            _owned_task(session, task_id)
            task = service.scheduler.submit_overall(
                task_id, choice, body.playback_proof
            )
            return _task_view(service, task)

    @app.post("/tasks/{task_id}/axes")
    def submit_axes(
        task_id: str, body: AxesRequest, session: Session = Depends(bearer)
    ):
        axes: dict[Axis, Choice] = {}
        for key, value in body.axes.items():
            try:
                axes[Axis(key)] = Choice(value)
            except ValueError:
                return _error_response(
                    "validation",
                    f"unknown axis or choice: {key!r}={value!r}",
                    {"field": f"axes.{key}"},
                )
        with service.lock:
            _owned_task(session, task_id)
            record = service.scheduler.submit_axes(task_id, axes)
            rater = service.scheduler.raters[session.rater_id]
            return {
                "status": "complete",
                "record_id": record.id,
                "quota": {
                    "completed": rater.quota_completed,
                    "total": rater.quota_total,
                },
            }

    @app.get("/tasks/{task_id}/audio/{slot}")
    def task_audio(task_id: str, slot: str, session: Session = Depends(bearer)):
        with service.lock:
            task = _owned_task(session, task_id)
            if slot == "a":
                uri = task.left.audio_uri
            elif slot == "b":
                uri = task.right.audio_uri
            else:
                raise UnknownTaskError(f"unknown slot {slot!r}")
        if uri.startswith("file://"):
            with open(uri[len("file://"):], "rb") as f:
                payload = f.read()
        else:
            # placeholder bytes stand in for proxied audio assets
            payload = hashlib.sha256(uri.encode()).digest() * 8
        return Response(content=payload, media_type="application/octet-stream")

    @app.get("/leaderboard")
    def leaderboard(
        language: str | None = None,
        domain: str | None = None,
        subset: str | None = None,
        systems: str | None = None,
        replicates: int | None = None,
    ):
        subgroup = _parse_filter(language, domain, subset, systems)
        replicates = replicates or service.default_replicates
        with service.lock:
            snapshot = service.snapshot()
        n = len(snapshot.records)
        seed = service.snapshot_seed(n)
        key = ("leaderboard", tuple(sorted(subgroup.describe().items(), key=str)), replicates, n)

        def compute():
            try:
                entries = build_leaderboard(
                    snapshot,
                    subgroup,
                    LeaderboardConfig(replicates=replicates, seed=seed),
                )
            except NonIdentifiableError as exc:
                w = compute_win_matrix(snapshot, subgroup)
                counts = dict(zip(w.systems, w.n.sum(axis=1).astype(int).tolist()))
                raise NonIdentifiableError(
                    str(exc), details={"n_comparisons": counts}
                ) from exc
            return {
                "entries": leaderboard_to_dicts(entries),
                "meta": {
                    "snapshot_records": n,
                    "seed": seed,
                    "replicates": replicates,
                    "filter": subgroup.describe(),
                },
            }

        return service.cached_query(key, compute)

    @app.get("/winrates")
    def winrates(
        language: str | None = None,
        domain: str | None = None,
        subset: str | None = None,
        systems: str | None = None,
        per_axis: bool = False,
    ):
        subgroup = _parse_filter(language, domain, subset, systems)
        with service.lock:
            snapshot = service.snapshot()
        key = ("winrates", tuple(sorted(subgroup.describe().items(), key=str)), per_axis, len(snapshot.records))

        def compute():
            body = {
                "win_rates": win_rates(snapshot, subgroup),
                "meta": {
                    "snapshot_records": len(snapshot.records),
                    "filter": subgroup.describe(),
                },
            }
            if per_axis:
                body["axis_win_rates"] = axis_win_rates(snapshot, subgroup)
            return body

        return service.cached_query(key, compute)

    @app.get("/reliability/curves")
    def reliability_curves(
        mode: str = "raters",
        grid: str = "10,25,50",
        trials: int = 5,
        replicates: int = 100,
        fixed_raters: int = 200,
        systems: str | None = None,
    ):
        grid_values = tuple(int(g) for g in grid.split(","))
        subset = tuple(systems.split(",")) if systems else None
        with service.lock:
            snapshot = service.snapshot()
        n = len(snapshot.records)
        seed = service.snapshot_seed(n)
        key = ("reliability", mode, grid_values, trials, replicates, fixed_raters, subset, n)

        def compute():
            if mode == "raters":
                curve = rater_subsample_curve(
                    snapshot, subset, grid_values, trials=trials,
                    bootstrap_replicates=replicates, seed=seed,
                )
            elif mode == "sentences":
                curve = sentence_subsample_curve(
                    snapshot, subset, grid_values, fixed_raters=fixed_raters,
                    trials=trials, bootstrap_replicates=replicates, seed=seed,
                )
            else:
                return _error_response("validation", f"unknown mode {mode!r}")
            return curve.to_dict()

        return service.cached_query(key, compute)

    @app.get("/reports/shapley")
    def shapley_report(
        train_languages: str,
        holdout_languages: str | None = None,
        include_ties: bool = False,
        seed: int = 0,
    ):
        train = tuple(train_languages.split(","))
        holdout = tuple(holdout_languages.split(",")) if holdout_languages else None
        with service.lock:
            snapshot = service.snapshot()
        key = ("shapley", train, holdout, include_ties, seed, len(snapshot.records))

        def compute():
            rows = build_feature_dataset(snapshot, include_overall_ties=include_ties)
            model = train_preference_classifier(rows, train, seed=seed)
            train_rows = [r for r in rows if r.language in model.training_languages]
            background = np.array([r.features for r in train_rows])
            report = mean_abs_shapley_report(model, rows, background)
            body = {
                "report": report.to_dict(),
                "meta": {
                    "training_languages": sorted(model.training_languages),
                    "snapshot_records": len(snapshot.records),
                    "n_rows": len(rows),
                },
            }
            if holdout:
                cross = evaluate_cross_lingual(model, rows, holdout)
                body["accuracy"] = {
                    "pooled": cross.pooled_accuracy,
                    "per_language": cross.per_language,
                    "n_rows": cross.n_rows,
                }
            return body

        return service.cached_query(key, compute)

    return app
