"""HTTP facade over schemas, sessions, data generation, and evaluation.

Every mutation is written to the file-backed store before the response is
sent, and sessions carry optimistic versions so two concurrent feedback
posts resolve to exactly one winner. All errors return a machine-readable
code plus a human message under an ``error`` key.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import datagen, ranker
from .config import EngineConfig
from .embeddings import VectorStore, load_vectors
from .errors import (
    EmptyUtteranceError,
    EvaluationError,
    NotProposedError,
    PetelkitError,
    SchemaError,
    SessionError,
    SlotBoundError,
    SlotExhaustedError,
    TemplateError,
    VersionConflictError,
)
from .evaluation import ValidationInstance, evaluate, load_validation
from .lexicon import default_templates_path, fixture_validation_path
from .petel import SLOT_ORDER, SlotKind, render_petel, serialize_petel
from .schema import Schema, load_schema, serialize_schema
from .storage import DocumentStore


@dataclass
class ServiceConfig:
    data_dir: str = "petelkit-data"
    embeddings_path: str = ""
    host: str = "127.0.0.1"
    port: int = 8571
    engine: EngineConfig = field(default_factory=EngineConfig)

    @classmethod
    def from_document(cls, document: dict) -> "ServiceConfig":
        engine = EngineConfig.from_document(document.get("engine"))
        known = {
            key: document[key]
            for key in ("data_dir", "embeddings_path", "host", "port")
            if key in document
        }
        return cls(engine=engine, **known)


class CreateSessionBody(BaseModel):
    schema_id: str
    utterance: str
    config: dict | None = None


class FeedbackBody(BaseModel):
    slot: str
    candidate: str
    verdict: str
    version: int | None = None


class DatagenBody(BaseModel):
    schema_id: str
    format: str
    template_set: str | None = None
    templates: list[str] | None = None
    seed: int = 0
    split: float | None = None


class EvaluateBody(BaseModel):
    schema_id: str
    validation_set: str | list[dict] | None = None
    config: dict | None = None


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message}}
    )


class ApiError(PetelkitError):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code


def _session_view(session: ranker.Session, version: int) -> dict:
    top3 = {}
    for kind in SLOT_ORDER:
        dist = session.petel.slot(kind)
        top3[kind.value] = [
            {
                "id": c.id,
                "display": c.display,
                "probability": p,
                "provenance_phrase": session.provenance_phrase(kind, c.id),
            }
            for c, p in dist.ranked()[:3]
        ]
    current = session.current_slot()
    return {
        "id": session.id,
        "version": version,
        "status": session.status,
        "current_slot": current.value if current else None,
        "bound": session.petel.bound_values(),
        "top3": top3,
    }


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="petelkit", version="0.1.0")
    # The browser companion is served from its own origin.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = DocumentStore(config.data_dir)
    vectors: VectorStore = load_vectors(config.embeddings_path)
    embeddings_name = Path(config.embeddings_path).name

    def load_schema_or_404(schema_id: str) -> Schema:
        record = store.get("schemas", schema_id)
        if record is None:
            raise ApiError(404, "unknown_schema", f"no schema with id {schema_id!r}")
        return load_schema(record.document)

    def load_session_or_404(session_id: str):
        record = store.get("sessions", session_id)
        if record is None:
            raise ApiError(404, "unknown_session", f"no session with id {session_id!r}")
        return ranker.session_from_document(record.document), record.version

    @app.exception_handler(ApiError)
    async def handle_api_error(_: Request, exc: ApiError):
        return _error(exc.status, exc.code, str(exc))

    @app.exception_handler(PetelkitError)
    async def handle_domain_error(_: Request, exc: PetelkitError):
        mapping = [
            (VersionConflictError, 409, "version_conflict"),
            (NotProposedError, 409, "not_proposed"),
            (SlotBoundError, 409, "slot_bound"),
            (SlotExhaustedError, 409, "session_exhausted"),
            (SessionError, 409, "session_state"),
            (SchemaError, 400, "invalid_schema"),
            (TemplateError, 400, "invalid_template"),
            (EvaluationError, 400, "invalid_validation_set"),
            (EmptyUtteranceError, 400, "empty_utterance"),
        ]
        for klass, status, code in mapping:
            if isinstance(exc, klass):
                return _error(status, code, str(exc))
        return _error(400, "domain_error", str(exc))

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(_: Request, exc: RequestValidationError):
        return _error(400, "invalid_request", str(exc))

    @app.exception_handler(StarletteHTTPException)
    async def handle_http_error(_: Request, exc: StarletteHTTPException):
        code = "not_found" if exc.status_code == 404 else "http_error"
        return _error(exc.status_code, code, str(exc.detail))

    @app.post("/schemas")
    async def create_schema(document: dict):
        schema = load_schema(document)
        schema_id = uuid.uuid4().hex[:12]
        store.put("schemas", schema_id, serialize_schema(schema))
        return {"id": schema_id, "name": schema.name, "attributes": len(schema)}

    @app.get("/schemas")
    async def list_schemas():
        entries = []
        for schema_id in store.list_ids("schemas"):
            record = store.get("schemas", schema_id)
            if record is None:
                continue
            entries.append(
                {
                    "id": schema_id,
                    "name": record.document.get("name", ""),
                    "attributes": len(record.document.get("attributes", [])),
                }
            )
        return {"schemas": entries}

    @app.get("/schemas/{schema_id}")
    async def get_schema(schema_id: str):
        record = store.get("schemas", schema_id)
        if record is None:
            raise ApiError(404, "unknown_schema", f"no schema with id {schema_id!r}")
        return record.document

    @app.post("/sessions")
    async def create_session(body: CreateSessionBody):
        schema = load_schema_or_404(body.schema_id)
        if not body.utterance.strip():
            raise ApiError(400, "empty_utterance", "utterance must be non-empty")
        engine = (
            EngineConfig.from_document(body.config) if body.config else config.engine
        )
        session = ranker.start_session(schema, body.utterance, vectors, engine)
        record = store.put("sessions", session.id, ranker.session_to_document(session))
        view = _session_view(session, record.version)
        view["schema_id"] = body.schema_id
        return view

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        session, version = load_session_or_404(session_id)
        document = ranker.session_to_document(session)
        document["version"] = version
        document["view"] = _session_view(session, version)
        return document

    @app.get("/sessions/{session_id}/proposal")
    async def get_proposal(session_id: str):
        session, version = load_session_or_404(session_id)
        slot, candidate, prob = ranker.peek_top(session)
        return {
            "version": version,
            "slot": slot.value,
            "candidate": {
                "id": candidate.id,
                "display": candidate.display,
                "probability": prob,
                "provenance_phrase": session.provenance_phrase(slot, candidate.id),
            },
        }

    @app.post("/sessions/{session_id}/feedback")
    async def post_feedback(session_id: str, body: FeedbackBody):
        session, version = load_session_or_404(session_id)
        if body.version is not None and body.version != version:
            raise ApiError(
                409,
                "version_conflict",
                f"session version is {version}, request carried {body.version}",
            )
        try:
            slot = SlotKind(body.slot)
        except ValueError:
            raise ApiError(400, "invalid_request", f"unknown slot {body.slot!r}") from None
        if body.verdict not in ("accept", "reject"):
            raise ApiError(400, "invalid_request", f"unknown verdict {body.verdict!r}")
        ranker.feedback(session, slot, body.candidate, body.verdict)
        record = store.put(
            "sessions", session.id, ranker.session_to_document(session), version
        )
        return _session_view(session, record.version)

    @app.get("/sessions/{session_id}/petel")
    async def get_petel(session_id: str):
        session, version = load_session_or_404(session_id)
        document = serialize_petel(session.petel)
        document["version"] = version
        document["status"] = session.status
        document["rendered"] = render_petel(session.petel)
        return document

    @app.post("/datagen")
    async def post_datagen(body: DatagenBody):
        schema = load_schema_or_404(body.schema_id)
        if body.format not in ("conll", "squad"):
            raise ApiError(400, "invalid_request", f"unknown format {body.format!r}")
        if body.templates:
            templates = [
                datagen.parse_template(line, i + 1)
                for i, line in enumerate(body.templates)
            ]
        else:
            set_name = body.template_set or "default"
            if set_name != "default":
                raise ApiError(
                    404, "unknown_template_set", f"no template set {set_name!r}"
                )
            templates = datagen.load_templates(default_templates_path())
        corpus = datagen.fill_templates(templates, schema)

        def render(part: list[datagen.AnnotatedUtterance]):
            if body.format == "conll":
                return datagen.emit_conll(part)
            return datagen.emit_squad(part)

        if body.split is not None:
            train, test = datagen.train_test_split(corpus, body.split, body.seed)
            return {
                "format": body.format,
                "train": render(train),
                "test": render(test),
                "sizes": {"train": len(train), "test": len(test)},
            }
        if body.format == "conll":
            return PlainTextResponse(
                render(corpus),
                headers={"Content-Disposition": "attachment; filename=corpus.conll"},
            )
        return JSONResponse(
            render(corpus),
            headers={"Content-Disposition": "attachment; filename=corpus.squad.json"},
        )

    @app.post("/evaluate")
    async def post_evaluate(body: EvaluateBody):
        schema = load_schema_or_404(body.schema_id)
        if isinstance(body.validation_set, list):
            instances = []
            for index, record in enumerate(body.validation_set):
                try:
                    instances.append(
                        ValidationInstance(
                            utterance=record["utterance"],
                            gold={k: str(record[k.value]) for k in SLOT_ORDER},
                        )
                    )
                except KeyError as exc:
                    raise ApiError(
                        400,
                        "invalid_validation_set",
                        f"record {index} is missing key {exc}",
                    ) from None
            if not instances:
                raise ApiError(400, "invalid_validation_set", "empty validation set")
        else:
            set_name = body.validation_set or schema.name
            path = fixture_validation_path(set_name)
            if not path.exists():
                raise ApiError(
                    404, "unknown_validation_set", f"no validation set {set_name!r}"
                )
            instances = load_validation(path)
        engine = (
            EngineConfig.from_document(body.config) if body.config else config.engine
        )
        report = evaluate(
            instances, schema, vectors, engine, embeddings_name=embeddings_name
        )
        return report.to_document()

    return app
