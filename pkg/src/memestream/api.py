"""HTTP surface over the pipeline: derived data per theme, meme, and user,
graph downloads, and annotation intake.

Every error response carries a structured body {"code": ..., "message": ...}.
Meme values travel percent-encoded in paths; url-kind values are base64url
encoded (no padding) to dodge nested-encoding ambiguity.
"""

from __future__ import annotations

import base64
import binascii

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import analytics, annotations
from .engine import (
    Pipeline,
    cooccurrence_obj,
    meme_stats_obj,
    time_series_obj,
    user_stats_obj,
)
from .extraction import MEME_KINDS, URL, MemeKey, normalize_meme_value
from .ingest import format_timestamp, tweet_to_obj
from .storage import EXPORT_FORMATS, export_network

TWEET_LIMIT_CAP = 200

_CONTENT_TYPES = {
    "edgelist": "text/tab-separated-values; charset=utf-8",
    "graphml": "application/graphml+xml",
    "json": "application/json",
}

_EXPORT_EXTENSIONS = {"edgelist": "tsv", "graphml": "graphml", "json": "json"}


def _error(status: int, code: str, message: str, **extra) -> HTTPException:
    return HTTPException(status, detail={"code": code, "message": message, **extra})


def encode_meme_value(kind: str, value: str) -> str:
    """Path form of a meme value (inverse of _decode_meme_path)."""
    if kind == URL:
        return base64.urlsafe_b64encode(value.encode("utf-8")).decode("ascii").rstrip("=")
    return value


def _decode_meme_path(kind: str, value: str) -> MemeKey:
    if kind not in MEME_KINDS:
        raise _error(404, "unknown_meme_kind", f"no such meme kind: {kind}")
    if kind == URL:
        pad = "=" * (-len(value) % 4)
        try:
            value = base64.urlsafe_b64decode(value + pad).decode("utf-8")
        except (binascii.Error, UnicodeDecodeError):
            raise _error(400, "bad_meme_value", "url meme values must be base64url encoded")
    normalized = normalize_meme_value(kind, value)
    if not normalized:
        raise _error(404, "unknown_meme", f"{kind}:{value} is not tracked")
    return MemeKey(kind, normalized)


def create_app(pipeline: Pipeline, cors_origin: str | None = None) -> FastAPI:
    app = FastAPI(title="memestream", docs_url=None, redoc_url=None)

    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin],
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    @app.exception_handler(StarletteHTTPException)
    async def handle_http_error(request: Request, exc: StarletteHTTPException):
        detail = exc.detail
        if not isinstance(detail, dict):
            code = "not_found" if exc.status_code == 404 else "error"
            detail = {"code": code, "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "validation_error", "message": str(exc.errors()[:1])},
        )

    def get_network_or_404(key: MemeKey):
        try:
            return pipeline.get_network(key)
        except analytics.UnknownMeme:
            raise _error(404, "unknown_meme", f"{key} is not tracked")

    @app.get("/api/themes")
    def list_themes():
        with pipeline.lock:
            return [
                {
                    "name": t.name,
                    "description": t.description,
                    "meme_count": len(pipeline.theme_index.get(t.name, ())),
                }
                for t in pipeline.themes
            ]

    @app.get("/api/themes/{name}/memes")
    def theme_memes(name: str, sort: str = "tweets", limit: int = 50):
        sort_keys = {
            "tweets": lambda row: (-row[1][0], row[0]),
            "users": lambda row: (-row[1][1], row[0]),
            "recency": lambda row: (-row[1][2], row[0]),
        }
        if sort not in sort_keys:
            raise _error(400, "bad_sort_key", f"sort must be one of {sorted(sort_keys)}")
        if limit < 1:
            raise _error(400, "bad_limit", "limit must be >= 1")
        with pipeline.lock:
            if name not in pipeline.theme_index:
                raise _error(404, "unknown_theme", f"no theme named {name!r}")
            rows = [
                (key, pipeline.meme_summaries[key]) for key in pipeline.theme_index[name]
            ]
        rows.sort(key=sort_keys[sort])
        return [
            {
                "meme_key": {"kind": key.kind, "value": key.value},
                "path_value": encode_meme_value(key.kind, key.value),
                "n_tweets": row[0],
                "n_users": row[1],
                "last_seen": _ts(row[2]),
            }
            for key, row in rows[:limit]
        ]

    @app.get("/api/memes/{kind}/{value}")
    def meme_detail(kind: str, value: str):
        key = _decode_meme_path(kind, value)
        with pipeline.lock:
            net = get_network_or_404(key)
            stats = meme_stats_obj(analytics.meme_stats(net))
            summary = pipeline.annotation_store.summary(annotations.Target(meme=key))
            definition = pipeline.config.definitions.get(str(key))
        return {**stats, "annotations": summary, "definition": definition}

    @app.get("/api/memes/{kind}/{value}/network")
    def meme_network(kind: str, value: str, format: str = "json"):
        if format not in EXPORT_FORMATS:
            raise _error(400, "unknown_format", f"format must be one of {sorted(EXPORT_FORMATS)}")
        key = _decode_meme_path(kind, value)
        with pipeline.lock:
            net = get_network_or_404(key)
            data = export_network(net, format, pipeline.config.user_labels)
        filename = f"{key.kind}-{encode_meme_value(key.kind, key.value)}.{_EXPORT_EXTENSIONS[format]}"
        return Response(
            content=data,
            media_type=_CONTENT_TYPES[format],
            headers={"Content-Disposition": f'attachment; filename="{filename}"'},
        )

    @app.get("/api/memes/{kind}/{value}/timeseries")
    def meme_timeseries(kind: str, value: str, interval: str = "minute"):
        if interval not in analytics.INTERVALS:
            raise _error(
                400, "unknown_interval", f"interval must be one of {sorted(analytics.INTERVALS)}"
            )
        key = _decode_meme_path(kind, value)
        with pipeline.lock:
            net = get_network_or_404(key)
            return time_series_obj(analytics.time_series(net, interval))

    @app.get("/api/memes/{kind}/{value}/tweets")
    def meme_tweets(kind: str, value: str, limit: int = 50):
        if limit < 1:
            raise _error(400, "bad_limit", "limit must be >= 1")
        limit = min(limit, TWEET_LIMIT_CAP)
        key = _decode_meme_path(kind, value)
        with pipeline.lock:
            net = get_network_or_404(key)
            recents = list(net.recent)[-limit:][::-1]
            return {"meme_key": {"kind": key.kind, "value": key.value},
                    "tweets": [tweet_to_obj(t) for t in recents]}

    @app.get("/api/memes/{kind}/{value}/cooccurrence")
    def meme_cooccurrence(kind: str, value: str, k: int = 10):
        if k < 1:
            raise _error(400, "bad_k", "k must be >= 1")
        key = _decode_meme_path(kind, value)
        try:
            entries = pipeline.cooccurrence_top(key, k)
        except analytics.UnknownMeme:
            raise _error(404, "unknown_meme", f"{key} is not tracked")
        return [cooccurrence_obj(e) for e in entries]

    @app.get("/api/users/{user_id}")
    def user_detail(user_id: int):
        try:
            stats = pipeline.user_stats(user_id)
        except analytics.UnknownUser:
            raise _error(404, "unknown_user", f"user {user_id} has no tracked activity")
        obj = user_stats_obj(stats)
        with pipeline.lock:
            target = annotations.Target(user_id=user_id)
            obj["annotations"] = pipeline.annotation_store.summary(target)
        return obj

    @app.post("/api/annotations", status_code=201)
    def post_annotation(body: dict):
        annotator = body.get("annotator")
        if not isinstance(annotator, (str, int)) or annotator in ("", None):
            raise _error(400, "bad_annotator", "annotator must be a nonempty string or id")
        label = body.get("label")
        if label not in annotations.LABELS:
            raise _error(400, "invalid_label", f"label must be one of {list(annotations.LABELS)}")
        raw_target = body.get("target")
        if not isinstance(raw_target, str):
            raise _error(400, "malformed_target", "target must be a string like meme:hashtag:p2")
        target = annotations.parse_target(raw_target)
        if target is None:
            raise _error(400, "malformed_target", f"cannot parse target {raw_target!r}")
        with pipeline.lock:
            target, resolved = pipeline._resolve_target(target)
            record = pipeline.annotation_store.record(
                annotator=str(annotator),
                target=target,
                label=label,
                source=annotations.SOURCE_API,
                created_at=int(pipeline.config.now_fn()),
                resolved=resolved,
            )
        payload = _record_obj(record)
        if not resolved:
            return JSONResponse(
                status_code=422,
                content={
                    "code": "unresolved_target",
                    "message": "target does not refer to a tracked meme or user; stored with marker",
                    "annotation": payload,
                },
            )
        return payload

    return app


def _ts(value):
    return format_timestamp(value) if value is not None else None


def _record_obj(record: annotations.AnnotationRecord) -> dict:
    return {
        "id": record.id,
        "annotator": record.annotator,
        "target": annotations.format_target(record.target),
        "label": record.label,
        "source": record.source,
        "created_at": format_timestamp(record.created_at),
        "resolved": record.resolved,
        "repeat": record.repeat,
    }
