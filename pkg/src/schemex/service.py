"""HTTP extraction service.

One immutable model per process, loaded before the app starts; requests never
mutate it, so any request ordering yields identical per-request responses.
Error bodies are ``{"error": <type>, ...}`` with the HTTP statuses:
400 schema problems, 413 oversized text, 422 context overflow, 500 otherwise.
"""
from __future__ import annotations

import logging
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .decode import RESULT_FORMAT_VERSION, run_schema
from .errors import ContextOverflow, ParseError, SchemaInvalid, SequenceTooLong
from .model import ExtractionModel
from .schema import schema_from_dict

log = logging.getLogger(__name__)

DEFAULT_MAX_TEXT_BYTES = 64 * 1024


def _error(status: int, kind: str, message: str, **extra: Any) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": kind, "message": message, **extra})


def create_app(
    model: ExtractionModel,
    model_id: str,
    max_text_bytes: int = DEFAULT_MAX_TEXT_BYTES,
    ui_dir: str | None = None,
) -> FastAPI:
    """App over an immutable model; ``ui_dir`` optionally mounts the playground."""
    app = FastAPI(title="schemex", docs_url=None, redoc_url=None)

    @app.get("/health")
    def health() -> dict[str, Any]:
        return {
            "status": "ok",
            "model_id": model_id,
            "format_version": RESULT_FORMAT_VERSION,
            "config": model.cfg.to_dict(),
        }

    @app.post("/extract")
    async def extract(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "ParseError", "request body is not valid JSON")
        if not isinstance(body, dict):
            return _error(400, "ParseError", "request body must be a JSON object")
        if "schema" not in body:
            return _error(400, "ParseError", "missing 'schema'")
        text = body.get("text")
        if not isinstance(text, str):
            return _error(400, "ParseError", "'text' must be a string")
        if len(text.encode("utf-8")) > max_text_bytes:
            return _error(413, "TextTooLarge", f"text exceeds {max_text_bytes} bytes")
        options = body.get("options") or {}
        if not isinstance(options, dict):
            return _error(400, "ParseError", "'options' must be an object")

        try:
            schema = schema_from_dict(body["schema"])
        except ParseError as exc:
            return _error(400, "ParseError", str(exc), line=exc.line, column=exc.column)
        except SchemaInvalid as exc:
            return _error(
                400,
                "SchemaInvalid",
                str(exc),
                violations=[{"path": v.path, "message": v.message} for v in exc.violations],
            )

        threshold = options.get("threshold", 0.5)
        max_len = options.get("max_len")
        try:
            result = run_schema(model, schema, text, threshold=threshold, max_len=max_len)
        except (ContextOverflow, SequenceTooLong) as exc:
            extra = {}
            if isinstance(exc, ContextOverflow):
                extra = {"needed": exc.needed, "max_len": exc.max_len}
            return _error(422, "ContextOverflow", str(exc), **extra)
        except ValueError as exc:
            return _error(400, "ParseError", str(exc))
        except Exception:  # pragma: no cover - defensive
            log.exception("extraction failed")
            return _error(500, "InternalError", "extraction failed")
        return result.to_dict()

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
