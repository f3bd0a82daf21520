"""FastAPI wiring: one route per handler plus the scorer wire binding."""

from __future__ import annotations

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse

from ..errors import (
    GinsignError,
    LtlSyntaxError,
    ProtocolViolationError,
    SchemaError,
    SignatureValidationError,
)
from ..scoring import make_scorer
from . import handlers
from .schemas import (
    CheckEquivBody,
    CheckGleBody,
    EvalDatasetBody,
    EvalTraceBody,
    ExportTrainingBody,
    GroundBody,
    ModelCheckBody,
    ParseBody,
    PrefixBody,
    SignatureBody,
    TranslateBody,
)


def create_app(scorer_spec: str = "lexical") -> FastAPI:
    """Build the service; `scorer_spec` backs the POST /score wire binding."""
    app = FastAPI(title="ginsign", version=handlers.handle_health()["version"])
    scorer = make_scorer(scorer_spec)

    @app.exception_handler(GinsignError)
    async def ginsign_error(request, exc: GinsignError):
        status = 400
        if isinstance(exc, (SignatureValidationError, SchemaError, LtlSyntaxError)):
            status = 422
        if isinstance(exc, ProtocolViolationError):
            status = 400
        return JSONResponse(
            status_code=status,
            content={"error": str(exc), "kind": type(exc).__name__},
        )

    @app.exception_handler(ValueError)
    async def value_error(request, exc: ValueError):
        return JSONResponse(
            status_code=422, content={"error": str(exc), "kind": "ValueError"}
        )

    @app.get("/health")
    def health():
        return handlers.handle_health()

    @app.post("/signature/validate")
    def validate(body: SignatureBody):
        return handlers.handle_validate(body)

    @app.post("/prefix")
    def prefix(body: PrefixBody):
        return handlers.handle_prefix(body)

    @app.post("/parse")
    def parse(body: ParseBody):
        return handlers.handle_parse(body)

    @app.post("/eval-trace")
    def eval_trace(body: EvalTraceBody):
        return handlers.handle_eval_trace(body)

    @app.post("/ground")
    def ground(body: GroundBody):
        return handlers.handle_ground(body)

    @app.post("/score")
    def score(payload: dict = Body(...)):
        return handlers.handle_score(payload, scorer)

    @app.post("/check-equiv")
    def check_equiv(body: CheckEquivBody):
        return handlers.handle_check_equiv(body)

    @app.post("/check-gle")
    def check_gle(body: CheckGleBody):
        return handlers.handle_check_gle(body)

    @app.post("/model-check")
    def model_check(body: ModelCheckBody):
        return handlers.handle_model_check(body)

    @app.post("/eval")
    def eval_dataset(body: EvalDatasetBody):
        return handlers.handle_eval_dataset(body)

    @app.post("/translate")
    def translate(body: TranslateBody):
        return handlers.handle_translate(body)

    @app.post("/export-training")
    def export_training(body: ExportTrainingBody):
        return handlers.handle_export_training(body)

    return app
