"""Request and response bodies for the service endpoints.

Every handler consumes one of these models and returns a plain JSON-able
dict, so the CLI can call handlers in process and a remote client can post
the same documents over HTTP without translation.
"""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class SignatureBody(BaseModel):
    """A signature document: {"name": ..., "types": {...}, "predicates": {...}}."""

    signature: dict


class PrefixBody(BaseModel):
    signature: dict
    type_filter: Optional[str] = None


class ParseBody(BaseModel):
    formula: str


class EvalTraceBody(BaseModel):
    formula: str
    trace: dict
    position: int = 0


class ApBody(BaseModel):
    placeholder_id: str
    span_text: str
    context_text: Optional[str] = None


class GroundBody(BaseModel):
    signature: dict
    aps: list[ApBody]
    scorer: str = "lexical"
    m: int = 20


class CheckEquivBody(BaseModel):
    f1: str
    f2: str
    k: int = 8


class CheckGleBody(BaseModel):
    pred_ltl: str
    pred_map: dict[str, str]
    gold_ltl: str
    gold_map: dict[str, str]
    k: int = 8
    signature: Optional[dict] = None  # when present, atoms must type-check


class ModelCheckBody(BaseModel):
    model: dict
    formula: str
    k: int = 8


class SplitBody(BaseModel):
    mode: str = "full"
    heldout_predicates: list[str] = Field(default_factory=list)
    heldout_constants: list[str] = Field(default_factory=list)
    heldout_domains: list[str] = Field(default_factory=list)


class EvalDatasetBody(BaseModel):
    signature: dict
    records: list[dict]
    scorer: str = "lexical"
    split: SplitBody = Field(default_factory=SplitBody)
    k: int = 8
    m: int = 20
    workers: Optional[int] = None
    bootstrap_seed: int = 2024
    resamples: int = 1000


class TranslateBody(BaseModel):
    nl: str
    signature: dict
    synonyms: dict[str, str] = Field(default_factory=dict)


class ExportTrainingBody(BaseModel):
    signature: dict
    records: list[dict]
    split: SplitBody = Field(default_factory=SplitBody)
    m: int = 20
    seed: int = 2024


class ErrorBody(BaseModel):
    error: str
    kind: str
    detail: Optional[Any] = None
