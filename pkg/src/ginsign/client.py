"""Clients over the service handlers: in-process or over HTTP.

The CLI talks to one of these, so every subcommand works identically
against the local library and against a running service.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import httpx

from .errors import TransportError
from .service import handlers
from .service.schemas import (
    ApBody,
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
    SplitBody,
    TranslateBody,
)


class LocalClient:
    """Calls handlers directly; no server required."""

    def health(self) -> dict:
        return handlers.handle_health()

    def validate(self, signature: Mapping) -> dict:
        return handlers.handle_validate(SignatureBody(signature=dict(signature)))

    def prefix(self, signature: Mapping, type_filter: str | None = None) -> dict:
        return handlers.handle_prefix(
            PrefixBody(signature=dict(signature), type_filter=type_filter)
        )

    def parse(self, formula: str) -> dict:
        return handlers.handle_parse(ParseBody(formula=formula))

    def eval_trace(self, formula: str, trace: Mapping, position: int = 0) -> dict:
        return handlers.handle_eval_trace(
            EvalTraceBody(formula=formula, trace=dict(trace), position=position)
        )

    def ground(
        self,
        signature: Mapping,
        aps: Sequence[Mapping],
        scorer: str = "lexical",
        m: int = 20,
    ) -> dict:
        return handlers.handle_ground(
            GroundBody(
                signature=dict(signature),
                aps=[ApBody(**ap) for ap in aps],
                scorer=scorer,
                m=m,
            )
        )

    def check_equiv(self, f1: str, f2: str, k: int = 8) -> dict:
        return handlers.handle_check_equiv(CheckEquivBody(f1=f1, f2=f2, k=k))

    def check_gle(
        self,
        pred_ltl: str,
        pred_map: Mapping[str, str],
        gold_ltl: str,
        gold_map: Mapping[str, str],
        k: int = 8,
        signature: Mapping | None = None,
    ) -> dict:
        return handlers.handle_check_gle(
            CheckGleBody(
                pred_ltl=pred_ltl,
                pred_map=dict(pred_map),
                gold_ltl=gold_ltl,
                gold_map=dict(gold_map),
                k=k,
                signature=dict(signature) if signature else None,
            )
        )

    def model_check(self, model: Mapping, formula: str, k: int = 8) -> dict:
        return handlers.handle_model_check(
            ModelCheckBody(model=dict(model), formula=formula, k=k)
        )

    def eval_dataset(
        self,
        signature: Mapping,
        records: Sequence[Mapping],
        scorer: str = "lexical",
        split: Mapping | None = None,
        k: int = 8,
        m: int = 20,
        workers: int | None = None,
        bootstrap_seed: int = 2024,
        resamples: int = 1000,
    ) -> dict:
        return handlers.handle_eval_dataset(
            EvalDatasetBody(
                signature=dict(signature),
                records=[dict(r) for r in records],
                scorer=scorer,
                split=SplitBody(**(dict(split) if split else {})),
                k=k,
                m=m,
                workers=workers,
                bootstrap_seed=bootstrap_seed,
                resamples=resamples,
            )
        )

    def translate(
        self, nl: str, signature: Mapping, synonyms: Mapping[str, str] | None = None
    ) -> dict:
        return handlers.handle_translate(
            TranslateBody(nl=nl, signature=dict(signature), synonyms=dict(synonyms or {}))
        )

    def export_training(
        self,
        signature: Mapping,
        records: Sequence[Mapping],
        split: Mapping | None = None,
        m: int = 20,
        seed: int = 2024,
    ) -> dict:
        return handlers.handle_export_training(
            ExportTrainingBody(
                signature=dict(signature),
                records=[dict(r) for r in records],
                split=SplitBody(**(dict(split) if split else {})),
                m=m,
                seed=seed,
            )
        )


class HttpClient:
    """Posts the same documents to a running service."""

    def __init__(self, url: str, timeout: float = 60.0):
        self.base = url.rstrip("/")
        self._client = httpx.Client(timeout=timeout)

    def _post(self, route: str, payload: Mapping) -> dict:
        try:
            response = self._client.post(f"{self.base}{route}", json=payload)
        except httpx.HTTPError as exc:
            raise TransportError(f"POST {route} failed: {exc}") from exc
        body = response.json()
        if response.status_code != 200:
            kind = body.get("kind", "error") if isinstance(body, dict) else "error"
            detail = body.get("error", response.text) if isinstance(body, dict) else response.text
            raise TransportError(f"{kind}: {detail}")
        return body

    def _get(self, route: str) -> dict:
        try:
            response = self._client.get(f"{self.base}{route}")
        except httpx.HTTPError as exc:
            raise TransportError(f"GET {route} failed: {exc}") from exc
        return response.json()

    def health(self) -> dict:
        return self._get("/health")

    def validate(self, signature: Mapping) -> dict:
        return self._post("/signature/validate", {"signature": dict(signature)})

    def prefix(self, signature: Mapping, type_filter: str | None = None) -> dict:
        return self._post(
            "/prefix", {"signature": dict(signature), "type_filter": type_filter}
        )

    def parse(self, formula: str) -> dict:
        return self._post("/parse", {"formula": formula})

    def eval_trace(self, formula: str, trace: Mapping, position: int = 0) -> dict:
        return self._post(
            "/eval-trace",
            {"formula": formula, "trace": dict(trace), "position": position},
        )

    def ground(
        self,
        signature: Mapping,
        aps: Sequence[Mapping],
        scorer: str = "lexical",
        m: int = 20,
    ) -> dict:
        return self._post(
            "/ground",
            {
                "signature": dict(signature),
                "aps": [dict(ap) for ap in aps],
                "scorer": scorer,
                "m": m,
            },
        )

    def check_equiv(self, f1: str, f2: str, k: int = 8) -> dict:
        return self._post("/check-equiv", {"f1": f1, "f2": f2, "k": k})

    def check_gle(
        self,
        pred_ltl: str,
        pred_map: Mapping[str, str],
        gold_ltl: str,
        gold_map: Mapping[str, str],
        k: int = 8,
        signature: Mapping | None = None,
    ) -> dict:
        return self._post(
            "/check-gle",
            {
                "pred_ltl": pred_ltl,
                "pred_map": dict(pred_map),
                "gold_ltl": gold_ltl,
                "gold_map": dict(gold_map),
                "k": k,
                "signature": dict(signature) if signature else None,
            },
        )

    def model_check(self, model: Mapping, formula: str, k: int = 8) -> dict:
        return self._post(
            "/model-check", {"model": dict(model), "formula": formula, "k": k}
        )

    def eval_dataset(
        self,
        signature: Mapping,
        records: Sequence[Mapping],
        scorer: str = "lexical",
        split: Mapping | None = None,
        k: int = 8,
        m: int = 20,
        workers: int | None = None,
        bootstrap_seed: int = 2024,
        resamples: int = 1000,
    ) -> dict:
        return self._post(
            "/eval",
            {
                "signature": dict(signature),
                "records": [dict(r) for r in records],
                "scorer": scorer,
                "split": dict(split) if split else {},
                "k": k,
                "m": m,
                "workers": workers,
                "bootstrap_seed": bootstrap_seed,
                "resamples": resamples,
            },
        )

    def translate(
        self, nl: str, signature: Mapping, synonyms: Mapping[str, str] | None = None
    ) -> dict:
        return self._post(
            "/translate",
            {"nl": nl, "signature": dict(signature), "synonyms": dict(synonyms or {})},
        )

    def export_training(
        self,
        signature: Mapping,
        records: Sequence[Mapping],
        split: Mapping | None = None,
        m: int = 20,
        seed: int = 2024,
    ) -> dict:
        return self._post(
            "/export-training",
            {
                "signature": dict(signature),
                "records": [dict(r) for r in records],
                "split": dict(split) if split else {},
                "m": m,
                "seed": seed,
            },
        )

    def close(self) -> None:
        self._client.close()


def make_client(url: str | None = None):
    return HttpClient(url) if url else LocalClient()
