"""End-to-end harness: dataset ingestion, grounding runs, metrics, reports.

A dataset is JSONL, one record per line::

    {"nl": "Eventually pick up the package from room A.",
     "lifted_nl": "Eventually prop_1.",
     "lifted_ltl": "F prop_1",
     "gold_grounding": {"prop_1": "pick_up(package1,roomA)"},
     "gold_grounded_ltl": "F (pick_up(package1,roomA))",   # optional
     "domain": "pickup_toy",
     "spans": {"prop_1": "pick up the package from room A"},  # optional
     "traces": [{"prefix": [], "loop": [["pick_up(package1,roomA)"]]}]}  # optional

Span text is recovered by aligning `nl` against `lifted_nl` when the
optional `spans` field is absent. Records are graded independently (and
possibly concurrently), then reduced in record order, so a report is
byte-identical for a given config at any worker count.
"""

from __future__ import annotations

import json
import os
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .equivalence import check_gle
from .errors import (
    GinsignError,
    IllTypedAtomError,
    SchemaError,
)
from .grounding import DEFAULT_SHARD_SIZE, GroundingDecision, LiftedAP, ground_ap
from .ltl import Formula, GroundingMap, Trace, apply_grounding, extract_atoms, parse_ltl, print_ltl
from .scoring import PAD_TOKEN, OracleScorer, SpanScorer, make_scorer
from .signature import GroundedAtom, Signature, build_prefix

PLACEHOLDER_SPLIT = re.compile(r"(prop_\d+)")
DEFAULT_BOOTSTRAP_SEED = 2024
DEFAULT_RESAMPLES = 1000


def _placeholder_order(ids: Iterable[str]) -> list[str]:
    return sorted(ids, key=lambda p: int(p.split("_")[1]))


def recover_spans(nl: str, lifted_nl: str) -> dict[str, str]:
    """Align the raw sentence with its lifted form to find each AP's span."""
    parts = PLACEHOLDER_SPLIT.split(lifted_nl)
    spans: dict[str, str] = {}
    pos = 0
    pending: str | None = None
    for part in parts:
        if PLACEHOLDER_SPLIT.fullmatch(part):
            if pending is not None:
                raise SchemaError(
                    f"placeholders {pending} and {part} are adjacent in lifted_nl; "
                    "spans cannot be recovered"
                )
            pending = part
            continue
        if not part:
            continue
        found = nl.find(part, pos)
        if found < 0:
            raise SchemaError(
                f"lifted_nl fragment {part!r} does not occur in nl after offset {pos}"
            )
        if pending is not None:
            spans[pending] = nl[pos:found].strip()
            pending = None
        pos = found + len(part)
    if pending is not None:
        spans[pending] = nl[pos:].strip()
    for placeholder, span in spans.items():
        if not span:
            raise SchemaError(f"recovered an empty span for {placeholder}")
    return spans


@dataclass(frozen=True)
class SpecRecord:
    index: int
    nl: str
    lifted_nl: str
    lifted_ltl: str
    lifted_formula: Formula
    gold_grounding: GroundingMap
    domain: str
    spans: Mapping[str, str]
    gold_grounded_ltl: str | None = None
    traces: tuple[Trace, ...] = ()

    @property
    def placeholders(self) -> list[str]:
        return _placeholder_order(extract_atoms(self.lifted_formula))

    def gold_atoms(self) -> list[GroundedAtom]:
        return [self.gold_grounding.mapping[p] for p in self.placeholders]

    def to_document(self) -> dict:
        doc: dict = {
            "nl": self.nl,
            "lifted_nl": self.lifted_nl,
            "lifted_ltl": self.lifted_ltl,
            "gold_grounding": self.gold_grounding.to_document(),
            "domain": self.domain,
            "spans": dict(self.spans),
        }
        if self.gold_grounded_ltl is not None:
            doc["gold_grounded_ltl"] = self.gold_grounded_ltl
        if self.traces:
            doc["traces"] = [t.to_document() for t in self.traces]
        return doc


def record_from_document(doc: Mapping, sig: Signature, index: int = 0) -> SpecRecord:
    for key in ("nl", "lifted_nl", "lifted_ltl", "gold_grounding", "domain"):
        if key not in doc:
            raise SchemaError(f"missing field {key!r}", index)
    if doc["domain"] != sig.name:
        raise SchemaError(
            f"record domain {doc['domain']!r} does not match signature {sig.name!r}",
            index,
        )
    try:
        formula = parse_ltl(doc["lifted_ltl"])
    except GinsignError as exc:
        raise SchemaError(f"bad lifted_ltl: {exc}", index) from exc
    try:
        gold = GroundingMap.from_document(doc["gold_grounding"], sig)
    except GinsignError as exc:
        raise IllTypedAtomError(f"record {index}: {exc}") from exc

    spans = doc.get("spans") or recover_spans(doc["nl"], doc["lifted_nl"])

    in_formula = set(extract_atoms(formula))
    in_nl = set(PLACEHOLDER_SPLIT.findall(doc["lifted_nl"]))
    in_map = set(doc["gold_grounding"])
    in_spans = set(spans)
    if not (in_formula == in_nl == in_map == in_spans):
        raise SchemaError(
            "placeholders disagree: "
            f"lifted_ltl={sorted(in_formula)}, lifted_nl={sorted(in_nl)}, "
            f"gold_grounding={sorted(in_map)}, spans={sorted(in_spans)}",
            index,
        )

    grounded_text = doc.get("gold_grounded_ltl")
    if grounded_text is not None:
        try:
            stated = parse_ltl(grounded_text)
        except GinsignError as exc:
            raise SchemaError(f"bad gold_grounded_ltl: {exc}", index) from exc
        derived = apply_grounding(formula, gold)
        if stated != derived:
            raise SchemaError(
                f"gold_grounded_ltl {print_ltl(stated)!r} does not equal the "
                f"grounding of lifted_ltl {print_ltl(derived)!r}",
                index,
            )
    traces = tuple(Trace.from_document(t) for t in doc.get("traces", []))
    return SpecRecord(
        index=index,
        nl=doc["nl"],
        lifted_nl=doc["lifted_nl"],
        lifted_ltl=doc["lifted_ltl"],
        lifted_formula=formula,
        gold_grounding=gold,
        domain=doc["domain"],
        spans=dict(spans),
        gold_grounded_ltl=grounded_text,
        traces=traces,
    )


def ingest_dataset(path: str | Path, sig: Signature) -> list[SpecRecord]:
    """Read and validate a JSONL dataset; errors carry the record index."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc}", lineno) from exc
            records.append(record_from_document(doc, sig, index=len(records)))
    return records


# ---------------------------------------------------------------------------
# Lifting and translation stubs
# ---------------------------------------------------------------------------

# Clause boundaries for extending a predicate trigger to its full AP span.
_CLAUSE_BREAKERS = frozenset(
    "then and or until unless before after while next eventually always never "
    "finally globally if".split()
)
_WORD = re.compile(r"[A-Za-z0-9_'-]+|[^\sA-Za-z0-9_'-]")


def _surface_forms(name: str) -> str:
    return re.sub(r"[_-]+", " ", name).lower()


@dataclass(frozen=True)
class LiftResult:
    lifted_nl: str
    spans: Mapping[str, str]  # placeholder -> original span text


def lift_template(
    nl: str, sig: Signature, synonyms: Mapping[str, str] | None = None
) -> LiftResult:
    """Deterministic gazetteer lifter: mark predicate mentions as placeholders.

    A predicate name (underscores read as spaces) or a synonym phrase
    triggers a span; the span extends rightward to the end of its clause so
    the AP keeps its argument mentions. Spans never overlap and are numbered
    left to right.
    """
    triggers: dict[str, str] = {}
    for p in sig.predicates:
        triggers[_surface_forms(p.name)] = p.name
    for phrase, element in (synonyms or {}).items():
        triggers[phrase.lower()] = element
    ordered = sorted(triggers, key=len, reverse=True)

    tokens = [(m.group(0), m.start(), m.end()) for m in _WORD.finditer(nl)]
    lowered = [t[0].lower() for t in tokens]

    matches: list[tuple[int, int]] = []  # token ranges [start, end)
    i = 0
    while i < len(tokens):
        hit = None
        for phrase in ordered:
            words = phrase.split()
            if lowered[i : i + len(words)] == words:
                hit = len(words)
                break
        if hit is None:
            i += 1
            continue
        # extend to the clause boundary: punctuation, a connective, or the
        # start of another trigger
        j = i + hit
        while j < len(tokens):
            word = lowered[j]
            if not word[0].isalnum() and word[0] not in "'-":
                break
            if word in _CLAUSE_BREAKERS:
                break
            if any(lowered[j : j + len(p.split())] == p.split() for p in ordered):
                break
            j += 1
        matches.append((i, j))
        i = j
    pieces = []
    spans = {}
    cursor = 0
    for number, (start, end) in enumerate(matches, start=1):
        span_begin = tokens[start][1]
        span_end = tokens[end - 1][2]
        placeholder = f"prop_{number}"
        pieces.append(nl[cursor:span_begin])
        pieces.append(placeholder)
        spans[placeholder] = nl[span_begin:span_end]
        cursor = span_end
    pieces.append(nl[cursor:])
    return LiftResult(lifted_nl="".join(pieces), spans=spans)


def translate_template(lifted_nl: str) -> Formula:
    """Keyword-template translation of a lifted sentence to a lifted formula.

    Deterministic stub standing in for a learned translator: `until`
    between two placeholders becomes U, a leading always/never becomes G,
    anything else becomes the nested reach pattern F(p1 & F(p2 & ...)).
    """
    placeholders = PLACEHOLDER_SPLIT.findall(lifted_nl)
    if not placeholders:
        raise SchemaError("lifted sentence contains no placeholders to translate")
    text = lifted_nl.lower()
    if " until " in text and len(placeholders) == 2:
        body = f"{placeholders[0]} U {placeholders[1]}"
        if text.lstrip().startswith("always"):
            body = f"G ({body})"
        return parse_ltl(body)
    if text.lstrip().startswith("always"):
        return parse_ltl("G (" + " & ".join(placeholders) + ")")
    if text.lstrip().startswith("never"):
        return parse_ltl("G (! (" + " | ".join(placeholders) + "))")
    nested = placeholders[-1]
    for p in reversed(placeholders[:-1]):
        nested = f"{p} & F ({nested})"
    return parse_ltl(f"F ({nested})")


# ---------------------------------------------------------------------------
# Splits
# ---------------------------------------------------------------------------

SPLIT_MODES = ("full", "intra-domain-OOD", "cross-domain-OOD")


@dataclass(frozen=True)
class SplitConfig:
    mode: str = "full"
    heldout_predicates: frozenset[str] = frozenset()
    heldout_constants: frozenset[str] = frozenset()
    heldout_domains: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.mode not in SPLIT_MODES:
            raise SchemaError(f"unknown split mode {self.mode!r}; pick from {SPLIT_MODES}")

    def validate_against(self, sig: Signature) -> None:
        predicates = {p.name for p in sig.predicates}
        constants = {c.name for c in sig.constants}
        missing = sorted(self.heldout_predicates - predicates) + sorted(
            self.heldout_constants - constants
        )
        if missing:
            raise SchemaError(
                f"holdout names not in signature {sig.name!r}: {', '.join(missing)}"
            )

    def touches_holdout(self, record: SpecRecord) -> bool:
        for atom in record.gold_atoms():
            if atom.predicate.name in self.heldout_predicates:
                return True
            if any(a.name in self.heldout_constants for a in atom.args):
                return True
        return False

    def eval_records(self, records: Sequence[SpecRecord]) -> list[SpecRecord]:
        if self.mode == "intra-domain-OOD":
            return [r for r in records if self.touches_holdout(r)]
        if self.mode == "cross-domain-OOD" and self.heldout_domains:
            return [r for r in records if r.domain in self.heldout_domains]
        return list(records)

    def training_records(self, records: Sequence[SpecRecord]) -> list[SpecRecord]:
        if self.mode == "intra-domain-OOD":
            return [r for r in records if not self.touches_holdout(r)]
        if self.mode == "cross-domain-OOD" and self.heldout_domains:
            return [r for r in records if r.domain not in self.heldout_domains]
        return list(records)

    def to_document(self) -> dict:
        return {
            "mode": self.mode,
            "heldout_predicates": sorted(self.heldout_predicates),
            "heldout_constants": sorted(self.heldout_constants),
            "heldout_domains": sorted(self.heldout_domains),
        }

    @classmethod
    def from_document(cls, doc: Mapping) -> "SplitConfig":
        return cls(
            mode=doc.get("mode", "full"),
            heldout_predicates=frozenset(doc.get("heldout_predicates", ())),
            heldout_constants=frozenset(doc.get("heldout_constants", ())),
            heldout_domains=frozenset(doc.get("heldout_domains", ())),
        )

    @classmethod
    def load(cls, path: str | Path) -> "SplitConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_document(json.load(fh))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def resolve_workers(workers: int | None = None) -> int:
    """Worker count for record grading; GINSIGN_WORKERS caps any request."""
    cap = None
    env = os.environ.get("GINSIGN_WORKERS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise SchemaError(f"GINSIGN_WORKERS must be an integer, got {env!r}")
        if cap < 1:
            raise SchemaError(f"GINSIGN_WORKERS must be at least 1, got {env!r}")
    if workers is not None:
        requested = max(1, workers)
        return min(requested, cap) if cap is not None else requested
    return cap if cap is not None else 1


def _oracle_for(record: SpecRecord) -> OracleScorer:
    answers: dict[str, set[str]] = {}
    for placeholder in record.placeholders:
        atom = record.gold_grounding.mapping[placeholder]
        labels = {atom.predicate.name} | {a.name for a in atom.args}
        answers.setdefault(record.spans[placeholder], set()).update(labels)
    return OracleScorer(answers)


def _grade_record(
    record: SpecRecord,
    sig: Signature,
    scorer: SpanScorer | str,
    k: int,
    m: int,
) -> dict:
    verdict: dict = {"index": record.index, "domain": record.domain, "error": None}
    try:
        active = _oracle_for(record) if scorer == "oracle" else scorer
        decisions: list[GroundingDecision] = []
        for placeholder in record.placeholders:
            ap = LiftedAP(
                placeholder_id=placeholder,
                span_text=record.spans[placeholder],
                context_text=record.lifted_nl,
            )
            decisions.append(ground_ap(ap, sig, active, m))
        gold_atoms = record.gold_atoms()
        pred_map = GroundingMap({d.placeholder_id: d.atom for d in decisions})
        gle = check_gle(
            record.lifted_formula, pred_map, record.lifted_formula,
            record.gold_grounding, k,
        )
        n = len(gold_atoms)
        verdict.update(
            predicted={d.placeholder_id: d.atom.canonical() for d in decisions},
            gold={p: a.canonical() for p, a in zip(record.placeholders, gold_atoms)},
            predicate_tp=sum(
                1 for d, g in zip(decisions, gold_atoms)
                if d.predicate.name == g.predicate.name
            ),
            atom_tp=sum(
                1 for d, g in zip(decisions, gold_atoms)
                if d.atom.canonical() == g.canonical()
            ),
            argument_tp=sum(
                sum(1 for a, b in zip(d.atom.args, g.args) if a == b)
                for d, g in zip(decisions, gold_atoms)
                if d.predicate.name == g.predicate.name
            ),
            predicted_arg_slots=sum(len(d.args) for d in decisions),
            gold_arg_slots=sum(len(g.args) for g in gold_atoms),
            ap_count=n,
            le=gle.lifted_equivalent,
            gle=gle.gle,
            ap_diff=sorted(gle.ap_diff),
            evaluation_count=sum(d.evaluation_count for d in decisions),
            rounds=sum(d.rounds for d in decisions),
        )
    except Exception as exc:  # record-level failures degrade to incorrect
        gold_atoms = record.gold_atoms()
        verdict.update(
            error=f"{type(exc).__name__}: {exc}",
            predicted={},
            gold={p: a.canonical() for p, a in zip(record.placeholders, gold_atoms)},
            predicate_tp=0,
            atom_tp=0,
            argument_tp=0,
            predicted_arg_slots=0,
            gold_arg_slots=sum(len(g.args) for g in gold_atoms),
            ap_count=len(gold_atoms),
            le=False,
            gle=False,
            ap_diff=[],
            evaluation_count=0,
            rounds=0,
        )
    return verdict


def _f1_from_counts(tp: int, n_pred: int, n_gold: int) -> float:
    if n_pred == 0 and n_gold == 0:
        return 1.0
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    return 2 * precision * recall / (precision + recall) if precision + recall else 0.0


_METRICS = {
    "predicate_f1": lambda v: _f1_from_counts(v["ptp"], v["n"], v["n"]),
    "argument_f1": lambda v: _f1_from_counts(v["atp"], v["ps"], v["gs"]),
    "atom_f1": lambda v: _f1_from_counts(v["xtp"], v["n"], v["n"]),
    "le_rate": lambda v: v["le"] / v["records"] if v["records"] else 1.0,
    "gle_rate": lambda v: v["gle"] / v["records"] if v["records"] else 1.0,
}


def _tally(verdicts: Sequence[Mapping]) -> dict:
    return {
        "ptp": sum(v["predicate_tp"] for v in verdicts),
        "atp": sum(v["argument_tp"] for v in verdicts),
        "xtp": sum(v["atom_tp"] for v in verdicts),
        "n": sum(v["ap_count"] for v in verdicts),
        "ps": sum(v["predicted_arg_slots"] for v in verdicts),
        "gs": sum(v["gold_arg_slots"] for v in verdicts),
        "le": sum(1 for v in verdicts if v["le"]),
        "gle": sum(1 for v in verdicts if v["gle"]),
        "records": len(verdicts),
    }


def _bootstrap(
    verdicts: Sequence[Mapping], seed: int, resamples: int
) -> dict[str, dict]:
    """Mean, bootstrap variance, and a 95% percentile interval per metric."""
    point = {name: fn(_tally(verdicts)) for name, fn in _METRICS.items()}
    out = {}
    if not verdicts or resamples <= 0:
        for name, value in point.items():
            out[name] = {
                "value": round(value, 6),
                "variance": 0.0,
                "ci95": [round(value, 6), round(value, 6)],
            }
        return out
    rng = random.Random(seed)
    samples: dict[str, list[float]] = {name: [] for name in _METRICS}
    n = len(verdicts)
    for _ in range(resamples):
        chosen = [verdicts[rng.randrange(n)] for _ in range(n)]
        tallied = _tally(chosen)
        for name, fn in _METRICS.items():
            samples[name].append(fn(tallied))
    for name, values in samples.items():
        values.sort()
        mean = sum(values) / len(values)
        variance = sum((v - mean) ** 2 for v in values) / len(values)
        lo = values[int(0.025 * (len(values) - 1))]
        hi = values[int(0.975 * (len(values) - 1))]
        out[name] = {
            "value": round(point[name], 6),
            "variance": round(variance, 8),
            "ci95": [round(lo, 6), round(hi, 6)],
        }
    return out


@dataclass(frozen=True)
class EvalReport:
    config: dict
    domains: dict
    records: list = field(default_factory=list)

    def to_document(self) -> dict:
        return {"config": self.config, "domains": self.domains, "records": self.records}


def run_eval(
    records: Sequence[SpecRecord],
    sig: Signature,
    scorer: SpanScorer | str,
    split: SplitConfig | None = None,
    k: int = 8,
    m: int = DEFAULT_SHARD_SIZE,
    workers: int | None = None,
    bootstrap_seed: int = DEFAULT_BOOTSTRAP_SEED,
    resamples: int = DEFAULT_RESAMPLES,
    scorer_id: str | None = None,
) -> EvalReport:
    """Ground every record, grade against gold, and aggregate per domain."""
    if isinstance(scorer, str) and scorer != "oracle":
        scorer_id = scorer_id or scorer
        scorer = make_scorer(scorer)
    split = split or SplitConfig()
    split.validate_against(sig)
    selected = split.eval_records(records)
    worker_count = resolve_workers(workers)

    def grade(record: SpecRecord) -> dict:
        return _grade_record(record, sig, scorer, k, m)

    if worker_count == 1 or len(selected) <= 1:
        verdicts = [grade(r) for r in selected]
    else:
        with ThreadPoolExecutor(max_workers=worker_count) as pool:
            verdicts = list(pool.map(grade, selected))

    by_domain: dict[str, list[dict]] = {}
    for v in verdicts:
        by_domain.setdefault(v["domain"], []).append(v)
    domains = {}
    for name in sorted(by_domain):
        group = by_domain[name]
        tally = _tally(group)
        domains[name] = {
            "metrics": _bootstrap(group, bootstrap_seed, resamples),
            "counts": {
                "records": tally["records"],
                "aps": tally["n"],
                "errors": sum(1 for v in group if v["error"]),
            },
            "scaling": {
                "evaluation_count_total": sum(v["evaluation_count"] for v in group),
                "rounds_total": sum(v["rounds"] for v in group),
            },
        }
    config = {
        "sig": sig.name,
        "scorer": scorer_id or (scorer if isinstance(scorer, str) else type(scorer).__name__),
        "k": k,
        "m": m,
        "split": split.to_document(),
        "records_total": len(records),
        "records_evaluated": len(selected),
        "confidence": {
            "method": "bootstrap-percentile",
            "resamples": resamples,
            "seed": bootstrap_seed,
        },
    }
    return EvalReport(config=config, domains=domains, records=verdicts)


def emit_report(report: EvalReport, format: str = "json") -> str:
    """Render a report; json is schema-stable, table is for humans."""
    doc = report.to_document()
    if format == "json":
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if format != "table":
        raise ValueError(f"unknown report format {format!r}")
    lines = []
    cfg = doc["config"]
    lines.append(
        f"scorer={cfg['scorer']}  k={cfg['k']}  m={cfg['m']}  "
        f"split={cfg['split']['mode']}  records={cfg['records_evaluated']}"
        f"/{cfg['records_total']}"
    )
    header = f"{'domain':<20} {'pred F1':>8} {'arg F1':>8} {'atom F1':>8} {'LE':>8} {'GLE':>8}"
    lines.append(header)
    lines.append("-" * len(header))
    for name, row in doc["domains"].items():
        metrics = row["metrics"]
        lines.append(
            f"{name:<20} "
            f"{metrics['predicate_f1']['value']:>8.3f} "
            f"{metrics['argument_f1']['value']:>8.3f} "
            f"{metrics['atom_f1']['value']:>8.3f} "
            f"{metrics['le_rate']['value']:>8.3f} "
            f"{metrics['gle_rate']['value']:>8.3f}"
        )
        ci = metrics["gle_rate"]["ci95"]
        lines.append(
            f"{'':<20} GLE 95% CI [{ci[0]:.3f}, {ci[1]:.3f}] "
            f"(bootstrap, {doc['config']['confidence']['resamples']} resamples)"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Training export
# ---------------------------------------------------------------------------


def _gold_in_window(
    pool: Sequence[str], gold: str, m: int, rng: random.Random
) -> tuple[list[str], int]:
    """A contiguous m-window of the pool containing gold, padded if short.

    The window start is chosen so the gold lands at a uniformly random
    in-window offset, subject to staying inside the list.
    """
    position = pool.index(gold)
    offset = rng.randrange(min(m, len(pool)))
    start = max(0, min(position - offset, len(pool) - m))
    window = list(pool[start : start + m])
    window += [PAD_TOKEN] * (m - len(window))
    return window, window.index(gold)


def export_training(
    records: Sequence[SpecRecord],
    sig: Signature,
    split: SplitConfig | None = None,
    m: int = DEFAULT_SHARD_SIZE,
    seed: int = 2024,
) -> list[dict]:
    """Gold-in training shards: one per decision a scorer would face.

    Held-out names never appear, either as gold or inside a window; records
    whose gold grounding touches the holdout are eval records and are
    skipped entirely.
    """
    split = split or SplitConfig()
    split.validate_against(sig)
    rng = random.Random(seed)
    shards: list[dict] = []
    predicate_pool = [
        p for p in build_prefix(sig, None) if p not in split.heldout_predicates
    ]
    constant_pools = {
        t.name: [
            c for c in build_prefix(sig, t.name) if c not in split.heldout_constants
        ]
        for t in sig.types
    }
    for record in split.training_records(records):
        if split.touches_holdout(record):
            continue
        for placeholder in record.placeholders:
            atom = record.gold_grounding.mapping[placeholder]
            span = record.spans[placeholder]
            window, gold_index = _gold_in_window(
                predicate_pool, atom.predicate.name, m, rng
            )
            shards.append(
                {
                    "task": "predicate",
                    "domain": record.domain,
                    "placeholder_id": placeholder,
                    "span_text": span,
                    "context_text": record.lifted_nl,
                    "predicate_hint": None,
                    "window": window,
                    "gold_index": gold_index,
                }
            )
            for slot, arg in enumerate(atom.args, start=1):
                pool = constant_pools[arg.ctype]
                window, gold_index = _gold_in_window(pool, arg.name, m, rng)
                shards.append(
                    {
                        "task": "argument",
                        "domain": record.domain,
                        "placeholder_id": placeholder,
                        "span_text": span,
                        "context_text": record.lifted_nl,
                        "predicate_hint": atom.predicate.name,
                        "window": window,
                        "gold_index": gold_index,
                    }
                )
    return shards


def write_shards(shards: Sequence[Mapping], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for shard in shards:
            fh.write(json.dumps(shard, sort_keys=True) + "\n")


def load_dataset_scorer(spec: str, timeout: float = 30.0) -> SpanScorer | str:
    """Scorer specs for eval runs; `oracle` defers to each record's gold."""
    if spec == "oracle":
        return "oracle"
    return make_scorer(spec, timeout=timeout)
