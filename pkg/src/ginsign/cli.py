"""Command-line interface; a thin client over the service handlers.

Every subcommand runs in process by default and against a remote service
when --url (or GINSIGN_URL) is set, exchanging the same JSON documents
either way.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .client import make_client
from .errors import GinsignError
from .pipeline import EvalReport, emit_report


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _read_jsonl(path: str) -> list[dict]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                docs.append(json.loads(line))
    return docs


def _json_or_file(value: str) -> dict:
    if value.lstrip().startswith("{"):
        return json.loads(value)
    return _read_json(value)


def _emit(doc) -> None:
    click.echo(json.dumps(doc, indent=2, sort_keys=True))


@click.group()
@click.option("--url", envvar="GINSIGN_URL", default=None, help="Remote service URL; default runs in process.")
@click.pass_context
def main(ctx, url):
    """Ground natural-language propositions into typed signatures and check LTL."""
    ctx.obj = make_client(url)


def _run(fn):
    try:
        return fn()
    except GinsignError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}")


@main.command()
@click.option("--sig", "sig_path", required=True, type=click.Path(exists=True))
@click.pass_obj
def validate(client, sig_path):
    """Validate a signature document and show its inventory."""
    _emit(_run(lambda: client.validate(_read_json(sig_path))))


@main.command()
@click.option("--sig", "sig_path", required=True, type=click.Path(exists=True))
@click.option("--type", "type_filter", default=None, help="Type name; omit for the predicate prefix.")
@click.pass_obj
def prefix(client, sig_path, type_filter):
    """Enumerate the candidate prefix: predicates, or constants of a type."""
    _emit(_run(lambda: client.prefix(_read_json(sig_path), type_filter)))


@main.command()
@click.argument("formula")
@click.pass_obj
def parse(client, formula):
    """Parse a formula and print its canonical form and atoms."""
    _emit(_run(lambda: client.parse(formula)))


@main.command()
@click.argument("formula", required=False)
@click.option("--trace", "trace_path", type=click.Path(exists=True), help="Trace file; switches to trace evaluation.")
@click.option("--position", default=0, show_default=True)
@click.option("--sig", "sig_path", type=click.Path(exists=True), help="Signature for dataset evaluation.")
@click.option("--data", "data_path", type=click.Path(exists=True), help="JSONL dataset for dataset evaluation.")
@click.option("--scorer", default="lexical", show_default=True)
@click.option("--split", "split_path", type=click.Path(exists=True), help="Split config JSON.")
@click.option("--k", default=8, show_default=True)
@click.option("--m", default=20, show_default=True)
@click.option("--workers", default=None, type=int, help="Overrides GINSIGN_WORKERS.")
@click.option("--out", "out_path", type=click.Path(), help="Write the report here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json", show_default=True)
@click.pass_obj
def eval(client, formula, trace_path, position, sig_path, data_path, scorer,
         split_path, k, m, workers, out_path, fmt):
    """Evaluate a formula on a trace, or run a dataset evaluation.

    Trace mode: ginsign eval --trace t.json "F p". Dataset mode:
    ginsign eval --sig s.json --data d.jsonl --scorer lexical --out report.json
    """
    if trace_path:
        if not formula:
            raise click.UsageError("trace mode needs a formula argument")
        _emit(_run(lambda: client.eval_trace(formula, _read_json(trace_path), position)))
        return
    if not (sig_path and data_path):
        raise click.UsageError("dataset mode needs --sig and --data (or pass --trace)")
    split = _read_json(split_path) if split_path else None
    doc = _run(
        lambda: client.eval_dataset(
            _read_json(sig_path),
            _read_jsonl(data_path),
            scorer=scorer,
            split=split,
            k=k,
            m=m,
            workers=workers,
        )
    )
    report = EvalReport(config=doc["config"], domains=doc["domains"], records=doc["records"])
    rendered = emit_report(report, fmt)
    if out_path:
        Path(out_path).write_text(rendered, encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(rendered, nl=False)


@main.command()
@click.option("--sig", "sig_path", required=True, type=click.Path(exists=True))
@click.option("--scorer", default="lexical", show_default=True, help="lexical | external:<cmd> | http:<url> | oracle:<answers.json>")
@click.option("--m", default=20, show_default=True)
@click.option("--input", "input_path", type=click.Path(exists=True), help="Lifted APs, one per line or JSONL; default stdin.")
@click.pass_obj
def ground(client, sig_path, scorer, m, input_path):
    """Ground lifted APs; emits one grounding decision per line."""
    raw = Path(input_path).read_text(encoding="utf-8") if input_path else sys.stdin.read()
    aps = []
    for i, line in enumerate(filter(None, (l.strip() for l in raw.splitlines())), start=1):
        if line.startswith("{"):
            doc = json.loads(line)
        else:
            doc = {"span_text": line}
        doc.setdefault("placeholder_id", f"prop_{i}")
        aps.append(doc)
    result = _run(lambda: client.ground(_read_json(sig_path), aps, scorer=scorer, m=m))
    for decision in result["decisions"]:
        click.echo(json.dumps(decision, sort_keys=True))


@main.command("check-equiv")
@click.option("--k", default=8, show_default=True)
@click.argument("f1")
@click.argument("f2")
@click.pass_obj
def check_equiv(client, k, f1, f2):
    """Bounded equivalence of two formulas; prints witness when refuted."""
    _emit(_run(lambda: client.check_equiv(f1, f2, k)))


@main.command("check-gle")
@click.option("--pred-ltl", required=True)
@click.option("--pred-map", required=True, help="Grounding map: JSON file or inline JSON.")
@click.option("--gold-ltl", required=True)
@click.option("--gold-map", required=True, help="Grounding map: JSON file or inline JSON.")
@click.option("--sig", "sig_path", type=click.Path(exists=True), help="Type-check map atoms against this signature.")
@click.option("--k", default=8, show_default=True)
@click.pass_obj
def check_gle(client, pred_ltl, pred_map, gold_ltl, gold_map, sig_path, k):
    """Grounded logical equivalence of predicted vs gold formula + grounding."""
    _emit(
        _run(
            lambda: client.check_gle(
                pred_ltl,
                _json_or_file(pred_map),
                gold_ltl,
                _json_or_file(gold_map),
                k=k,
                signature=_read_json(sig_path) if sig_path else None,
            )
        )
    )


@main.command("model-check")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--k", default=8, show_default=True)
@click.argument("formula")
@click.pass_obj
def model_check(client, model_path, k, formula):
    """Check a grounded formula on every lasso of a labeled state machine."""
    _emit(_run(lambda: client.model_check(_read_json(model_path), formula, k)))


@main.command()
@click.option("--sig", "sig_path", required=True, type=click.Path(exists=True))
@click.option("--synonyms", "synonyms_path", type=click.Path(exists=True), help="JSON: phrase -> predicate name.")
@click.argument("nl")
@click.pass_obj
def translate(client, sig_path, synonyms_path, nl):
    """Lift a sentence with the gazetteer stub and template-translate it."""
    synonyms = _read_json(synonyms_path) if synonyms_path else {}
    _emit(_run(lambda: client.translate(nl, _read_json(sig_path), synonyms)))


@main.command("export-training")
@click.option("--sig", "sig_path", required=True, type=click.Path(exists=True))
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--split", "split_path", type=click.Path(exists=True))
@click.option("--m", default=20, show_default=True)
@click.option("--seed", default=2024, show_default=True)
@click.option("--out", "out_path", type=click.Path(), help="Shard JSONL path; default stdout.")
@click.pass_obj
def export_training(client, sig_path, data_path, split_path, m, seed, out_path):
    """Emit gold-in training shards for the learned scorer."""
    split = _read_json(split_path) if split_path else None
    result = _run(
        lambda: client.export_training(
            _read_json(sig_path), _read_jsonl(data_path), split=split, m=m, seed=seed
        )
    )
    lines = [json.dumps(shard, sort_keys=True) for shard in result["shards"]]
    if out_path:
        Path(out_path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
        click.echo(f"wrote {len(lines)} shards to {out_path}")
    else:
        for line in lines:
            click.echo(line)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8077, show_default=True)
@click.option("--scorer", default="lexical", show_default=True, help="Backs POST /score.")
def serve(host, port, scorer):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(scorer), host=host, port=port)


if __name__ == "__main__":
    main()
