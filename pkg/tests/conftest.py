import json
from pathlib import Path

import pytest

from ginsign.signature import Signature, load_signature

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "ginsign" / "fixtures"


def fixture_path(*parts: str) -> Path:
    return FIXTURES.joinpath(*parts)


@pytest.fixture(scope="session")
def warehouse() -> Signature:
    return load_signature(fixture_path("signatures", "warehouse.json"))


@pytest.fixture(scope="session")
def search_and_rescue() -> Signature:
    return load_signature(fixture_path("signatures", "search_and_rescue.json"))


@pytest.fixture(scope="session")
def traffic_light() -> Signature:
    return load_signature(fixture_path("signatures", "traffic_light.json"))


@pytest.fixture(scope="session")
def pickup_toy() -> Signature:
    return load_signature(fixture_path("signatures", "pickup_toy.json"))


@pytest.fixture(scope="session")
def toy_lex() -> Signature:
    return load_signature(fixture_path("signatures", "toy_lex.json"))


@pytest.fixture(scope="session")
def warehouse_corpus_path() -> Path:
    return fixture_path("corpora", "warehouse_eval.jsonl")


@pytest.fixture(scope="session")
def synonym_corpus_path() -> Path:
    return fixture_path("corpora", "synonym_eval.jsonl")


@pytest.fixture(scope="session")
def warehouse_doc() -> dict:
    return json.loads(fixture_path("signatures", "warehouse.json").read_text())


@pytest.fixture(scope="session")
def pickup_doc() -> dict:
    return json.loads(fixture_path("signatures", "pickup_toy.json").read_text())
