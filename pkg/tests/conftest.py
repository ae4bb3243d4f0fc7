"""Shared fixtures: tiny configs, temporary stores, API clients."""

from __future__ import annotations

import json

import pytest
from hypothesis import HealthCheck, settings

from cal.config import (
    Category,
    CodeSetConfig,
    DependencyRule,
    LabelOption,
    Outcome,
    ProjectConfig,
    Question,
    RuleEffect,
    RuleTrigger,
    WizardFlow,
)
from cal.fixtures import demo_project_json, grice_code_set, sample_transcript_json
from cal.store import DataStore

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def opt(oid: str, display: str | None = None) -> LabelOption:
    return LabelOption(id=oid, display=display or oid.replace("_", " ").title())


def single(cid: str, option_ids, **kw) -> Category:
    return Category(
        id=cid,
        name=cid.replace("_", " ").title(),
        kind="single",
        options=tuple(opt(o) for o in option_ids),
        **kw,
    )


def multi(cid: str, option_ids, **kw) -> Category:
    return Category(
        id=cid,
        name=cid.replace("_", " ").title(),
        kind="multi",
        options=tuple(opt(o) for o in option_ids),
        **kw,
    )


def text(cid: str, **kw) -> Category:
    return Category(id=cid, name=cid.title(), kind="text", options=(), **kw)


def rule(tcat, topt, effects, selected=True) -> DependencyRule:
    return DependencyRule(
        trigger=RuleTrigger(category_id=tcat, option_id=topt, selected=selected),
        effects=tuple(
            RuleEffect(kind=k, category_id=c, option_id=o) for k, c, o in effects
        ),
    )


def code_set(categories, rules=(), wizards=None, cs_id="cs", scope="utterance"):
    return CodeSetConfig(
        id=cs_id,
        name=cs_id,
        scope=scope,
        categories=tuple(categories),
        rules=tuple(rules),
        wizards=dict(wizards or {}),
    )


@pytest.fixture
def grice():
    return grice_code_set()


@pytest.fixture
def skip_cascade_cs():
    """Applicability gate: Not Applicable on the gate auto-selects Skip downstream."""
    return code_set(
        categories=[
            single("gate", ["applicable", "not_applicable"]),
            single("tone", ["good", "bad", "skip"]),
            single("clarity", ["clear", "vague", "skip"]),
        ],
        rules=[
            rule(
                "gate",
                "not_applicable",
                [
                    ("auto_select", "tone", "skip"),
                    ("auto_select", "clarity", "skip"),
                ],
            )
        ],
    )


@pytest.fixture
def tiny_transcript():
    return json.dumps(
        [
            {
                "id": "c1",
                "utterances": [
                    {"speaker": "human", "text": "hello there"},
                    {"speaker": "bot", "text": "hi, how can I help?"},
                ],
            },
            {
                "id": "c2",
                "utterances": [
                    {"speaker": "human", "text": "what time is it"},
                    {"speaker": "bot", "text": "it is noon"},
                ],
            },
        ]
    )


@pytest.fixture
def data_store(tmp_path):
    store = DataStore(tmp_path / "data")
    yield store
    store.close()


@pytest.fixture
def demo_store(data_store):
    """DataStore with the demo project created and the sample transcript imported."""
    project = demo_project_json()
    data_store.create_project(project, created_by="alice", transcript=sample_transcript_json())
    return data_store


def make_project_json(code_sets, project_id="proj", annotators=("alice", "bob"), **kw):
    from cal.config import code_set_to_json

    doc = {
        "id": project_id,
        "name": kw.pop("name", project_id),
        "annotators": list(annotators),
        "data_ref": kw.pop("data_ref", "inline"),
        "agreement_visibility": kw.pop("agreement_visibility", "all"),
        "code_sets": [code_set_to_json(cs) for cs in code_sets],
    }
    doc.update(kw)
    return json.dumps(doc)


@pytest.fixture
def api_client_factory(tmp_path):
    """Builds a TestClient over a fresh data dir; returns (client, data_dir)."""
    import httpx
    from fastapi.testclient import TestClient

    from cal.api import create_app

    made = []

    def build(static_dir=None, subdir="api-data"):
        data_dir = tmp_path / subdir
        app = create_app(data_dir, static_dir=static_dir)
        client = TestClient(app, raise_server_exceptions=False)
        made.append((client, app))
        return client, data_dir

    yield build
    for client, app in made:
        client.close()
        app.state.data.close()


def wizard_chain(depth: int, category_id="tone", option_id="good") -> WizardFlow:
    """A degenerate flow: `depth` questions in a row, every answer path ends
    at the same outcome."""
    node = Outcome(option_id=option_id)
    for i in range(depth, 0, -1):
        node = Question(text=f"question {i}?", yes=node, no=Outcome(option_id=option_id))
    return WizardFlow(category_id=category_id, root=node)


def full_tree(depth: int, option_ids) -> Question | Outcome:
    """Complete binary question tree; leaves cycle through option_ids."""
    counter = {"i": 0}

    def build(d):
        if d == 0:
            oid = option_ids[counter["i"] % len(option_ids)]
            counter["i"] += 1
            return Outcome(option_id=oid)
        return Question(text=f"depth {depth - d} q{counter['i']}?", yes=build(d - 1), no=build(d - 1))

    return build(depth)
