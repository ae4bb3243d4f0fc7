"""Shipped example data: the Grice code set and a small transcript."""

from __future__ import annotations

import json
from importlib import resources

from .config import CodeSetConfig, ProjectConfig, code_set_from_json, project_from_json


def _load(name: str):
    return json.loads(resources.files("cal.data").joinpath(name).read_text("utf-8"))


def grice_code_set_json() -> dict:
    return _load("grice_code_set.json")


def grice_code_set() -> CodeSetConfig:
    return code_set_from_json(grice_code_set_json())


def sample_transcript_json() -> list:
    return _load("sample_transcript.json")


def demo_project_json(
    project_id: str = "demo",
    annotators: tuple[str, ...] = ("alice", "bob"),
    data_ref: str = "sample_transcript.json",
) -> dict:
    return {
        "id": project_id,
        "name": "Chat quality demo",
        "annotators": list(annotators),
        "code_sets": [grice_code_set_json()],
        "data_ref": data_ref,
        "agreement_visibility": "all",
    }


def demo_project(**kwargs) -> ProjectConfig:
    return project_from_json(demo_project_json(**kwargs))
