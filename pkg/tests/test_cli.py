"""Command line behavior: validate, import, export, agreement, serve."""

from __future__ import annotations

import json
import socket
import subprocess
import sys
import time
import urllib.request

import pytest

from cal.cli import main
from cal.config import code_set_to_json
from cal.fixtures import demo_project_json, grice_code_set, sample_transcript_json
from cal.rules import SelectedValue
from cal.store import DataStore

from .conftest import code_set, make_project_json, rule, single


@pytest.fixture
def data_dir(tmp_path):
    return tmp_path / "data"


@pytest.fixture
def demo_dir(data_dir):
    data = DataStore(data_dir)
    store = data.create_project(
        demo_project_json(), created_by="alice", transcript=sample_transcript_json()
    )
    store.save_assignment(
        "alice", "conv-001", "conv-001#0", "relevance", SelectedValue.single("yes")
    )
    store.save_assignment(
        "bob", "conv-001", "conv-001#0", "relevance", SelectedValue.single("yes")
    )
    data.close()
    return data_dir


def run(args, data_dir=None):
    argv = []
    if data_dir is not None:
        argv += ["--data-dir", str(data_dir)]
    return main(argv + args)


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def test_validate_clean_code_set(tmp_path, capsys):
    path = tmp_path / "cs.json"
    path.write_text(json.dumps(code_set_to_json(grice_code_set())))
    assert run(["validate", str(path)]) == 0
    assert capsys.readouterr().out == ""


def test_validate_clean_project(tmp_path, capsys):
    path = tmp_path / "project.json"
    path.write_text(json.dumps(demo_project_json()))
    assert run(["validate", str(path)]) == 0
    assert capsys.readouterr().out == ""


def test_validate_reports_errors_and_fails(tmp_path, capsys):
    doc = code_set_to_json(code_set(categories=[single("a", ["x", "x"])]))
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert run(["validate", str(path)]) == 1
    out = capsys.readouterr().out
    assert out.startswith("ERROR $.categories[0].options[1].id:")


def test_validate_schema_error_becomes_report_line(tmp_path, capsys):
    doc = code_set_to_json(grice_code_set())
    doc["mystery"] = True
    path = tmp_path / "odd.json"
    path.write_text(json.dumps(doc))
    assert run(["validate", str(path)]) == 1
    assert "ERROR $.mystery:" in capsys.readouterr().out


def test_validate_warnings_do_not_fail(tmp_path, capsys):
    from cal.config import Outcome, Question, WizardFlow

    cfg = code_set(
        categories=[single("a", ["x"]), single("b", ["x", "y"])],
        rules=[
            rule("a", "x", [("disable_option", "b", "y")]),
            rule("a", "x", [("disable_option", "b", "y")], selected=False),
        ],
        wizards={
            "b": WizardFlow(
                category_id="b",
                root=Question(text="q?", yes=Outcome(option_id="y"), no=Outcome(option_id="x")),
            )
        },
    )
    path = tmp_path / "warn.json"
    path.write_text(json.dumps(code_set_to_json(cfg)))
    assert run(["validate", str(path)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("WARN ")
    assert "disabled in every reachable" in out


def test_validate_missing_file(tmp_path, capsys):
    assert run(["validate", str(tmp_path / "nope.json")]) == 1
    assert "ERROR $:" in capsys.readouterr().err


def test_validate_malformed_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{oops")
    assert run(["validate", str(path)]) == 1
    assert "ERROR $:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# import
# ---------------------------------------------------------------------------


def test_import_adds_conversations(demo_dir, tmp_path, capsys):
    extra = tmp_path / "extra.json"
    extra.write_text(
        '[{"id": "fresh", "utterances": [{"speaker": "human", "text": "hello"}]}]'
    )
    assert run(["import", "demo", str(extra)], demo_dir) == 0
    assert "imported 1 conversations into demo" in capsys.readouterr().out
    data = DataStore(demo_dir)
    assert data.open_project("demo").get_conversation("fresh") is not None
    data.close()


def test_import_duplicate_fails_cleanly(demo_dir, tmp_path, capsys):
    dup = tmp_path / "dup.json"
    dup.write_text(
        '[{"id": "conv-001", "utterances": [{"speaker": "human", "text": "again"}]}]'
    )
    assert run(["import", "demo", str(dup)], demo_dir) == 1
    assert "error:" in capsys.readouterr().err


def test_import_unknown_project(demo_dir, tmp_path, capsys):
    f = tmp_path / "x.json"
    f.write_text("[]")
    assert run(["import", "ghost", str(f)], demo_dir) == 1
    assert "error:" in capsys.readouterr().err


def test_import_missing_file(demo_dir, capsys):
    assert run(["import", "demo", "/no/such/file.json"], demo_dir) == 1
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def test_export_all_annotators(demo_dir, tmp_path, capsys):
    out = tmp_path / "exports"
    assert run(["export", "demo", "--out", str(out)], demo_dir) == 0
    alice = (out / "demo-alice.csv").read_bytes().decode("utf-8")
    bob = (out / "demo-bob.csv").read_bytes().decode("utf-8")
    assert alice.startswith("conversation_id,utterance_index,speaker,text,relevance")
    assert "\r\n" in alice
    assert "yes" in bob
    printed = capsys.readouterr().out
    assert "demo-alice.csv" in printed and "demo-bob.csv" in printed


def test_export_single_annotator_uses_plain_name(demo_dir, tmp_path):
    out = tmp_path / "exports"
    assert run(["export", "demo", "--annotator", "alice", "--out", str(out)], demo_dir) == 0
    assert (out / "demo.csv").is_file()
    assert not (out / "demo-alice.csv").exists()


def test_export_writes_conversation_csv_when_scoped(tmp_path):
    data_dir = tmp_path / "data"
    ut_cs = code_set(categories=[single("tone", ["good", "bad"])], cs_id="utt")
    conv_cs = code_set(
        categories=[single("overall", ["ok", "poor"])], cs_id="conv", scope="conversation"
    )
    data = DataStore(data_dir)
    data.create_project(
        make_project_json([ut_cs, conv_cs], project_id="scoped"),
        created_by="alice",
        transcript='[{"id": "c", "utterances": [{"speaker": "human", "text": "hi"}]}]',
    )
    data.close()
    out = tmp_path / "exports"
    assert run(["export", "scoped", "--annotator", "alice", "--out", str(out)]
               , data_dir) == 0
    assert (out / "scoped.csv").is_file()
    assert (out / "scoped-conversations.csv").read_text().startswith("conversation_id,overall")


# ---------------------------------------------------------------------------
# agreement
# ---------------------------------------------------------------------------


def test_agreement_prints_and_writes_json(demo_dir, tmp_path, capsys):
    out = tmp_path / "reports"
    assert run(["agreement", "demo", "--out", str(out)], demo_dir) == 0
    printed = capsys.readouterr().out
    assert "alice x bob" in printed
    assert "jaccard" in printed
    doc = json.loads((out / "agreement.json").read_text())
    assert doc["project_id"] == "demo"
    assert doc["pairs"][0]["per_category"][0]["category_id"] == "relevance"


def test_agreement_needs_two_annotators(tmp_path, capsys):
    data_dir = tmp_path / "data"
    data = DataStore(data_dir)
    doc = demo_project_json()
    doc["annotators"] = ["alice"]
    data.create_project(doc, created_by="alice")
    data.close()
    assert run(["agreement", "demo"], data_dir) == 1
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def test_serve_answers_health_checks(demo_dir):
    port = free_port()
    process = subprocess.Popen(
        [
            sys.executable,
            "-m",
            "cal",
            "--data-dir",
            str(demo_dir),
            "serve",
            "--port",
            str(port),
            "--static-dir",
            str(demo_dir / "no-static"),
        ],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    try:
        deadline = time.monotonic() + 10
        last_error = None
        while time.monotonic() < deadline:
            try:
                with urllib.request.urlopen(
                    f"http://127.0.0.1:{port}/healthz", timeout=1
                ) as response:
                    assert response.read() == b"ok"
                    break
            except OSError as exc:
                last_error = exc
                time.sleep(0.15)
        else:
            pytest.fail(f"server never came up: {last_error}")
        with urllib.request.urlopen(
            f"http://127.0.0.1:{port}/projects", timeout=2
        ) as response:
            assert json.loads(response.read()) == {"projects": ["demo"]}
    finally:
        process.terminate()
        process.wait(timeout=10)
