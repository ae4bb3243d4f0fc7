"""Journal-backed persistence: conversations, label assignments, positions.

Each project owns one append-only journal of JSON records (one per line).
Every state change is a record; the in-memory index is a pure fold over the
journal, rebuilt on open. A torn trailing record (crash mid-write) is
discarded on replay, so reconstructed state always equals the state after
the last fully written record.

Writes are serialized per project; auto_rule selections are derived data and
are never journaled.
"""

from __future__ import annotations

import io
import csv
import json
import os
import shutil
import threading
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import rules
from .config import (
    CodeSetConfig,
    ProjectConfig,
    ValidationReport,
    detect_wizard_conflicts,
    parse_project,
    project_from_json,
    project_to_json,
    validate_code_set,
)
from .errors import (
    DuplicateIdError,
    FormatError,
    NotFoundError,
    UnknownProjectError,
    ValidationError,
    VersionConflictError,
)

SPEAKERS = ("human", "bot")

PROJECT_FILE = "project.json"
META_FILE = "meta.json"
JOURNAL_FILE = "journal.jsonl"

# expected_version sentinel: skip the optimistic check (server-initiated saves)
ANY_VERSION = object()


def now_ms() -> int:
    return int(time.time() * 1000)


@dataclass(frozen=True)
class Utterance:
    id: str
    speaker: str  # human | bot
    text: str
    index: int

    def to_json(self) -> dict:
        return {"id": self.id, "speaker": self.speaker, "text": self.text, "index": self.index}


@dataclass(frozen=True)
class Conversation:
    id: str
    utterances: tuple[Utterance, ...]
    created_at: int

    def utterance(self, utterance_id: str) -> Utterance | None:
        for utt in self.utterances:
            if utt.id == utterance_id:
                return utt
        return None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "created_at": self.created_at,
            "utterances": [u.to_json() for u in self.utterances],
        }


@dataclass(frozen=True)
class LabelAssignment:
    annotator_id: str
    conversation_id: str
    utterance_id: str | None  # None for conversation-scope labels
    category_id: str
    entry: rules.SelectionEntry
    saved_at: int
    version: int

    @property
    def example_id(self) -> str:
        if self.utterance_id is None:
            return self.conversation_id
        return f"{self.conversation_id}#{self.utterance_id}"


@dataclass(frozen=True)
class ResumePosition:
    annotator_id: str
    conversation_id: str
    utterance_id: str
    updated_at: int | None  # None when derived, not stored


@dataclass(frozen=True)
class ProgressSummary:
    """Completed units over total units; a unit is an (example, code set) pair.

    fraction is exact; with zero units it is 1 (every unit vacuously complete).
    """

    annotator_id: str
    labeled_units: int
    total_units: int
    fraction: Fraction
    per_conversation: tuple  # of (conversation-id, Fraction)


def _parse_transcript(document) -> list[Conversation]:
    """Validate the import format; raises FormatError (never partial output)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise FormatError(f"transcript is not valid JSON: {exc}") from exc
    if not isinstance(document, list):
        raise FormatError("transcript must be a JSON array of conversations")
    created = now_ms()
    out: list[Conversation] = []
    seen_conv = set()
    for i, conv in enumerate(document):
        where = f"conversation [{i}]"
        if not isinstance(conv, dict):
            raise FormatError(f"{where}: expected object")
        unknown = set(conv) - {"id", "utterances"}
        if unknown:
            raise FormatError(f"{where}: unknown field {sorted(unknown)[0]!r}")
        conv_id = conv.get("id")
        if not isinstance(conv_id, str) or not conv_id:
            raise FormatError(f"{where}: missing or empty id")
        if conv_id in seen_conv:
            raise DuplicateIdError(f"duplicate conversation id {conv_id!r} in transcript")
        seen_conv.add(conv_id)
        raw_utts = conv.get("utterances")
        if not isinstance(raw_utts, list) or not raw_utts:
            raise FormatError(f"{where}: utterances must be a non-empty array")
        utterances = []
        seen_utt = set()
        for index, raw in enumerate(raw_utts):
            uwhere = f"{where} utterance [{index}]"
            if not isinstance(raw, dict):
                raise FormatError(f"{uwhere}: expected object")
            unknown = set(raw) - {"id", "speaker", "text"}
            if unknown:
                raise FormatError(f"{uwhere}: unknown field {sorted(unknown)[0]!r}")
            speaker = raw.get("speaker")
            if speaker not in SPEAKERS:
                raise FormatError(f"{uwhere}: speaker must be one of {', '.join(SPEAKERS)}")
            text = raw.get("text")
            if not isinstance(text, str) or not text:
                raise FormatError(f"{uwhere}: text must be a non-empty string")
            utt_id = raw.get("id")
            if utt_id is None:
                utt_id = f"{conv_id}#{index}"
            if not isinstance(utt_id, str) or not utt_id:
                raise FormatError(f"{uwhere}: id must be a non-empty string")
            if utt_id in seen_utt:
                raise FormatError(f"{uwhere}: duplicate utterance id {utt_id!r}")
            seen_utt.add(utt_id)
            utterances.append(Utterance(id=utt_id, speaker=speaker, text=text, index=index))
        out.append(Conversation(id=conv_id, utterances=tuple(utterances), created_at=created))
    return out


class ProjectStore:
    """One project's configuration plus its journal-backed mutable state."""

    def __init__(self, directory: Path, project: ProjectConfig, created_by: str):
        self.directory = Path(directory)
        self.project = project
        self.created_by = created_by
        self._lock = threading.RLock()
        self._journal_path = self.directory / JOURNAL_FILE
        self._journal_handle = None
        # key = (annotator, conversation, utterance-or-None, category)
        self._live: dict[tuple, LabelAssignment] = {}
        self._versions: dict[tuple, int] = {}
        self._by_example: dict[tuple, dict[str, LabelAssignment]] = {}
        self._conversations: dict[str, Conversation] = {}
        self._resume: dict[str, tuple] = {}  # annotator -> (conv, utt-or-None, updated_at)
        self._seq = 0

    # -- lifecycle ----------------------------------------------------------

    @classmethod
    def open(cls, directory: Path) -> "ProjectStore":
        directory = Path(directory)
        project = project_from_json(
            json.loads((directory / PROJECT_FILE).read_text("utf-8"))
        )
        meta = json.loads((directory / META_FILE).read_text("utf-8"))
        store = cls(directory, project, meta.get("created_by", ""))
        store._replay()
        return store

    def close(self) -> None:
        with self._lock:
            if self._journal_handle is not None:
                self._journal_handle.close()
                self._journal_handle = None

    def _replay(self) -> None:
        if not self._journal_path.exists():
            return
        lines = self._journal_path.read_bytes().split(b"\n")
        if lines and lines[-1] == b"":
            lines.pop()
        last = len(lines) - 1
        for i, raw in enumerate(lines):
            try:
                record = self._parse_record(raw)
            except (ValueError, FormatError) as exc:
                if i == last:
                    break  # torn trailing record from a crash mid-write
                raise FormatError(f"journal corrupted at line {i + 1}: {exc}") from exc
            self._apply_record(record)
            self._seq = max(self._seq, record["seq"])

    def _parse_record(self, raw: bytes) -> dict:
        record = json.loads(raw.decode("utf-8"))
        if not isinstance(record, dict):
            raise ValueError("record must be an object")
        kind = record.get("kind")
        payload = record.get("payload")
        if kind not in ("assignment", "resume", "import"):
            raise ValueError(f"unknown record kind {kind!r}")
        if not isinstance(payload, dict) or not isinstance(record.get("seq"), int):
            raise ValueError("record missing payload or seq")
        if not isinstance(record.get("saved_at"), int):
            raise ValueError("record missing saved_at")
        if kind == "assignment":
            for field in ("annotator_id", "conversation_id", "category_id", "version"):
                if field not in payload:
                    raise ValueError(f"assignment record missing {field}")
            if payload["value"] is not None:
                rules.SelectionEntry.from_json(
                    {"value": payload["value"], "origin": payload.get("origin", rules.MANUAL)}
                )
        elif kind == "import":
            if not isinstance(payload.get("conversations"), list):
                raise ValueError("import record missing conversations")
        else:
            for field in ("annotator_id", "conversation_id"):
                if field not in payload:
                    raise ValueError(f"resume record missing {field}")
        return record

    def _apply_record(self, record: dict) -> None:
        kind, payload = record["kind"], record["payload"]
        if kind == "import":
            for conv in payload["conversations"]:
                self._conversations[conv["id"]] = Conversation(
                    id=conv["id"],
                    created_at=conv.get("created_at", record["saved_at"]),
                    utterances=tuple(
                        Utterance(
                            id=u["id"], speaker=u["speaker"], text=u["text"], index=u["index"]
                        )
                        for u in conv["utterances"]
                    ),
                )
            return
        annotator = payload["annotator_id"]
        conv_id = payload["conversation_id"]
        utt_id = payload.get("utterance_id")
        if kind == "resume":
            self._resume[annotator] = (conv_id, utt_id, record["saved_at"])
            return
        category = payload["category_id"]
        key = (annotator, conv_id, utt_id, category)
        example = (annotator, conv_id, utt_id)
        self._versions[key] = payload["version"]
        if payload["value"] is None:
            self._live.pop(key, None)
            bucket = self._by_example.get(example)
            if bucket is not None:
                bucket.pop(category, None)
                if not bucket:
                    self._by_example.pop(example, None)
        else:
            assignment = LabelAssignment(
                annotator_id=annotator,
                conversation_id=conv_id,
                utterance_id=utt_id,
                category_id=category,
                entry=rules.SelectionEntry(
                    value=rules.SelectedValue.from_json(payload["value"]),
                    origin=payload.get("origin", rules.MANUAL),
                ),
                saved_at=record["saved_at"],
                version=payload["version"],
            )
            self._live[key] = assignment
            self._by_example.setdefault(example, {})[category] = assignment
        self._resume[annotator] = (conv_id, utt_id, record["saved_at"])

    def _append(self, kind: str, payload: dict, saved_at: int) -> dict:
        """Write one journal record durably and fold it into the index."""
        self._seq += 1
        record = {"kind": kind, "payload": payload, "saved_at": saved_at, "seq": self._seq}
        if self._journal_handle is None:
            self._journal_handle = open(self._journal_path, "ab")
        line = json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n"
        self._journal_handle.write(line.encode("utf-8"))
        self._journal_handle.flush()
        os.fsync(self._journal_handle.fileno())
        self._apply_record(record)
        return record

    # -- ingestion ----------------------------------------------------------

    def import_conversations(self, document) -> int:
        """Add conversations atomically; on any error nothing is imported."""
        conversations = _parse_transcript(document)
        with self._lock:
            for conv in conversations:
                if conv.id in self._conversations:
                    raise DuplicateIdError(f"conversation id {conv.id!r} already imported")
            if conversations:
                payload = {"conversations": [c.to_json() for c in conversations]}
                self._append("import", payload, now_ms())
            return len(conversations)

    # -- labeling -----------------------------------------------------------

    def example_context(self, conversation_id: str, utterance_id: str | None):
        """Resolve an example to (conversation, utterance-or-None, code set, speaker)."""
        conv = self._conversations.get(conversation_id)
        if conv is None:
            raise NotFoundError(f"unknown conversation {conversation_id!r}")
        if utterance_id is None:
            code_set = self.project.code_set_for_scope("conversation")
            if code_set is None:
                raise NotFoundError("project has no conversation-scope code set")
            return conv, None, code_set, None
        utt = conv.utterance(utterance_id)
        if utt is None:
            raise NotFoundError(f"unknown utterance {utterance_id!r} in {conversation_id!r}")
        code_set = self.project.code_set_for_scope("utterance")
        if code_set is None:
            raise NotFoundError("project has no utterance-scope code set")
        return conv, utt, code_set, utt.speaker

    def _selections(self, annotator: str, conversation_id: str, utterance_id: str | None):
        bucket = self._by_example.get((annotator, conversation_id, utterance_id), {})
        return {category: a.entry for category, a in bucket.items()}

    def get_selection_set(
        self, annotator: str, conversation_id: str, utterance_id: str | None = None
    ) -> rules.SelectionSet:
        """Live persisted entries for one example (no derived auto_rule values)."""
        with self._lock:
            return self._selections(annotator, conversation_id, utterance_id)

    def live_versions(
        self, annotator: str, conversation_id: str, utterance_id: str | None = None
    ) -> dict:
        """Current version per category; what expected_version must match on overwrite."""
        with self._lock:
            bucket = self._by_example.get((annotator, conversation_id, utterance_id), {})
            return {category: a.version for category, a in bucket.items()}

    def save_assignment(
        self,
        annotator: str,
        conversation_id: str,
        utterance_id: str | None,
        category_id: str,
        value: rules.SelectedValue | None,
        selected: bool = True,
        origin: str = rules.MANUAL,
        expected_version: int | None = None,
    ):
        """Apply one labeling edit and journal it durably.

        value=None clears the category. Returns (new version, selection set,
        effective state); the selection set includes derived auto entries but
        only manual/auto_wizard entries are persisted.
        """
        with self._lock:
            _, _, code_set, speaker = self.example_context(conversation_id, utterance_id)
            key = (annotator, conversation_id, utterance_id, category_id)
            live = self._live.get(key)
            actual = live.version if live is not None else None
            if expected_version is not ANY_VERSION and expected_version != actual:
                raise VersionConflictError(expected_version, actual)

            selections = self._selections(annotator, conversation_id, utterance_id)
            if value is None:
                if live is None:
                    if code_set.category(category_id) is None:
                        raise NotFoundError(f"unknown category {category_id!r}")
                    new_sel, state = rules.cascade(
                        code_set, selections, speaker, code_set.scope
                    )
                else:
                    new_sel, state = rules.apply_selection(
                        code_set,
                        selections,
                        category_id,
                        live.entry.value,
                        False,
                        origin=origin,
                        speaker=speaker,
                        scope=code_set.scope,
                    )
            else:
                new_sel, state = rules.apply_selection(
                    code_set,
                    selections,
                    category_id,
                    value,
                    selected,
                    origin=origin,
                    speaker=speaker,
                    scope=code_set.scope,
                )

            old_persistent = rules.strip_derived(selections)
            new_persistent = rules.strip_derived(new_sel)
            saved_at = now_ms()
            version = self._versions.get(key, 0) + 1
            entry = new_persistent.get(category_id)
            self._append(
                "assignment",
                {
                    "annotator_id": annotator,
                    "conversation_id": conversation_id,
                    "utterance_id": utterance_id,
                    "category_id": category_id,
                    "value": entry.value.to_json() if entry is not None else None,
                    "origin": entry.origin if entry is not None else origin,
                    "version": version,
                },
                saved_at,
            )
            # rules may hide a category and clear its persisted selection
            for cleared in old_persistent:
                if cleared == category_id or cleared in new_persistent:
                    continue
                ckey = (annotator, conversation_id, utterance_id, cleared)
                self._append(
                    "assignment",
                    {
                        "annotator_id": annotator,
                        "conversation_id": conversation_id,
                        "utterance_id": utterance_id,
                        "category_id": cleared,
                        "value": None,
                        "origin": rules.MANUAL,
                        "version": self._versions.get(ckey, 0) + 1,
                    },
                    saved_at,
                )
            return version, new_sel, state

    # -- queries ------------------------------------------------------------

    def conversations(self) -> list[Conversation]:
        with self._lock:
            return list(self._conversations.values())

    def get_conversation(self, conversation_id: str) -> Conversation:
        with self._lock:
            conv = self._conversations.get(conversation_id)
            if conv is None:
                raise NotFoundError(f"unknown conversation {conversation_id!r}")
            return conv

    def live_assignments(self, annotator: str | None = None) -> list[LabelAssignment]:
        with self._lock:
            out = [
                a
                for a in self._live.values()
                if annotator is None or a.annotator_id == annotator
            ]
        out.sort(key=lambda a: (a.saved_at, a.version, a.example_id))
        return out

    def previous_labeled(
        self,
        annotator: str,
        category_id: str,
        option_id: str,
        exclude: tuple[str, str],
    ):
        """Most recent prior use of (category, option) by this annotator.

        Ties on saved_at break by version, then example id. Returns
        (Utterance, LabelAssignment) or None. Only utterance-scope labels
        participate; the excluded example is skipped.
        """
        code_set = self.project.code_set_for_scope("utterance")
        cat = code_set.category(category_id) if code_set is not None else None
        if cat is None:
            raise NotFoundError(f"unknown category {category_id!r}")
        if option_id not in cat.option_ids():
            raise NotFoundError(f"no option {option_id!r} in category {category_id!r}")
        best = None
        with self._lock:
            for a in self._live.values():
                if (
                    a.annotator_id != annotator
                    or a.utterance_id is None
                    or a.category_id != category_id
                    or option_id not in a.entry.value.options
                    or (a.conversation_id, a.utterance_id) == tuple(exclude)
                ):
                    continue
                rank = (a.saved_at, a.version, a.example_id)
                if best is None or rank > best[0]:
                    best = (rank, a)
            if best is None:
                return None
            assignment = best[1]
            conv = self._conversations[assignment.conversation_id]
            return conv.utterance(assignment.utterance_id), assignment

    def _units(self):
        """Every (conversation, utterance-or-None, code set) unit in document order."""
        ut_cs = self.project.code_set_for_scope("utterance")
        conv_cs = self.project.code_set_for_scope("conversation")
        for conv in self._conversations.values():
            if ut_cs is not None:
                for utt in conv.utterances:
                    yield conv, utt, ut_cs
            if conv_cs is not None:
                yield conv, None, conv_cs

    def _unit_complete(self, annotator: str, conv, utt, code_set: CodeSetConfig) -> bool:
        utt_id = utt.id if utt is not None else None
        selections = self._selections(annotator, conv.id, utt_id)
        speaker = utt.speaker if utt is not None else None
        return rules.check_complete(code_set, selections, speaker, code_set.scope)

    def progress(self, annotator: str) -> ProgressSummary:
        with self._lock:
            labeled = total = 0
            per_conv: dict[str, list[int]] = {}
            for conv, utt, code_set in self._units():
                counts = per_conv.setdefault(conv.id, [0, 0])
                counts[1] += 1
                total += 1
                if self._unit_complete(annotator, conv, utt, code_set):
                    counts[0] += 1
                    labeled += 1
        fraction = Fraction(labeled, total) if total else Fraction(1)
        per_conversation = tuple(
            (cid, Fraction(done, n) if n else Fraction(1)) for cid, (done, n) in per_conv.items()
        )
        return ProgressSummary(
            annotator_id=annotator,
            labeled_units=labeled,
            total_units=total,
            fraction=fraction,
            per_conversation=per_conversation,
        )

    def resume(self, annotator: str) -> ResumePosition | None:
        """Stored position, else the first incomplete unit, else the last unit."""
        with self._lock:
            stored = self._resume.get(annotator)
            if stored is not None:
                conv_id, utt_id, updated_at = stored
                conv = self._conversations.get(conv_id)
                if conv is not None:
                    if utt_id is None or conv.utterance(utt_id) is None:
                        utt_id = conv.utterances[0].id
                    return ResumePosition(annotator, conv_id, utt_id, updated_at)
            fallback = None
            for conv, utt, code_set in self._units():
                anchor = utt if utt is not None else conv.utterances[-1]
                fallback = ResumePosition(annotator, conv.id, anchor.id, None)
                if not self._unit_complete(annotator, conv, utt, code_set):
                    return fallback
            return fallback  # all complete: last unit; None with no data

    # -- export -------------------------------------------------------------

    def _effective_cells(self, annotator, conv, utt, code_set):
        utt_id = utt.id if utt is not None else None
        speaker = utt.speaker if utt is not None else None
        selections = self._selections(annotator, conv.id, utt_id)
        merged, _ = rules.cascade(code_set, selections, speaker, code_set.scope)
        cells = []
        for cat in code_set.categories:
            entry = merged.get(cat.id)
            if entry is None:
                cells.append("")
            elif cat.kind == "text":
                cells.append(entry.value.text or "")
            else:
                cells.append("|".join(entry.value.options))
        return cells

    def export_csv(self, annotator: str) -> tuple[str, str | None]:
        """RFC 4180 CSV of this annotator's effective labels.

        Returns (utterance rows, conversation rows or None). One row per
        utterance; label columns follow config order, empty when unlabeled.
        """
        ut_cs = self.project.code_set_for_scope("utterance")
        conv_cs = self.project.code_set_for_scope("conversation")
        with self._lock:
            main = io.StringIO()
            writer = csv.writer(main, lineterminator="\r\n")
            header = ["conversation_id", "utterance_index", "speaker", "text"]
            if ut_cs is not None:
                header += [c.id for c in ut_cs.categories]
            writer.writerow(header)
            for conv in self._conversations.values():
                for utt in conv.utterances:
                    row = [conv.id, utt.index, utt.speaker, utt.text]
                    if ut_cs is not None:
                        row += self._effective_cells(annotator, conv, utt, ut_cs)
                    writer.writerow(row)
            if conv_cs is None:
                return main.getvalue(), None
            second = io.StringIO()
            writer = csv.writer(second, lineterminator="\r\n")
            writer.writerow(["conversation_id"] + [c.id for c in conv_cs.categories])
            for conv in self._conversations.values():
                writer.writerow(
                    [conv.id] + self._effective_cells(annotator, conv, None, conv_cs)
                )
            return main.getvalue(), second.getvalue()

    # -- diagnostics --------------------------------------------------------

    def state_fingerprint(self) -> dict:
        """Canonical snapshot of all mutable state, for replay comparisons."""
        with self._lock:
            return {
                "conversations": {
                    cid: [u.to_json() for u in conv.utterances]
                    for cid, conv in self._conversations.items()
                },
                "live": {
                    "|".join(str(part) for part in key): [
                        a.entry.to_json(),
                        a.saved_at,
                        a.version,
                    ]
                    for key, a in sorted(self._live.items(), key=lambda kv: str(kv[0]))
                },
                "versions": {
                    "|".join(str(part) for part in key): v
                    for key, v in sorted(self._versions.items(), key=lambda kv: str(kv[0]))
                },
                "resume": dict(sorted(self._resume.items())),
            }


class DataStore:
    """Directory of projects; opens, creates, and caches ProjectStores."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._projects: dict[str, ProjectStore] = {}

    def _project_dir(self, project_id: str) -> Path:
        return self.root / "projects" / project_id

    def list_projects(self) -> list[str]:
        base = self.root / "projects"
        if not base.is_dir():
            return []
        return sorted(p.name for p in base.iterdir() if (p / PROJECT_FILE).is_file())

    def create_project(
        self, document, created_by: str, transcript=None
    ) -> ProjectStore:
        """Validate, persist, and (optionally) import the initial transcript.

        Creation is atomic: any validation or import failure leaves no trace
        on disk. Raises ValidationError (with report), DuplicateIdError,
        FormatError, or SchemaError.
        """
        if isinstance(document, ProjectConfig):
            project = document
        elif isinstance(document, (str, bytes)):
            project = parse_project(document)
        else:
            project = project_from_json(document)
        report = ValidationReport()
        for i, code_set in enumerate(project.code_sets):
            prefix = f"$.code_sets[{i}]"
            report.extend(validate_code_set(code_set, prefix))
            if report.ok:
                report.extend(detect_wizard_conflicts(code_set, prefix))
        if not report.ok:
            raise ValidationError("project configuration rejected", report=report)

        with self._lock:
            directory = self._project_dir(project.id)
            if project.id in self._projects or directory.exists():
                raise DuplicateIdError(f"project id {project.id!r} already exists")
            directory.mkdir(parents=True)
            store = ProjectStore(directory, project, created_by)
            try:
                if transcript is not None:
                    store.import_conversations(transcript)
                (directory / META_FILE).write_text(
                    json.dumps({"created_by": created_by, "created_at": now_ms()}),
                    "utf-8",
                )
                (directory / PROJECT_FILE).write_text(
                    json.dumps(project_to_json(project), ensure_ascii=False, indent=2),
                    "utf-8",
                )
            except Exception:
                store.close()
                shutil.rmtree(directory, ignore_errors=True)
                raise
            self._projects[project.id] = store
            return store

    def open_project(self, project_id: str) -> ProjectStore:
        with self._lock:
            store = self._projects.get(project_id)
            if store is not None:
                return store
            directory = self._project_dir(project_id)
            if not (directory / PROJECT_FILE).is_file():
                raise UnknownProjectError(project_id)
            store = ProjectStore.open(directory)
            self._projects[project_id] = store
            return store

    def close(self) -> None:
        with self._lock:
            for store in self._projects.values():
                store.close()
            self._projects.clear()
