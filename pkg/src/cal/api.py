"""HTTP surface: JSON API for the labeling UI plus static file serving.

Identity is the trusted `X-Annotator-Id` header (query parameter `annotator`
as a fallback for plain links); membership and agreement visibility are
enforced here, nowhere else. Every package error maps to exactly one
(HTTP status, machine code) pair and errors share the envelope
{code, message, path?}.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from . import metrics, rules, wizard
from .config import code_set_to_json, project_from_json
from .errors import (
    AtRootError,
    CalError,
    ContradictionError,
    DisabledOptionError,
    DuplicateIdError,
    FinishedSessionError,
    FormatError,
    HiddenCategoryError,
    KindError,
    NoWizardError,
    NotAMemberError,
    NotFoundError,
    SchemaError,
    SessionExpiredError,
    TooFewAnnotatorsError,
    UnknownProjectError,
    ValidationError,
    VersionConflictError,
)
from .store import ANY_VERSION, DataStore, ProjectStore

# every module error maps to exactly one (status, code) pair
ERROR_MAP: list[tuple[type, int, str]] = [
    (SchemaError, 400, "SCHEMA_ERROR"),
    (ValidationError, 400, "SCHEMA_ERROR"),
    (FormatError, 400, "FORMAT_ERROR"),
    (NotAMemberError, 403, "NOT_A_MEMBER"),
    (NoWizardError, 404, "NO_WIZARD"),
    (UnknownProjectError, 404, "UNKNOWN_PROJECT"),
    (NotFoundError, 404, "NOT_FOUND"),
    (DuplicateIdError, 409, "DUPLICATE_ID"),
    (VersionConflictError, 409, "VERSION_CONFLICT"),
    (FinishedSessionError, 409, "FINISHED"),
    (AtRootError, 409, "AT_ROOT"),
    (SessionExpiredError, 410, "SESSION_EXPIRED"),
    (DisabledOptionError, 422, "DISABLED_OPTION"),
    (HiddenCategoryError, 422, "HIDDEN_CATEGORY"),
    (KindError, 422, "KIND_ERROR"),
    (TooFewAnnotatorsError, 422, "TOO_FEW_ANNOTATORS"),
    (ContradictionError, 500, "CONTRADICTION"),
]


def _error_response(exc: CalError) -> JSONResponse:
    for klass, status, code in ERROR_MAP:
        if isinstance(exc, klass):
            body = {"code": code, "message": str(exc)}
            path = getattr(exc, "path", None)
            if path is not None:
                body["path"] = path
            if isinstance(exc, ValidationError) and exc.report is not None:
                body["findings"] = [
                    {"level": "error", "path": p, "message": m} for p, m in exc.report.errors
                ] + [
                    {"level": "warning", "path": p, "message": m}
                    for p, m in exc.report.warnings
                ]
            if isinstance(exc, VersionConflictError):
                body["expected"] = exc.expected
                body["actual"] = exc.actual
            return JSONResponse(status_code=status, content=body)
    return JSONResponse(
        status_code=500, content={"code": "INTERNAL", "message": str(exc)}
    )


async def _body(request: Request) -> dict:
    try:
        data = json.loads(await request.body())
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"request body is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("$", "request body must be a JSON object")
    return data


def _identity(request: Request) -> str:
    annotator = request.headers.get("x-annotator-id") or request.query_params.get("annotator")
    if not annotator:
        raise NotAMemberError("(no identity given)")
    return annotator


def _membership(store: ProjectStore, annotator: str) -> str:
    """Returns the caller's role; rejects non-members."""
    if annotator == store.created_by:
        return "creator"
    if annotator in store.project.annotators:
        return "annotator"
    raise NotAMemberError(annotator)


def _pairs_json(pairs) -> list:
    return sorted([c, o] for c, o in pairs)


def state_to_json(state: rules.EffectiveLabelState) -> dict:
    return {
        "visible_categories": list(state.visible_categories),
        "hidden_categories": sorted(state.hidden_categories),
        "disabled_options": _pairs_json(state.disabled_options),
        "auto_selected": _pairs_json(state.auto_selected),
        "complete": state.complete,
    }


def selections_to_json(selections: rules.SelectionSet) -> dict:
    return {cid: entry.to_json() for cid, entry in selections.items()}


def _fraction_json(fraction) -> dict:
    return {
        "fraction": [fraction.numerator, fraction.denominator],
        "percent": metrics.render_percent(fraction),
    }


def create_app(data_dir, static_dir=None) -> FastAPI:
    """Build the service around one data directory."""
    app = FastAPI(title="conversation labeling service", docs_url=None, redoc_url=None)
    data = DataStore(Path(data_dir))
    wizards = wizard.SessionManager()
    app.state.data = data
    app.state.wizards = wizards

    @app.exception_handler(CalError)
    async def _cal_error(request: Request, exc: CalError):
        return _error_response(exc)

    @app.get("/healthz")
    async def healthz():
        return PlainTextResponse("ok")

    @app.get("/projects")
    async def list_projects():
        return {"projects": data.list_projects()}

    @app.post("/projects", status_code=201)
    async def create_project(request: Request):
        annotator = _identity(request)
        document = await _body(request)
        project = project_from_json(document)
        ref = Path(project.data_ref)
        if ref.is_absolute() or ".." in ref.parts:
            raise SchemaError("$.data_ref", "must be a plain path inside the data directory")
        transcript_path = Path(data_dir) / ref
        if not transcript_path.is_file():
            raise SchemaError("$.data_ref", f"transcript file {project.data_ref!r} not found")
        store = data.create_project(
            project, created_by=annotator, transcript=transcript_path.read_text("utf-8")
        )
        return {"id": store.project.id}

    @app.get("/projects/{project_id}")
    async def project_info(project_id: str, request: Request):
        store = data.open_project(project_id)
        annotator = _identity(request)
        role = _membership(store, annotator)
        return {
            "id": store.project.id,
            "name": store.project.name,
            "annotators": list(store.project.annotators),
            "role": role,
            "code_sets": [code_set_to_json(cs) for cs in store.project.code_sets],
            "conversation_ids": [c.id for c in store.conversations()],
        }

    @app.get("/projects/{project_id}/conversations")
    async def list_conversations(project_id: str, request: Request):
        store = data.open_project(project_id)
        annotator = _identity(request)
        _membership(store, annotator)
        out = []
        for conv in store.conversations():
            out.append({"id": conv.id, "utterance_count": len(conv.utterances)})
        return {"conversations": out}

    @app.get("/projects/{project_id}/conversations/{conversation_id}")
    async def labeling_view(project_id: str, conversation_id: str, request: Request):
        store = data.open_project(project_id)
        annotator = _identity(request)
        _membership(store, annotator)
        conv = store.get_conversation(conversation_id)
        ut_cs = store.project.code_set_for_scope("utterance")
        conv_cs = store.project.code_set_for_scope("conversation")
        utterances = []
        for utt in conv.utterances:
            selections = store.get_selection_set(annotator, conv.id, utt.id)
            merged, state = rules.cascade(ut_cs, selections, utt.speaker, "utterance")
            utterances.append(
                {
                    **utt.to_json(),
                    "selections": selections_to_json(merged),
                    "versions": store.live_versions(annotator, conv.id, utt.id),
                    "state": state_to_json(state),
                    "complete": state.complete,
                }
            )
        body = {
            "conversation": {"id": conv.id, "created_at": conv.created_at},
            "code_set": code_set_to_json(ut_cs),
            "conversation_code_set": code_set_to_json(conv_cs) if conv_cs else None,
            "utterances": utterances,
        }
        if conv_cs is not None:
            selections = store.get_selection_set(annotator, conv.id, None)
            merged, state = rules.cascade(conv_cs, selections, None, "conversation")
            body["conversation_labels"] = {
                "selections": selections_to_json(merged),
                "versions": store.live_versions(annotator, conv.id, None),
                "state": state_to_json(state),
                "complete": state.complete,
            }
        return body

    @app.put("/projects/{project_id}/labels")
    async def put_label(project_id: str, request: Request):
        store = data.open_project(project_id)
        annotator = _identity(request)
        _membership(store, annotator)
        body = await _body(request)
        for field in ("conversation_id", "category_id"):
            if not isinstance(body.get(field), str):
                raise SchemaError(f"$.{field}", "missing required field")
        raw_value = body.get("value")
        value = None if raw_value is None else rules.SelectedValue.from_json(raw_value)
        expected = body.get("expected_version")
        if expected is not None and not isinstance(expected, int):
            raise SchemaError("$.expected_version", "expected integer or null")
        selected = body.get("selected", True)
        if not isinstance(selected, bool):
            raise SchemaError("$.selected", "expected boolean")
        version, merged, state = store.save_assignment(
            annotator,
            body["conversation_id"],
            body.get("utterance_id"),
            body["category_id"],
            value,
            selected=selected,
            expected_version=expected,
        )
        return {
            "version": version,
            "selections": selections_to_json(merged),
            # a save can clear other categories (hide effects), so resend them all
            "versions": store.live_versions(
                annotator, body["conversation_id"], body.get("utterance_id")
            ),
            "state": state_to_json(state),
        }

    def _apply_wizard_result(store, annotator, session):
        """Persist a finished session's outcome atomically with the response."""
        result = session.result
        _, _, code_set, _ = store.example_context(
            session.conversation_id, session.utterance_id
        )
        cat = code_set.category(result.category_id)
        value = (
            rules.SelectedValue.single(result.option_id)
            if cat.kind == "single"
            else rules.SelectedValue.multi((result.option_id,))
        )
        version, merged, state = store.save_assignment(
            annotator,
            session.conversation_id,
            session.utterance_id,
            result.category_id,
            value,
            origin=rules.AUTO_WIZARD,
            expected_version=ANY_VERSION,
        )
        return {
            "session_id": session.session_id,
            "status": wizard.FINISHED,
            "result": result.to_json(),
            "notify": True,
            "version": version,
            "selections": selections_to_json(merged),
            "versions": store.live_versions(
                annotator, session.conversation_id, session.utterance_id
            ),
            "state": state_to_json(state),
        }

    @app.post("/projects/{project_id}/wizard/start")
    async def wizard_start(project_id: str, request: Request):
        store = data.open_project(project_id)
        annotator = _identity(request)
        _membership(store, annotator)
        body = await _body(request)
        for field in ("conversation_id", "category_id"):
            if not isinstance(body.get(field), str):
                raise SchemaError(f"$.{field}", "missing required field")
        conversation_id = body["conversation_id"]
        utterance_id = body.get("utterance_id")
        category_id = body["category_id"]
        _, _, code_set, speaker = store.example_context(conversation_id, utterance_id)
        selections = store.get_selection_set(annotator, conversation_id, utterance_id)
        state = rules.effective_state(code_set, selections, speaker, code_set.scope)
        if category_id not in state.visible_categories:
            if code_set.category(category_id) is None:
                raise NotFoundError(f"unknown category {category_id!r}")
            raise HiddenCategoryError(category_id)
        session = wizards.start(
            (annotator, project_id, conversation_id, utterance_id, category_id),
            code_set,
            category_id,
            annotator_id=annotator,
            conversation_id=conversation_id,
            utterance_id=utterance_id,
        )
        if session.status == wizard.FINISHED:  # degenerate one-node flow
            return _apply_wizard_result(store, annotator, session)
        return {
            "session_id": session.session_id,
            "status": session.status,
            "question": session.question,
        }

    def _own_session(session, annotator):
        if session.annotator_id != annotator:
            raise NotAMemberError(annotator)

    @app.post("/projects/{project_id}/wizard/{session_id}/answer")
    async def wizard_answer(project_id: str, session_id: str, request: Request):
        store = data.open_project(project_id)
        annotator = _identity(request)
        _membership(store, annotator)
        body = await _body(request)
        if not isinstance(body.get("answer"), bool):
            raise SchemaError("$.answer", "expected boolean")
        _own_session(wizards.get(session_id), annotator)
        session, outcome = wizards.answer(session_id, body["answer"])
        if isinstance(outcome, wizard.WizardResult):
            return _apply_wizard_result(store, annotator, session)
        return {
            "session_id": session.session_id,
            "status": session.status,
            "question": outcome,
        }

    @app.post("/projects/{project_id}/wizard/{session_id}/back")
    async def wizard_back(project_id: str, session_id: str, request: Request):
        store = data.open_project(project_id)
        annotator = _identity(request)
        _membership(store, annotator)
        _own_session(wizards.get(session_id), annotator)
        session = wizards.back(session_id)
        return {
            "session_id": session.session_id,
            "status": session.status,
            "question": session.question,
        }

    @app.get("/projects/{project_id}/previous")
    async def view_previous(project_id: str, request: Request):
        store = data.open_project(project_id)
        annotator = _identity(request)
        _membership(store, annotator)
        params = request.query_params
        category = params.get("category")
        option = params.get("option")
        exclude_conv = params.get("exclude_conversation")
        exclude_utt = params.get("exclude_utterance")
        if not category or not option or not exclude_conv or not exclude_utt:
            raise SchemaError(
                "$",
                "category, option, exclude_conversation, exclude_utterance are required",
            )
        conv, utt, _, _ = store.example_context(exclude_conv, exclude_utt)
        hit = store.previous_labeled(annotator, category, option, (exclude_conv, exclude_utt))
        if hit is None:
            return Response(status_code=204)
        prev_utt, assignment = hit
        return {
            "previous": {
                "conversation_id": assignment.conversation_id,
                "utterance": prev_utt.to_json(),
                "labels": selections_to_json(
                    store.get_selection_set(
                        annotator, assignment.conversation_id, assignment.utterance_id
                    )
                ),
                "saved_at": assignment.saved_at,
            },
            "current": {
                "conversation_id": conv.id,
                "utterance": utt.to_json(),
                "labels": selections_to_json(
                    store.get_selection_set(annotator, conv.id, utt.id)
                ),
            },
        }

    @app.get("/projects/{project_id}/status")
    async def status(project_id: str, request: Request):
        store = data.open_project(project_id)
        annotator = _identity(request)
        role = _membership(store, annotator)
        annotators = []
        for member in store.project.annotators:
            summary = store.progress(member)
            position = store.resume(member)
            annotators.append(
                {
                    "annotator_id": member,
                    "labeled_units": summary.labeled_units,
                    "total_units": summary.total_units,
                    "progress": _fraction_json(summary.fraction),
                    "per_conversation": [
                        {"conversation_id": cid, **_fraction_json(fr)}
                        for cid, fr in summary.per_conversation
                    ],
                    "resume": (
                        None
                        if position is None
                        else {
                            "conversation_id": position.conversation_id,
                            "utterance_id": position.utterance_id,
                        }
                    ),
                }
            )
        body = {"project_id": store.project.id, "role": role, "annotators": annotators}
        visible = store.project.agreement_visibility == "all" or role == "creator"
        if visible:
            try:
                report = metrics.agreement_report(store.project, store.live_assignments())
                body["agreement"] = report.to_json()
            except TooFewAnnotatorsError:
                body["agreement"] = None
        return body

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
