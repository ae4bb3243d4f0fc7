"""Guided selection: one yes/no question at a time until a label falls out.

A wizard session walks a category's question tree. The session never shows
the whole tree, only the current question; answering descends one level and
reaching an outcome leaf finishes the session with the option to apply.
Sessions live server-side, are single-use per (annotator, example, category),
and expire after 30 idle minutes.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from .config import CodeSetConfig, Outcome, Question, WizardFlow, WizardNode
from .errors import (
    AtRootError,
    FinishedSessionError,
    NoWizardError,
    SessionExpiredError,
)
from . import rules

ACTIVE = "active"
FINISHED = "finished"

IDLE_EXPIRY_SECONDS = 30 * 60


@dataclass(frozen=True)
class WizardResult:
    """Final outcome of a finished session; notify is always true on completion."""

    category_id: str
    option_id: str
    trail: tuple  # of (question text, answer bool)
    notify: bool = True

    def to_json(self) -> dict:
        return {
            "category_id": self.category_id,
            "option_id": self.option_id,
            "notify": self.notify,
            "trail": [{"question": q, "answer": a} for q, a in self.trail],
        }


@dataclass
class WizardSession:
    """Mutable walk state; trail length always equals the current node's depth."""

    session_id: str
    category_id: str
    flow: WizardFlow
    trail: list = field(default_factory=list)  # of (question text, answer bool)
    status: str = ACTIVE
    # labeling context, set when the session is started through the manager
    annotator_id: str | None = None
    conversation_id: str | None = None
    utterance_id: str | None = None
    last_touched: float = 0.0

    @property
    def current(self) -> WizardNode:
        node = self.flow.root
        for _, ans in self.trail:
            node = node.yes if ans else node.no
        return node

    @property
    def result(self) -> WizardResult | None:
        node = self.current
        if not isinstance(node, Outcome):
            return None
        return WizardResult(
            category_id=self.category_id, option_id=node.option_id, trail=tuple(self.trail)
        )

    @property
    def question(self) -> str | None:
        node = self.current
        return node.text if isinstance(node, Question) else None


def start(code_set: CodeSetConfig, category_id: str, session_id: str | None = None) -> WizardSession:
    """Open a session at the root; a root outcome finishes immediately."""
    flow = code_set.wizards.get(category_id)
    if flow is None:
        raise NoWizardError(category_id)
    session = WizardSession(
        session_id=session_id or uuid.uuid4().hex, category_id=category_id, flow=flow
    )
    if isinstance(flow.root, Outcome):
        session.status = FINISHED
    return session


def answer(session: WizardSession, ans: bool):
    """Record one answer; returns the next question text or a WizardResult."""
    if session.status == FINISHED:
        raise FinishedSessionError("the wizard already reached an outcome")
    node = session.current
    session.trail.append((node.text, bool(ans)))
    nxt = node.yes if ans else node.no
    if isinstance(nxt, Outcome):
        session.status = FINISHED
        return session.result
    return nxt.text


def back(session: WizardSession) -> WizardSession:
    """Undo the last answer; the session becomes active again."""
    if not session.trail:
        raise AtRootError("already at the first question")
    session.trail.pop()
    session.status = ACTIVE
    return session


def apply_result(
    code_set: CodeSetConfig,
    selections: rules.SelectionSet,
    result: WizardResult,
    *,
    speaker: str | None = None,
    scope: str | None = None,
):
    """Enter the outcome with origin auto_wizard and run the rule cascade.

    Raises DisabledOptionError when the outcome collides with a rule-disabled
    option; nothing is changed in that case.
    """
    return rules.apply_wizard_outcome(
        code_set,
        selections,
        result.category_id,
        result.option_id,
        speaker=speaker,
        scope=scope,
    )


class SessionManager:
    """Server-side session registry: single-use per key, idle expiry, locking.

    All operations are serialized under one lock; concurrent answers to one
    session are therefore ordered arbitrarily but atomically.
    """

    def __init__(self, idle_expiry: float = IDLE_EXPIRY_SECONDS, clock=time.time):
        self._idle_expiry = idle_expiry
        self._clock = clock
        self._lock = threading.Lock()
        self._sessions: dict[str, WizardSession] = {}
        self._sid_by_key: dict[tuple, str] = {}
        self._key_by_sid: dict[str, tuple] = {}

    def start(
        self,
        key: tuple,
        code_set: CodeSetConfig,
        category_id: str,
        *,
        annotator_id: str | None = None,
        conversation_id: str | None = None,
        utterance_id: str | None = None,
    ) -> WizardSession:
        """Open a session for the key, discarding any previous one."""
        with self._lock:
            self._purge()
            old_sid = self._sid_by_key.pop(key, None)
            if old_sid is not None:
                self._sessions.pop(old_sid, None)
                self._key_by_sid.pop(old_sid, None)
            session = start(code_set, category_id)
            session.annotator_id = annotator_id
            session.conversation_id = conversation_id
            session.utterance_id = utterance_id
            session.last_touched = self._clock()
            self._sessions[session.session_id] = session
            self._sid_by_key[key] = session.session_id
            self._key_by_sid[session.session_id] = key
            return session

    def get(self, session_id: str) -> WizardSession:
        with self._lock:
            return self._live(session_id)

    def answer(self, session_id: str, ans: bool):
        with self._lock:
            session = self._live(session_id)
            outcome = answer(session, ans)
            session.last_touched = self._clock()
            return session, outcome

    def back(self, session_id: str) -> WizardSession:
        with self._lock:
            session = self._live(session_id)
            back(session)
            session.last_touched = self._clock()
            return session

    def discard(self, session_id: str) -> None:
        with self._lock:
            self._drop(session_id)

    def _live(self, session_id: str) -> WizardSession:
        self._purge()
        session = self._sessions.get(session_id)
        if session is None:
            raise SessionExpiredError("unknown or expired wizard session")
        return session

    def _purge(self) -> None:
        deadline = self._clock() - self._idle_expiry
        stale = [sid for sid, s in self._sessions.items() if s.last_touched < deadline]
        for sid in stale:
            self._drop(sid)

    def _drop(self, session_id: str) -> None:
        self._sessions.pop(session_id, None)
        key = self._key_by_sid.pop(session_id, None)
        if key is not None and self._sid_by_key.get(key) == session_id:
            self._sid_by_key.pop(key, None)
