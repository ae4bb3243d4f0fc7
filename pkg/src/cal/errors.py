"""Shared exception types.

Every error that can cross a module boundary lives here so the API layer
can map each one to a single (HTTP status, machine code) pair.
"""

from __future__ import annotations


class CalError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(CalError):
    """A configuration document is structurally invalid.

    Carries the JSON path of the offending node, e.g. ``$.categories[2].id``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class DisabledOptionError(CalError):
    """Attempt to select a label option that is disabled in the current state."""

    def __init__(self, category_id: str, option_id: str):
        super().__init__(f"option {option_id!r} in category {category_id!r} is disabled")
        self.category_id = category_id
        self.option_id = option_id


class HiddenCategoryError(CalError):
    """Attempt to label a category that is hidden or not applicable."""

    def __init__(self, category_id: str):
        super().__init__(f"category {category_id!r} is not visible for this example")
        self.category_id = category_id


class ContradictionError(CalError):
    """The rule cascade selected an option that the same cascade disables.

    This is a configuration bug surfaced at runtime, not an annotator error.
    """

    def __init__(self, category_id: str, option_id: str):
        super().__init__(
            f"rules both select and disable option {option_id!r} in category {category_id!r}"
        )
        self.category_id = category_id
        self.option_id = option_id


class NoWizardError(CalError):
    """The category has no guided-selection flow attached."""

    def __init__(self, category_id: str):
        super().__init__(f"category {category_id!r} has no wizard")
        self.category_id = category_id


class FinishedSessionError(CalError):
    """answer() called on a wizard session that already reached an outcome."""


class AtRootError(CalError):
    """back() called on a wizard session with an empty answer trail."""


class SessionExpiredError(CalError):
    """The wizard session id is unknown or idle past its expiry window."""


class FormatError(CalError):
    """A transcript document does not match the import format."""


class DuplicateIdError(CalError):
    """An id collides with one already present; the operation was not applied."""


class VersionConflictError(CalError):
    """Optimistic concurrency check failed: expected_version is stale."""

    def __init__(self, expected, actual):
        super().__init__(f"expected version {expected!r}, live version is {actual!r}")
        self.expected = expected
        self.actual = actual


class ValidationError(CalError):
    """A config or assignment was rejected by validation; carries the report."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class UnknownProjectError(CalError):
    """No project with the given id in the data directory."""

    def __init__(self, project_id: str):
        super().__init__(f"unknown project {project_id!r}")
        self.project_id = project_id


class NotFoundError(CalError):
    """A referenced conversation, utterance, category, or option does not exist."""


class NotAMemberError(CalError):
    """The caller is not in the project's annotator list and is not its creator."""

    def __init__(self, annotator_id: str):
        super().__init__(f"{annotator_id!r} is not a member of this project")
        self.annotator_id = annotator_id


class KindError(CalError):
    """Cohen's kappa is only defined here for single-kind categories."""

    def __init__(self, category_id: str, kind: str):
        super().__init__(f"kappa refused for {kind} category {category_id!r}")
        self.category_id = category_id
        self.kind = kind


class TooFewAnnotatorsError(CalError):
    """Agreement needs at least two annotators."""
