"""Dependency-rule engine: visibility, disabling, and auto-selection.

Selecting a label can disable options elsewhere, auto-select labels in other
categories, or hide whole categories. Rules run to a deterministic fixed
point: single passes in rule document order, repeated until nothing changes,
with effects accumulating monotonically within one computation.

Everything here is a pure function over immutable inputs. Entries with origin
manual or auto_wizard are the durable truth; auto_rule entries are memoryless,
rederived from scratch on every call so that retracting a selection also
retracts everything it auto-selected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import Category, CodeSetConfig, RuleEffect
from .errors import (
    ContradictionError,
    DisabledOptionError,
    HiddenCategoryError,
    NotFoundError,
    SchemaError,
)

MANUAL = "manual"
AUTO_RULE = "auto_rule"
AUTO_WIZARD = "auto_wizard"
ORIGINS = (MANUAL, AUTO_RULE, AUTO_WIZARD)


@dataclass(frozen=True)
class SelectedValue:
    """One category's value: a single option, a set of options, or free text."""

    kind: str  # single | multi | text
    option_id: str | None = None
    option_ids: tuple[str, ...] = ()
    text: str | None = None

    @classmethod
    def single(cls, option_id: str) -> "SelectedValue":
        return cls(kind="single", option_id=option_id)

    @classmethod
    def multi(cls, option_ids) -> "SelectedValue":
        return cls(kind="multi", option_ids=tuple(sorted(set(option_ids))))

    @classmethod
    def text_value(cls, text: str) -> "SelectedValue":
        return cls(kind="text", text=text)

    @property
    def options(self) -> tuple[str, ...]:
        """Selected option ids; empty for text values."""
        if self.kind == "single":
            return (self.option_id,)
        if self.kind == "multi":
            return self.option_ids
        return ()

    @property
    def is_blank(self) -> bool:
        if self.kind == "multi":
            return not self.option_ids
        if self.kind == "text":
            return self.text is None or not self.text.strip()
        return False

    def to_json(self) -> dict:
        if self.kind == "single":
            return {"single": self.option_id}
        if self.kind == "multi":
            return {"multi": list(self.option_ids)}
        return {"text": self.text}

    @classmethod
    def from_json(cls, node, path: str = "$.value") -> "SelectedValue":
        if not isinstance(node, dict) or len(node) != 1:
            raise SchemaError(path, 'expected exactly one of {"single"|"multi"|"text"}')
        key, raw = next(iter(node.items()))
        if key == "single":
            if not isinstance(raw, str):
                raise SchemaError(f"{path}.single", "expected string option id")
            return cls.single(raw)
        if key == "multi":
            if not isinstance(raw, list) or any(not isinstance(o, str) for o in raw):
                raise SchemaError(f"{path}.multi", "expected array of option ids")
            return cls.multi(raw)
        if key == "text":
            if not isinstance(raw, str):
                raise SchemaError(f"{path}.text", "expected string")
            return cls.text_value(raw)
        raise SchemaError(f"{path}.{key}", "unknown value kind")


@dataclass(frozen=True)
class SelectionEntry:
    value: SelectedValue
    origin: str = MANUAL  # manual | auto_rule | auto_wizard

    def to_json(self) -> dict:
        return {"value": self.value.to_json(), "origin": self.origin}

    @classmethod
    def from_json(cls, node, path: str = "$") -> "SelectionEntry":
        if not isinstance(node, dict):
            raise SchemaError(path, "expected object")
        origin = node.get("origin", MANUAL)
        if origin not in ORIGINS:
            raise SchemaError(f"{path}.origin", f"must be one of {', '.join(ORIGINS)}")
        if "value" not in node:
            raise SchemaError(f"{path}.value", "missing required field")
        return cls(value=SelectedValue.from_json(node["value"], f"{path}.value"), origin=origin)


# category-id -> SelectionEntry
SelectionSet = dict


@dataclass(frozen=True)
class EffectiveLabelState:
    """What the annotator may interact with after running all rules."""

    visible_categories: tuple[str, ...]
    disabled_options: frozenset  # of (category-id, option-id)
    auto_selected: frozenset  # of (category-id, option-id), origin != manual
    complete: bool
    hidden_categories: frozenset = field(default_factory=frozenset)


def strip_derived(selections: SelectionSet) -> SelectionSet:
    """Drop auto_rule entries; they are recomputed, never carried over."""
    return {cid: e for cid, e in selections.items() if e.origin != AUTO_RULE}


def applicable_categories(
    code_set: CodeSetConfig, speaker: str | None = None, scope: str | None = None
) -> list[str]:
    """Category ids admitted for this example, in config order.

    speaker=None means no speaker filtering (conversation-scope labeling and
    config analysis). Hiding is applied later by effective_state, not here.
    """
    if scope is not None and scope != code_set.scope:
        return []
    return [
        c.id
        for c in code_set.categories
        if speaker is None or c.admits_speaker(speaker)
    ]


def _cascade(
    code_set: CodeSetConfig,
    selections: SelectionSet,
    speaker: str | None,
    scope: str | None,
) -> tuple[SelectionSet, EffectiveLabelState]:
    app_ids = applicable_categories(code_set, speaker, scope)
    app_set = set(app_ids)
    cats = {c.id: c for c in code_set.categories}

    working: SelectionSet = {
        cid: e
        for cid, e in strip_derived(selections).items()
        if cid in app_set and not e.value.is_blank
    }
    disabled: set = set()
    hidden: set = set()

    total_options = sum(len(c.options) for c in code_set.categories)
    max_passes = max(1, len(code_set.rules)) * max(1, total_options) + 1
    passes = 0
    changed = True
    while changed:
        passes += 1
        if passes > max_passes:
            raise RuntimeError("rule cascade failed to reach a fixed point")
        changed = False
        for rule in code_set.rules:
            tcat = rule.trigger.category_id
            if tcat not in app_set or tcat in hidden:
                continue
            entry = working.get(tcat)
            selected_now = entry is not None and rule.trigger.option_id in entry.value.options
            if selected_now != rule.trigger.selected:
                continue
            for effect in rule.effects:
                changed = _apply_effect(effect, cats, app_set, working, disabled, hidden) or changed

    for cid, entry in working.items():
        for oid in entry.value.options:
            if (cid, oid) in disabled:
                if entry.origin == AUTO_RULE:
                    raise ContradictionError(cid, oid)
                raise DisabledOptionError(cid, oid)

    visible = tuple(cid for cid in app_ids if cid not in hidden)
    auto_pairs = frozenset(
        (cid, oid)
        for cid, entry in working.items()
        if entry.origin != MANUAL
        for oid in entry.value.options
    )
    state = EffectiveLabelState(
        visible_categories=visible,
        disabled_options=frozenset(disabled),
        auto_selected=auto_pairs,
        complete=_is_complete(cats, visible, working),
        hidden_categories=frozenset(hidden),
    )
    ordered = {cid: working[cid] for cid in app_ids if cid in working}
    return ordered, state


def _apply_effect(
    effect: RuleEffect,
    cats: dict[str, Category],
    app_set: set,
    working: SelectionSet,
    disabled: set,
    hidden: set,
) -> bool:
    if effect.kind == "disable_option":
        pair = (effect.category_id, effect.option_id)
        if pair in disabled:
            return False
        disabled.add(pair)
        return True
    if effect.kind == "hide_category":
        if effect.category_id in hidden:
            return False
        hidden.add(effect.category_id)
        working.pop(effect.category_id, None)
        return True
    # auto_select
    cid, oid = effect.category_id, effect.option_id
    cat = cats.get(cid)
    if cat is None or cat.kind == "text":
        return False
    if cid in hidden or cid not in app_set or (cid, oid) in disabled:
        return False
    existing = working.get(cid)
    if existing is None:
        value = SelectedValue.single(oid) if cat.kind == "single" else SelectedValue.multi((oid,))
        working[cid] = SelectionEntry(value=value, origin=AUTO_RULE)
        return True
    if existing.origin != AUTO_RULE or cat.kind == "single":
        return False  # persisted values and first-fired singles win
    if oid in existing.value.options:
        return False
    merged = SelectedValue.multi(existing.value.options + (oid,))
    working[cid] = SelectionEntry(value=merged, origin=AUTO_RULE)
    return True


def _is_complete(cats: dict[str, Category], visible: tuple, working: SelectionSet) -> bool:
    for cid in visible:
        entry = working.get(cid)
        if entry is None:
            return False
        kind = cats[cid].kind
        if kind == "multi" and not entry.value.options:
            return False
        if kind == "text" and (entry.value.text is None or not entry.value.text.strip()):
            return False
    return True


def cascade(
    code_set: CodeSetConfig,
    selections: SelectionSet,
    speaker: str | None = None,
    scope: str | None = None,
) -> tuple[SelectionSet, EffectiveLabelState]:
    """Recompute the consistent selection set and its effective state.

    Raises ContradictionError when the fixed point auto-selects an option it
    also disables, and DisabledOptionError when a persisted (manual or wizard)
    selection ends up disabled.
    """
    return _cascade(code_set, selections, speaker, scope)


def effective_state(
    code_set: CodeSetConfig,
    selections: SelectionSet,
    speaker: str | None = None,
    scope: str | None = None,
) -> EffectiveLabelState:
    """Deterministic fixed point of rule application over the selections."""
    return _cascade(code_set, selections, speaker, scope)[1]


def check_complete(
    code_set: CodeSetConfig,
    selections: SelectionSet,
    speaker: str | None = None,
    scope: str | None = None,
) -> bool:
    """True iff every visible category carries a usable value."""
    return effective_state(code_set, selections, speaker, scope).complete


def apply_selection(
    code_set: CodeSetConfig,
    selections: SelectionSet,
    category_id: str,
    value: SelectedValue,
    selected: bool = True,
    *,
    origin: str = MANUAL,
    speaker: str | None = None,
    scope: str | None = None,
) -> tuple[SelectionSet, EffectiveLabelState]:
    """Edit one category's selection and run the cascade.

    selected=True sets the value (union for multi categories); selected=False
    removes the given option(s) or clears the entry. The edit is atomic: if
    the resulting fixed point would disable any persisted selection, the
    error propagates and the input set is unchanged.
    """
    cat = code_set.category(category_id)
    if cat is None:
        raise NotFoundError(f"unknown category {category_id!r}")
    _check_value_shape(cat, value)

    persistent = strip_derived(selections)
    _, current = _cascade(code_set, persistent, speaker, scope)
    if category_id not in current.visible_categories:
        raise HiddenCategoryError(category_id)
    if selected:
        for oid in value.options:
            if (category_id, oid) in current.disabled_options:
                raise DisabledOptionError(category_id, oid)

    new_persistent = dict(persistent)
    edited = _edited_entry(cat, new_persistent.get(category_id), value, selected, origin)
    if edited is None:
        new_persistent.pop(category_id, None)
    else:
        new_persistent[category_id] = edited
    return _cascade(code_set, new_persistent, speaker, scope)


def _check_value_shape(cat: Category, value: SelectedValue) -> None:
    if value.kind != cat.kind:
        raise SchemaError("$.value", f"category {cat.id!r} takes a {cat.kind} value")
    known = set(cat.option_ids())
    for oid in value.options:
        if oid not in known:
            raise NotFoundError(f"no option {oid!r} in category {cat.id!r}")


def _edited_entry(
    cat: Category,
    existing: SelectionEntry | None,
    value: SelectedValue,
    selected: bool,
    origin: str,
) -> SelectionEntry | None:
    if selected:
        if value.is_blank:
            return None
        if cat.kind == "multi" and existing is not None:
            merged = SelectedValue.multi(existing.value.options + value.options)
            return SelectionEntry(value=merged, origin=origin)
        return SelectionEntry(value=value, origin=origin)
    if existing is None:
        return None
    if cat.kind == "single":
        return None if value.option_id in existing.value.options else existing
    if cat.kind == "multi":
        remaining = tuple(o for o in existing.value.options if o not in value.options)
        if remaining == existing.value.options:
            return existing
        if not remaining:
            return None
        return SelectionEntry(value=SelectedValue.multi(remaining), origin=origin)
    return None  # text: deselect clears


def apply_wizard_outcome(
    code_set: CodeSetConfig,
    selections: SelectionSet,
    category_id: str,
    option_id: str,
    *,
    speaker: str | None = None,
    scope: str | None = None,
) -> tuple[SelectionSet, EffectiveLabelState]:
    """Enter a wizard outcome as an auto_wizard selection and cascade."""
    cat = code_set.category(category_id)
    if cat is None:
        raise NotFoundError(f"unknown category {category_id!r}")
    value = (
        SelectedValue.single(option_id)
        if cat.kind == "single"
        else SelectedValue.multi((option_id,))
    )
    return apply_selection(
        code_set,
        selections,
        category_id,
        value,
        True,
        origin=AUTO_WIZARD,
        speaker=speaker,
        scope=scope,
    )


__all__ = [
    "MANUAL",
    "AUTO_RULE",
    "AUTO_WIZARD",
    "ORIGINS",
    "SelectedValue",
    "SelectionEntry",
    "SelectionSet",
    "EffectiveLabelState",
    "strip_derived",
    "applicable_categories",
    "cascade",
    "effective_state",
    "check_complete",
    "apply_selection",
    "apply_wizard_outcome",
]
