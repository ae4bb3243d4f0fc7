"""Two-level labeling configuration: projects and annotation code sets.

A code set describes what annotators select: categories with label options,
dependency rules between labels, optional per-category guided-selection
wizards, and the documentation shown inline. A project binds code sets to a
transcript file and an annotator roster.

Documents are UTF-8 JSON with a strict schema: unknown keys are rejected and
all structural problems carry the JSON path of the offending node. Parsed
configs are immutable values and safe to share between request handlers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Union

from .errors import SchemaError

SCOPES = ("utterance", "conversation")
KINDS = ("single", "multi", "text")
SPEAKER_FILTERS = ("any", "human", "bot")
VISIBILITIES = ("creator_only", "all")
EFFECT_KINDS = ("disable_option", "auto_select", "hide_category")

MAX_WIZARD_DEPTH = 32
MAX_QUESTION_LENGTH = 500

# Dead-outcome detection enumerates reachable selection states; configs whose
# state space exceeds this are skipped rather than guessed at.
STATE_ENUMERATION_LIMIT = 20000


@dataclass(frozen=True)
class LabelOption:
    id: str
    display: str
    definition: str = ""


@dataclass(frozen=True)
class Category:
    id: str
    name: str
    kind: str  # single | multi | text
    options: tuple[LabelOption, ...] = ()
    definition: str = ""
    examples: tuple[str, ...] = ()
    speaker_filter: str = "any"  # any | human | bot

    def option_ids(self) -> tuple[str, ...]:
        return tuple(opt.id for opt in self.options)

    def admits_speaker(self, speaker: str | None) -> bool:
        if self.speaker_filter == "any":
            return True
        return speaker == self.speaker_filter


@dataclass(frozen=True)
class RuleTrigger:
    category_id: str
    option_id: str
    selected: bool = True


@dataclass(frozen=True)
class RuleEffect:
    kind: str  # disable_option | auto_select | hide_category
    category_id: str
    option_id: str | None = None  # None for hide_category


@dataclass(frozen=True)
class DependencyRule:
    trigger: RuleTrigger
    effects: tuple[RuleEffect, ...]


@dataclass(frozen=True)
class Question:
    text: str
    yes: "WizardNode"
    no: "WizardNode"


@dataclass(frozen=True)
class Outcome:
    option_id: str


WizardNode = Union[Question, Outcome]


@dataclass(frozen=True)
class WizardFlow:
    category_id: str
    root: WizardNode


@dataclass(frozen=True)
class CodeSetConfig:
    id: str
    name: str
    categories: tuple[Category, ...]
    rules: tuple[DependencyRule, ...] = ()
    wizards: dict[str, WizardFlow] = field(default_factory=dict)
    scope: str = "utterance"  # utterance | conversation

    def category(self, category_id: str) -> Category | None:
        for cat in self.categories:
            if cat.id == category_id:
                return cat
        return None


@dataclass(frozen=True)
class ProjectConfig:
    id: str
    name: str
    annotators: tuple[str, ...]
    code_sets: tuple[CodeSetConfig, ...]
    data_ref: str
    agreement_visibility: str = "creator_only"

    def code_set_for_scope(self, scope: str) -> CodeSetConfig | None:
        for cs in self.code_sets:
            if cs.scope == scope:
                return cs
        return None


@dataclass
class ValidationReport:
    """Outcome of config validation; empty errors means the config is accepted."""

    errors: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, path: str, message: str) -> None:
        self.errors.append((path, message))

    def warn(self, path: str, message: str) -> None:
        self.warnings.append((path, message))

    def extend(self, other: "ValidationReport") -> None:
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)

    def lines(self) -> list[str]:
        out = [f"ERROR {path}: {message}" for path, message in self.errors]
        out += [f"WARN {path}: {message}" for path, message in self.warnings]
        return out


# ---------------------------------------------------------------------------
# Strict JSON decoding helpers
# ---------------------------------------------------------------------------


def _as_obj(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise SchemaError(path, f"expected object, got {_type_name(node)}")
    return node


def _type_name(node) -> str:
    if node is None:
        return "null"
    return {dict: "object", list: "array", str: "string", bool: "boolean"}.get(
        type(node), type(node).__name__
    )


def _reject_unknown(node: dict, path: str, allowed: Iterable[str]) -> None:
    allowed = set(allowed)
    for key in node:
        if key not in allowed:
            raise SchemaError(f"{path}.{key}", "unknown field")


def _get(node: dict, path: str, key: str, kind, *, required=True, default=None):
    if key not in node:
        if required:
            raise SchemaError(f"{path}.{key}", "missing required field")
        return default
    value = node[key]
    if not isinstance(value, kind) or (kind is not bool and isinstance(value, bool)):
        raise SchemaError(f"{path}.{key}", f"expected {kind.__name__}, got {_type_name(value)}")
    return value


def _get_str(node, path, key, *, required=True, default="") -> str:
    return _get(node, path, key, str, required=required, default=default)


def _get_enum(node, path, key, values, *, required=True, default=None) -> str:
    raw = _get(node, path, key, str, required=required, default=default)
    if raw not in values:
        raise SchemaError(f"{path}.{key}", f"must be one of {', '.join(values)}")
    return raw


def _get_str_list(node, path, key, *, required=True) -> tuple[str, ...]:
    raw = _get(node, path, key, list, required=required, default=[])
    for i, item in enumerate(raw):
        if not isinstance(item, str):
            raise SchemaError(f"{path}.{key}[{i}]", f"expected string, got {_type_name(item)}")
    return tuple(raw)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse_code_set(text: str) -> CodeSetConfig:
    """Parse a code-set document.

    Raises json.JSONDecodeError for malformed JSON and SchemaError (with the
    JSON path) for structural problems. Referential invariants are reported
    by validate_code_set, not here.
    """
    return code_set_from_json(json.loads(text), "$")


def code_set_from_json(node, path: str = "$") -> CodeSetConfig:
    obj = _as_obj(node, path)
    _reject_unknown(obj, path, ("id", "name", "scope", "categories", "rules", "wizards"))
    raw_categories = _get(obj, path, "categories", list)
    categories = tuple(
        _category_from_json(c, f"{path}.categories[{i}]") for i, c in enumerate(raw_categories)
    )
    raw_rules = _get(obj, path, "rules", list, required=False, default=[])
    rules = tuple(_rule_from_json(r, f"{path}.rules[{i}]") for i, r in enumerate(raw_rules))
    raw_wizards = _get(obj, path, "wizards", dict, required=False, default={})
    wizards = {
        key: _wizard_from_json(flow, f"{path}.wizards.{key}") for key, flow in raw_wizards.items()
    }
    return CodeSetConfig(
        id=_get_str(obj, path, "id"),
        name=_get_str(obj, path, "name"),
        categories=categories,
        rules=rules,
        wizards=wizards,
        scope=_get_enum(obj, path, "scope", SCOPES, required=False, default="utterance"),
    )


def _category_from_json(node, path: str) -> Category:
    obj = _as_obj(node, path)
    _reject_unknown(
        obj, path, ("id", "name", "kind", "options", "definition", "examples", "speaker_filter")
    )
    raw_options = _get(obj, path, "options", list, required=False, default=[])
    options = tuple(
        _option_from_json(o, f"{path}.options[{i}]") for i, o in enumerate(raw_options)
    )
    return Category(
        id=_get_str(obj, path, "id"),
        name=_get_str(obj, path, "name"),
        kind=_get_enum(obj, path, "kind", KINDS),
        options=options,
        definition=_get_str(obj, path, "definition", required=False),
        examples=_get_str_list(obj, path, "examples", required=False),
        speaker_filter=_get_enum(
            obj, path, "speaker_filter", SPEAKER_FILTERS, required=False, default="any"
        ),
    )


def _option_from_json(node, path: str) -> LabelOption:
    obj = _as_obj(node, path)
    _reject_unknown(obj, path, ("id", "display", "definition"))
    return LabelOption(
        id=_get_str(obj, path, "id"),
        display=_get_str(obj, path, "display"),
        definition=_get_str(obj, path, "definition", required=False),
    )


def _rule_from_json(node, path: str) -> DependencyRule:
    obj = _as_obj(node, path)
    _reject_unknown(obj, path, ("trigger", "effects"))
    trig_obj = _as_obj(_get(obj, path, "trigger", dict), f"{path}.trigger")
    _reject_unknown(trig_obj, f"{path}.trigger", ("category_id", "option_id", "selected"))
    trigger = RuleTrigger(
        category_id=_get_str(trig_obj, f"{path}.trigger", "category_id"),
        option_id=_get_str(trig_obj, f"{path}.trigger", "option_id"),
        selected=_get(trig_obj, f"{path}.trigger", "selected", bool, required=False, default=True),
    )
    raw_effects = _get(obj, path, "effects", list)
    if not raw_effects:
        raise SchemaError(f"{path}.effects", "rule must have at least one effect")
    effects = tuple(
        _effect_from_json(e, f"{path}.effects[{i}]") for i, e in enumerate(raw_effects)
    )
    return DependencyRule(trigger=trigger, effects=effects)


def _effect_from_json(node, path: str) -> RuleEffect:
    obj = _as_obj(node, path)
    _reject_unknown(obj, path, ("effect", "category_id", "option_id"))
    kind = _get_enum(obj, path, "effect", EFFECT_KINDS)
    option_id = _get_str(obj, path, "option_id", required=False, default=None)
    if kind == "hide_category":
        if option_id is not None:
            raise SchemaError(f"{path}.option_id", "hide_category takes no option_id")
    elif option_id is None:
        raise SchemaError(f"{path}.option_id", "missing required field")
    return RuleEffect(kind=kind, category_id=_get_str(obj, path, "category_id"), option_id=option_id)


def _wizard_from_json(node, path: str) -> WizardFlow:
    obj = _as_obj(node, path)
    _reject_unknown(obj, path, ("category_id", "root"))
    return WizardFlow(
        category_id=_get_str(obj, path, "category_id"),
        root=_wizard_node_from_json(_get(obj, path, "root", dict), f"{path}.root"),
    )


def _wizard_node_from_json(node, path: str) -> WizardNode:
    obj = _as_obj(node, path)
    if "option_id" in obj:
        _reject_unknown(obj, path, ("option_id",))
        return Outcome(option_id=_get_str(obj, path, "option_id"))
    _reject_unknown(obj, path, ("text", "yes", "no"))
    text = _get_str(obj, path, "text")
    if len(text) > MAX_QUESTION_LENGTH:
        raise SchemaError(f"{path}.text", f"question longer than {MAX_QUESTION_LENGTH} characters")
    return Question(
        text=text,
        yes=_wizard_node_from_json(_get(obj, path, "yes", dict), f"{path}.yes"),
        no=_wizard_node_from_json(_get(obj, path, "no", dict), f"{path}.no"),
    )


def parse_project(text: str) -> ProjectConfig:
    """Parse a project document. Same error contract as parse_code_set."""
    return project_from_json(json.loads(text), "$")


def project_from_json(node, path: str = "$") -> ProjectConfig:
    obj = _as_obj(node, path)
    _reject_unknown(
        obj, path, ("id", "name", "annotators", "code_sets", "data_ref", "agreement_visibility")
    )
    annotators = _get_str_list(obj, path, "annotators")
    if not annotators:
        raise SchemaError(f"{path}.annotators", "at least one annotator is required")
    seen = set()
    for i, annotator in enumerate(annotators):
        if annotator in seen:
            raise SchemaError(f"{path}.annotators[{i}]", f"duplicate annotator id {annotator!r}")
        seen.add(annotator)
    raw_sets = _get(obj, path, "code_sets", list)
    code_sets = tuple(
        code_set_from_json(cs, f"{path}.code_sets[{i}]") for i, cs in enumerate(raw_sets)
    )
    for scope in SCOPES:
        if sum(1 for cs in code_sets if cs.scope == scope) > 1:
            raise SchemaError(f"{path}.code_sets", f"more than one {scope}-scope code set")
    if not any(cs.scope == "utterance" for cs in code_sets):
        raise SchemaError(f"{path}.code_sets", "an utterance-scope code set is required")
    return ProjectConfig(
        id=_get_str(obj, path, "id"),
        name=_get_str(obj, path, "name"),
        annotators=annotators,
        code_sets=code_sets,
        data_ref=_get_str(obj, path, "data_ref"),
        agreement_visibility=_get_enum(
            obj, path, "agreement_visibility", VISIBILITIES, required=False, default="creator_only"
        ),
    )


# ---------------------------------------------------------------------------
# Serialization (inverse of parsing; round-trips semantically)
# ---------------------------------------------------------------------------


def code_set_to_json(cfg: CodeSetConfig) -> dict:
    return {
        "id": cfg.id,
        "name": cfg.name,
        "scope": cfg.scope,
        "categories": [_category_to_json(c) for c in cfg.categories],
        "rules": [_rule_to_json(r) for r in cfg.rules],
        "wizards": {key: _wizard_to_json(flow) for key, flow in cfg.wizards.items()},
    }


def _category_to_json(cat: Category) -> dict:
    return {
        "id": cat.id,
        "name": cat.name,
        "kind": cat.kind,
        "options": [
            {"id": o.id, "display": o.display, "definition": o.definition} for o in cat.options
        ],
        "definition": cat.definition,
        "examples": list(cat.examples),
        "speaker_filter": cat.speaker_filter,
    }


def _rule_to_json(rule: DependencyRule) -> dict:
    effects = []
    for e in rule.effects:
        entry = {"effect": e.kind, "category_id": e.category_id}
        if e.option_id is not None:
            entry["option_id"] = e.option_id
        effects.append(entry)
    return {
        "trigger": {
            "category_id": rule.trigger.category_id,
            "option_id": rule.trigger.option_id,
            "selected": rule.trigger.selected,
        },
        "effects": effects,
    }


def _wizard_to_json(flow: WizardFlow) -> dict:
    return {"category_id": flow.category_id, "root": _wizard_node_to_json(flow.root)}


def _wizard_node_to_json(node: WizardNode) -> dict:
    if isinstance(node, Outcome):
        return {"option_id": node.option_id}
    return {
        "text": node.text,
        "yes": _wizard_node_to_json(node.yes),
        "no": _wizard_node_to_json(node.no),
    }


def project_to_json(cfg: ProjectConfig) -> dict:
    return {
        "id": cfg.id,
        "name": cfg.name,
        "annotators": list(cfg.annotators),
        "code_sets": [code_set_to_json(cs) for cs in cfg.code_sets],
        "data_ref": cfg.data_ref,
        "agreement_visibility": cfg.agreement_visibility,
    }


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_code_set(cfg: CodeSetConfig, path: str = "$") -> ValidationReport:
    """Check every referential and structural invariant, in document order."""
    report = ValidationReport()
    by_id: dict[str, Category] = {}
    for i, cat in enumerate(cfg.categories):
        cpath = f"{path}.categories[{i}]"
        if not cat.id:
            report.error(f"{cpath}.id", "category id must be non-empty")
        if cat.id in by_id:
            report.error(f"{cpath}.id", f"duplicate category id {cat.id!r}")
        else:
            by_id[cat.id] = cat
        if cat.kind == "text":
            if cat.options:
                report.error(f"{cpath}.options", "text category must not have options")
            if cat.id in cfg.wizards:
                report.error(f"{path}.wizards.{cat.id}", "text category cannot have a wizard")
        else:
            if not cat.options:
                report.error(f"{cpath}.options", f"{cat.kind} category needs at least one option")
            seen_opts = set()
            for j, opt in enumerate(cat.options):
                if not opt.id:
                    report.error(f"{cpath}.options[{j}].id", "option id must be non-empty")
                elif opt.id in seen_opts:
                    report.error(f"{cpath}.options[{j}].id", f"duplicate option id {opt.id!r}")
                seen_opts.add(opt.id)

    def check_ref(rpath: str, category_id: str, option_id: str | None) -> None:
        cat = by_id.get(category_id)
        if cat is None:
            report.error(f"{rpath}.category_id", f"unknown category {category_id!r}")
            return
        if option_id is not None and option_id not in cat.option_ids():
            report.error(
                f"{rpath}.option_id", f"unknown option {option_id!r} in category {category_id!r}"
            )

    # (trigger, category, option) -> effect kind, for cross-rule conflicts
    committed: dict[tuple, str] = {}
    for i, rule in enumerate(cfg.rules):
        rpath = f"{path}.rules[{i}]"
        check_ref(f"{rpath}.trigger", rule.trigger.category_id, rule.trigger.option_id)
        for j, effect in enumerate(rule.effects):
            epath = f"{rpath}.effects[{j}]"
            check_ref(epath, effect.category_id, effect.option_id)
            if effect.kind in ("auto_select", "hide_category"):
                if effect.category_id == rule.trigger.category_id:
                    report.error(
                        f"{epath}.category_id",
                        f"{effect.kind} must not target the trigger's own category",
                    )
            if effect.kind in ("disable_option", "auto_select"):
                trig = rule.trigger
                key = (
                    trig.category_id,
                    trig.option_id,
                    trig.selected,
                    effect.category_id,
                    effect.option_id,
                )
                prior = committed.get(key)
                if prior is not None and prior != effect.kind:
                    report.error(
                        epath,
                        f"option {effect.option_id!r} in category {effect.category_id!r} is both "
                        f"disabled and auto-selected on the same trigger",
                    )
                else:
                    committed[key] = effect.kind

    for key in _wizard_keys_in_order(cfg):
        wpath = f"{path}.wizards.{key}"
        flow = cfg.wizards[key]
        if flow.category_id != key:
            report.error(f"{wpath}.category_id", "wizard key and category_id must match")
        cat = by_id.get(flow.category_id)
        if cat is None:
            report.error(f"{wpath}.category_id", f"unknown category {flow.category_id!r}")
            continue
        if cat.kind == "text":
            continue  # reported above
        valid_options = set(cat.option_ids())
        for opath, outcome in _walk_outcomes(flow.root, f"{wpath}.root"):
            if outcome.option_id not in valid_options:
                report.error(
                    f"{opath}.option_id",
                    f"wizard outcome references unknown option {outcome.option_id!r}",
                )
    return report


def _wizard_keys_in_order(cfg: CodeSetConfig) -> list[str]:
    category_order = [c.id for c in cfg.categories]
    known = [cid for cid in category_order if cid in cfg.wizards]
    unknown = [key for key in cfg.wizards if key not in category_order]
    return known + unknown


def _walk_outcomes(node: WizardNode, path: str):
    stack = [(node, path)]
    while stack:
        current, cpath = stack.pop()
        if isinstance(current, Outcome):
            yield cpath, current
        else:
            stack.append((current.no, f"{cpath}.no"))
            stack.append((current.yes, f"{cpath}.yes"))


def wizard_depth(node: WizardNode) -> int:
    """Number of questions on the longest root-to-outcome path."""
    deepest = 0
    stack = [(node, 0)]
    while stack:
        current, depth = stack.pop()
        if isinstance(current, Outcome):
            deepest = max(deepest, depth)
        else:
            stack.append((current.yes, depth + 1))
            stack.append((current.no, depth + 1))
    return deepest


def detect_wizard_conflicts(cfg: CodeSetConfig, path: str = "$") -> ValidationReport:
    """Flag wizards that can never apply their outcome, and over-deep trees.

    An outcome is dead when its option is disabled (or its category hidden)
    in every reachable selection state. Reachability is checked by exhaustive
    enumeration of manual selections, ignoring speaker filters; configs whose
    state space exceeds STATE_ENUMERATION_LIMIT skip the dead-outcome check.
    """
    report = ValidationReport()
    states = None
    for key in _wizard_keys_in_order(cfg):
        wpath = f"{path}.wizards.{key}"
        flow = cfg.wizards[key]
        depth = wizard_depth(flow.root)
        if depth > MAX_WIZARD_DEPTH:
            report.error(f"{wpath}.root", f"wizard depth {depth} exceeds {MAX_WIZARD_DEPTH}")
            continue
        cat = cfg.category(flow.category_id)
        if cat is None or cat.kind == "text":
            continue  # validate_code_set reports these
        if not any(_disables_category(rule, cat.id) for rule in cfg.rules):
            continue
        if states is None:
            states = _reachable_states(cfg)
        if states is None:
            continue  # state space too large to enumerate
        visible_states = [s for s in states if cat.id not in s.hidden]
        if not visible_states:
            report.warn(f"{wpath}", f"category {cat.id!r} is hidden in every reachable state")
            continue
        valid_options = set(cat.option_ids())
        for opath, outcome in _walk_outcomes(flow.root, f"{wpath}.root"):
            if outcome.option_id not in valid_options:
                continue
            pair = (cat.id, outcome.option_id)
            if all(pair in s.disabled for s in visible_states):
                report.warn(
                    opath,
                    f"outcome option {outcome.option_id!r} in category {cat.id!r} is disabled "
                    f"in every reachable selection state",
                )
    return report


def _disables_category(rule: DependencyRule, category_id: str) -> bool:
    return any(
        e.kind in ("disable_option", "hide_category") and e.category_id == category_id
        for e in rule.effects
    )


@dataclass(frozen=True)
class _EnumeratedState:
    disabled: frozenset
    hidden: frozenset


def _reachable_states(cfg: CodeSetConfig):
    """All reachable rule-engine states over manual selections, or None if too many."""
    from . import rules  # deferred: rules imports config types
    from .errors import ContradictionError, DisabledOptionError

    per_category: list[list[tuple[str, "rules.SelectedValue | None"]]] = []
    total = 1
    for cat in cfg.categories:
        choices: list = [None]
        if cat.kind == "single":
            choices += [rules.SelectedValue.single(o) for o in cat.option_ids()]
        elif cat.kind == "multi":
            ids = cat.option_ids()
            subsets = []
            for mask in range(1, 1 << len(ids)):
                subsets.append(
                    rules.SelectedValue.multi(o for k, o in enumerate(ids) if mask >> k & 1)
                )
            choices += subsets
        per_category.append([(cat.id, value) for value in choices])
        total *= len(choices)
        if total > STATE_ENUMERATION_LIMIT:
            return None

    states = []
    seen = set()

    def expand(index: int, selections: dict) -> None:
        if index == len(per_category):
            try:
                effective = rules.effective_state(cfg, selections, speaker=None)
            except (ContradictionError, DisabledOptionError):
                return  # unreachable: the cascade rejects this combination
            if any(cid in effective.hidden_categories for cid in selections):
                return  # hiding would have cleared the selection first
            key = (effective.disabled_options, frozenset(effective.hidden_categories))
            if key not in seen:
                seen.add(key)
                states.append(
                    _EnumeratedState(
                        disabled=effective.disabled_options,
                        hidden=frozenset(effective.hidden_categories),
                    )
                )
            return
        for cid, value in per_category[index]:
            if value is None:
                expand(index + 1, selections)
            else:
                entry = rules.SelectionEntry(value=value, origin=rules.MANUAL)
                expand(index + 1, {**selections, cid: entry})

    expand(0, {})
    return states
