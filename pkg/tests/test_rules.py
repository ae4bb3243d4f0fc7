"""Rule engine behavior: cascades, edits, layering, and engine/oracle parity."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cal import rules
from cal.errors import (
    ContradictionError,
    DisabledOptionError,
    HiddenCategoryError,
    NotFoundError,
    SchemaError,
)
from cal.rules import SelectedValue, SelectionEntry

from .conftest import code_set, multi, rule, single, text
from .oracles import describe_engine_output, oracle_apply, oracle_fixed_point
from .strategies import code_sets_with_edits, grid_code_sets, grid_edit_sequences


def sel(option_id):
    return SelectedValue.single(option_id)


def entry(option_id, origin="manual"):
    return SelectionEntry(value=sel(option_id), origin=origin)


# ---------------------------------------------------------------------------
# Applicability and visibility
# ---------------------------------------------------------------------------


def test_speaker_filter_limits_applicable_categories(grice):
    human = rules.applicable_categories(grice, speaker="human")
    bot = rules.applicable_categories(grice, speaker="bot")
    assert "topic_change" in human
    assert "topic_change" not in bot
    assert bot == ["relevance", "quantity", "manner"]


def test_no_speaker_means_no_filtering(grice):
    assert rules.applicable_categories(grice) == [
        "relevance",
        "quantity",
        "manner",
        "topic_change",
    ]


def test_scope_mismatch_yields_no_categories(grice):
    assert rules.applicable_categories(grice, scope="conversation") == []


def test_hidden_category_removed_from_visible():
    cs = code_set(
        categories=[single("a", ["x", "y"]), single("b", ["x", "y"])],
        rules=[rule("a", "y", [("hide_category", "b", None)])],
    )
    _, state = rules.cascade(cs, {"a": entry("y")})
    assert state.visible_categories == ("a",)
    assert state.hidden_categories == frozenset({"b"})


# ---------------------------------------------------------------------------
# Cascade fundamentals
# ---------------------------------------------------------------------------


def test_skip_cascade_auto_selects_downstream(skip_cascade_cs):
    selections, state = rules.apply_selection(
        skip_cascade_cs, {}, "gate", sel("not_applicable")
    )
    assert state.auto_selected == {("tone", "skip"), ("clarity", "skip")}
    assert selections["tone"].origin == "auto_rule"
    assert selections["clarity"].origin == "auto_rule"
    assert state.complete is True


def test_skip_cascade_retracts_when_trigger_removed(skip_cascade_cs):
    selections, _ = rules.apply_selection(skip_cascade_cs, {}, "gate", sel("not_applicable"))
    after, state = rules.apply_selection(
        skip_cascade_cs, selections, "gate", sel("not_applicable"), selected=False
    )
    assert after == {}
    assert state.auto_selected == frozenset()
    assert state.complete is False


def test_manual_choice_survives_where_auto_would_land(skip_cascade_cs):
    selections, _ = rules.apply_selection(skip_cascade_cs, {}, "tone", sel("good"))
    selections, state = rules.apply_selection(
        skip_cascade_cs, selections, "gate", sel("not_applicable")
    )
    assert selections["tone"].origin == "manual"
    assert selections["tone"].value.option_id == "good"
    assert ("tone", "skip") not in state.auto_selected
    assert ("clarity", "skip") in state.auto_selected


def test_chained_rules_fire_transitively():
    cs = code_set(
        categories=[single("a", ["x"]), single("b", ["x"]), single("c", ["x"])],
        rules=[
            rule("a", "x", [("auto_select", "b", "x")]),
            rule("b", "x", [("auto_select", "c", "x")]),
        ],
    )
    selections, state = rules.apply_selection(cs, {}, "a", sel("x"))
    assert set(selections) == {"a", "b", "c"}
    assert state.auto_selected == {("b", "x"), ("c", "x")}


def test_negative_trigger_fires_until_option_selected():
    cs = code_set(
        categories=[single("a", ["x", "y"]), single("b", ["x", "y"])],
        rules=[rule("a", "x", [("disable_option", "b", "y")], selected=False)],
    )
    _, state = rules.cascade(cs, {})
    assert ("b", "y") in state.disabled_options
    _, state = rules.cascade(cs, {"a": entry("x")})
    assert ("b", "y") not in state.disabled_options


def test_trigger_ignored_when_its_category_is_hidden():
    cs = code_set(
        categories=[single("a", ["x"]), single("b", ["x"]), single("c", ["x", "y"])],
        rules=[
            rule("a", "x", [("hide_category", "b", None)]),
            rule("b", "x", [("disable_option", "c", "y")], selected=False),
        ],
    )
    # With b visible and unselected, the negative trigger disables c.y.
    _, state = rules.cascade(cs, {})
    assert ("c", "y") in state.disabled_options
    # Hiding b silences its triggers entirely.
    _, state = rules.cascade(cs, {"a": entry("x")})
    assert ("c", "y") not in state.disabled_options


def test_hide_clears_persisted_entry_destructively():
    cs = code_set(
        categories=[single("a", ["x", "y"]), single("b", ["x", "y"])],
        rules=[rule("a", "y", [("hide_category", "b", None)])],
    )
    selections = {"b": entry("x")}
    selections, _ = rules.apply_selection(cs, selections, "a", sel("y"))
    assert "b" not in selections
    # Unhiding does not resurrect the cleared value.
    selections, state = rules.apply_selection(cs, selections, "a", sel("y"), selected=False)
    assert "b" not in selections
    assert "b" in state.visible_categories


def test_auto_single_first_rule_wins():
    cs = code_set(
        categories=[single("a", ["x"]), single("b", ["x", "y"])],
        rules=[
            rule("a", "x", [("auto_select", "b", "x")]),
            rule("a", "x", [("auto_select", "b", "y")]),
        ],
    )
    selections, _ = rules.apply_selection(cs, {}, "a", sel("x"))
    assert selections["b"].value.option_id == "x"


def test_auto_multi_accumulates_union():
    cs = code_set(
        categories=[single("a", ["x"]), multi("b", ["x", "y", "z"])],
        rules=[
            rule("a", "x", [("auto_select", "b", "y")]),
            rule("a", "x", [("auto_select", "b", "x")]),
        ],
    )
    selections, state = rules.apply_selection(cs, {}, "a", sel("x"))
    assert selections["b"].value.option_ids == ("x", "y")
    assert state.auto_selected == {("b", "x"), ("b", "y")}


def test_auto_select_skips_disabled_option():
    cs = code_set(
        categories=[single("a", ["x"]), single("b", ["x", "y"])],
        rules=[
            rule("a", "x", [("disable_option", "b", "y")]),
            rule("a", "x", [("auto_select", "b", "y")]),
        ],
    )
    selections, state = rules.apply_selection(cs, {}, "a", sel("x"))
    assert "b" not in selections
    assert ("b", "y") in state.disabled_options


def test_contradiction_when_auto_conflicts_with_later_disable():
    cs = code_set(
        categories=[single("a", ["x"]), single("b", ["x", "y"])],
        rules=[
            rule("a", "x", [("auto_select", "b", "y")]),
            rule("a", "x", [("disable_option", "b", "y")]),
        ],
    )
    with pytest.raises(ContradictionError):
        rules.apply_selection(cs, {}, "a", sel("x"))


def test_persisted_selection_disabled_by_new_edit_is_rejected():
    cs = code_set(
        categories=[single("a", ["x", "y"]), single("b", ["x", "y"])],
        rules=[rule("a", "x", [("disable_option", "b", "y")])],
    )
    selections, _ = rules.apply_selection(cs, {}, "b", sel("y"))
    before = dict(selections)
    with pytest.raises(DisabledOptionError):
        rules.apply_selection(cs, selections, "a", sel("x"))
    assert selections == before  # input untouched


def test_selecting_currently_disabled_option_is_rejected():
    cs = code_set(
        categories=[single("a", ["x", "y"]), single("b", ["x", "y"])],
        rules=[rule("a", "x", [("disable_option", "b", "y")])],
    )
    selections, _ = rules.apply_selection(cs, {}, "a", sel("x"))
    with pytest.raises(DisabledOptionError):
        rules.apply_selection(cs, selections, "b", sel("y"))


def test_editing_hidden_category_is_rejected():
    cs = code_set(
        categories=[single("a", ["x", "y"]), single("b", ["x", "y"])],
        rules=[rule("a", "y", [("hide_category", "b", None)])],
    )
    selections, _ = rules.apply_selection(cs, {}, "a", sel("y"))
    with pytest.raises(HiddenCategoryError):
        rules.apply_selection(cs, selections, "b", sel("x"))


def test_unknown_category_and_option_edits():
    cs = code_set(categories=[single("a", ["x"])])
    with pytest.raises(NotFoundError):
        rules.apply_selection(cs, {}, "nope", sel("x"))
    with pytest.raises(NotFoundError):
        rules.apply_selection(cs, {}, "a", sel("nope"))
    with pytest.raises(SchemaError):
        rules.apply_selection(cs, {}, "a", SelectedValue.multi(("x",)))


# ---------------------------------------------------------------------------
# Edits on plain values
# ---------------------------------------------------------------------------


def test_multi_select_unions_and_deselect_removes():
    cs = code_set(categories=[multi("tags", ["p", "q", "r"])])
    selections, _ = rules.apply_selection(cs, {}, "tags", SelectedValue.multi(("p",)))
    selections, _ = rules.apply_selection(cs, selections, "tags", SelectedValue.multi(("q",)))
    assert selections["tags"].value.option_ids == ("p", "q")
    selections, _ = rules.apply_selection(
        cs, selections, "tags", SelectedValue.multi(("p",)), selected=False
    )
    assert selections["tags"].value.option_ids == ("q",)
    selections, state = rules.apply_selection(
        cs, selections, "tags", SelectedValue.multi(("q",)), selected=False
    )
    assert selections == {}
    assert state.complete is False


def test_single_replacement_and_deselect():
    cs = code_set(categories=[single("a", ["x", "y"])])
    selections, _ = rules.apply_selection(cs, {}, "a", sel("x"))
    selections, _ = rules.apply_selection(cs, selections, "a", sel("y"))
    assert selections["a"].value.option_id == "y"
    # Deselecting an option that is not selected changes nothing.
    unchanged, _ = rules.apply_selection(cs, selections, "a", sel("x"), selected=False)
    assert unchanged == selections
    cleared, _ = rules.apply_selection(cs, selections, "a", sel("y"), selected=False)
    assert cleared == {}


def test_text_values_and_completeness():
    cs = code_set(categories=[text("note")])
    selections, state = rules.apply_selection(
        cs, {}, "note", SelectedValue.text_value("needs review")
    )
    assert state.complete is True
    selections, state = rules.apply_selection(
        cs, selections, "note", SelectedValue.text_value("   ")
    )
    assert selections == {}
    assert state.complete is False


def test_blank_select_clears_entry():
    cs = code_set(categories=[multi("tags", ["p"])])
    selections, _ = rules.apply_selection(cs, {}, "tags", SelectedValue.multi(("p",)))
    selections, _ = rules.apply_selection(cs, selections, "tags", SelectedValue.multi(()))
    assert selections == {}


def test_wizard_outcome_enters_as_auto_wizard(grice):
    selections, state = rules.apply_wizard_outcome(
        grice, {}, "relevance", "no", speaker="bot"
    )
    assert selections["relevance"].origin == "auto_wizard"
    assert ("relevance", "no") in state.auto_selected


def test_strip_derived_keeps_manual_and_wizard_entries():
    selections = {
        "a": entry("x", origin="manual"),
        "b": entry("x", origin="auto_rule"),
        "c": entry("x", origin="auto_wizard"),
    }
    assert set(rules.strip_derived(selections)) == {"a", "c"}


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------


def test_cascade_is_idempotent_on_grid():
    for cfg in grid_code_sets():
        for seq in grid_edit_sequences(2):
            selections = {}
            try:
                for cid, value, on in seq:
                    selections, _ = rules.apply_selection(cfg, selections, cid, value, on)
                # negative triggers can contradict even on the empty state
                once, state_once = rules.cascade(cfg, selections)
            except (DisabledOptionError, HiddenCategoryError, ContradictionError):
                continue
            twice, state_twice = rules.cascade(cfg, once)
            assert once == twice
            assert state_once == state_twice


def test_determinism_under_selection_insertion_order():
    cs = code_set(
        categories=[single("a", ["x", "y"]), single("b", ["x", "y"]), multi("c", ["x", "y"])],
        rules=[
            rule("a", "x", [("auto_select", "c", "y")]),
            rule("b", "y", [("disable_option", "c", "x")]),
        ],
    )
    fwd = {"a": entry("x"), "b": entry("y")}
    rev = {"b": entry("y"), "a": entry("x")}
    sel_f, st_f = rules.cascade(cs, fwd)
    sel_r, st_r = rules.cascade(cs, rev)
    assert st_f == st_r
    assert sel_f == sel_r
    assert list(sel_f) == list(sel_r)  # config order, not insertion order


def test_long_chain_terminates():
    n = 12
    cats = [single(f"c{i}", ["x"]) for i in range(n)]
    chain = [rule(f"c{i}", "x", [("auto_select", f"c{i + 1}", "x")]) for i in range(n - 1)]
    cs = code_set(categories=cats, rules=chain)
    selections, state = rules.apply_selection(cs, {}, "c0", sel("x"))
    assert len(selections) == n
    assert state.complete is True


@given(code_sets_with_edits(max_len=4))
def test_engine_matches_oracle(case):
    cfg, edits = case
    impl_sel: dict = {}
    oracle_sel: dict = {}
    for cid, value, on in edits:
        impl_err = oracle_err = None
        try:
            impl_sel, impl_state = rules.apply_selection(cfg, impl_sel, cid, value, on)
        except Exception as exc:  # noqa: BLE001 - compared by class below
            impl_err = exc
        try:
            oracle_sel, oracle_state = oracle_apply(cfg, oracle_sel, cid, value, on)
        except Exception as exc:  # noqa: BLE001
            oracle_err = exc
        if impl_err is not None or oracle_err is not None:
            assert type(impl_err) is type(oracle_err), (impl_err, oracle_err)
            continue
        assert describe_engine_output(impl_sel, impl_state) == oracle_state


@given(code_sets_with_edits(max_len=3, allow_hide=False, allow_text=False))
def test_exact_inverses_restore_initial_state(case):
    """Applying each successful edit's exact inverse, in reverse order,
    returns the persistent layer to its starting point. Hides are excluded:
    they clear persisted values by design and are not invertible."""
    cfg, edits = case
    selections: dict = {}
    undo = []
    for cid, value, on in edits:
        prior = rules.strip_derived(selections).get(cid)
        try:
            selections, _ = rules.apply_selection(cfg, selections, cid, value, on)
        except (DisabledOptionError, HiddenCategoryError, ContradictionError):
            continue
        undo.append((cid, prior))

    ok = True
    for cid, prior in reversed(undo):
        current = rules.strip_derived(selections).get(cid)
        try:
            selections = _restore(cfg, selections, cid, current, prior)
        except (DisabledOptionError, HiddenCategoryError, ContradictionError):
            ok = False
            break
    if ok:
        assert rules.strip_derived(selections) == {}


def _restore(cfg, selections, cid, current, prior):
    """Bring category cid from its current entry back to `prior`."""
    cat = cfg.category(cid)
    if current is not None and (prior is None or cat.kind == "multi"):
        drop = current.value
        if prior is not None:
            extra = tuple(o for o in current.value.options if o not in prior.value.options)
            drop = SelectedValue.multi(extra)
        if drop.options or cat.kind == "text":
            selections, _ = rules.apply_selection(cfg, selections, cid, drop, False)
    if prior is not None:
        add = prior.value
        if cat.kind == "multi":
            now = rules.strip_derived(selections).get(cid)
            have = now.value.options if now else ()
            add = SelectedValue.multi(tuple(o for o in prior.value.options if o not in have))
        if add.options or (cat.kind == "text" and not add.is_blank):
            selections, _ = rules.apply_selection(
                cfg, selections, cid, add, True, origin=prior.origin
            )
    return selections


@given(code_sets_with_edits(max_len=4))
@settings(max_examples=40)
def test_safety_no_selected_disabled_pair_after_success(case):
    cfg, edits = case
    selections: dict = {}
    for cid, value, on in edits:
        try:
            selections, state = rules.apply_selection(cfg, selections, cid, value, on)
        except (DisabledOptionError, HiddenCategoryError, ContradictionError):
            continue
        for sel_cid, e in selections.items():
            for oid in e.value.options:
                assert (sel_cid, oid) not in state.disabled_options


def test_grid_oracle_smoke():
    """Light grid pass; the full sweep runs in the acceptance suite."""
    configs = grid_code_sets()
    assert len(configs) > 20
    for cfg in configs[:12]:
        for seq in grid_edit_sequences(2):
            _compare_run(cfg, seq)


def _compare_run(cfg, seq):
    impl_sel: dict = {}
    oracle_sel: dict = {}
    for cid, value, on in seq:
        impl_err = oracle_err = None
        try:
            impl_sel, impl_state = rules.apply_selection(cfg, impl_sel, cid, value, on)
        except Exception as exc:  # noqa: BLE001
            impl_err = exc
        try:
            oracle_sel, oracle_state = oracle_apply(cfg, oracle_sel, cid, value, on)
        except Exception as exc:  # noqa: BLE001
            oracle_err = exc
        if impl_err is not None or oracle_err is not None:
            assert type(impl_err) is type(oracle_err), (cfg.rules, seq, impl_err, oracle_err)
            continue
        assert describe_engine_output(impl_sel, impl_state) == oracle_state, (cfg.rules, seq)


def test_fixed_point_matches_oracle_on_handcrafted_layers(skip_cascade_cs):
    persistent = {
        "gate": entry("not_applicable"),
        "tone": SelectionEntry(value=sel("good"), origin="auto_wizard"),
    }
    impl_sel, impl_state = rules.cascade(skip_cascade_cs, persistent)
    oracle_state = oracle_fixed_point(skip_cascade_cs, persistent)
    assert describe_engine_output(impl_sel, impl_state) == oracle_state
