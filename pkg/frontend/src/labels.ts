// Labeling panel: one block per visible category. Disabled options render
// greyed out with no click handler, auto-selected options carry a marker,
// and the documentation toggle folds definitions in and out client-side.

import type { Category, CodeSet, EffectiveState, SelectionMap } from "./api.js";
import {
  isAutoSelected,
  isOptionDisabled,
  isOptionSelected,
  textValue,
  visibleCategories,
} from "./state.js";

export type LabelPanelProps = {
  codeSet: CodeSet;
  selections: SelectionMap;
  state: EffectiveState;
  showDocs: boolean;
  focusedCategory: string | null;
  title: string;
};

export type LabelPanelHooks = {
  onToggleOption(category: Category, optionId: string, nextSelected: boolean): void;
  onTextChange(category: Category, text: string): void;
  onOpenWizard(categoryId: string): void;
  onToggleDocs(): void;
  onFocusCategory(categoryId: string): void;
  // absent on panels whose scope has no previous-label lookup
  onViewPrevious?: (categoryId: string, optionId: string) => void;
};

export function renderLabelPanel(props: LabelPanelProps, hooks: LabelPanelHooks): HTMLElement {
  const panel = document.createElement("section");
  panel.className = "label-panel";

  const head = document.createElement("header");
  head.className = "panel-head";
  const title = document.createElement("h2");
  title.textContent = props.title;
  const docsToggle = document.createElement("button");
  docsToggle.type = "button";
  docsToggle.className = "docs-toggle";
  docsToggle.textContent = props.showDocs ? "Hide documentation" : "Show documentation";
  docsToggle.addEventListener("click", () => hooks.onToggleDocs());
  head.append(title, docsToggle);
  panel.append(head);

  for (const category of visibleCategories(props.codeSet, props.state)) {
    panel.append(renderCategory(category, props, hooks));
  }
  return panel;
}

function renderCategory(
  category: Category,
  props: LabelPanelProps,
  hooks: LabelPanelHooks,
): HTMLElement {
  const block = document.createElement("div");
  block.className = "category" + (props.focusedCategory === category.id ? " focused" : "");
  block.dataset.categoryId = category.id;

  const head = document.createElement("div");
  head.className = "category-head";
  const name = document.createElement("h3");
  name.textContent = category.name;
  name.addEventListener("click", () => hooks.onFocusCategory(category.id));
  head.append(name);
  if (category.id in props.codeSet.wizards) {
    const wizardButton = document.createElement("button");
    wizardButton.type = "button";
    wizardButton.className = "wizard-open";
    wizardButton.textContent = "?";
    wizardButton.title = "not sure? answer a few yes/no questions";
    wizardButton.addEventListener("click", () => hooks.onOpenWizard(category.id));
    head.append(wizardButton);
  }
  block.append(head);

  if (props.showDocs && category.definition) {
    const docs = document.createElement("p");
    docs.className = "category-docs";
    docs.textContent = category.definition;
    block.append(docs);
    for (const example of category.examples) {
      const ex = document.createElement("p");
      ex.className = "category-example";
      ex.textContent = example;
      block.append(ex);
    }
  }

  if (category.kind === "text") {
    block.append(renderTextControl(category, props, hooks));
  } else {
    category.options.forEach((option, position) => {
      block.append(renderOption(category, option.id, option.display, option.definition, position, props, hooks));
    });
  }
  return block;
}

function renderOption(
  category: Category,
  optionId: string,
  display: string,
  definition: string,
  position: number,
  props: LabelPanelProps,
  hooks: LabelPanelHooks,
): HTMLElement {
  const disabled = isOptionDisabled(props.state, category.id, optionId);
  const selected = isOptionSelected(props.selections, category.id, optionId);
  const auto = isAutoSelected(props.state, category.id, optionId);

  const row = document.createElement("div");
  row.className = "option" + (disabled ? " disabled" : "") + (selected ? " selected" : "");
  row.dataset.optionId = optionId;

  const pick = document.createElement("button");
  pick.type = "button";
  pick.className = "option-pick";
  pick.disabled = disabled;
  const mark =
    category.kind === "single" ? (selected ? "◉" : "○") : selected ? "☑" : "☐";
  pick.textContent = `${mark} ${display}`;
  if (position < 9) {
    pick.dataset.shortcut = String(position + 1);
  }
  if (!disabled) {
    pick.addEventListener("click", () => hooks.onToggleOption(category, optionId, !selected));
  }
  row.append(pick);

  if (auto) {
    const marker = document.createElement("span");
    marker.className = "auto-marker";
    marker.textContent = "auto";
    marker.title = "set by a rule or the wizard";
    row.append(marker);
  }

  if (props.showDocs && definition) {
    const docs = document.createElement("span");
    docs.className = "option-docs";
    docs.textContent = definition;
    row.append(docs);
  }

  const onViewPrevious = hooks.onViewPrevious;
  if (onViewPrevious) {
    const viewPrevious = document.createElement("button");
    viewPrevious.type = "button";
    viewPrevious.className = "view-previous hidden";
    viewPrevious.textContent = "View Previous";
    viewPrevious.addEventListener("click", (event) => {
      event.stopPropagation();
      onViewPrevious(category.id, optionId);
    });
    row.append(viewPrevious);
    row.addEventListener("mouseenter", () => viewPrevious.classList.remove("hidden"));
    row.addEventListener("mouseleave", () => viewPrevious.classList.add("hidden"));
  }
  return row;
}

function renderTextControl(
  category: Category,
  props: LabelPanelProps,
  hooks: LabelPanelHooks,
): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "text-control";
  const input = document.createElement("textarea");
  input.value = textValue(props.selections, category.id);
  input.placeholder = "free-text note";
  const save = document.createElement("button");
  save.type = "button";
  save.className = "text-save";
  save.textContent = "Save note";
  save.addEventListener("click", () => hooks.onTextChange(category, input.value));
  wrap.append(input, save);
  return wrap;
}
