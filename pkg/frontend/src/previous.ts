// "View Previous" comparison: the latest utterance this annotator gave the
// same label, side by side with the current one, below the labeling panel.

import type { Category, CodeSet, PreviousPayload, SelectionMap, Utterance } from "./api.js";

function displayOf(category: Category, optionId: string): string {
  const option = category.options.find((o) => o.id === optionId);
  return option ? option.display : optionId;
}

function describeLabels(labels: SelectionMap, codeSet: CodeSet): string[] {
  const lines: string[] = [];
  for (const category of codeSet.categories) {
    const entry = labels[category.id];
    if (!entry) continue;
    if ("single" in entry.value) {
      lines.push(`${category.name}: ${displayOf(category, entry.value.single)}`);
    } else if ("multi" in entry.value) {
      const parts = entry.value.multi.map((o) => displayOf(category, o));
      lines.push(`${category.name}: ${parts.join(", ")}`);
    } else {
      lines.push(`${category.name}: ${entry.value.text}`);
    }
  }
  return lines;
}

function renderSide(
  caption: string,
  conversationId: string,
  utterance: Utterance,
  labels: SelectionMap,
  codeSet: CodeSet,
): HTMLElement {
  const side = document.createElement("div");
  side.className = "comparison-side";

  const head = document.createElement("h4");
  head.textContent = `${caption} (${conversationId})`;

  const text = document.createElement("blockquote");
  text.textContent = `${utterance.speaker}: ${utterance.text}`;

  const list = document.createElement("ul");
  for (const line of describeLabels(labels, codeSet)) {
    const item = document.createElement("li");
    item.textContent = line;
    list.append(item);
  }
  side.append(head, text, list);
  return side;
}

export function renderComparison(
  payload: PreviousPayload | null,
  codeSet: CodeSet,
  onClose: () => void,
): HTMLElement {
  const pane = document.createElement("section");
  pane.className = "comparison";

  const head = document.createElement("header");
  const title = document.createElement("h3");
  title.textContent = "Previous use of this label";
  const close = document.createElement("button");
  close.type = "button";
  close.className = "comparison-close";
  close.textContent = "Close";
  close.addEventListener("click", onClose);
  head.append(title, close);
  pane.append(head);

  if (payload === null) {
    const empty = document.createElement("p");
    empty.className = "comparison-empty";
    empty.textContent = "No earlier utterance carries this label yet.";
    pane.append(empty);
    return pane;
  }

  const grid = document.createElement("div");
  grid.className = "comparison-grid";
  grid.append(
    renderSide(
      "Previous",
      payload.previous.conversation_id,
      payload.previous.utterance,
      payload.previous.labels,
      codeSet,
    ),
    renderSide(
      "Current",
      payload.current.conversation_id,
      payload.current.utterance,
      payload.current.labels,
      codeSet,
    ),
  );
  pane.append(grid);
  return pane;
}
