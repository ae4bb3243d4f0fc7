// View-model helpers. Control state is read straight off the last server
// response: the client never recomputes rule effects on its own, it only
// looks pairs up in the EffectiveState the service returned.

import type {
  Category,
  CodeSet,
  ConversationView,
  EffectiveState,
  LabelBlock,
  SaveResponse,
  SelectionMap,
} from "./api.js";

function hasPair(pairs: [string, string][], categoryId: string, optionId: string): boolean {
  return pairs.some(([c, o]) => c === categoryId && o === optionId);
}

export function isOptionDisabled(
  state: EffectiveState,
  categoryId: string,
  optionId: string,
): boolean {
  return hasPair(state.disabled_options, categoryId, optionId);
}

export function isAutoSelected(
  state: EffectiveState,
  categoryId: string,
  optionId: string,
): boolean {
  return hasPair(state.auto_selected, categoryId, optionId);
}

export function isOptionSelected(
  selections: SelectionMap,
  categoryId: string,
  optionId: string,
): boolean {
  const entry = selections[categoryId];
  if (!entry) return false;
  if ("single" in entry.value) return entry.value.single === optionId;
  if ("multi" in entry.value) return entry.value.multi.includes(optionId);
  return false;
}

export function textValue(selections: SelectionMap, categoryId: string): string {
  const entry = selections[categoryId];
  return entry && "text" in entry.value ? entry.value.text : "";
}

export function visibleCategories(codeSet: CodeSet, state: EffectiveState): Category[] {
  const visible = new Set(state.visible_categories);
  return codeSet.categories.filter((c) => visible.has(c.id));
}

// One unit per utterance, plus one for the conversation-level block when the
// project has one. Completion flags come from the server.
export function conversationProgress(view: ConversationView): { done: number; total: number } {
  let done = view.utterances.filter((u) => u.complete).length;
  let total = view.utterances.length;
  if (view.conversation_labels) {
    total += 1;
    if (view.conversation_labels.complete) done += 1;
  }
  return { done, total };
}

export function progressPercent(done: number, total: number): string {
  if (total === 0) return "100%";
  const tenths = Math.floor((done / total) * 1000) / 10;
  return Number.isInteger(tenths) ? `${tenths.toFixed(0)}%` : `${tenths}%`;
}

export function utterancesComplete(view: ConversationView): boolean {
  return view.utterances.every((u) => u.complete);
}

export function canAdvanceConversation(view: ConversationView): boolean {
  const { done, total } = conversationProgress(view);
  return done === total;
}

// merge a server acknowledgment into the block it was saved against
export function withSave<T extends LabelBlock>(block: T, saved: SaveResponse): T {
  return {
    ...block,
    selections: saved.selections,
    versions: saved.versions,
    state: saved.state,
    complete: saved.state.complete,
  };
}
