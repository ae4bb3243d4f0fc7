// Transcript pane: one row per utterance with a completion badge. Incomplete
// rows carry an exclamation mark, finished ones a checkmark.

import type { ConversationView } from "./api.js";

export function renderTranscript(
  view: ConversationView,
  focusedIndex: number,
  onFocus: (index: number) => void,
): HTMLElement {
  const pane = document.createElement("section");
  pane.className = "transcript";

  const list = document.createElement("ol");
  list.className = "transcript-list";
  view.utterances.forEach((utt, index) => {
    const item = document.createElement("li");
    item.className = "utterance" + (index === focusedIndex ? " focused" : "");
    item.dataset.utteranceId = utt.id;

    const badge = document.createElement("span");
    badge.className = utt.complete ? "badge badge-complete" : "badge badge-incomplete";
    badge.textContent = utt.complete ? "✓" : "!";
    badge.title = utt.complete ? "all labels set" : "labels missing";

    const speaker = document.createElement("span");
    speaker.className = "speaker";
    speaker.textContent = utt.speaker;

    const text = document.createElement("span");
    text.className = "utterance-text";
    text.textContent = utt.text;

    item.append(badge, speaker, text);
    item.addEventListener("click", () => onFocus(index));
    list.append(item);
  });
  pane.append(list);
  return pane;
}
