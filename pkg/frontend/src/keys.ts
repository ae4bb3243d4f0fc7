// Keyboard shortcuts: n/p move between utterances, N/P between conversations,
// 1-9 pick the nth option of the focused category, ? opens the wizard.
// Lookup is case sensitive because n and N are different bindings.

export type KeyBindings = Record<string, () => void>;

function isTypingTarget(target: EventTarget | null): boolean {
  return (
    target instanceof HTMLInputElement ||
    target instanceof HTMLTextAreaElement ||
    (target instanceof HTMLElement && target.isContentEditable)
  );
}

export function keyHandler(bindings: KeyBindings): (event: KeyboardEvent) => void {
  return (event) => {
    if (event.ctrlKey || event.metaKey || event.altKey) return;
    if (isTypingTarget(event.target)) return;
    const action = bindings[event.key];
    if (action) {
      event.preventDefault();
      action();
    }
  };
}

export function bindKeys(target: EventTarget, bindings: KeyBindings): () => void {
  const handler = keyHandler(bindings) as EventListener;
  target.addEventListener("keydown", handler);
  return () => target.removeEventListener("keydown", handler);
}
