// Guidance dialog: one yes/no question at a time, plus the toast shown when
// a finished walk selects a label automatically.

export type WizardHooks = {
  onAnswer(answer: boolean): void;
  onBack(): void;
  onCancel(): void;
};

function button(className: string, label: string, onClick: () => void): HTMLButtonElement {
  const el = document.createElement("button");
  el.type = "button";
  el.className = className;
  el.textContent = label;
  el.addEventListener("click", onClick);
  return el;
}

export function renderWizardModal(
  categoryName: string,
  question: string,
  canGoBack: boolean,
  hooks: WizardHooks,
): HTMLElement {
  const overlay = document.createElement("div");
  overlay.className = "wizard-overlay";

  const modal = document.createElement("div");
  modal.className = "wizard-modal";
  modal.setAttribute("role", "dialog");
  modal.setAttribute("aria-modal", "true");

  const title = document.createElement("h3");
  title.textContent = `Guide: ${categoryName}`;

  const q = document.createElement("p");
  q.className = "wizard-question";
  q.textContent = question;

  const controls = document.createElement("div");
  controls.className = "wizard-controls";
  const back = button("wizard-back", "Back", () => hooks.onBack());
  back.disabled = !canGoBack;
  controls.append(
    button("wizard-yes", "Yes", () => hooks.onAnswer(true)),
    button("wizard-no", "No", () => hooks.onAnswer(false)),
    back,
    button("wizard-cancel", "Cancel", () => hooks.onCancel()),
  );

  modal.append(title, q, controls);
  overlay.append(modal);
  return overlay;
}

export function renderToast(message: string): HTMLElement {
  const toast = document.createElement("div");
  toast.className = "toast";
  toast.setAttribute("role", "status");
  toast.textContent = message;
  return toast;
}
