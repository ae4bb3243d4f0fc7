// App shell: hash routing, data loading, the render loop, and the mutation
// queue. Label state is only ever mutated from server acknowledgments; user
// input during an in-flight request is queued behind it, never rendered
// optimistically.

import { ApiError, createApi } from "./api.js";
import type {
  Api,
  Category,
  ConversationView,
  LabelEdit,
  PreviousPayload,
  ProjectInfo,
  SaveResponse,
  StatusPage,
  UtteranceView,
  WizardStep,
} from "./api.js";
import { bindKeys } from "./keys.js";
import { renderLabelPanel } from "./labels.js";
import type { LabelPanelHooks } from "./labels.js";
import { renderComparison } from "./previous.js";
import {
  canAdvanceConversation,
  conversationProgress,
  isOptionDisabled,
  isOptionSelected,
  progressPercent,
  utterancesComplete,
  visibleCategories,
  withSave,
} from "./state.js";
import { renderStatusPage } from "./status.js";
import { renderTranscript } from "./transcript.js";
import { renderToast, renderWizardModal } from "./wizardui.js";

export type Route =
  | { kind: "projects" }
  | { kind: "label"; projectId: string; conversationId: string | null; utteranceId: string | null }
  | { kind: "status"; projectId: string };

export function parseRoute(hash: string): Route {
  const parts = hash.replace(/^#\/?/, "").split("/").filter(Boolean);
  if (parts[0] === "p" && parts[1]) {
    const projectId = decodeURIComponent(parts[1]);
    if (parts[2] === "status") {
      return { kind: "status", projectId };
    }
    if (parts[2] === "c" && parts[3]) {
      const conversationId = decodeURIComponent(parts[3]);
      const utteranceId = parts[4] === "u" && parts[5] ? decodeURIComponent(parts[5]) : null;
      return { kind: "label", projectId, conversationId, utteranceId };
    }
    return { kind: "label", projectId, conversationId: null, utteranceId: null };
  }
  return { kind: "projects" };
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

type WizardUiState = {
  sessionId: string;
  categoryId: string;
  utteranceId: string | null;
  question: string;
  depth: number;
};

export class App {
  private route: Route = { kind: "projects" };
  private projects: string[] = [];
  private info: ProjectInfo | null = null;
  private view: ConversationView | null = null;
  private statusData: StatusPage | null = null;
  private utteranceIndex = 0;
  private focusCategory: string | null = null;
  private showDocs = true;
  private wizard: WizardUiState | null = null;
  private comparison: { payload: PreviousPayload | null } | null = null;
  private toast: string | null = null;
  private toastTimer: ReturnType<typeof setTimeout> | null = null;
  private banner: string | null = null;
  private chain: Promise<void> = Promise.resolve();
  private currentHash = "";
  private unbind: (() => void)[] = [];

  constructor(
    private root: HTMLElement,
    private api: Api,
    private annotator: string,
    private host: Window = window,
  ) {}

  async start(): Promise<void> {
    const onHashChange = () => {
      if (this.host.location.hash !== this.currentHash) {
        this.enqueue(() => this.navigate());
      }
    };
    this.host.addEventListener("hashchange", onHashChange);
    this.unbind.push(() => this.host.removeEventListener("hashchange", onHashChange));

    const bindings: Record<string, () => void> = {
      n: () => this.moveUtterance(1),
      p: () => this.moveUtterance(-1),
      N: () => this.moveConversation(1),
      P: () => this.moveConversation(-1),
      "?": () => this.openWizardForFocus(),
    };
    for (let digit = 1; digit <= 9; digit++) {
      bindings[String(digit)] = () => this.pickOption(digit);
    }
    this.unbind.push(bindKeys(this.host, bindings));

    await this.navigate();
  }

  stop(): void {
    for (const off of this.unbind.splice(0)) off();
    if (this.toastTimer !== null) clearTimeout(this.toastTimer);
  }

  // the queue keeps at most one request in flight; later inputs wait here
  idle(): Promise<void> {
    return this.chain;
  }

  private enqueue(work: () => Promise<void>): void {
    this.chain = this.chain.then(work).catch((err) => {
      this.banner = describeError(err);
      this.render();
    });
  }

  private go(hash: string): void {
    this.host.location.hash = hash;
    this.enqueue(() => this.navigate());
  }

  private async navigate(): Promise<void> {
    this.currentHash = this.host.location.hash;
    this.route = parseRoute(this.currentHash);
    this.banner = null;
    this.comparison = null;
    this.wizard = null;
    try {
      if (this.route.kind === "projects") {
        this.projects = await this.api.listProjects();
      } else if (this.route.kind === "status") {
        this.statusData = await this.api.statusPage(this.route.projectId);
      } else {
        await this.loadLabeling(this.route);
      }
    } catch (err) {
      this.banner = describeError(err);
    }
    this.render();
  }

  private async loadLabeling(route: Route & { kind: "label" }): Promise<void> {
    if (!this.info || this.info.id !== route.projectId) {
      this.info = await this.api.projectInfo(route.projectId);
    }
    const target = route.conversationId ?? this.info.conversation_ids[0];
    if (!target) {
      this.view = null;
      return;
    }
    this.view = await this.api.labelingView(route.projectId, target);
    this.focusCategory = null;
    this.utteranceIndex = 0;
    if (route.utteranceId) {
      const index = this.view.utterances.findIndex((u) => u.id === route.utteranceId);
      if (index >= 0) this.utteranceIndex = index;
    }
  }

  private async reloadView(): Promise<void> {
    if (this.route.kind !== "label" || !this.view) return;
    this.view = await this.api.labelingView(this.route.projectId, this.view.conversation.id);
    if (this.utteranceIndex >= this.view.utterances.length) {
      this.utteranceIndex = Math.max(0, this.view.utterances.length - 1);
    }
  }

  // -- labeling edits -------------------------------------------------------

  private labelBlock(utteranceId: string | null) {
    if (!this.view) return null;
    if (utteranceId === null) return this.view.conversation_labels ?? null;
    return this.view.utterances.find((u) => u.id === utteranceId) ?? null;
  }

  private toggleOption(utteranceId: string | null, category: Category, optionId: string, nextSelected: boolean): void {
    const block = this.labelBlock(utteranceId);
    if (!block || !this.view || this.route.kind !== "label") return;
    const edit: LabelEdit = {
      conversation_id: this.view.conversation.id,
      utterance_id: utteranceId,
      category_id: category.id,
      value: category.kind === "single" ? { single: optionId } : { multi: [optionId] },
      selected: nextSelected,
      expected_version: block.versions[category.id] ?? null,
    };
    this.enqueue(() => this.saveEdit(edit, utteranceId));
  }

  private changeText(utteranceId: string | null, category: Category, text: string): void {
    const block = this.labelBlock(utteranceId);
    if (!block || !this.view || this.route.kind !== "label") return;
    const trimmed = text.trim();
    const expected = block.versions[category.id] ?? null;
    if (trimmed === "" && expected === null) return;
    const edit: LabelEdit = {
      conversation_id: this.view.conversation.id,
      utterance_id: utteranceId,
      category_id: category.id,
      value: trimmed === "" ? null : { text: trimmed },
      expected_version: expected,
    };
    this.enqueue(() => this.saveEdit(edit, utteranceId));
  }

  private async saveEdit(edit: LabelEdit, utteranceId: string | null): Promise<void> {
    if (this.route.kind !== "label") return;
    try {
      const saved = await this.api.putLabel(this.route.projectId, edit);
      this.applySaved(saved, utteranceId);
      this.banner = null;
    } catch (err) {
      if (err instanceof ApiError && err.code === "VERSION_CONFLICT") {
        this.banner = `Version conflict: this label changed elsewhere (now at v${err.body.actual}); reloaded.`;
        await this.reloadView();
      } else {
        this.banner = describeError(err);
      }
    }
    this.render();
  }

  private applySaved(saved: SaveResponse, utteranceId: string | null): void {
    const view = this.view;
    if (!view) return;
    if (utteranceId === null) {
      if (view.conversation_labels) {
        view.conversation_labels = withSave(view.conversation_labels, saved);
      }
      return;
    }
    this.view = {
      ...view,
      utterances: view.utterances.map((u) => (u.id === utteranceId ? withSave(u, saved) : u)),
    };
  }

  // -- wizard ---------------------------------------------------------------

  private openWizard(utteranceId: string | null, categoryId: string): void {
    if (this.route.kind !== "label" || !this.view) return;
    const projectId = this.route.projectId;
    const conversationId = this.view.conversation.id;
    this.enqueue(async () => {
      try {
        const step = await this.api.wizardStart(projectId, conversationId, utteranceId, categoryId);
        this.handleWizardStep(step, categoryId, utteranceId, 0);
      } catch (err) {
        this.banner = describeError(err);
      }
      this.render();
    });
  }

  private handleWizardStep(
    step: WizardStep,
    categoryId: string,
    utteranceId: string | null,
    depth: number,
  ): void {
    if (step.status === "finished") {
      this.wizard = null;
      if (step.selections && step.versions && step.state) {
        this.applySaved(
          {
            version: step.version ?? 0,
            selections: step.selections,
            versions: step.versions,
            state: step.state,
          },
          utteranceId,
        );
      }
      if (step.notify && step.result) {
        const label = this.displayFor(categoryId, step.result.option_id, utteranceId === null);
        this.showToast(`The label "${label}" was selected automatically.`);
      }
      return;
    }
    this.wizard = {
      sessionId: step.session_id,
      categoryId,
      utteranceId,
      question: step.question ?? "",
      depth,
    };
  }

  private answerWizard(answer: boolean): void {
    const wizard = this.wizard;
    if (!wizard || this.route.kind !== "label") return;
    const projectId = this.route.projectId;
    this.enqueue(async () => {
      try {
        const step = await this.api.wizardAnswer(projectId, wizard.sessionId, answer);
        this.handleWizardStep(step, wizard.categoryId, wizard.utteranceId, wizard.depth + 1);
      } catch (err) {
        this.banner = describeError(err);
        if (err instanceof ApiError && (err.code === "SESSION_EXPIRED" || err.code === "FINISHED")) {
          this.wizard = null;
        }
      }
      this.render();
    });
  }

  private backWizard(): void {
    const wizard = this.wizard;
    if (!wizard || wizard.depth === 0 || this.route.kind !== "label") return;
    const projectId = this.route.projectId;
    this.enqueue(async () => {
      try {
        const step = await this.api.wizardBack(projectId, wizard.sessionId);
        this.handleWizardStep(step, wizard.categoryId, wizard.utteranceId, wizard.depth - 1);
      } catch (err) {
        this.banner = describeError(err);
      }
      this.render();
    });
  }

  private cancelWizard(): void {
    this.wizard = null;
    this.render();
  }

  private displayFor(categoryId: string, optionId: string, conversationScope: boolean): string {
    const codeSet = conversationScope ? this.view?.conversation_code_set : this.view?.code_set;
    const category = codeSet?.categories.find((c) => c.id === categoryId);
    const option = category?.options.find((o) => o.id === optionId);
    return option ? option.display : optionId;
  }

  private showToast(message: string): void {
    this.toast = message;
    if (this.toastTimer !== null) clearTimeout(this.toastTimer);
    this.toastTimer = setTimeout(() => {
      this.toast = null;
      this.toastTimer = null;
      this.render();
    }, 4000);
  }

  // -- previous-label comparison --------------------------------------------

  private viewPrevious(categoryId: string, optionId: string): void {
    if (this.route.kind !== "label" || !this.view) return;
    const utterance = this.focusedUtterance();
    if (!utterance) return;
    const projectId = this.route.projectId;
    const query = {
      category: categoryId,
      option: optionId,
      excludeConversation: this.view.conversation.id,
      excludeUtterance: utterance.id,
    };
    this.enqueue(async () => {
      try {
        this.comparison = { payload: await this.api.viewPrevious(projectId, query) };
      } catch (err) {
        this.banner = describeError(err);
      }
      this.render();
    });
  }

  // -- navigation -----------------------------------------------------------

  private focusedUtterance(): UtteranceView | null {
    return this.view?.utterances[this.utteranceIndex] ?? null;
  }

  private moveUtterance(delta: number): void {
    if (!this.view) return;
    const next = this.utteranceIndex + delta;
    if (next < 0 || next >= this.view.utterances.length) return;
    this.utteranceIndex = next;
    this.focusCategory = null;
    this.comparison = null;
    this.render();
  }

  private moveConversation(delta: number): void {
    if (this.route.kind !== "label" || !this.info || !this.view) return;
    if (delta > 0 && !canAdvanceConversation(this.view)) return;
    const ids = this.info.conversation_ids;
    const here = ids.indexOf(this.view.conversation.id);
    const there = here + delta;
    if (here < 0 || there < 0 || there >= ids.length) return;
    this.go(`#/p/${encodeURIComponent(this.route.projectId)}/c/${encodeURIComponent(ids[there])}`);
  }

  private focusedCategoryFor(utterance: UtteranceView): Category | null {
    if (!this.view) return null;
    const visible = visibleCategories(this.view.code_set, utterance.state);
    return visible.find((c) => c.id === this.focusCategory) ?? visible[0] ?? null;
  }

  private pickOption(position: number): void {
    const utterance = this.focusedUtterance();
    if (!utterance) return;
    const category = this.focusedCategoryFor(utterance);
    if (!category || category.kind === "text") return;
    const option = category.options[position - 1];
    if (!option) return;
    // greyed options stay unreachable from the keyboard too
    if (isOptionDisabled(utterance.state, category.id, option.id)) return;
    const next = !isOptionSelected(utterance.selections, category.id, option.id);
    this.toggleOption(utterance.id, category, option.id, next);
  }

  private openWizardForFocus(): void {
    const utterance = this.focusedUtterance();
    if (!utterance || !this.view) return;
    const wizards = this.view.code_set.wizards;
    const visible = visibleCategories(this.view.code_set, utterance.state);
    const category =
      visible.find((c) => c.id === this.focusCategory && c.id in wizards) ??
      visible.find((c) => c.id in wizards);
    if (!category) return;
    this.openWizard(utterance.id, category.id);
  }

  // -- rendering ------------------------------------------------------------

  private render(): void {
    const root = this.root;
    root.textContent = "";
    if (this.banner) {
      const banner = document.createElement("div");
      banner.className = "banner";
      banner.setAttribute("role", "alert");
      banner.textContent = this.banner;
      root.append(banner);
    }
    if (this.route.kind === "projects") {
      this.renderProjects(root);
    } else if (this.route.kind === "status") {
      this.renderStatus(root);
    } else {
      this.renderLabeling(root);
    }
    if (this.toast) {
      root.append(renderToast(this.toast));
    }
    if (this.wizard) {
      const categoryName = this.displayCategoryName(this.wizard);
      root.append(
        renderWizardModal(categoryName, this.wizard.question, this.wizard.depth > 0, {
          onAnswer: (answer) => this.answerWizard(answer),
          onBack: () => this.backWizard(),
          onCancel: () => this.cancelWizard(),
        }),
      );
    }
  }

  private displayCategoryName(wizard: WizardUiState): string {
    const codeSet =
      wizard.utteranceId === null ? this.view?.conversation_code_set : this.view?.code_set;
    return codeSet?.categories.find((c) => c.id === wizard.categoryId)?.name ?? wizard.categoryId;
  }

  private renderProjects(root: HTMLElement): void {
    const title = document.createElement("h1");
    title.textContent = "Projects";
    root.append(title);
    const list = document.createElement("ul");
    list.className = "project-list";
    for (const id of this.projects) {
      const item = document.createElement("li");
      const open = document.createElement("button");
      open.type = "button";
      open.className = "project-open";
      open.textContent = id;
      open.addEventListener("click", () => this.go(`#/p/${encodeURIComponent(id)}`));
      item.append(open);
      list.append(item);
    }
    root.append(list);
  }

  private renderStatus(root: HTMLElement): void {
    if (this.route.kind !== "status") return;
    const projectId = this.route.projectId;
    const back = document.createElement("button");
    back.type = "button";
    back.className = "back-to-labeling";
    back.textContent = "Back to labeling";
    back.addEventListener("click", () => this.go(`#/p/${encodeURIComponent(projectId)}`));
    root.append(back);
    if (!this.statusData) return;
    root.append(
      renderStatusPage(this.statusData, this.annotator, {
        onResume: (conversationId, utteranceId) => {
          let hash = `#/p/${encodeURIComponent(projectId)}/c/${encodeURIComponent(conversationId)}`;
          if (utteranceId) hash += `/u/${encodeURIComponent(utteranceId)}`;
          this.go(hash);
        },
      }),
    );
  }

  private renderLabeling(root: HTMLElement): void {
    if (this.route.kind !== "label") return;
    const view = this.view;
    if (!view) {
      const empty = document.createElement("p");
      empty.className = "empty-project";
      empty.textContent = "No conversations imported yet.";
      root.append(empty);
      return;
    }

    root.append(this.renderHeader(view));

    const layout = document.createElement("div");
    layout.className = "labeling-layout";

    const transcript = renderTranscript(view, this.utteranceIndex, (index) => {
      this.utteranceIndex = index;
      this.focusCategory = null;
      this.comparison = null;
      this.render();
    });

    const column = document.createElement("div");
    column.className = "panel-column";

    const utterance = this.focusedUtterance();
    if (utterance) {
      column.append(
        renderLabelPanel(
          {
            codeSet: view.code_set,
            selections: utterance.selections,
            state: utterance.state,
            showDocs: this.showDocs,
            focusedCategory: this.focusCategory,
            title: `Utterance ${utterance.index + 1} of ${view.utterances.length}`,
          },
          this.panelHooks(utterance.id, true),
        ),
      );
    }

    // conversation-level labels open up once every utterance is done
    if (view.conversation_code_set && view.conversation_labels && utterancesComplete(view)) {
      column.append(
        renderLabelPanel(
          {
            codeSet: view.conversation_code_set,
            selections: view.conversation_labels.selections,
            state: view.conversation_labels.state,
            showDocs: this.showDocs,
            focusedCategory: null,
            title: "Whole conversation",
          },
          this.panelHooks(null, false),
        ),
      );
    }

    if (this.comparison) {
      column.append(
        renderComparison(this.comparison.payload, view.code_set, () => {
          this.comparison = null;
          this.render();
        }),
      );
    }

    layout.append(transcript, column);
    root.append(layout);
  }

  private panelHooks(utteranceId: string | null, withPrevious: boolean): LabelPanelHooks {
    const hooks: LabelPanelHooks = {
      onToggleOption: (category, optionId, nextSelected) =>
        this.toggleOption(utteranceId, category, optionId, nextSelected),
      onTextChange: (category, text) => this.changeText(utteranceId, category, text),
      onOpenWizard: (categoryId) => this.openWizard(utteranceId, categoryId),
      onToggleDocs: () => {
        this.showDocs = !this.showDocs;
        this.render();
      },
      onFocusCategory: (categoryId) => {
        this.focusCategory = categoryId;
        this.render();
      },
    };
    if (withPrevious) {
      hooks.onViewPrevious = (categoryId, optionId) => this.viewPrevious(categoryId, optionId);
    }
    return hooks;
  }

  private renderHeader(view: ConversationView): HTMLElement {
    if (this.route.kind !== "label") throw new Error("header outside labeling route");
    const projectId = this.route.projectId;
    const header = document.createElement("header");
    header.className = "conversation-header";

    const title = document.createElement("h2");
    title.textContent = view.conversation.id;

    const { done, total } = conversationProgress(view);
    const percent = progressPercent(done, total);
    const bar = document.createElement("div");
    bar.className = "progress-bar";
    const fill = document.createElement("div");
    fill.className = "progress-fill";
    fill.style.width = percent;
    bar.append(fill);
    const caption = document.createElement("span");
    caption.className = "progress-caption";
    caption.textContent = `${done}/${total} (${percent})`;

    const ids = this.info ? this.info.conversation_ids : [];
    const here = ids.indexOf(view.conversation.id);

    const previous = document.createElement("button");
    previous.type = "button";
    previous.className = "previous-conversation";
    previous.textContent = "Previous conversation";
    previous.disabled = here <= 0;
    previous.addEventListener("click", () => this.moveConversation(-1));

    const next = document.createElement("button");
    next.type = "button";
    next.className = "next-conversation";
    next.textContent = "Next conversation";
    next.disabled = !canAdvanceConversation(view) || here < 0 || here + 1 >= ids.length;
    if (!canAdvanceConversation(view)) {
      next.title = "finish every label in this conversation first";
    }
    next.addEventListener("click", () => this.moveConversation(1));

    const status = document.createElement("button");
    status.type = "button";
    status.className = "open-status";
    status.textContent = "Project status";
    status.addEventListener("click", () => this.go(`#/p/${encodeURIComponent(projectId)}/status`));

    header.append(title, bar, caption, previous, next, status);
    return header;
  }
}

function boot(): void {
  const root = document.getElementById("app");
  if (!root) return;
  let annotator = window.localStorage.getItem("annotator_id");
  if (!annotator) {
    annotator = window.prompt("Annotator id:") ?? "";
    if (!annotator) return;
    window.localStorage.setItem("annotator_id", annotator);
  }
  const app = new App(root, createApi(annotator), annotator);
  void app.start();
}

boot();
