// Typed client for the labeling service JSON API. Every call carries the
// annotator identity header; error bodies follow the {code, message} envelope.

export type SelectedValue =
  | { single: string }
  | { multi: string[] }
  | { text: string };

export type SelectionEntry = {
  value: SelectedValue;
  origin: "manual" | "auto_rule" | "auto_wizard";
};

export type SelectionMap = Record<string, SelectionEntry>;

export type EffectiveState = {
  visible_categories: string[];
  hidden_categories: string[];
  disabled_options: [string, string][];
  auto_selected: [string, string][];
  complete: boolean;
};

export type LabelOption = {
  id: string;
  display: string;
  definition: string;
};

export type Category = {
  id: string;
  name: string;
  kind: "single" | "multi" | "text";
  options: LabelOption[];
  definition: string;
  examples: string[];
  speaker_filter: string;
};

export type CodeSet = {
  id: string;
  name: string;
  scope: "utterance" | "conversation";
  categories: Category[];
  wizards: Record<string, unknown>;
};

export type Utterance = {
  id: string;
  speaker: string;
  text: string;
  index: number;
};

// labels + control state for one example, exactly as the server sent them
export type LabelBlock = {
  selections: SelectionMap;
  versions: Record<string, number>;
  state: EffectiveState;
  complete: boolean;
};

export type UtteranceView = Utterance & LabelBlock;

export type ConversationView = {
  conversation: { id: string; created_at: number };
  code_set: CodeSet;
  conversation_code_set: CodeSet | null;
  utterances: UtteranceView[];
  conversation_labels?: LabelBlock;
};

export type SaveResponse = {
  version: number;
  selections: SelectionMap;
  versions: Record<string, number>;
  state: EffectiveState;
};

export type WizardResultPayload = {
  category_id: string;
  option_id: string;
  notify: boolean;
  trail: { question: string; answer: boolean }[];
};

export type WizardStep = {
  session_id: string;
  status: "active" | "finished";
  question?: string;
  result?: WizardResultPayload;
  notify?: boolean;
} & Partial<SaveResponse>;

export type PreviousPayload = {
  previous: {
    conversation_id: string;
    utterance: Utterance;
    labels: SelectionMap;
    saved_at: number;
  };
  current: {
    conversation_id: string;
    utterance: Utterance;
    labels: SelectionMap;
  };
};

export type FractionView = {
  fraction: [number, number];
  percent: string;
};

export type AnnotatorStatus = {
  annotator_id: string;
  labeled_units: number;
  total_units: number;
  progress: FractionView;
  per_conversation: ({ conversation_id: string } & FractionView)[];
  resume: { conversation_id: string; utterance_id: string | null } | null;
};

export type AgreementRow = {
  category_id: string;
  jaccard: FractionView;
  kappa: { fraction: [number, number]; display: string } | null;
  n_common: number;
};

export type AgreementPair = {
  annotator_a: string;
  annotator_b: string;
  per_category: AgreementRow[];
};

export type AgreementReport = {
  project_id: string;
  pairs: AgreementPair[];
};

// "agreement" is absent entirely when the caller is not allowed to see it,
// and null when there are not enough annotators to compare
export type StatusPage = {
  project_id: string;
  role: "creator" | "annotator";
  annotators: AnnotatorStatus[];
  agreement?: AgreementReport | null;
};

export type ProjectInfo = {
  id: string;
  name: string;
  annotators: string[];
  role: string;
  conversation_ids: string[];
};

export type LabelEdit = {
  conversation_id: string;
  utterance_id?: string | null;
  category_id: string;
  value: SelectedValue | null;
  selected?: boolean;
  expected_version?: number | null;
};

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly body: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

export type Api = {
  listProjects(): Promise<string[]>;
  projectInfo(projectId: string): Promise<ProjectInfo>;
  labelingView(projectId: string, conversationId: string): Promise<ConversationView>;
  putLabel(projectId: string, edit: LabelEdit): Promise<SaveResponse>;
  wizardStart(
    projectId: string,
    conversationId: string,
    utteranceId: string | null,
    categoryId: string,
  ): Promise<WizardStep>;
  wizardAnswer(projectId: string, sessionId: string, answer: boolean): Promise<WizardStep>;
  wizardBack(projectId: string, sessionId: string): Promise<WizardStep>;
  viewPrevious(
    projectId: string,
    query: { category: string; option: string; excludeConversation: string; excludeUtterance: string },
  ): Promise<PreviousPayload | null>;
  statusPage(projectId: string): Promise<StatusPage>;
};

export function createApi(annotatorId: string, base = ""): Api {
  async function request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "X-Annotator-Id": annotatorId };
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
    }
    const res = await fetch(base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (res.status === 204) {
      return null as T;
    }
    const data = await res.json().catch(() => ({}));
    if (!res.ok) {
      throw new ApiError(
        res.status,
        String(data.code ?? "INTERNAL"),
        String(data.message ?? `HTTP ${res.status}`),
        data,
      );
    }
    return data as T;
  }

  const project = (projectId: string) => `/projects/${encodeURIComponent(projectId)}`;

  return {
    async listProjects() {
      const body = await request<{ projects: string[] }>("GET", "/projects");
      return body.projects;
    },
    projectInfo(projectId) {
      return request("GET", project(projectId));
    },
    labelingView(projectId, conversationId) {
      return request(
        "GET",
        `${project(projectId)}/conversations/${encodeURIComponent(conversationId)}`,
      );
    },
    putLabel(projectId, edit) {
      return request("PUT", `${project(projectId)}/labels`, edit);
    },
    wizardStart(projectId, conversationId, utteranceId, categoryId) {
      return request("POST", `${project(projectId)}/wizard/start`, {
        conversation_id: conversationId,
        utterance_id: utteranceId,
        category_id: categoryId,
      });
    },
    wizardAnswer(projectId, sessionId, answer) {
      return request(
        "POST",
        `${project(projectId)}/wizard/${encodeURIComponent(sessionId)}/answer`,
        { answer },
      );
    },
    wizardBack(projectId, sessionId) {
      return request(
        "POST",
        `${project(projectId)}/wizard/${encodeURIComponent(sessionId)}/back`,
        {},
      );
    },
    viewPrevious(projectId, query) {
      const params = new URLSearchParams({
        category: query.category,
        option: query.option,
        exclude_conversation: query.excludeConversation,
        exclude_utterance: query.excludeUtterance,
      });
      return request("GET", `${project(projectId)}/previous?${params.toString()}`);
    },
    statusPage(projectId) {
      return request("GET", `${project(projectId)}/status`);
    },
  };
}
