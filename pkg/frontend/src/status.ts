// Project status: a progress bar per annotator, a resume quick link for the
// caller, and the agreement table when the server included one.

import type { AgreementReport, AnnotatorStatus, StatusPage } from "./api.js";

export type StatusHooks = {
  onResume(conversationId: string, utteranceId: string | null): void;
};

export function renderStatusPage(
  status: StatusPage,
  selfId: string,
  hooks: StatusHooks,
): HTMLElement {
  const page = document.createElement("section");
  page.className = "status-page";

  const title = document.createElement("h2");
  title.textContent = `Status: ${status.project_id}`;
  page.append(title);

  for (const member of status.annotators) {
    page.append(renderAnnotator(member, member.annotator_id === selfId, hooks));
  }

  // the server omits the block entirely for callers who may not see it
  if (status.agreement !== undefined) {
    page.append(renderAgreement(status.agreement));
  }
  return page;
}

function renderAnnotator(
  member: AnnotatorStatus,
  isSelf: boolean,
  hooks: StatusHooks,
): HTMLElement {
  const row = document.createElement("div");
  row.className = "annotator-row";
  row.dataset.annotatorId = member.annotator_id;

  const name = document.createElement("span");
  name.className = "annotator-name";
  name.textContent = member.annotator_id;

  const bar = document.createElement("div");
  bar.className = "progress-bar";
  const fill = document.createElement("div");
  fill.className = "progress-fill";
  fill.style.width = member.progress.percent;
  bar.append(fill);

  const numbers = document.createElement("span");
  numbers.className = "progress-numbers";
  numbers.textContent = `${member.labeled_units}/${member.total_units} (${member.progress.percent})`;

  row.append(name, bar, numbers);

  if (isSelf && member.resume) {
    const { conversation_id, utterance_id } = member.resume;
    const resume = document.createElement("button");
    resume.type = "button";
    resume.className = "resume-link";
    resume.textContent = "Resume";
    resume.title = `continue at ${conversation_id}`;
    resume.addEventListener("click", () => hooks.onResume(conversation_id, utterance_id));
    row.append(resume);
  }
  return row;
}

function renderAgreement(report: AgreementReport | null): HTMLElement {
  const section = document.createElement("section");
  section.className = "agreement";
  const title = document.createElement("h3");
  title.textContent = "Inter-rater agreement";
  section.append(title);

  if (report === null) {
    const note = document.createElement("p");
    note.className = "agreement-empty";
    note.textContent = "Agreement needs labels from at least two annotators.";
    section.append(note);
    return section;
  }

  const table = document.createElement("table");
  table.className = "agreement-table";
  const head = document.createElement("tr");
  for (const caption of ["Pair", "Category", "Jaccard", "Kappa", "n"]) {
    const cell = document.createElement("th");
    cell.textContent = caption;
    head.append(cell);
  }
  table.append(head);

  for (const pair of report.pairs) {
    for (const row of pair.per_category) {
      const tr = document.createElement("tr");
      const cells = [
        `${pair.annotator_a} x ${pair.annotator_b}`,
        row.category_id,
        row.jaccard.percent,
        row.kappa ? row.kappa.display : "n/a",
        String(row.n_common),
      ];
      for (const value of cells) {
        const td = document.createElement("td");
        td.textContent = value;
        tr.append(td);
      }
      table.append(tr);
    }
  }
  section.append(table);
  return section;
}
