/**
 * DOM rendering for the wizard. The whole widget re-renders from the
 * flow state on every change; all numbers come from the service.
 */

import { CandidateView } from "./api.js";
import { FlowState, SessionFlow } from "./flow.js";

export const SLOT_ORDER = [
  "target_attribute",
  "aggregation",
  "filter_attribute",
  "filter_operation",
] as const;

export const SLOT_LABELS: Record<string, string> = {
  target_attribute: "Target Attribute",
  aggregation: "Aggregation Constraint",
  filter_attribute: "Filter Attribute",
  filter_operation: "Filtering Constraint",
};

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function formatProbability(p: number): string {
  return p.toFixed(6);
}

function renderErrorBanner(doc: Document, state: FlowState, flow: SessionFlow): HTMLElement {
  const banner = el(doc, "div", "error-banner");
  banner.setAttribute("data-testid", "error-banner");
  banner.append(el(doc, "span", "error-message", `${state.error!.code}: ${state.error!.message}`));
  if (state.error!.retryable) {
    const retry = el(doc, "button", "retry", "Retry");
    retry.setAttribute("data-testid", "retry");
    retry.addEventListener("click", () => void flow.retry());
    banner.append(retry);
  }
  return banner;
}

function renderSchemaPicker(doc: Document, state: FlowState, flow: SessionFlow): HTMLElement {
  const panel = el(doc, "section", "schema-picker");
  panel.append(el(doc, "h2", undefined, "Pick a dataset schema"));
  const list = el(doc, "ul", "schema-list");
  for (const schema of state.schemas) {
    const item = el(doc, "li");
    const button = el(doc, "button", "schema-option", `${schema.name} (${schema.attributes} attributes)`);
    button.setAttribute("data-testid", `schema-${schema.id}`);
    button.addEventListener("click", () => flow.pickSchema(schema.id));
    item.append(button);
    list.append(item);
  }
  if (!state.schemas.length) {
    list.append(el(doc, "li", "empty", "No schemas on the service yet; upload one."));
  }
  panel.append(list);

  const upload = el(doc, "textarea", "schema-upload-text");
  upload.setAttribute("data-testid", "upload-schema-text");
  upload.placeholder = "Paste a schema document (JSON) to upload";
  const uploadButton = el(doc, "button", undefined, "Upload schema");
  uploadButton.setAttribute("data-testid", "upload-schema");
  uploadButton.addEventListener("click", () => {
    try {
      void flow.uploadSchema(JSON.parse(upload.value));
    } catch {
      // Malformed JSON never leaves the browser; show it like a service error.
      upload.classList.add("invalid");
    }
  });
  panel.append(upload, uploadButton);
  return panel;
}

function renderUtteranceEntry(doc: Document, flow: SessionFlow): HTMLElement {
  const panel = el(doc, "section", "utterance-entry");
  panel.append(el(doc, "h2", undefined, "Describe the forecast you want"));
  const input = el(doc, "textarea", "utterance-input");
  input.setAttribute("data-testid", "utterance-input");
  input.placeholder = "e.g. For each airline, predict the maximum delay next week.";
  const submit = el(doc, "button", undefined, "Start");
  submit.setAttribute("data-testid", "utterance-submit");
  submit.addEventListener("click", () => void flow.submitUtterance(input.value));
  panel.append(input, submit);
  return panel;
}

function renderDistributionBars(doc: Document, slot: string, candidates: CandidateView[]): HTMLElement {
  const block = el(doc, "div", "slot-distribution");
  block.setAttribute("data-slot", slot);
  block.append(el(doc, "h4", undefined, SLOT_LABELS[slot] ?? slot));
  for (const candidate of candidates) {
    const row = el(doc, "div", "bar-row");
    row.append(el(doc, "span", "bar-label", candidate.display));
    const track = el(doc, "div", "bar-track");
    const fill = el(doc, "div", "bar-fill");
    fill.style.width = `${Math.round(candidate.probability * 100)}%`;
    track.append(fill);
    row.append(track);
    row.append(el(doc, "span", "bar-value", formatProbability(candidate.probability)));
    block.append(row);
  }
  return block;
}

function renderPetelPanel(doc: Document, state: FlowState): HTMLElement {
  const panel = el(doc, "aside", "petel-panel");
  panel.setAttribute("data-testid", "petel-panel");
  panel.append(el(doc, "h3", undefined, "Expression so far"));
  const session = state.session!;
  for (const slot of SLOT_ORDER) {
    const bound = session.bound[slot];
    if (bound) {
      const row = el(doc, "div", "bound-slot");
      row.setAttribute("data-slot", slot);
      row.append(
        el(doc, "span", "slot-name", SLOT_LABELS[slot]),
        el(doc, "span", "slot-value", bound),
      );
      panel.append(row);
    } else {
      panel.append(renderDistributionBars(doc, slot, session.top3[slot] ?? []));
    }
  }
  return panel;
}

function renderProposalCard(doc: Document, state: FlowState, flow: SessionFlow): HTMLElement {
  const card = el(doc, "section", "proposal-card");
  card.setAttribute("data-testid", "proposal-card");
  const proposal = state.proposal!;
  card.append(el(doc, "h2", undefined, SLOT_LABELS[proposal.slot] ?? proposal.slot));
  const candidate = el(doc, "div", "proposal-candidate", proposal.candidate.display);
  candidate.setAttribute("data-testid", "proposal-candidate");
  card.append(candidate);
  card.append(
    el(doc, "div", "proposal-probability",
       `probability ${formatProbability(proposal.candidate.probability)}`),
  );
  if (proposal.candidate.provenance_phrase) {
    card.append(
      el(doc, "div", "proposal-evidence",
         `evidence: “${proposal.candidate.provenance_phrase}”`),
    );
  }
  const accept = el(doc, "button", "accept", "Accept");
  accept.setAttribute("data-testid", "accept");
  accept.addEventListener("click", () => void flow.accept());
  const reject = el(doc, "button", "reject", "Reject");
  reject.setAttribute("data-testid", "reject");
  reject.addEventListener("click", () => void flow.reject());
  if (state.busy) {
    accept.disabled = true;
    reject.disabled = true;
  }
  card.append(accept, reject);
  return card;
}

function renderCompletion(doc: Document, state: FlowState): HTMLElement {
  const panel = el(doc, "section", "completion-view");
  panel.setAttribute("data-testid", "completion-view");
  panel.append(el(doc, "h2", undefined, "Task expression ready"));
  const block = el(doc, "pre", "petel-block", state.petel!.rendered);
  block.setAttribute("data-testid", "petel-block");
  panel.append(block);

  const copy = el(doc, "button", undefined, "Copy");
  copy.addEventListener("click", () => {
    void doc.defaultView?.navigator.clipboard?.writeText(state.petel!.rendered);
  });
  const download = el(doc, "a", "download", "Download JSON");
  download.setAttribute("download", "petel.json");
  download.setAttribute(
    "href",
    "data:application/json;charset=utf-8," +
      encodeURIComponent(JSON.stringify(state.petel, null, 2)),
  );
  panel.append(copy, download);
  return panel;
}

function renderExhausted(doc: Document): HTMLElement {
  const panel = el(doc, "section", "exhausted-view");
  panel.setAttribute("data-testid", "exhausted-view");
  panel.append(el(doc, "h2", undefined, "No candidates left"));
  panel.append(
    el(doc, "p", undefined,
       "Every candidate for a slot was rejected, so no expression could be " +
       "built from this utterance. Start over with a new description."),
  );
  return panel;
}

export function render(container: HTMLElement, state: FlowState, flow: SessionFlow): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  container.setAttribute("data-stage", state.stage);

  if (state.error) {
    container.append(renderErrorBanner(doc, state, flow));
  }
  switch (state.stage) {
    case "pick-schema":
      container.append(renderSchemaPicker(doc, state, flow));
      break;
    case "enter-utterance":
      container.append(renderUtteranceEntry(doc, flow));
      break;
    case "confirming":
      if (state.proposal) container.append(renderProposalCard(doc, state, flow));
      if (state.session) container.append(renderPetelPanel(doc, state));
      break;
    case "complete":
      container.append(renderCompletion(doc, state));
      break;
    case "exhausted":
      container.append(renderExhausted(doc));
      break;
  }
}
