/**
 * Session flow controller: the state machine behind the wizard.
 *
 * Holds no derived probabilities of its own; every number shown to the
 * user comes verbatim from the last service response. One outstanding
 * proposal is actionable at a time, and a version-conflict on feedback
 * resolves by refetching the session state.
 */

import {
  ApiError,
  PetelDocument,
  PetelkitClient,
  ProposalView,
  SchemaInfo,
  SessionView,
} from "./api.js";

export type Stage =
  | "pick-schema"
  | "enter-utterance"
  | "confirming"
  | "complete"
  | "exhausted";

export interface FlowError {
  code: string;
  message: string;
  retryable: boolean;
}

export interface FlowState {
  stage: Stage;
  schemas: SchemaInfo[];
  schemaId: string | null;
  utterance: string;
  session: SessionView | null;
  proposal: ProposalView | null;
  petel: PetelDocument | null;
  error: FlowError | null;
  busy: boolean;
}

export type Listener = (state: FlowState) => void;

export class SessionFlow {
  private state: FlowState = {
    stage: "pick-schema",
    schemas: [],
    schemaId: null,
    utterance: "",
    session: null,
    proposal: null,
    petel: null,
    error: null,
    busy: false,
  };

  private listeners: Listener[] = [];
  private lastAction: (() => Promise<void>) | null = null;

  constructor(private client: PetelkitClient) {}

  getState(): FlowState {
    return this.state;
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
    listener(this.state);
  }

  private update(patch: Partial<FlowState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  /** Runs one service interaction, funneling failures into the banner. */
  private async run(action: () => Promise<void>): Promise<void> {
    this.lastAction = action;
    this.update({ busy: true, error: null });
    try {
      await action();
      this.update({ busy: false });
    } catch (err) {
      if (err instanceof ApiError && err.code === "version_conflict") {
        // Someone else advanced the session; resync and let the user retry.
        await this.resync();
        this.update({
          busy: false,
          error: {
            code: err.code,
            message: "The session changed underneath you; showing the fresh state.",
            retryable: false,
          },
        });
        return;
      }
      const api = err instanceof ApiError ? err : null;
      this.update({
        busy: false,
        error: {
          code: api?.code ?? "unexpected",
          message: api?.message ?? String(err),
          retryable: true,
        },
      });
    }
  }

  retry(): Promise<void> {
    const action = this.lastAction;
    if (!action) return Promise.resolve();
    return this.run(action);
  }

  loadSchemas(): Promise<void> {
    return this.run(async () => {
      const { schemas } = await this.client.listSchemas();
      this.update({ schemas, stage: this.state.session ? this.state.stage : "pick-schema" });
    });
  }

  uploadSchema(document: unknown): Promise<void> {
    return this.run(async () => {
      await this.client.uploadSchema(document);
      const { schemas } = await this.client.listSchemas();
      this.update({ schemas });
    });
  }

  pickSchema(schemaId: string): void {
    this.update({ schemaId, stage: "enter-utterance", error: null });
  }

  submitUtterance(utterance: string): Promise<void> {
    return this.run(async () => {
      if (!this.state.schemaId) throw new ApiError("no_schema", "pick a schema first", 0);
      const session = await this.client.createSession(this.state.schemaId, utterance);
      const proposal = await this.client.getProposal(session.id);
      this.update({ utterance, session, proposal, stage: "confirming" });
    });
  }

  /** Re-enter an existing session, e.g. after a reload or server restart. */
  resume(sessionId: string): Promise<void> {
    return this.run(async () => {
      const { view } = await this.client.getSession(sessionId);
      await this.applySessionView(view);
    });
  }

  accept(): Promise<void> {
    return this.feedback("accept");
  }

  reject(): Promise<void> {
    return this.feedback("reject");
  }

  private feedback(verdict: "accept" | "reject"): Promise<void> {
    return this.run(async () => {
      const { session, proposal } = this.state;
      if (!session || !proposal) throw new ApiError("no_proposal", "nothing proposed", 0);
      const view = await this.client.postFeedback(
        session.id,
        proposal.slot,
        proposal.candidate.id,
        verdict,
        proposal.version,
      );
      await this.applySessionView(view);
    });
  }

  private async resync(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    const { view } = await this.client.getSession(session.id);
    await this.applySessionView(view);
  }

  private async applySessionView(view: SessionView): Promise<void> {
    if (view.status === "complete") {
      const petel = await this.client.getPetel(view.id);
      this.update({ session: view, proposal: null, petel, stage: "complete" });
      return;
    }
    if (view.status === "exhausted") {
      this.update({ session: view, proposal: null, petel: null, stage: "exhausted" });
      return;
    }
    const proposal = await this.client.getProposal(view.id);
    this.update({ session: view, proposal, petel: null, stage: "confirming" });
  }
}
