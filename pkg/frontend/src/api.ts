/**
 * Typed client for the petelkit HTTP service.
 *
 * Every call resolves to the service's JSON body or throws an ApiError
 * carrying the machine-readable code from the error envelope.
 */

export interface SchemaInfo {
  id: string;
  name: string;
  attributes: number;
}

export interface CandidateView {
  id: string;
  display: string;
  probability: number;
  provenance_phrase: string | null;
}

export type SessionStatus = "in_progress" | "complete" | "exhausted";

export interface SessionView {
  id: string;
  version: number;
  status: SessionStatus;
  current_slot: string | null;
  bound: Record<string, string | null>;
  top3: Record<string, CandidateView[]>;
}

export interface ProposalView {
  version: number;
  slot: string;
  candidate: CandidateView;
}

export interface PetelSlotDocument {
  bound: string | null;
  bound_display: string | null;
  candidates: { id: string; display: string; probability: number }[];
}

export interface PetelDocument {
  format: string;
  schema: string;
  status: SessionStatus;
  version: number;
  rendered: string;
  slots: Record<string, PetelSlotDocument>;
}

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError("transport", `cannot reach the service: ${String(err)}`, 0);
  }
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const code = body?.error?.code ?? "http_error";
    const message = body?.error?.message ?? `HTTP ${response.status}`;
    throw new ApiError(code, message, response.status);
  }
  return body as T;
}

function post<T>(url: string, payload: unknown): Promise<T> {
  return request<T>(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export class PetelkitClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  listSchemas(): Promise<{ schemas: SchemaInfo[] }> {
    return request(this.url("/schemas"));
  }

  uploadSchema(document: unknown): Promise<SchemaInfo> {
    return post(this.url("/schemas"), document);
  }

  createSession(schemaId: string, utterance: string): Promise<SessionView> {
    return post(this.url("/sessions"), { schema_id: schemaId, utterance });
  }

  getSession(sessionId: string): Promise<{ view: SessionView }> {
    return request(this.url(`/sessions/${sessionId}`));
  }

  getProposal(sessionId: string): Promise<ProposalView> {
    return request(this.url(`/sessions/${sessionId}/proposal`));
  }

  postFeedback(
    sessionId: string,
    slot: string,
    candidate: string,
    verdict: "accept" | "reject",
    version?: number,
  ): Promise<SessionView> {
    return post(this.url(`/sessions/${sessionId}/feedback`), {
      slot,
      candidate,
      verdict,
      version,
    });
  }

  getPetel(sessionId: string): Promise<PetelDocument> {
    return request(this.url(`/sessions/${sessionId}/petel`));
  }
}
