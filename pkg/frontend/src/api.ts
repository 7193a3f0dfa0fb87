/**
 * Typed client for the REST API.
 *
 * Construction takes the base URL, the bearer token, and optionally the
 * fetch implementation (tests inject a fake; the browser default is used
 * otherwise). Non-2xx replies raise ApiFailure carrying the structured
 * error body, so views render the server's own code and message.
 */

import type {
  AnnotationDoc,
  ApiErrorBody,
  ChatView,
  DeidReport,
  EvaluationReport,
  PromptDoc,
  RunDoc,
  RunsetDoc,
  SchemaDoc,
  SessionDoc,
} from "./types.js";

export interface ApiOptions {
  baseUrl?: string;
  token?: string;
  fetchFn?: typeof fetch;
}

export class ApiFailure extends Error {
  readonly httpStatus: number;
  readonly code: string;
  readonly details: Record<string, unknown>;

  constructor(status: number, code: string, message: string, details: Record<string, unknown>) {
    super(message);
    this.httpStatus = status;
    this.code = code;
    this.details = details;
  }
}

async function toFailure(response: Response): Promise<ApiFailure> {
  try {
    const body = (await response.json()) as ApiErrorBody;
    const e = body.error;
    return new ApiFailure(e.http_status, e.code, e.message, e.details ?? {});
  } catch {
    return new ApiFailure(response.status, "unexpected_reply", `HTTP ${response.status}`, {});
  }
}

export class ApiClient {
  private readonly base: string;
  private readonly token: string;
  private readonly fetchFn: typeof fetch;

  constructor(options: ApiOptions = {}) {
    this.base = (options.baseUrl ?? "").replace(/\/$/, "");
    this.token = options.token ?? "";
    this.fetchFn = options.fetchFn ?? fetch;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    extraHeaders?: Record<string, string>,
  ): Promise<T> {
    const headers: Record<string, string> = { ...extraHeaders };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    let payload: string | undefined;
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.base}${path}`, { method, headers, body: payload });
    if (!response.ok) throw await toFailure(response);
    return (await response.json()) as T;
  }

  // -- sessions ------------------------------------------------------------

  importSession(format: string, content: string, title: string): Promise<SessionDoc> {
    return this.request("POST", "/api/sessions/import", { format, content, title });
  }

  listSessions(): Promise<SessionDoc[]> {
    return this.request("GET", "/api/sessions");
  }

  getSession(id: string): Promise<SessionDoc> {
    return this.request("GET", `/api/sessions/${encodeURIComponent(id)}`);
  }

  deidentify(id: string, roster: string[] = [], institutions: string[] = []): Promise<SessionDoc> {
    return this.request("POST", `/api/sessions/${encodeURIComponent(id)}/deidentify`, {
      roster,
      institutions,
    });
  }

  deidReport(id: string): Promise<DeidReport> {
    return this.request("GET", `/api/sessions/${encodeURIComponent(id)}/deid-report`);
  }

  deidVerify(id: string, action: "approve" | "reject", notes = ""): Promise<SessionDoc> {
    return this.request("POST", `/api/sessions/${encodeURIComponent(id)}/deid-verify`, {
      action,
      notes,
    });
  }

  chatView(id: string, sources: string[] = []): Promise<ChatView> {
    const query = sources.map((s) => `source=${encodeURIComponent(s)}`).join("&");
    const suffix = query ? `?${query}` : "";
    return this.request("GET", `/api/sessions/${encodeURIComponent(id)}/annotations${suffix}`);
  }

  // -- prompts ---------------------------------------------------------------

  createPrompt(name: string, instructions: string, schema: SchemaDoc): Promise<PromptDoc> {
    return this.request("POST", "/api/prompts", { name, instructions, schema });
  }

  addPromptVersion(id: string, instructions: string, schema: SchemaDoc): Promise<PromptDoc> {
    return this.request("POST", `/api/prompts/${encodeURIComponent(id)}/versions`, {
      instructions,
      schema,
    });
  }

  listPrompts(): Promise<PromptDoc[]> {
    return this.request("GET", "/api/prompts");
  }

  getPrompt(id: string): Promise<PromptDoc> {
    return this.request("GET", `/api/prompts/${encodeURIComponent(id)}`);
  }

  listModels(): Promise<{ models: string[] }> {
    return this.request("GET", "/api/models");
  }

  // -- runs --------------------------------------------------------------------

  createRun(
    body: {
      prompt_id: string;
      prompt_version: number;
      model: string;
      sessions: string[];
      params?: Record<string, unknown>;
      granularity?: string;
    },
    idempotencyKey?: string,
  ): Promise<RunDoc> {
    const headers = idempotencyKey ? { "Idempotency-Key": idempotencyKey } : undefined;
    return this.request("POST", "/api/runs", body, headers);
  }

  listRuns(): Promise<RunDoc[]> {
    return this.request("GET", "/api/runs");
  }

  getRun(id: string): Promise<RunDoc> {
    return this.request("GET", `/api/runs/${encodeURIComponent(id)}`);
  }

  cancelRun(id: string): Promise<RunDoc> {
    return this.request("POST", `/api/runs/${encodeURIComponent(id)}/cancel`);
  }

  // -- annotations ----------------------------------------------------------------

  postAnnotation(body: {
    session_id: string;
    utterance_index: number;
    human_coder_id: string;
    document: Record<string, unknown>;
    prompt_id: string;
    prompt_version: number;
  }): Promise<AnnotationDoc> {
    return this.request("POST", "/api/annotations", body);
  }

  // -- run-sets ----------------------------------------------------------------------

  createRunset(
    name: string,
    members: string[],
    targetField: string,
    reference?: string,
  ): Promise<RunsetDoc> {
    return this.request("POST", "/api/runsets", {
      name,
      members,
      target_field: targetField,
      ...(reference ? { reference } : {}),
    });
  }

  listRunsets(): Promise<RunsetDoc[]> {
    return this.request("GET", "/api/runsets");
  }

  getRunset(id: string): Promise<RunsetDoc> {
    return this.request("GET", `/api/runsets/${encodeURIComponent(id)}`);
  }

  evaluation(id: string): Promise<EvaluationReport> {
    return this.request("GET", `/api/runsets/${encodeURIComponent(id)}/evaluation`);
  }
}
