/**
 * Thin typed client over the labeling service's HTTP+JSON contract.
 * Every method maps to exactly one request; errors carry the service's
 * status code and message so the UI can surface them inline.
 */

export interface SessionCreated {
  session_id: string;
  t: number;
  status: string;
}

export interface QueryView {
  sample_id: number;
  display_uri: string;
  score: number;
  intended_zone: string;
  t: number;
  rho: number;
}

export interface Tracker {
  p_pos_fplus: number;
  p_neg_fplus: number;
  p_pos_fzero: number;
  p_neg_fzero: number;
}

export interface LabelResult {
  t: number;
  rho: number;
  tracker: Tracker;
  status: string;
  test_ap?: number;
}

export interface ProjectedPoint {
  id: number;
  x: number;
  y: number;
  label?: number;
}

export interface SessionState {
  curve: Array<[number, number | null]>;
  query_log: Array<Record<string, unknown>>;
  zone_histogram: { F_minus: number; F_zero: number; F_plus: number };
  rho: number;
  rho_prime: number;
  tracker: Tracker;
  n_pos: number;
  n_neg: number;
  status: string;
  t: number;
  projection: { labeled: ProjectedPoint[]; query: ProjectedPoint | null };
}

export interface SessionForm {
  class: string;
  strategy: string;
  prior: string;
}

export class ApiError extends Error {
  status: number;
  field: string | null;

  constructor(status: number, message: string, field: string | null = null) {
    super(message);
    this.status = status;
    this.field = field;
  }
}

async function toError(resp: Response): Promise<ApiError> {
  let message = `request failed (${resp.status})`;
  let field: string | null = null;
  try {
    const body = await resp.json();
    if (body && body.error && typeof body.error.message === "string") {
      message = body.error.message;
      field = typeof body.error.field === "string" ? body.error.field : null;
    }
  } catch {
    // non-JSON error body: keep the generic message
  }
  return new ApiError(resp.status, message, field);
}

async function unwrap<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    throw await toError(resp);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  base: string;
  fetchFn: typeof fetch;

  constructor(base = "", fetchFn: typeof fetch = fetch) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async get<T>(path: string): Promise<T> {
    return unwrap<T>(await this.fetchFn(this.base + path));
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    return unwrap<T>(
      await this.fetchFn(this.base + path, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }

  health(): Promise<string> {
    return this.get<string>("/healthz");
  }

  createSession(form: SessionForm): Promise<SessionCreated> {
    return this.post<SessionCreated>("/sessions", form);
  }

  getQuery(sessionId: string): Promise<QueryView> {
    return this.get<QueryView>(`/sessions/${sessionId}/query`);
  }

  postLabel(
    sessionId: string,
    sampleId: number,
    label: number,
  ): Promise<LabelResult> {
    return this.post<LabelResult>(`/sessions/${sessionId}/label`, {
      sample_id: sampleId,
      label,
    });
  }

  getState(sessionId: string): Promise<SessionState> {
    return this.get<SessionState>(`/sessions/${sessionId}/state`);
  }
}
