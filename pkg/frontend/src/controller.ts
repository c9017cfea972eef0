/**
 * Session controller: owns the client-side loop (create session, fetch the
 * pending query, submit labels, refresh diagnostics) and its error policy.
 * At most one mutating request is in flight at a time; a 409 on /label
 * means another submission won the race, so the controller refetches the
 * now-pending query instead of retrying.  All state comes from the service.
 */

import { ApiClient, ApiError } from "./api.js";
import type { QueryView, SessionForm, SessionState } from "./api.js";

export interface ConsoleView {
  sessionId: string | null;
  query: QueryView | null;
  state: SessionState | null;
  finished: boolean;
  /** Inline error message for the create form or the labeling pane. */
  error: string | null;
  busy: boolean;
}

export class SessionController {
  api: ApiClient;
  view: ConsoleView;
  onChange: (view: ConsoleView) => void;
  private mutating = false;

  constructor(api: ApiClient, onChange: (view: ConsoleView) => void = () => {}) {
    this.api = api;
    this.onChange = onChange;
    this.view = {
      sessionId: null,
      query: null,
      state: null,
      finished: false,
      error: null,
      busy: false,
    };
  }

  private emit(patch: Partial<ConsoleView>): void {
    this.view = { ...this.view, ...patch };
    this.onChange(this.view);
  }

  /** POST /sessions, then fetch the first query and the initial state. */
  async start(form: SessionForm): Promise<void> {
    if (this.mutating) {
      return;
    }
    this.mutating = true;
    this.emit({ busy: true, error: null });
    try {
      const created = await this.api.createSession(form);
      this.emit({ sessionId: created.session_id, finished: false });
      await this.refreshQuery();
      await this.refreshState();
      this.emit({ busy: false });
    } catch (err) {
      this.emit({ busy: false, error: describe(err) });
    } finally {
      this.mutating = false;
    }
  }

  /** POST /label for the pending query; 409 → refetch, no duplicate label. */
  async submitLabel(label: number): Promise<void> {
    const { sessionId, query } = this.view;
    if (this.mutating || sessionId === null || query === null || this.view.finished) {
      return;
    }
    this.mutating = true;
    this.emit({ busy: true, error: null });
    try {
      const result = await this.api.postLabel(sessionId, query.sample_id, label);
      if (result.status === "finished") {
        this.emit({ query: null, finished: true });
      } else {
        await this.refreshQuery();
      }
      await this.refreshState();
      this.emit({ busy: false });
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // Lost a double-submit race: show the query the service now expects.
        await this.refreshQuery();
        await this.refreshState();
        this.emit({ busy: false });
      } else if (err instanceof ApiError && err.status === 410) {
        this.emit({ busy: false, query: null, finished: true });
        await this.refreshState();
      } else {
        this.emit({ busy: false, error: describe(err) });
      }
    } finally {
      this.mutating = false;
    }
  }

  /** GET /query; a 410 marks the session finished. */
  async refreshQuery(): Promise<void> {
    if (this.view.sessionId === null) {
      return;
    }
    try {
      const query = await this.api.getQuery(this.view.sessionId);
      this.emit({ query });
    } catch (err) {
      if (err instanceof ApiError && err.status === 410) {
        this.emit({ query: null, finished: true });
      } else {
        this.emit({ error: describe(err) });
      }
    }
  }

  /** GET /state; safe to call concurrently with reads (never mutates). */
  async refreshState(): Promise<void> {
    if (this.view.sessionId === null) {
      return;
    }
    try {
      const state = await this.api.getState(this.view.sessionId);
      this.emit({ state, finished: state.status === "finished" });
    } catch (err) {
      this.emit({ error: describe(err) });
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.field !== null ? `${err.field}: ${err.message}` : err.message;
  }
  if (err instanceof Error) {
    return `service unreachable: ${err.message}`;
  }
  return String(err);
}
