// Headless controller: owns the state, talks to the API, re-renders.
// The browser entry point instantiates it with window pieces; tests drive
// it directly with a jsdom document and a real or fake fetch.

import { ApiClient, ApiError } from "./api.js";
import { renderApp } from "./render.js";
import {
  AppState,
  applyPoll,
  attachSession,
  canMerge,
  canSplit,
  editApplied,
  editFailed,
  editStarted,
  initialState,
  markUnreachable,
  toggleSelection,
} from "./state.js";

export class App {
  state: AppState = initialState();
  private page = 0;

  constructor(
    private api: ApiClient,
    private doc: Document,
    private container: HTMLElement,
  ) {
    this.render();
  }

  private render(): void {
    renderApp(this.doc, this.container, this.state, {
      onToggle: (cid) => this.toggle(cid),
      onSplit: () => void this.split(),
      onMerge: () => void this.merge(),
      onPage: (page) => void this.setPage(page),
    });
  }

  private set(state: AppState): void {
    this.state = state;
    this.render();
  }

  attach(sessionId: string): void {
    this.page = 0;
    this.set(attachSession(this.state, sessionId));
  }

  toggle(cid: number): void {
    this.set(toggleSelection(this.state, cid));
  }

  async setPage(page: number): Promise<void> {
    this.page = Math.max(0, page);
    await this.poll();
  }

  /** One polling round; flips to degraded read-only mode on failure. */
  async poll(): Promise<void> {
    const sid = this.state.sessionId;
    if (!sid) return;
    try {
      const [session, clusters, log] = await Promise.all([
        this.api.getSession(sid),
        this.api.getClusters(sid, this.page),
        this.api.getLog(sid),
      ]);
      const selected = this.state.selection.length === 1 ? this.state.selection[0] : null;
      let detail = null;
      if (selected !== null) {
        detail = await this.api.getCluster(sid, selected).catch(() => null);
      }
      this.set(applyPoll(this.state, { session, clusters, log: log.entries, detail }));
    } catch {
      this.set(markUnreachable(this.state));
    }
  }

  async split(): Promise<void> {
    if (!canSplit(this.state) || !this.state.sessionId) return;
    await this.submit({ kind: "split", i: this.state.selection[0] });
  }

  async merge(): Promise<void> {
    if (!canMerge(this.state) || !this.state.sessionId) return;
    const [i, j] = this.state.selection;
    await this.submit({ kind: "merge", i, j });
  }

  // optimistic UI is off: the edit waits for the service, then a poll
  // refreshes every panel from GET responses
  private async submit(edit: { kind: string; i: number; j?: number }): Promise<void> {
    this.set(editStarted(this.state));
    try {
      const outcome = await this.api.submitEdit(this.state.sessionId!, edit);
      this.set(editApplied(this.state, outcome));
    } catch (error) {
      const message =
        error instanceof ApiError ? `${error.code}: ${error.message}` : "service unreachable";
      this.set(editFailed(this.state, message));
      if (!(error instanceof ApiError)) this.set(markUnreachable(this.state));
      return;
    }
    await this.poll();
  }
}
