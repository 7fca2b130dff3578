import type {
  ClusterDetail,
  ClustersPage,
  EditOutcome,
  LogEntry,
  MetricsSnapshot,
  SessionInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type Fetch = typeof globalThis.fetch;

/** Thin typed client over the session REST API. */
export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: Fetch = globalThis.fetch.bind(globalThis),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const code = body && typeof body.code === "string" ? body.code : `http_${response.status}`;
      const message = body && typeof body.message === "string" ? body.message : response.statusText;
      throw new ApiError(response.status, code, message);
    }
    return body as T;
  }

  getSession(sid: string): Promise<SessionInfo> {
    return this.request(`/sessions/${sid}`);
  }

  getClusters(sid: string, page = 0, pageSize = 50): Promise<ClustersPage> {
    return this.request(`/sessions/${sid}/clusters?page=${page}&page_size=${pageSize}`);
  }

  getCluster(sid: string, cid: number): Promise<ClusterDetail> {
    return this.request(`/sessions/${sid}/clusters/${cid}`);
  }

  getLog(sid: string): Promise<{ entries: LogEntry[] }> {
    return this.request(`/sessions/${sid}/log`);
  }

  getMetrics(sid: string): Promise<MetricsSnapshot> {
    return this.request(`/sessions/${sid}/metrics`);
  }

  submitEdit(sid: string, edit: { kind: string; i: number; j?: number }): Promise<EditOutcome> {
    return this.request(`/sessions/${sid}/edits`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(edit),
    });
  }
}
