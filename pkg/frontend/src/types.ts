// Payload shapes of the session service API.

export interface ErrorReportData {
  delta_u: number;
  delta_o: number;
  delta: number;
  delta_cco: number;
  delta_ccu: number;
  delta_cc: number;
}

export interface SessionConfig {
  model: string;
  eta: number;
  tree_mode: string;
  min_blob: number;
}

export interface SessionInfo {
  id: string;
  n: number;
  clusters: number;
  edits: number;
  config: SessionConfig;
  has_target: boolean;
  converged: boolean | null;
}

export interface ClusterSummary {
  id: number;
  size: number;
  pure: boolean;
  representatives: number[];
}

export interface ClustersPage {
  page: number;
  page_size: number;
  total: number;
  clusters: ClusterSummary[];
}

export interface ClusterDetail extends ClusterSummary {
  members: number[];
  similarity: number[][];
}

// kind, removed ids, added [id, members, pure], touched points
export interface EditResultData {
  kind: string;
  removed: number[];
  added: [number, number[], boolean][];
  touched: number[];
  note?: string;
}

export interface EditOutcome {
  result: EditResultData;
  clusters: number;
  added: ClusterSummary[];
  removed: number[];
  report?: ErrorReportData;
}

export interface LogEntry {
  type: string;
  request?: { kind: string; i: number; j?: number };
  result?: EditResultData;
  report?: ErrorReportData;
  [key: string]: unknown;
}

export interface MetricsSnapshot {
  report: ErrorReportData;
  converged: boolean;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
