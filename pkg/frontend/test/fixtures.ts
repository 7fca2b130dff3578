import type {
  ClusterDetail,
  ClustersPage,
  ClusterSummary,
  LogEntry,
  SessionInfo,
} from "../src/types.js";

export function session(overrides: Partial<SessionInfo> = {}): SessionInfo {
  return {
    id: "s-test",
    n: 8,
    clusters: 3,
    edits: 0,
    config: { model: "eta", eta: 0.7, tree_mode: "global", min_blob: 3 },
    has_target: true,
    converged: false,
    ...overrides,
  };
}

export function clusters(list: ClusterSummary[]): ClustersPage {
  return { page: 0, page_size: 50, total: list.length, clusters: list };
}

export const threeClusters: ClusterSummary[] = [
  { id: 0, size: 4, pure: false, representatives: [1, 0, 2, 3] },
  { id: 1, size: 3, pure: false, representatives: [4, 5, 6] },
  { id: 2, size: 1, pure: true, representatives: [7] },
];

export function detailOf(summary: ClusterSummary): ClusterDetail {
  const members = summary.representatives.slice().sort((a, b) => a - b);
  const similarity = members.map((_, a) =>
    members.map((_, b) => (a === b ? 1.0 : 0.5)),
  );
  return { ...summary, members, similarity };
}

export function createLog(withReports: boolean): LogEntry[] {
  const head: LogEntry = {
    type: "create",
    session: "s-test",
    config: { model: "eta", eta: 0.7, tree_mode: "global", min_blob: 3 },
  };
  if (withReports) {
    head.report = { delta_u: 2, delta_o: 3, delta: 5, delta_cco: 6, delta_ccu: 4, delta_cc: 10 };
  }
  return [head];
}

export function editEntry(withReport: boolean, du: number, do_: number, dcc: number): LogEntry {
  const entry: LogEntry = {
    type: "edit",
    request: { kind: "split", i: 0 },
    result: {
      kind: "split_applied",
      removed: [0],
      added: [
        [3, [0, 1], false],
        [4, [2, 3], false],
      ],
      touched: [0, 1, 2, 3],
    },
  };
  if (withReport) {
    entry.report = {
      delta_u: du,
      delta_o: do_,
      delta: du + do_,
      delta_cco: 2 * do_,
      delta_ccu: 2 * du,
      delta_cc: dcc,
    };
  }
  return entry;
}
