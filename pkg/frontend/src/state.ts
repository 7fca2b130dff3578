// UI state is a pure function of polled service state plus the selection;
// every transition below returns a fresh state object and nothing here ever
// computes clustering quantities itself.

import type {
  ClusterDetail,
  ClustersPage,
  EditOutcome,
  ErrorReportData,
  LogEntry,
  SessionInfo,
} from "./types.js";

export interface AppState {
  sessionId: string | null;
  reachable: boolean;
  session: SessionInfo | null;
  clusters: ClustersPage | null;
  detail: ClusterDetail | null;
  log: LogEntry[];
  selection: number[];
  lastEdit: EditOutcome | null;
  busy: boolean;
  message: string | null;
}

export interface PollSnapshot {
  session: SessionInfo;
  clusters: ClustersPage;
  log: LogEntry[];
  detail: ClusterDetail | null;
}

export function initialState(): AppState {
  return {
    sessionId: null,
    reachable: true,
    session: null,
    clusters: null,
    detail: null,
    log: [],
    selection: [],
    lastEdit: null,
    busy: false,
    message: null,
  };
}

export function attachSession(state: AppState, sessionId: string): AppState {
  return { ...initialState(), sessionId };
}

export function applyPoll(state: AppState, poll: PollSnapshot): AppState {
  const alive = new Set(poll.clusters.clusters.map((c) => c.id));
  return {
    ...state,
    reachable: true,
    session: poll.session,
    clusters: poll.clusters,
    log: poll.log,
    detail: poll.detail,
    selection: state.selection.filter((cid) => alive.has(cid)),
  };
}

export function markUnreachable(state: AppState): AppState {
  return { ...state, reachable: false };
}

export function toggleSelection(state: AppState, cid: number): AppState {
  const selection = state.selection.includes(cid)
    ? state.selection.filter((x) => x !== cid)
    : [...state.selection, cid].slice(-2); // keep at most the last two picks
  return { ...state, selection, message: null };
}

export function editStarted(state: AppState): AppState {
  return { ...state, busy: true, message: null };
}

export function editApplied(state: AppState, outcome: EditOutcome): AppState {
  return { ...state, busy: false, lastEdit: outcome, selection: [], message: null };
}

export function editFailed(state: AppState, message: string): AppState {
  return { ...state, busy: false, message };
}

/** Cluster ids the last edit created or modified, for row highlighting. */
export function highlightedClusters(state: AppState): Set<number> {
  return new Set(state.lastEdit ? state.lastEdit.added.map((c) => c.id) : []);
}

export interface ErrorSeries {
  edits: number[]; // x axis: 0 = initial clustering, then one point per edit
  delta_u: number[];
  delta_o: number[];
  delta_cc: number[];
}

/** Chart data straight from the session log (entries carry the reports). */
export function errorSeries(log: LogEntry[]): ErrorSeries {
  const reports: ErrorReportData[] = [];
  for (const entry of log) {
    if ((entry.type === "create" || entry.type === "edit") && entry.report) {
      reports.push(entry.report);
    }
  }
  return {
    edits: reports.map((_, i) => i),
    delta_u: reports.map((r) => r.delta_u),
    delta_o: reports.map((r) => r.delta_o),
    delta_cc: reports.map((r) => r.delta_cc),
  };
}

export function canSplit(state: AppState): boolean {
  return !state.busy && state.reachable && state.selection.length === 1;
}

export function canMerge(state: AppState): boolean {
  return !state.busy && state.reachable && state.selection.length === 2;
}
