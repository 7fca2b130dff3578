import { describe, expect, it } from "vitest";

import {
  applyPoll,
  attachSession,
  canMerge,
  canSplit,
  editApplied,
  editFailed,
  editStarted,
  errorSeries,
  highlightedClusters,
  initialState,
  markUnreachable,
  toggleSelection,
} from "../src/state.js";
import { clusters, createLog, editEntry, session, threeClusters } from "./fixtures.js";

function polled() {
  const base = attachSession(initialState(), "s-test");
  return applyPoll(base, {
    session: session(),
    clusters: clusters(threeClusters),
    log: createLog(true),
    detail: null,
  });
}

describe("state transitions", () => {
  it("applyPoll stores service state verbatim and restores reachability", () => {
    const degraded = markUnreachable(polled());
    expect(degraded.reachable).toBe(false);
    const back = applyPoll(degraded, {
      session: session({ edits: 1 }),
      clusters: clusters(threeClusters),
      log: createLog(true),
      detail: null,
    });
    expect(back.reachable).toBe(true);
    expect(back.session?.edits).toBe(1);
    expect(back.clusters?.clusters).toEqual(threeClusters);
  });

  it("selection toggles and keeps at most two clusters", () => {
    let state = polled();
    state = toggleSelection(state, 0);
    state = toggleSelection(state, 1);
    expect(state.selection).toEqual([0, 1]);
    state = toggleSelection(state, 2);
    expect(state.selection).toEqual([1, 2]); // oldest pick dropped
    state = toggleSelection(state, 1);
    expect(state.selection).toEqual([2]);
  });

  it("poll drops selections whose clusters no longer exist", () => {
    let state = toggleSelection(polled(), 0);
    state = applyPoll(state, {
      session: session(),
      clusters: clusters(threeClusters.slice(1)),
      log: createLog(true),
      detail: null,
    });
    expect(state.selection).toEqual([]);
  });

  it("split needs exactly one selection, merge exactly two", () => {
    let state = polled();
    expect(canSplit(state) || canMerge(state)).toBe(false);
    state = toggleSelection(state, 0);
    expect(canSplit(state)).toBe(true);
    expect(canMerge(state)).toBe(false);
    state = toggleSelection(state, 1);
    expect(canSplit(state)).toBe(false);
    expect(canMerge(state)).toBe(true);
    expect(canSplit({ ...state, selection: [0], busy: true })).toBe(false);
    expect(canSplit(markUnreachable({ ...state, selection: [0] }))).toBe(false);
  });

  it("edit lifecycle records outcome, clears selection, surfaces failures", () => {
    let state = toggleSelection(polled(), 0);
    state = editStarted(state);
    expect(state.busy).toBe(true);
    const outcome = {
      result: editEntry(false, 0, 0, 0).result!,
      clusters: 4,
      added: threeClusters.slice(0, 2),
      removed: [0],
    };
    state = editApplied(state, outcome);
    expect(state.busy).toBe(false);
    expect(state.selection).toEqual([]);
    expect(highlightedClusters(state)).toEqual(new Set([0, 1]));

    const failed = editFailed(editStarted(state), "split_infeasible: cluster 2 has a single point");
    expect(failed.busy).toBe(false);
    expect(failed.message).toContain("split_infeasible");
  });

  it("errorSeries reads reports straight from the log", () => {
    const log = [...createLog(true), editEntry(true, 2, 2, 8), editEntry(true, 1, 2, 6)];
    const series = errorSeries(log);
    expect(series.edits).toEqual([0, 1, 2]);
    expect(series.delta_u).toEqual([2, 2, 1]);
    expect(series.delta_o).toEqual([3, 2, 2]);
    expect(series.delta_cc).toEqual([10, 8, 6]);
    // no reports in the log (no target): empty series
    expect(errorSeries(createLog(false)).edits).toEqual([]);
  });
});
