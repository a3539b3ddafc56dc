// Pure view-model: every transition returns a new state derived from the
// latest service responses. Nothing here evaluates programs.

import type { ClosureInfo, Diagnostic, RunResponse } from "./api.js";

export interface Selection {
  hole: string;
  instance: number;
}

export interface FillBadge {
  catchUpSteps: number;
  verifyAgreed: boolean | null | undefined;
}

export interface AppState {
  run: RunResponse | null;
  diagnostics: Diagnostic[];
  selected: Selection | null;
  inspector: ClosureInfo | null;
  fillOpen: boolean;
  fillError: string | null;
  badge: FillBadge | null;
}

export function initialState(): AppState {
  return {
    run: null,
    diagnostics: [],
    selected: null,
    inspector: null,
    fillOpen: false,
    fillError: null,
    badge: null,
  };
}

// The first instance in the result is selected by default.
export function withRunResult(state: AppState, run: RunResponse): AppState {
  const first = run.closures[0];
  const badge =
    run.catch_up_steps === undefined
      ? null
      : { catchUpSteps: run.catch_up_steps, verifyAgreed: run.verify_agreed };
  return {
    ...state,
    run,
    diagnostics: run.diagnostics,
    selected: first ? { hole: first.hole, instance: first.instance } : null,
    inspector: null,
    fillOpen: false,
    fillError: null,
    badge,
  };
}

export function withRunError(state: AppState, diagnostics: Diagnostic[]): AppState {
  return { ...state, diagnostics, badge: null };
}

export function selectInstance(state: AppState, hole: string, instance: number): AppState {
  return { ...state, selected: { hole, instance }, inspector: null };
}

export function withInspector(state: AppState, info: ClosureInfo): AppState {
  return { ...state, inspector: info };
}

export function openFill(state: AppState): AppState {
  return { ...state, fillOpen: true, fillError: null };
}

export function withFillError(state: AppState, message: string): AppState {
  return { ...state, fillError: message };
}

// cycle through all closure instances of the result, in index order
export function stepSelection(state: AppState, delta: 1 | -1): Selection | null {
  const run = state.run;
  if (!run || run.closures.length === 0) {
    return null;
  }
  const items = run.closures;
  const current = state.selected;
  let index = items.findIndex(
    (c) => current && c.hole === current.hole && c.instance === current.instance,
  );
  if (index < 0) {
    index = 0;
  } else {
    index = (index + delta + items.length) % items.length;
  }
  const next = items[index]!;
  return { hole: next.hole, instance: next.instance };
}

export function expectedTypeLabel(state: AppState): string | null {
  if (!state.run || !state.selected) {
    return null;
  }
  const info = state.run.holes[state.selected.hole];
  if (!info) {
    return null;
  }
  return `${info.type}[${info.ctx}]`;
}

export function selectionFillable(state: AppState): boolean {
  if (!state.run || !state.selected) {
    return false;
  }
  return state.selected.hole in state.run.holes;
}
