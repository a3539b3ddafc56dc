// DOM wiring for the inspector. The page is a pure function of AppState;
// every state change triggers a full re-render of the dynamic panes.

import {
  ApiError,
  type ClosureInfo,
  type Diagnostic,
  type RunResponse,
} from "./api.js";

export { ApiClient } from "./api.js";

// the surface of ApiClient the app needs; tests may stub it
export interface Api {
  createSession(fuel?: number): Promise<string>;
  runProgram(sessionId: string, source: string): Promise<RunResponse>;
  fillHole(
    sessionId: string,
    hole: string,
    fragment: string,
    verify: boolean,
  ): Promise<RunResponse>;
  closure(sessionId: string, hole: string, instance: number): Promise<ClosureInfo>;
}
import {
  type AppState,
  expectedTypeLabel,
  initialState,
  openFill,
  selectInstance,
  selectionFillable,
  stepSelection,
  withFillError,
  withInspector,
  withRunError,
  withRunResult,
} from "./state.js";
import { renderTree, type RenderedNode } from "./tree.js";

export interface App {
  state: () => AppState;
  run: () => Promise<void>;
  select: (hole: string, instance: number) => Promise<void>;
  cycle: (delta: 1 | -1) => Promise<void>;
  submitFill: () => Promise<void>;
  root: HTMLElement;
}

export function mountApp(root: HTMLElement, api: Api): App {
  root.innerHTML = `
    <section class="program-pane">
      <textarea class="source" rows="8" spellcheck="false"></textarea>
      <div class="controls">
        <button class="run">Run</button>
        <label><input type="checkbox" class="verify" checked> verify fills</label>
      </div>
      <ul class="diagnostics"></ul>
      <div class="result-meta"></div>
      <div class="result-tree"></div>
    </section>
    <aside class="inspector-pane">
      <h2>Context inspector</h2>
      <div class="selection-label">nothing selected</div>
      <table class="inspector-rows"><tbody></tbody></table>
      <div class="breadcrumb"></div>
      <div class="cycle">
        <button class="prev" title="previous closure">&#9664;</button>
        <button class="next" title="next closure">&#9654;</button>
      </div>
      <div class="fill">
        <button class="open-fill">Fill hole…</button>
        <form class="fill-form" hidden>
          <div class="fill-expected"></div>
          <input class="fill-input" placeholder="expression" />
          <button class="fill-submit" type="submit">Fill</button>
          <div class="fill-error"></div>
        </form>
        <div class="fill-badge" hidden></div>
      </div>
    </aside>
  `;

  const el = <T extends HTMLElement>(selector: string): T => {
    const found = root.querySelector<T>(selector);
    if (!found) {
      throw new Error(`missing element: ${selector}`);
    }
    return found;
  };

  const sourceEl = el<HTMLTextAreaElement>(".source");
  const runButton = el<HTMLButtonElement>(".run");
  const verifyBox = el<HTMLInputElement>(".verify");
  const diagnosticsEl = el<HTMLUListElement>(".diagnostics");
  const metaEl = el<HTMLDivElement>(".result-meta");
  const treeEl = el<HTMLDivElement>(".result-tree");
  const selectionLabel = el<HTMLDivElement>(".selection-label");
  const rowsEl = el<HTMLTableSectionElement>(".inspector-rows tbody");
  const breadcrumbEl = el<HTMLDivElement>(".breadcrumb");
  const fillForm = el<HTMLFormElement>(".fill-form");
  const fillExpected = el<HTMLDivElement>(".fill-expected");
  const fillInput = el<HTMLInputElement>(".fill-input");
  const fillError = el<HTMLDivElement>(".fill-error");
  const fillBadge = el<HTMLDivElement>(".fill-badge");

  let state = initialState();
  let sessionId: string | null = null;

  const setState = (next: AppState) => {
    state = next;
    render();
  };

  const session = async (): Promise<string> => {
    if (sessionId === null) {
      sessionId = await api.createSession();
    }
    return sessionId;
  };

  const renderDiagnostics = (diags: Diagnostic[]) => {
    diagnosticsEl.innerHTML = "";
    for (const d of diags) {
      const item = document.createElement("li");
      const where = d.start !== undefined ? `at ${d.start}: ` : "";
      item.textContent = `${where}${d.message}`;
      item.className = d.rule === "warning" ? "warning" : "error";
      diagnosticsEl.appendChild(item);
    }
  };

  const renderNode = (node: RenderedNode): HTMLElement => {
    const div = document.createElement("div");
    div.className = `tree-node ${node.cssClass}`;
    const label = document.createElement("span");
    label.textContent = node.label;
    label.className = "label";
    if (node.closure) {
      label.classList.add("clickable");
      label.dataset["hole"] = node.closure.hole;
      label.dataset["instance"] = String(node.closure.instance);
      const { hole, instance } = node.closure;
      if (
        state.selected &&
        state.selected.hole === hole &&
        state.selected.instance === instance
      ) {
        label.classList.add("selected");
      }
      label.addEventListener("click", (event) => {
        event.stopPropagation();
        void select(hole, instance);
      });
    }
    div.appendChild(label);
    if (node.children.length > 0) {
      const kids = document.createElement("div");
      kids.className = "children";
      for (const child of node.children) {
        kids.appendChild(renderNode(child));
      }
      div.appendChild(kids);
    }
    return div;
  };

  const render = () => {
    renderDiagnostics(state.diagnostics);
    treeEl.innerHTML = "";
    metaEl.textContent = "";
    if (state.run) {
      const run = state.run;
      const resumed =
        run.resumed_from !== undefined
          ? ` (resumed from snapshot ${run.resumed_from}, ${run.catch_up_steps} catch-up steps)`
          : "";
      metaEl.textContent = `: ${run.type} — ${run.outcome} after ${run.steps} steps${resumed} — ${run.result_pretty}`;
      treeEl.appendChild(renderNode(renderTree(run.result_tree)));
    }

    if (state.selected) {
      selectionLabel.textContent = `closure ${state.selected.hole}:${state.selected.instance}`;
    } else {
      selectionLabel.textContent = "nothing selected";
    }

    rowsEl.innerHTML = "";
    if (state.inspector) {
      for (const row of state.inspector.env) {
        const tr = document.createElement("tr");
        tr.innerHTML = `<td class="var"></td><td class="type"></td><td class="value"></td>`;
        (tr.children[0] as HTMLElement).textContent = row.var;
        (tr.children[1] as HTMLElement).textContent = row.type;
        (tr.children[2] as HTMLElement).textContent = row.value_pretty ?? "—";
        rowsEl.appendChild(tr);
      }
      const crumbs = state.inspector.path
        .map(([hole, instance]) => `${hole}:${instance}`)
        .concat(`${state.inspector.hole}:${state.inspector.instance}`);
      breadcrumbEl.textContent = crumbs.join(" ▸ ");
    } else {
      breadcrumbEl.textContent = "";
    }

    const fillable = selectionFillable(state);
    el<HTMLButtonElement>(".open-fill").disabled = !fillable;
    fillForm.hidden = !state.fillOpen;
    if (state.fillOpen) {
      fillExpected.textContent = `expected: ${expectedTypeLabel(state) ?? "?"}`;
    }
    fillError.textContent = state.fillError ?? "";
    if (state.badge) {
      fillBadge.hidden = false;
      const verdict =
        state.badge.verifyAgreed === undefined || state.badge.verifyAgreed === null
          ? ""
          : state.badge.verifyAgreed
            ? ", fresh run agrees"
            : ", FRESH RUN DISAGREES";
      fillBadge.textContent = `caught up in ${state.badge.catchUpSteps} steps${verdict}`;
    } else {
      fillBadge.hidden = true;
      fillBadge.textContent = "";
    }
  };

  const run = async () => {
    try {
      const sid = await session();
      const result = await api.runProgram(sid, sourceEl.value);
      setState(withRunResult(state, result));
      if (state.selected) {
        await select(state.selected.hole, state.selected.instance);
      }
    } catch (err) {
      if (err instanceof ApiError) {
        setState(withRunError(state, err.diagnostics));
      } else if ((err as Error).name !== "AbortError") {
        setState(withRunError(state, [{ message: String(err) }]));
      }
    }
  };

  const select = async (hole: string, instance: number) => {
    if (sessionId === null) {
      return;
    }
    setState(selectInstance(state, hole, instance));
    try {
      const info = await api.closure(sessionId, hole, instance);
      setState(withInspector(state, info));
    } catch (err) {
      if (err instanceof ApiError) {
        setState(withRunError(state, err.diagnostics));
      }
    }
  };

  const cycle = async (delta: 1 | -1) => {
    const next = stepSelection(state, delta);
    if (next) {
      await select(next.hole, next.instance);
    }
  };

  const submitFill = async () => {
    if (!state.selected || sessionId === null) {
      return;
    }
    try {
      const result = await api.fillHole(
        sessionId,
        state.selected.hole,
        fillInput.value,
        verifyBox.checked,
      );
      setState(withRunResult(state, result));
      if (state.selected) {
        await select(state.selected.hole, state.selected.instance);
      }
    } catch (err) {
      if (err instanceof ApiError) {
        const detail = typeof err.detail === "string" ? {} : err.detail;
        const expected = detail.expected_type
          ? ` (expected ${detail.expected_type}[${detail.expected_ctx ?? ""}])`
          : "";
        setState(withFillError(state, `${err.message}${expected}`));
      }
    }
  };

  runButton.addEventListener("click", () => void run());
  el<HTMLButtonElement>(".prev").addEventListener("click", () => void cycle(-1));
  el<HTMLButtonElement>(".next").addEventListener("click", () => void cycle(1));
  el<HTMLButtonElement>(".open-fill").addEventListener("click", () => {
    setState(openFill(state));
    fillInput.focus();
  });
  fillForm.addEventListener("submit", (event) => {
    event.preventDefault();
    void submitFill();
  });

  render();
  return {
    state: () => state,
    run,
    select,
    cycle,
    submitFill,
    root,
  };
}
