// Scripted end-to-end run against the real service. Covers the interaction
// loop: load the three-instance desk program, default selection, clicking
// another instance, and fill-and-resume with the catch-up badge.

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { mountApp } from "../src/main.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;
let proc: ChildProcess;

async function waitForService(): Promise<void> {
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/session`, { method: "POST" });
      if (resp.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  proc = spawn("python3", ["-m", "holeval.cli", "serve", "--port", String(PORT)], {
    stdio: "ignore",
  });
  await waitForService();
});

afterAll(() => {
  proc.kill();
});

describe("inspector against the live service", () => {
  it("drives the full hole-closure loop", async () => {
    document.body.innerHTML = `<div id="app"></div>`;
    const root = document.getElementById("app")!;
    const app = mountApp(root, new ApiClient(BASE));

    const source = root.querySelector(".source") as HTMLTextAreaElement;
    source.value = "(\\f:num->num. f 1 + f 2 + f 3) (\\x:num. ?)";
    await app.run();

    // default selection is the first instance
    expect(app.state().selected).toEqual({ hole: "1", instance: 1 });
    expect(app.state().inspector?.env).toEqual([
      { var: "x", type: "num", value_pretty: "1" },
    ]);
    expect(root.querySelectorAll(".label.clickable").length).toBe(3);

    // clicking instance 3 updates the inspector environment
    const third = [...root.querySelectorAll<HTMLElement>(".label.clickable")].find(
      (n) => n.dataset["instance"] === "3",
    )!;
    third.click();
    await new Promise((resolve) => setTimeout(resolve, 200));
    expect(app.state().selected).toEqual({ hole: "1", instance: 3 });
    expect(app.state().inspector?.env[0]?.value_pretty).toBe("3");
    expect(root.querySelector(".inspector-rows td.value")!.textContent).toBe("3");

    // filling the hole updates the result in place and shows the badge
    (root.querySelector(".open-fill") as HTMLButtonElement).click();
    expect(root.querySelector(".fill-expected")!.textContent).toContain("?[x : num]");
    (root.querySelector(".fill-input") as HTMLInputElement).value = "x + 1";
    await app.submitFill();

    const meta = root.querySelector(".result-meta")!.textContent ?? "";
    expect(meta).toContain("boxed");
    expect(meta).toContain("9"); // (1+1) + (2+1) + (3+1)
    const badge = root.querySelector<HTMLElement>(".fill-badge")!;
    expect(badge.hidden).toBe(false);
    expect(badge.textContent).toMatch(/caught up in \d+ steps/);
    expect(badge.textContent).toContain("agrees");
  });

  it("renders diagnostics for ill-typed programs", async () => {
    document.body.innerHTML = `<div id="app"></div>`;
    const root = document.getElementById("app")!;
    const app = mountApp(root, new ApiClient(BASE));
    (root.querySelector(".source") as HTMLTextAreaElement).value = "y";
    await app.run();
    const diags = root.querySelector(".diagnostics")!.textContent ?? "";
    expect(diags).toContain("unbound");
  });

  it("marks failed casts in the tree", async () => {
    document.body.innerHTML = `<div id="app"></div>`;
    const root = document.getElementById("app")!;
    const app = mountApp(root, new ApiClient(BASE));
    (root.querySelector(".source") as HTMLTextAreaElement).value = "(\\x:?. x c) c";
    await app.run();
    expect(root.querySelectorAll(".tree-node.failed-cast").length).toBe(1);
  });
});
