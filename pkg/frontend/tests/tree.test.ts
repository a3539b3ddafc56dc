import { describe, expect, it } from "vitest";

import type { TreeNode } from "../src/api.js";
import { collectClosures, renderTree } from "../src/tree.js";

const sample: TreeNode = {
  tag: "plus",
  children: [
    {
      tag: "failed-cast",
      from: "b",
      to: "num",
      children: [{ tag: "const" }],
    },
    {
      tag: "empty-closure",
      hole: "1",
      instance: 1,
      children: [
        {
          tag: "bind",
          var: "x",
          children: [{ tag: "num", value: 3 }],
        },
      ],
    },
  ],
};

describe("renderTree", () => {
  it("marks closure nodes clickable with hole and instance", () => {
    const rendered = renderTree(sample);
    const closures = collectClosures(rendered);
    expect(closures).toEqual([{ hole: "1", instance: 1 }]);
    const closureNode = rendered.children[1]!;
    expect(closureNode.cssClass).toContain("closure");
    expect(closureNode.label).toBe("?1:1");
  });

  it("tags failed casts distinctly", () => {
    const rendered = renderTree(sample);
    const failed = rendered.children[0]!;
    expect(failed.cssClass).toBe("failed-cast");
    expect(failed.label).toContain("=/=>");
  });

  it("renders environment bindings as children", () => {
    const rendered = renderTree(sample);
    const bind = rendered.children[1]!.children[0]!;
    expect(bind.label).toBe("x :=");
    expect(bind.children[0]!.label).toBe("3");
  });

  it("plain values have no clickable nodes", () => {
    const rendered = renderTree({ tag: "const" });
    expect(collectClosures(rendered)).toEqual([]);
  });
});
