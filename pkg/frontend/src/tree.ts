// Render model for the structural result tree. The result pane is built
// from these nodes, never re-parsed from pretty-printed text.

import type { TreeNode } from "./api.js";

export interface RenderedNode {
  label: string;
  cssClass: string;
  closure: { hole: string; instance: number } | null;
  children: RenderedNode[];
}

export function renderTree(node: TreeNode): RenderedNode {
  const children = (node.children ?? []).map(renderTree);
  switch (node.tag) {
    case "const":
      return leaf("c");
    case "num":
      return leaf(String(node.value));
    case "var":
      return leaf(node.name ?? "?");
    case "lam":
      return plain(`\\${node.var}:${node.ann}.`, children);
    case "ap":
      return plain("apply", children);
    case "plus":
      return plain("+", children);
    case "cast":
      return plain(`<${node.from} => ${node.to}>`, children, "cast");
    case "failed-cast":
      return plain(`<${node.from} =/=> ${node.to}>`, children, "failed-cast");
    case "empty-closure":
      return {
        label: `?${node.hole}:${node.instance}`,
        cssClass: "closure",
        closure: { hole: node.hole!, instance: node.instance! },
        children,
      };
    case "nonempty-closure":
      return {
        label: `{…}${node.hole}:${node.instance}`,
        cssClass: "closure nonempty",
        closure: { hole: node.hole!, instance: node.instance! },
        children,
      };
    case "bind":
      return plain(`${node.var} :=`, children, "bind");
    case "inl":
      return plain(`inl[${node.other}]`, children);
    case "inr":
      return plain(`inr[${node.other}]`, children);
    case "case":
      return plain(`case inl ${node.left_var} | inr ${node.right_var}`, children);
    default:
      return plain(node.tag, children);
  }
}

function leaf(label: string): RenderedNode {
  return { label, cssClass: "leaf", closure: null, children: [] };
}

function plain(label: string, children: RenderedNode[], cssClass = "node"): RenderedNode {
  return { label, cssClass, closure: null, children };
}

export function collectClosures(node: RenderedNode): { hole: string; instance: number }[] {
  const out: { hole: string; instance: number }[] = [];
  const walk = (n: RenderedNode) => {
    if (n.closure) {
      out.push(n.closure);
    }
    n.children.forEach(walk);
  };
  walk(node);
  return out;
}
