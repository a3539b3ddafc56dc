"""Post-evaluation closure analysis.

Every syntactic closure occurrence in a result is enumerated and numbered
per hole (1, 2, ...) in a depth-first left-to-right traversal that also
descends into closure environments, producing the paths shown by the live
context inspector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .syntax import (
    Cast,
    EmptyClosure,
    Env,
    FailedCast,
    HoleContext,
    IAp,
    ICase,
    IConst,
    IInL,
    IInR,
    ILam,
    INumLit,
    IPlus,
    IVar,
    IntExpr,
    NonEmptyClosure,
    Ty,
)


@dataclass(frozen=True)
class Binding:
    """An environment entry viewed as a tree node (variable plus its term)."""

    var: str
    value: IntExpr


Node = Union[IntExpr, Binding]


def node_children(node: Node) -> list[Node]:
    """Children of a term in the inspector's tree model.

    Closure environments count as children (each binding is a node), so a
    structural address (site) can reach closures hidden in environments.
    """
    match node:
        case Binding(_, value):
            return [value]
        case IConst() | IVar() | INumLit():
            return []
        case ILam(_, _, body):
            return [body]
        case IAp(fun, arg):
            return [fun, arg]
        case EmptyClosure(_, env):
            return [Binding(x, v) for x, v in env]
        case NonEmptyClosure(body, _, env):
            return [body, *(Binding(x, v) for x, v in env)]
        case Cast(body, _, _) | FailedCast(body, _, _):
            return [body]
        case IPlus(left, right):
            return [left, right]
        case IInL(_, body) | IInR(_, body):
            return [body]
        case ICase(scrut, _, left, _, right):
            return [scrut, left, right]
    raise TypeError(f"not a tree node: {node!r}")


Path = tuple[tuple[str, int], ...]
Site = tuple[int, ...]


@dataclass(frozen=True)
class ClosureInstance:
    hole: str
    index: int
    env: Env
    path: Path  # enclosing closure instances, outermost first
    site: Site  # child indices from the result root in the tree model


@dataclass
class ClosureIndex:
    instances: list[ClosureInstance] = field(default_factory=list)
    by_hole: dict[str, list[ClosureInstance]] = field(default_factory=dict)

    def get(self, hole: str, index: int) -> Optional[ClosureInstance]:
        group = self.by_hole.get(hole, [])
        if 1 <= index <= len(group):
            return group[index - 1]
        return None


def index_closures(result: IntExpr) -> ClosureIndex:
    """Enumerate every closure occurrence in `result`.

    Numbering is per hole, assigned in traversal order: a closure is
    numbered on entry, then its contents (inner term, then environment
    bindings in display order) are traversed with the path extended."""
    index = ClosureIndex()
    counters: dict[str, int] = {}

    def visit(node: Node, path: Path, site: Site) -> None:
        new_path = path
        if isinstance(node, (EmptyClosure, NonEmptyClosure)):
            hole = node.hole
            n = counters.get(hole, 0) + 1
            counters[hole] = n
            inst = ClosureInstance(hole, n, node.env, path, site)
            index.instances.append(inst)
            index.by_hole.setdefault(hole, []).append(inst)
            new_path = path + ((hole, n),)
        for i, child in enumerate(node_children(node)):
            visit(child, new_path, site + (i,))

    visit(result, (), ())
    return index


class UnknownInstance(Exception):
    def __init__(self, hole: str, index: int):
        super().__init__(f"no closure instance {hole}:{index} in the result")
        self.hole = hole
        self.index = index


@dataclass(frozen=True)
class InspectorRow:
    var: str
    ty: Ty
    value: Optional[IntExpr]


@dataclass(frozen=True)
class InspectorView:
    hole: str
    index: int
    path: Path
    site: Site
    rows: tuple[InspectorRow, ...]


def inspect(
    index: ClosureIndex, hole: str, instance: int, holes: HoleContext
) -> InspectorView:
    """Variables in scope at a closure instance, with their types (from the
    hole context) and the values its environment records for them."""
    inst = index.get(hole, instance)
    if inst is None:
        raise UnknownInstance(hole, instance)
    entry = holes.lookup(hole)
    rows: list[InspectorRow] = []
    if entry is not None:
        hole_ctx, _ = entry
        for x, t in hole_ctx:
            rows.append(InspectorRow(x, t, inst.env.lookup(x)))
    return InspectorView(hole, instance, inst.path, inst.site, tuple(rows))
