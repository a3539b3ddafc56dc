"""Session-oriented JSON-over-HTTP facade.

Exposes check/elaborate/run, single-stepping, closure inspection, and
fill-and-resume. Each session caches its recent elaborated snapshots so an
edit that amounts to filling one hole (possibly of a state several edits
back) resumes evaluation instead of recomputing from scratch.
"""

from __future__ import annotations

import os
import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .closures import (
    Binding,
    ClosureIndex,
    UnknownInstance,
    index_closures,
    inspect,
    node_children,
)
from .dynamics import PlusOverflow, multi_step, step_with_rule, Stepped
from .elaboration import ElabResult, elab_ana, elab_syn
from .fill import FillerIllTyped, detect_fill, fill, rename_hole, resume
from .statics import diagnose_ana, diagnose_syn
from .surface import ParseError, parse, print_ctx, print_env, print_int, print_ty
from .syntax import (
    Cast,
    EmptyClosure,
    FailedCast,
    HoleContext,
    HoleContextError,
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
    TypingCtx,
    alpha_equiv,
)

SNAPSHOT_LIMIT = 8
SESSION_IDLE_SECONDS = 30 * 60


@dataclass
class Snapshot:
    source: Optional[str]
    elab: ElabResult
    result: IntExpr
    outcome: str
    steps: int
    index: ClosureIndex


@dataclass
class Session:
    id: str
    fuel: int
    snapshots: list[Snapshot] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_access: float = field(default_factory=time.monotonic)


class SessionRequest(BaseModel):
    fuel: Optional[int] = None


class ProgramRequest(BaseModel):
    source: str


class FillRequest(BaseModel):
    hole: str
    source_fragment: str
    verify: bool = False


class StepRequest(BaseModel):
    n: int


def _diag_json(diags) -> list[dict[str, Any]]:
    out = []
    for d in diags:
        entry: dict[str, Any] = {"message": d.message, "rule": d.rule}
        if d.span is not None:
            entry["start"], entry["end"] = d.span
        out.append(entry)
    return out


def to_tree(d: IntExpr, counters: Optional[dict[str, int]] = None) -> dict[str, Any]:
    """Structural JSON for the result pane; closure nodes carry their
    instance number, matching the numbering of index_closures."""
    if counters is None:
        counters = {}

    def build(node) -> dict[str, Any]:
        out: dict[str, Any]
        match node:
            case Binding(var, _):
                out = {"tag": "bind", "var": var}
            case IConst():
                out = {"tag": "const"}
            case IVar(name):
                out = {"tag": "var", "name": name}
            case INumLit(value):
                out = {"tag": "num", "value": value}
            case ILam(var, ann, _):
                out = {"tag": "lam", "var": var, "ann": print_ty(ann)}
            case IAp():
                out = {"tag": "ap"}
            case EmptyClosure(hole, _):
                n = counters.get(hole, 0) + 1
                counters[hole] = n
                out = {"tag": "empty-closure", "hole": hole, "instance": n}
            case NonEmptyClosure(_, hole, _):
                n = counters.get(hole, 0) + 1
                counters[hole] = n
                out = {"tag": "nonempty-closure", "hole": hole, "instance": n}
            case Cast(_, src, dst):
                out = {"tag": "cast", "from": print_ty(src), "to": print_ty(dst)}
            case FailedCast(_, src, dst):
                out = {"tag": "failed-cast", "from": print_ty(src), "to": print_ty(dst)}
            case IPlus():
                out = {"tag": "plus"}
            case IInL(other, _):
                out = {"tag": "inl", "other": print_ty(other)}
            case IInR(other, _):
                out = {"tag": "inr", "other": print_ty(other)}
            case ICase(_, lv, _, rv, _):
                out = {"tag": "case", "left_var": lv, "right_var": rv}
            case _:
                raise TypeError(f"not a tree node: {node!r}")
        children = [build(child) for child in node_children(node)]
        if children:
            out["children"] = children
        return out

    return build(d)


def _closures_json(index: ClosureIndex, holes: HoleContext) -> list[dict[str, Any]]:
    out = []
    for inst in index.instances:
        view = inspect(index, inst.hole, inst.index, holes)
        out.append(
            {
                "hole": inst.hole,
                "instance": inst.index,
                "path": [[u, i] for u, i in inst.path],
                "site": list(inst.site),
                "env": [
                    {
                        "var": row.var,
                        "type": print_ty(row.ty),
                        "value_pretty": print_int(row.value) if row.value is not None else None,
                    }
                    for row in view.rows
                ],
            }
        )
    return out


def _hole_names_int(d: IntExpr) -> set[str]:
    names: set[str] = set()

    def walk(node) -> None:
        if isinstance(node, (EmptyClosure, NonEmptyClosure)):
            names.add(node.hole)
        for child in node_children(node):
            walk(child)

    walk(d)
    return names


def create_app(default_fuel: int = 10_000) -> FastAPI:
    app = FastAPI(title="holeval service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def purge_idle(now: float) -> None:
        stale = [
            sid
            for sid, s in sessions.items()
            if now - s.last_access > SESSION_IDLE_SECONDS
        ]
        for sid in stale:
            del sessions[sid]

    def get_session(sid: str) -> Session:
        with registry_lock:
            now = time.monotonic()
            purge_idle(now)
            session = sessions.get(sid)
            if session is None:
                raise HTTPException(status_code=404, detail="unknown session")
            session.last_access = now
            return session

    @app.post("/session")
    def create_session(body: Optional[SessionRequest] = None) -> dict[str, Any]:
        fuel = default_fuel
        if body is not None and body.fuel is not None:
            if body.fuel < 0:
                raise HTTPException(status_code=422, detail="fuel must be non-negative")
            fuel = body.fuel
        session = Session(id=secrets.token_hex(16), fuel=fuel)
        with registry_lock:
            purge_idle(time.monotonic())
            sessions[session.id] = session
        return {"session_id": session.id}

    def run_response(
        session: Session,
        source: Optional[str],
        elab: ElabResult,
        result: IntExpr,
        outcome: str,
        steps: int,
        extra: dict[str, Any],
        warnings: tuple[str, ...] = (),
    ) -> dict[str, Any]:
        index = index_closures(result)
        snapshot = Snapshot(source, elab, result, outcome, steps, index)
        session.snapshots.append(snapshot)
        if len(session.snapshots) > SNAPSHOT_LIMIT:
            del session.snapshots[: len(session.snapshots) - SNAPSHOT_LIMIT]
        response = {
            "type": print_ty(elab.ty),
            "result_pretty": print_int(result),
            "result_tree": to_tree(result),
            "outcome": outcome,
            "steps": steps,
            "closures": _closures_json(index, elab.holes),
            "holes": {
                u: {"type": print_ty(t), "ctx": print_ctx(g)}
                for u, (g, t) in elab.holes.items()
            },
            "diagnostics": [{"message": w, "rule": "warning"} for w in warnings],
        }
        response.update(extra)
        return response

    @app.post("/session/{sid}/program")
    def post_program(sid: str, body: ProgramRequest) -> dict[str, Any]:
        session = get_session(sid)
        with session.lock:
            try:
                return _run_program(session, body)
            except RecursionError:
                raise HTTPException(status_code=422, detail="program is nested too deeply")

    def _run_program(session: Session, body: ProgramRequest) -> dict[str, Any]:
        try:
            parsed = parse(body.source)
        except ParseError as err:
            raise HTTPException(
                status_code=422,
                detail={
                    "diagnostics": [
                        {"message": err.message, "start": err.pos, "end": err.pos}
                    ]
                },
            )
        elab = elab_syn(TypingCtx(), parsed.expr)
        if elab is None:
            raise HTTPException(
                status_code=422,
                detail={"diagnostics": _diag_json(diagnose_syn(TypingCtx(), parsed.expr))},
            )

        extra: dict[str, Any] = {}
        resumed: Optional[tuple[IntExpr, str, int, int]] = None
        for pos in range(len(session.snapshots) - 1, -1, -1):
            snap = session.snapshots[pos]
            det = detect_fill(snap.elab.expr, elab.expr)
            if det is None:
                continue
            hole, filler = det
            try:
                filler_names = _hole_names_int(filler)
                filler_holes = HoleContext(
                    (u, entry) for u, entry in elab.holes.items() if u in filler_names
                )
                state = snap.result
                old_holes = snap.elab.holes
                if hole in filler_names:
                    # the re-parse reused the filled hole's name for a new
                    # hole; relabel the old hole before filling
                    fresh = hole
                    taken = set(old_holes.names()) | set(elab.holes.names())
                    while fresh in taken:
                        fresh += "′"
                    state = rename_hole(hole, fresh, state)
                    entry = old_holes.lookup(hole)
                    old_holes = old_holes.without(hole).add(fresh, *entry)
                    hole = fresh
                holes_ext = old_holes.union(filler_holes)
                term, tag, steps = resume(state, holes_ext, hole, filler, session.fuel)
            except (HoleContextError, FillerIllTyped):
                continue
            except PlusOverflow as err:
                raise HTTPException(status_code=422, detail=str(err))
            resumed = (term, tag, steps, pos)
            break

        try:
            if resumed is not None:
                result, outcome, steps, pos = resumed
                extra["resumed_from"] = pos
                extra["catch_up_steps"] = steps
            else:
                result, outcome, steps = multi_step(elab.expr, session.fuel)
        except PlusOverflow as err:
            raise HTTPException(status_code=422, detail=str(err))
        return run_response(
            session, body.source, elab, result, outcome, steps, extra, parsed.warnings
        )

    @app.post("/session/{sid}/fill")
    def post_fill(sid: str, body: FillRequest) -> dict[str, Any]:
        session = get_session(sid)
        with session.lock:
            if not session.snapshots:
                raise HTTPException(status_code=409, detail="no program loaded")
            snap = session.snapshots[-1]
            entry = snap.elab.holes.lookup(body.hole)
            if entry is None:
                raise HTTPException(
                    status_code=409, detail=f"hole {body.hole} is unknown or already filled"
                )
            hole_ctx, hole_ty = entry
            try:
                parsed = parse(
                    body.source_fragment,
                    reserved_hole_names=frozenset(snap.elab.holes.names()),
                )
            except ParseError as err:
                raise HTTPException(
                    status_code=422,
                    detail={
                        "diagnostics": [
                            {"message": err.message, "start": err.pos, "end": err.pos}
                        ],
                        "expected_type": print_ty(hole_ty),
                        "expected_ctx": print_ctx(hole_ctx),
                    },
                )
            frag = elab_ana(hole_ctx, parsed.expr, hole_ty)
            if frag is None:
                raise HTTPException(
                    status_code=422,
                    detail={
                        "diagnostics": _diag_json(diagnose_ana(hole_ctx, parsed.expr, hole_ty)),
                        "expected_type": print_ty(hole_ty),
                        "expected_ctx": print_ctx(hole_ctx),
                    },
                )
            filler, frag_ty, frag_holes = frag
            if frag_ty != hole_ty:
                # ascription-style adapter so the filler has exactly the
                # hole's contextual type
                filler = Cast(filler, frag_ty, hole_ty)
            try:
                holes_ext = snap.elab.holes.union(frag_holes)
            except HoleContextError as err:
                raise HTTPException(status_code=422, detail=str(err))
            try:
                term, tag, steps = resume(snap.result, holes_ext, body.hole, filler, session.fuel)
            except FillerIllTyped as err:
                raise HTTPException(
                    status_code=422,
                    detail={
                        "diagnostics": [{"message": str(err), "rule": "fill-typed"}],
                        "expected_type": print_ty(hole_ty),
                        "expected_ctx": print_ctx(hole_ctx),
                    },
                )
            except PlusOverflow as err:
                raise HTTPException(status_code=422, detail=str(err))

            new_expr = fill(filler, body.hole, snap.elab.expr)
            new_elab = ElabResult(new_expr, snap.elab.ty, holes_ext.without(body.hole))
            extra: dict[str, Any] = {"catch_up_steps": steps}
            if body.verify:
                try:
                    fresh_term, fresh_tag, _ = multi_step(new_expr, session.fuel)
                except PlusOverflow:
                    fresh_term, fresh_tag = None, "error"
                if fresh_term is not None and tag != "fuel-exhausted" and fresh_tag != "fuel-exhausted":
                    extra["verify_agreed"] = alpha_equiv(term, fresh_term)
                else:
                    extra["verify_agreed"] = None
            return run_response(session, None, new_elab, term, tag, steps, extra)

    @app.get("/session/{sid}/closure/{hole}/{instance}")
    def get_closure(sid: str, hole: str, instance: int) -> dict[str, Any]:
        session = get_session(sid)
        with session.lock:
            if not session.snapshots:
                raise HTTPException(status_code=404, detail="no program loaded")
            snap = session.snapshots[-1]
            try:
                view = inspect(snap.index, hole, instance, snap.elab.holes)
            except UnknownInstance as err:
                raise HTTPException(status_code=404, detail=str(err))
            return {
                "hole": view.hole,
                "instance": view.index,
                "path": [[u, i] for u, i in view.path],
                "site": list(view.site),
                "env": [
                    {
                        "var": row.var,
                        "type": print_ty(row.ty),
                        "value_pretty": print_int(row.value) if row.value is not None else None,
                    }
                    for row in view.rows
                ],
            }

    @app.post("/session/{sid}/step")
    def post_step(sid: str, body: StepRequest) -> dict[str, Any]:
        session = get_session(sid)
        with session.lock:
            if not session.snapshots:
                raise HTTPException(status_code=422, detail="no program loaded")
            if body.n < 0:
                raise HTTPException(status_code=422, detail="n must be non-negative")
            snap = session.snapshots[-1]
            term = snap.elab.expr
            trace: list[dict[str, Any]] = []
            for _ in range(body.n):
                try:
                    outcome, rule = step_with_rule(term)
                except PlusOverflow as err:
                    raise HTTPException(status_code=422, detail=str(err))
                if not isinstance(outcome, Stepped):
                    break
                term = outcome.term
                trace.append({"term_pretty": print_int(term), "rule": rule})
            return {"trace": trace}

    return app


def default_app() -> FastAPI:
    fuel = int(os.environ.get("HOLEVAL_FUEL", "10000"))
    return create_app(default_fuel=fuel)


app = default_app()
