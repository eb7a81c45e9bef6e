"""Workflow graph model, XML definition parser/serializer and structural checks.

A workflow is a directed graph of three node families:

* ``active`` nodes drive one under-layer simulation model and declare typed
  ports and configuration parameters,
* ``logical`` nodes join branches with an AND / OR / NOR connective,
* ``event`` nodes mark the start, the end, or an external stimulus.

Definition files look like::

    <workflow name="landing" estimated-time="142.85">
      <incentives para="21" ex-para="7"/>
      <node id="s" kind="event" event-kind="start"/>
      <node id="a1" kind="active" linked-model="aero">
        <port direction="in" name="trigger" type-tag="signal"/>
        <port direction="out" name="state" type-tag="state"/>
        <param name="mass" required="true" value="5.2e4"/>
      </node>
      <node id="e" kind="event" event-kind="end"/>
      <edge from="s" to="a1" to-port="trigger"/>
      <edge from="a1" from-port="state" to="e"/>
    </workflow>
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from xml.parsers import expat
from xml.sax.saxutils import quoteattr

from .errors import WorkflowParseError

NODE_KINDS = ("active", "logical", "event")
CONNECTIVES = ("and", "or", "nor")
EVENT_KINDS = ("start", "stimulate", "end")

_TRUE = {"true", "1", "yes"}
_FALSE = {"false", "0", "no"}


@dataclass(frozen=True)
class Port:
    name: str
    type_tag: str


@dataclass(frozen=True)
class Param:
    name: str
    required: bool
    value: str | None = None

    @property
    def configured(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    connective: str | None = None
    event_kind: str | None = None
    linked_model: str | None = None
    ports_in: tuple[Port, ...] = ()
    ports_out: tuple[Port, ...] = ()
    params: tuple[Param, ...] = ()

    @property
    def is_active(self) -> bool:
        return self.kind == "active"

    def port(self, name: str, direction: str) -> Port | None:
        ports = self.ports_in if direction == "in" else self.ports_out
        for p in ports:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    source_port: str | None = None
    target_port: str | None = None


@dataclass(frozen=True)
class WorkflowGraph:
    """Immutable workflow graph.

    ``n_para`` / ``n_ex_para`` are the workflow-level incentive parameter
    counts and ``estimated_time`` the declared execution time estimate in
    seconds (``None`` when the definition does not carry one).
    """

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    n_para: int = 0
    n_ex_para: int = 0
    estimated_time: float | None = None
    name: str | None = None

    @cached_property
    def node_map(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    def node(self, node_id: str) -> Node:
        return self.node_map[node_id]

    @property
    def active_nodes(self) -> list[Node]:
        return [n for n in self.nodes if n.kind == "active"]

    @property
    def n_active(self) -> int:
        return sum(1 for n in self.nodes if n.kind == "active")

    @property
    def n_logic(self) -> int:
        return sum(1 for n in self.nodes if n.kind == "logical")

    @property
    def n_stimulate(self) -> int:
        return sum(1 for n in self.nodes if n.event_kind == "stimulate")

    @property
    def n_model(self) -> int:
        """Number of distinct under-layer models linked by active nodes."""
        return len({n.linked_model for n in self.active_nodes if n.linked_model})

    def census(self) -> dict[str, int]:
        return {
            "N_active": self.n_active,
            "N_logic": self.n_logic,
            "N_stimulate": self.n_stimulate,
        }

    def successors(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            out[e.source].append(e.target)
        return out

    def in_degree(self) -> Counter:
        return Counter(e.target for e in self.edges)

    def out_degree(self) -> Counter:
        return Counter(e.source for e in self.edges)

    def structure(self):
        """Order-free structural content, used for round-trip comparison."""
        nodes = frozenset(
            (
                n.id,
                n.kind,
                n.connective,
                n.event_kind,
                n.linked_model,
                frozenset(n.ports_in),
                frozenset(n.ports_out),
                frozenset(n.params),
            )
            for n in self.nodes
        )
        return (
            nodes,
            frozenset(self.edges),
            self.n_para,
            self.n_ex_para,
            self.estimated_time,
            self.name,
        )


# ---------------------------------------------------------------------------
# parsing


@dataclass
class _Element:
    tag: str
    attrs: dict[str, str]
    line: int
    column: int
    children: list["_Element"] = field(default_factory=list)


def _read_tree(text: str | bytes, source=None) -> _Element:
    parser = expat.ParserCreate("UTF-8")
    stack: list[_Element] = []
    root: list[_Element] = []

    def start(tag, attrs):
        el = _Element(tag, dict(attrs), parser.CurrentLineNumber, parser.CurrentColumnNumber)
        if stack:
            stack[-1].children.append(el)
        else:
            root.append(el)
        stack.append(el)

    def end(tag):
        stack.pop()

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    if isinstance(text, str):
        text = text.encode("utf-8")
    try:
        parser.Parse(text, True)
    except expat.ExpatError as exc:
        raise WorkflowParseError(
            expat.ErrorString(exc.code), line=exc.lineno, column=exc.offset, source=source
        ) from None
    return root[0]


def _flag(el: _Element, key: str, default: bool, source) -> bool:
    raw = el.attrs.get(key)
    if raw is None:
        return default
    low = raw.strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise WorkflowParseError(f"attribute {key}={raw!r} is not a boolean", el.line, el.column, source)


def _count(el: _Element, key: str, source) -> int:
    raw = el.attrs.get(key, "0")
    try:
        value = int(raw)
    except ValueError:
        raise WorkflowParseError(f"attribute {key}={raw!r} is not an integer", el.line, el.column, source) from None
    if value < 0:
        raise WorkflowParseError(f"attribute {key} must be non-negative", el.line, el.column, source)
    return value


def _require(el: _Element, key: str, source) -> str:
    try:
        return el.attrs[key]
    except KeyError:
        raise WorkflowParseError(f"<{el.tag}> is missing attribute {key!r}", el.line, el.column, source) from None


def _parse_node(el: _Element, source) -> Node:
    node_id = _require(el, "id", source)
    kind = _require(el, "kind", source)
    if kind not in NODE_KINDS:
        raise WorkflowParseError(f"unknown node kind {kind!r} for node {node_id!r}", el.line, el.column, source)

    connective = event_kind = None
    if kind == "logical":
        connective = _require(el, "connective", source).lower()
        if connective not in CONNECTIVES:
            raise WorkflowParseError(f"unknown connective {connective!r} on node {node_id!r}", el.line, el.column, source)
    elif kind == "event":
        event_kind = _require(el, "event-kind", source).lower()
        if event_kind not in EVENT_KINDS:
            raise WorkflowParseError(f"unknown event kind {event_kind!r} on node {node_id!r}", el.line, el.column, source)

    ports = {"in": [], "out": []}
    params = []
    seen_ports = set()
    seen_params = set()
    for child in el.children:
        if child.tag == "port":
            direction = _require(child, "direction", source)
            if direction not in ports:
                raise WorkflowParseError(f"port direction must be 'in' or 'out', got {direction!r}", child.line, child.column, source)
            name = _require(child, "name", source)
            if name in seen_ports:
                raise WorkflowParseError(f"duplicate port {name!r} on node {node_id!r}", child.line, child.column, source)
            seen_ports.add(name)
            ports[direction].append(Port(name, _require(child, "type-tag", source)))
        elif child.tag == "param":
            name = _require(child, "name", source)
            if name in seen_params:
                raise WorkflowParseError(f"duplicate parameter {name!r} on node {node_id!r}", child.line, child.column, source)
            seen_params.add(name)
            params.append(Param(name, _flag(child, "required", False, source), child.attrs.get("value")))
        else:
            raise WorkflowParseError(f"unexpected <{child.tag}> inside node {node_id!r}", child.line, child.column, source)

    if kind != "active" and (seen_ports or params):
        raise WorkflowParseError(f"only active nodes carry ports/params (node {node_id!r})", el.line, el.column, source)

    return Node(
        id=node_id,
        kind=kind,
        connective=connective,
        event_kind=event_kind,
        linked_model=el.attrs.get("linked-model"),
        ports_in=tuple(ports["in"]),
        ports_out=tuple(ports["out"]),
        params=tuple(params),
    )


def parse_workflow(text: str | bytes, source=None) -> WorkflowGraph:
    """Parse a workflow definition document.

    Raises :class:`WorkflowParseError` for XML syntax errors, unknown node
    kinds, duplicate node ids and edges or ports that reference nothing.
    A document either parses completely or raises; partial graphs are never
    returned.
    """
    root = _read_tree(text, source)
    if root.tag != "workflow":
        raise WorkflowParseError(f"root element must be <workflow>, got <{root.tag}>", root.line, root.column, source)

    est = root.attrs.get("estimated-time")
    try:
        estimated_time = float(est) if est is not None else None
    except ValueError:
        raise WorkflowParseError(f"estimated-time={est!r} is not a number", root.line, root.column, source) from None

    nodes: dict[str, Node] = {}
    edge_elements: list[_Element] = []
    n_para = n_ex_para = 0
    seen_incentives = False
    for el in root.children:
        if el.tag == "node":
            node = _parse_node(el, source)
            if node.id in nodes:
                raise WorkflowParseError(f"duplicate node id {node.id!r}", el.line, el.column, source)
            nodes[node.id] = node
        elif el.tag == "edge":
            edge_elements.append(el)
        elif el.tag == "incentives":
            if seen_incentives:
                raise WorkflowParseError("more than one <incentives> element", el.line, el.column, source)
            seen_incentives = True
            n_para = _count(el, "para", source)
            n_ex_para = _count(el, "ex-para", source)
        else:
            raise WorkflowParseError(f"unexpected element <{el.tag}>", el.line, el.column, source)

    edges = []
    for el in edge_elements:
        src = _require(el, "from", source)
        dst = _require(el, "to", source)
        for ref in (src, dst):
            if ref not in nodes:
                raise WorkflowParseError(f"edge references unknown node {ref!r}", el.line, el.column, source)
        sp = el.attrs.get("from-port")
        tp = el.attrs.get("to-port")
        if sp is not None and nodes[src].port(sp, "out") is None:
            raise WorkflowParseError(f"node {src!r} has no output port {sp!r}", el.line, el.column, source)
        if tp is not None and nodes[dst].port(tp, "in") is None:
            raise WorkflowParseError(f"node {dst!r} has no input port {tp!r}", el.line, el.column, source)
        edges.append(Edge(src, dst, sp, tp))

    if n_ex_para > n_para:
        raise WorkflowParseError("ex-para exceeds para in <incentives>", root.line, root.column, source)

    return WorkflowGraph(
        nodes=tuple(nodes.values()),
        edges=tuple(edges),
        n_para=n_para,
        n_ex_para=n_ex_para,
        estimated_time=estimated_time,
        name=root.attrs.get("name"),
    )


def load_workflow(path) -> WorkflowGraph:
    path = Path(path)
    return parse_workflow(path.read_bytes(), source=path)


# ---------------------------------------------------------------------------
# serialization


def _fmt_attrs(pairs) -> str:
    return "".join(f" {k}={quoteattr(str(v))}" for k, v in pairs if v is not None)


def serialize_workflow(g: WorkflowGraph) -> str:
    """Render ``g`` as a definition document that parses back to ``g``."""
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    est = repr(g.estimated_time) if g.estimated_time is not None else None
    lines.append(f"<workflow{_fmt_attrs([('name', g.name), ('estimated-time', est)])}>")
    if g.n_para or g.n_ex_para:
        lines.append(f'  <incentives para="{g.n_para}" ex-para="{g.n_ex_para}"/>')
    for n in g.nodes:
        attrs = _fmt_attrs(
            [
                ("id", n.id),
                ("kind", n.kind),
                ("connective", n.connective),
                ("event-kind", n.event_kind),
                ("linked-model", n.linked_model),
            ]
        )
        children = [
            f"    <port{_fmt_attrs([('direction', d), ('name', p.name), ('type-tag', p.type_tag)])}/>"
            for d, ports in (("in", n.ports_in), ("out", n.ports_out))
            for p in ports
        ]
        children += [
            f"    <param{_fmt_attrs([('name', p.name), ('required', 'true' if p.required else 'false'), ('value', p.value)])}/>"
            for p in n.params
        ]
        if children:
            lines.append(f"  <node{attrs}>")
            lines.extend(children)
            lines.append("  </node>")
        else:
            lines.append(f"  <node{attrs}/>")
    for e in g.edges:
        attrs = _fmt_attrs([("from", e.source), ("from-port", e.source_port), ("to", e.target), ("to-port", e.target_port)])
        lines.append(f"  <edge{attrs}/>")
    lines.append("</workflow>")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Issue:
    code: str
    message: str
    node: str | None = None


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Issue, ...] = ()
    warnings: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]


def _find_cycle_nodes(g: WorkflowGraph) -> set[str]:
    # Kahn's algorithm: whatever cannot be peeled off lies on or behind a cycle.
    succ = g.successors()
    indeg = {n.id: 0 for n in g.nodes}
    for e in g.edges:
        indeg[e.target] += 1
    queue = deque(k for k, d in indeg.items() if d == 0)
    while queue:
        k = queue.popleft()
        for t in succ[k]:
            indeg[t] -= 1
            if indeg[t] == 0:
                queue.append(t)
    return {k for k, d in indeg.items() if d > 0}


def validate_graph(g: WorkflowGraph) -> ValidationReport:
    """Scan ``g`` for structural problems.

    Violations: missing/multiple start events, missing end event, inbound
    edges into a start, outbound edges from an end, logical nodes with fewer
    than two inbound edges, and active nodes unreachable from a start.
    Cycles are only reported as warnings.
    """
    violations: list[Issue] = []
    warnings: list[Issue] = []
    indeg = g.in_degree()
    outdeg = g.out_degree()

    starts = [n.id for n in g.nodes if n.event_kind == "start"]
    ends = [n.id for n in g.nodes if n.event_kind == "end"]
    if not starts:
        violations.append(Issue("missing-start", "workflow has no start event"))
    elif len(starts) > 1:
        violations.append(Issue("multiple-start", f"workflow has {len(starts)} start events: {', '.join(starts)}"))
    if not ends:
        violations.append(Issue("missing-end", "workflow has no end event"))

    for sid in starts:
        if indeg[sid]:
            violations.append(Issue("start-inbound", f"start event {sid!r} has inbound edges", sid))
    for eid in ends:
        if outdeg[eid]:
            violations.append(Issue("end-outbound", f"end event {eid!r} has outbound edges", eid))

    for n in g.nodes:
        if n.kind == "logical" and indeg[n.id] < 2:
            violations.append(
                Issue("arity", f"{n.connective.upper()} node {n.id!r} has {indeg[n.id]} inbound edge(s), needs 2", n.id)
            )

    succ = g.successors()
    seen = set(starts)
    queue = deque(starts)
    while queue:
        k = queue.popleft()
        for t in succ[k]:
            if t not in seen:
                seen.add(t)
                queue.append(t)
    for n in g.active_nodes:
        if n.id not in seen:
            violations.append(Issue("unreachable", f"active node {n.id!r} is not reachable from a start event", n.id))

    cyclic = _find_cycle_nodes(g)
    if cyclic:
        warnings.append(Issue("cycle", f"graph contains a cycle through {len(cyclic)} node(s)"))

    return ValidationReport(tuple(violations), tuple(warnings))
