"""On-disk formats: one JSON document per artifact, plus DOT export.

A product line travels as a single document holding the feature model, the
machine, and the feature-to-element mapping; configurations travel in
separate documents.  Dotted state paths ("A.B.C") are accepted anywhere a
state name is expected and resolved against the hierarchy; canonical
output always uses plain unique names.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import (DuplicateNameError, FormatSyntaxError,
                     UnknownReferenceError)
from .model import (AndState, Condition, Configuration, FeatureModel, Guard,
                    History, ImpEntry, ImpMapping, InState, MachineIndex,
                    OrState, SimpleState, State, StateChart, Transition)


def _loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatSyntaxError(exc.msg, exc.lineno, exc.colno) from exc


def _expect(value, types, path: str):
    if not isinstance(value, types):
        want = types.__name__ if isinstance(types, type) else \
            "/".join(t.__name__ for t in types)
        raise FormatSyntaxError(f"{path}: expected {want}, "
                                f"got {type(value).__name__}")
    return value


def _string_list(value, path: str) -> list[str]:
    _expect(value, list, path)
    return [_expect(v, str, f"{path}[{i}]") for i, v in enumerate(value)]


# --- feature models -------------------------------------------------------

def _relation_pairs(value, path: str) -> frozenset:
    _expect(value, list, path)
    out = set()
    for i, pair in enumerate(value):
        _expect(pair, list, f"{path}[{i}]")
        if len(pair) != 2:
            raise FormatSyntaxError(f"{path}[{i}]: expected [parent, children]")
        parent = _expect(pair[0], str, f"{path}[{i}][0]")
        kids = _string_list(pair[1], f"{path}[{i}][1]")
        out.add((parent, frozenset(kids)))
    return frozenset(out)


def _feature_model_from_json(doc, path: str) -> FeatureModel:
    _expect(doc, dict, path)
    funcs = _string_list(doc.get("funcs", []), f"{path}.funcs")
    if len(funcs) != len(set(funcs)):
        dupes = sorted({f for f in funcs if funcs.count(f) > 1})
        raise DuplicateNameError(f"duplicate feature(s): {', '.join(dupes)}")
    return FeatureModel(
        funcs=frozenset(funcs),
        root=_expect(doc.get("root", ""), str, f"{path}.root"),
        mand=_relation_pairs(doc.get("mand", []), f"{path}.mand"),
        opt=_relation_pairs(doc.get("opt", []), f"{path}.opt"),
        alt=_relation_pairs(doc.get("alt", []), f"{path}.alt"),
        or_rel=_relation_pairs(doc.get("or", []), f"{path}.or"),
    )


def _feature_model_to_json(fm: FeatureModel) -> dict:
    def pairs(rel):
        return sorted([[p, sorted(cs)] for p, cs in rel])

    return {
        "funcs": sorted(fm.funcs),
        "root": fm.root,
        "mand": pairs(fm.mand),
        "opt": pairs(fm.opt),
        "alt": pairs(fm.alt),
        "or": pairs(fm.or_rel),
    }


# --- machines -------------------------------------------------------------

def _condition_from_json(value, path: str) -> Condition:
    _expect(value, list, path)
    atoms = []
    for i, atom in enumerate(value):
        _expect(atom, dict, f"{path}[{i}]")
        if set(atom) == {"guard"}:
            atoms.append(Guard(_expect(atom["guard"], str, f"{path}[{i}].guard")))
        elif set(atom) == {"in"}:
            atoms.append(InState(_expect(atom["in"], str, f"{path}[{i}].in")))
        else:
            raise FormatSyntaxError(
                f"{path}[{i}]: atom must be {{\"guard\": ...}} or "
                f"{{\"in\": ...}}")
    return Condition(tuple(atoms))


def _condition_to_json(cond: Condition) -> list:
    out = []
    for atom in cond.atoms:
        if isinstance(atom, Guard):
            out.append({"guard": atom.text})
        else:
            out.append({"in": atom.state})
    return out


def _transition_from_json(doc, path: str) -> Transition:
    _expect(doc, dict, path)
    history = doc.get("history", "none")
    if history not in ("none", "shallow", "deep"):
        raise FormatSyntaxError(f"{path}.history: unknown value {history!r}")
    return Transition(
        name=_expect(doc.get("name", ""), str, f"{path}.name"),
        source=_expect(doc.get("source", ""), str, f"{path}.source"),
        target=_expect(doc.get("target", ""), str, f"{path}.target"),
        trigger=tuple(_string_list(doc.get("trigger", []), f"{path}.trigger")),
        cond=_condition_from_json(doc.get("cond", []), f"{path}.cond"),
        actions=tuple(_string_list(doc.get("actions", []), f"{path}.actions")),
        history=History(history),
        optional=bool(_expect(doc.get("optional", False), bool,
                              f"{path}.optional")),
    )


def _transition_to_json(t: Transition) -> dict:
    out: dict[str, Any] = {
        "name": t.name,
        "source": t.source,
        "target": t.target,
        "trigger": list(t.trigger),
    }
    if t.cond.atoms:
        out["cond"] = _condition_to_json(t.cond)
    if t.actions:
        out["actions"] = list(t.actions)
    if t.history is not History.NONE:
        out["history"] = t.history.value
    if t.optional:
        out["optional"] = True
    return out


def _state_from_json(doc, path: str) -> State:
    _expect(doc, dict, path)
    kind = doc.get("kind")
    name = _expect(doc.get("name", ""), str, f"{path}.name")
    optional = bool(_expect(doc.get("optional", False), bool,
                            f"{path}.optional"))
    if kind == "simple":
        return SimpleState(name, optional)
    if kind == "or":
        subs = _expect(doc.get("substates", []), list, f"{path}.substates")
        substates = tuple(_state_from_json(s, f"{path}.substates[{i}]")
                          for i, s in enumerate(subs))
        ts = _expect(doc.get("transitions", []), list, f"{path}.transitions")
        transitions = tuple(_transition_from_json(t, f"{path}.transitions[{i}]")
                            for i, t in enumerate(ts))
        return OrState(name, substates,
                       _expect(doc.get("initial", ""), str, f"{path}.initial"),
                       transitions, optional)
    if kind == "and":
        regions = _expect(doc.get("regions", []), list, f"{path}.regions")
        return AndState(name, tuple(_state_from_json(r, f"{path}.regions[{i}]")
                                    for i, r in enumerate(regions)), optional)
    raise FormatSyntaxError(f"{path}.kind: expected simple/or/and, got {kind!r}")


def _state_to_json(state: State) -> dict:
    if isinstance(state, SimpleState):
        out: dict[str, Any] = {"kind": "simple", "name": state.name}
    elif isinstance(state, OrState):
        out = {
            "kind": "or",
            "name": state.name,
            "initial": state.initial,
            "substates": [_state_to_json(s) for s in state.substates],
            "transitions": [_transition_to_json(t) for t in state.transitions],
        }
    else:
        out = {
            "kind": "and",
            "name": state.name,
            "regions": [_state_to_json(r) for r in state.regions],
        }
    if state.optional:
        out["optional"] = True
    return out


# --- dotted-path resolution ----------------------------------------------

def _resolve_names(sc: StateChart) -> StateChart:
    """Resolves dotted state paths in endpoints, initial markers, in-state
    atoms, and rejects duplicate names."""
    idx = MachineIndex(sc)
    if idx.duplicate_states:
        raise DuplicateNameError(
            f"duplicate state name(s): {', '.join(sorted(set(idx.duplicate_states)))}")
    if idx.duplicate_transitions:
        raise DuplicateNameError(
            "duplicate transition name(s): "
            f"{', '.join(sorted(set(idx.duplicate_transitions)))}")

    def resolve(name: str, context: str) -> str:
        if name in idx.states:
            return name
        if "." in name:
            parts = name.split(".")
            cursor = parts[0]
            if cursor not in idx.states:
                raise UnknownReferenceError(
                    f"{context}: unknown state {parts[0]!r} in path {name!r}")
            for part in parts[1:]:
                nxt = f"{part}"
                if nxt not in idx.states or idx.parent.get(nxt) != cursor:
                    raise UnknownReferenceError(
                        f"{context}: {name!r} does not follow the hierarchy")
                cursor = nxt
            return cursor
        raise UnknownReferenceError(f"{context}: unknown state {name!r}")

    def fix_transition(t: Transition) -> Transition:
        atoms = tuple(
            InState(resolve(a.state, f"transition {t.name!r} condition"))
            if isinstance(a, InState) else a
            for a in t.cond.atoms)
        return Transition(t.name,
                          resolve(t.source, f"transition {t.name!r} source"),
                          resolve(t.target, f"transition {t.name!r} target"),
                          t.trigger, Condition(atoms), t.actions, t.history,
                          t.optional)

    def fix_state(state: State) -> State:
        if isinstance(state, SimpleState):
            return state
        if isinstance(state, OrState):
            return OrState(state.name,
                           tuple(fix_state(s) for s in state.substates),
                           resolve(state.initial,
                                   f"initial of {state.name!r}"),
                           tuple(fix_transition(t) for t in state.transitions),
                           state.optional)
        return AndState(state.name,
                        tuple(fix_state(r) for r in state.regions),
                        state.optional)

    root = fix_state(sc.root)
    assert isinstance(root, OrState)
    return StateChart(root)


# --- mappings -------------------------------------------------------------

def _imp_from_json(doc, path: str, sc: StateChart) -> ImpMapping:
    _expect(doc, dict, path)
    idx = MachineIndex(sc)
    known = set(idx.states) | set(idx.transitions)
    entries: dict[str, ImpEntry] = {}
    for feature, raw in doc.items():
        _expect(raw, dict, f"{path}.{feature}")
        elements = _string_list(raw.get("elements", []),
                                f"{path}.{feature}.elements")
        for el in elements:
            if el not in known:
                raise UnknownReferenceError(
                    f"{path}.{feature}: unknown element {el!r}")
        includes = _string_list(raw.get("includes", []),
                                f"{path}.{feature}.includes")
        entries[feature] = ImpEntry(frozenset(elements), frozenset(includes))
    return ImpMapping.from_dict(entries)


def _imp_to_json(imp: ImpMapping) -> dict:
    out = {}
    for feature, entry in sorted(imp.entries):
        doc: dict[str, Any] = {"elements": sorted(entry.elements)}
        if entry.includes:
            doc["includes"] = sorted(entry.includes)
        out[feature] = doc
    return out


# --- public product-line API ----------------------------------------------

def parse_product_line(text: str) -> tuple[FeatureModel, StateChart, ImpMapping]:
    doc = _loads(text)
    _expect(doc, dict, "$")
    for key in ("feature_model", "statechart"):
        if key not in doc:
            raise FormatSyntaxError(f"$.{key}: missing")
    fm = _feature_model_from_json(doc["feature_model"], "$.feature_model")
    sc_doc = _expect(doc["statechart"], dict, "$.statechart")
    root = _state_from_json(sc_doc.get("root", {}), "$.statechart.root")
    if not isinstance(root, OrState):
        raise FormatSyntaxError("$.statechart.root: root must be an Or-state")
    sc = _resolve_names(StateChart(root))
    imp = _imp_from_json(doc.get("imp", {}), "$.imp", sc)
    return fm, sc, imp


def serialize_product_line(fm: FeatureModel, sc: StateChart,
                           imp: ImpMapping) -> str:
    doc = {
        "feature_model": _feature_model_to_json(fm),
        "statechart": {"root": _state_to_json(sc.root)},
        "imp": _imp_to_json(imp),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_configuration(text: str) -> Configuration:
    doc = _loads(text)
    _expect(doc, dict, "$")
    selected = _string_list(doc.get("selected", []), "$.selected")
    return Configuration(
        selected=frozenset(selected),
        edges=_relation_pairs(doc.get("edges", []), "$.edges"),
    )


def serialize_configuration(conf: Configuration) -> str:
    doc = {
        "selected": sorted(conf.selected),
        "edges": sorted([[p, sorted(cs)] for p, cs in conf.edges]),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# --- DOT export -----------------------------------------------------------

def _quote(name: str) -> str:
    return '"' + name.replace('"', '\\"') + '"'


def _edge_label(t: Transition) -> str:
    parts = [t.name + ": " + "::".join(t.trigger)]
    if t.cond.atoms:
        rendered = []
        for atom in t.cond.atoms:
            if isinstance(atom, InState):
                rendered.append(f"in {atom.state}")
            else:
                rendered.append(atom.text)
        parts.append("[" + " & ".join(rendered) + "]")
    label = " ".join(parts)
    if t.actions:
        label += " / " + "::".join(t.actions)
    return label


def _anchor(state: State) -> str:
    """Deterministic leaf node used to attach edges to a composite."""
    if isinstance(state, SimpleState):
        return state.name
    if isinstance(state, OrState):
        by_name = {s.name: s for s in state.substates}
        return _anchor(by_name[state.initial])
    return _anchor(min(state.regions, key=lambda r: r.name))


def export_dot(sc: StateChart) -> str:
    """DOT digraph: composites as clusters, optional elements dashed,
    initial substates marked with a point node.  Output is deterministic:
    substates, regions, and edges appear sorted by name."""
    idx = MachineIndex(sc)
    lines = ["digraph statechart {", "  compound=true;", "  rankdir=LR;",
             "  node [shape=box];"]

    def emit_state(state: State, depth: int) -> None:
        pad = "  " * depth
        if isinstance(state, SimpleState):
            style = "dashed" if state.optional else "solid"
            lines.append(f"{pad}{_quote(state.name)} [style={style}];")
            return
        lines.append(f"{pad}subgraph {_quote('cluster_' + state.name)} {{")
        lines.append(f"{pad}  label={_quote(state.name)};")
        lines.append(f"{pad}  style="
                     f"{'dashed' if state.optional else 'solid'};")
        if isinstance(state, OrState):
            init_node = "__initial_" + state.name
            lines.append(f"{pad}  {_quote(init_node)} [shape=point];")
            for sub in sorted(state.substates, key=lambda s: s.name):
                emit_state(sub, depth + 1)
        else:
            for region in sorted(state.regions, key=lambda r: r.name):
                emit_state(region, depth + 1)
        lines.append(f"{pad}}}")

    emit_state(sc.root, 1)

    edges: list[str] = []
    for name, state in sorted(idx.states.items()):
        if isinstance(state, OrState):
            by_name = {s.name: s for s in state.substates}
            init = by_name[state.initial]
            head = _anchor(init)
            attrs = ""
            if not isinstance(init, SimpleState):
                attrs = f", lhead={_quote('cluster_' + init.name)}"
            edges.append(f"  {_quote('__initial_' + name)} -> {_quote(head)} "
                         f"[style=solid{attrs}];")
    for tname, t in sorted(idx.transitions.items()):
        src_state = idx.states[t.source]
        tgt_state = idx.states[t.target]
        tail = _anchor(src_state)
        head = _anchor(tgt_state)
        attrs = [f"label={_quote(_edge_label(t))}",
                 f"style={'dashed' if t.optional else 'solid'}"]
        if not isinstance(src_state, SimpleState):
            attrs.append(f"ltail={_quote('cluster_' + t.source)}")
        if not isinstance(tgt_state, SimpleState):
            attrs.append(f"lhead={_quote('cluster_' + t.target)}")
        edges.append(f"  {_quote(tail)} -> {_quote(head)} "
                     f"[{', '.join(attrs)}];")
    lines.extend(edges)
    lines.append("}")
    return "\n".join(lines) + "\n"
