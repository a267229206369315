"""The rebuilding rules: transition composition, entry/exit pair sets,
reachability inside sequential and parallel composites, state and
transition deletion, initial-state repair, condition pruning, and the
final optional-flag sweep.

Every rule is a pure function from machine to machine.  The working set of
elements still slated for deletion travels alongside as a PendingSet; a
rule shrinks it by whatever the rule actually removed.  Transitions that
are themselves pending never grant reachability and never take part in a
composition (unless ``include_pending`` is set, which reproduces the
literal reading of the deletion rules and is only useful to demonstrate
how that reading loses confluence).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import product

from .errors import (EmptyCompositeError, IsInitialError, NoInitialError,
                     NotAndError, NotOptionalError, NotSimpleError,
                     NotSubstateError, OptionalComposeError, RewriteError)
from .model import (AndState, Condition, InState, MachineIndex, OrState,
                    SimpleState, State, StateChart, Transition, map_states)


@dataclass
class PendingSet:
    """Elements still to be deleted; shrinks monotonically to empty."""

    remaining: set[str]

    def __contains__(self, name: str) -> bool:
        return name in self.remaining

    def __len__(self) -> int:
        return len(self.remaining)

    def __bool__(self) -> bool:
        return bool(self.remaining)

    def discard(self, *names: str) -> None:
        self.remaining.difference_update(names)


# --- transition composition ----------------------------------------------

def _comp_parts(name: str) -> tuple[str, ...]:
    if name.startswith("comp(") and name.endswith(")"):
        return tuple(name[5:-1].split(","))
    return (name,)


def comp_name(first: str, second: str) -> str:
    """Composed-transition name, flattened so that both association orders
    of a chain produce the same string."""
    return "comp(" + ",".join(_comp_parts(first) + _comp_parts(second)) + ")"


def comp(t1: Transition, t2: Transition) -> Transition:
    """Fuses an entry and an exit transition of a vanishing state into one
    transition concatenating triggers, conditions, and actions.  The
    history marker of the second transition wins, as does its target."""
    if t1.optional or t2.optional:
        raise OptionalComposeError(
            f"cannot compose optional transitions {t1.name!r}, {t2.name!r}")
    if t1.target != t2.source:
        raise RewriteError(
            f"{t1.name!r} ends at {t1.target!r} but {t2.name!r} starts at "
            f"{t2.source!r}")
    return Transition(
        name=comp_name(t1.name, t2.name),
        source=t1.source,
        target=t2.target,
        trigger=t1.trigger + t2.trigger,
        cond=t1.cond & t2.cond,
        actions=t1.actions + t2.actions,
        history=t2.history,
        optional=False,
    )


def change_target(t: Transition, state: str) -> Transition:
    return replace(t, target=state)


def change_source(t: Transition, state: str) -> Transition:
    return replace(t, source=state)


# --- entry/exit pairs for simple states -----------------------------------

def entry_exit_pairs(elem: str, sc: StateChart, pending: PendingSet, *,
                     include_pending: bool = False) -> set[tuple[Transition, Transition]]:
    """Cross product of the non-optional entries and exits of a simple
    state, taken from its parent's transition set.  Pending transitions are
    excluded; self-loops are neither entries nor exits."""
    idx = MachineIndex(sc)
    st = idx.states.get(elem)
    if st is None:
        raise RewriteError(f"no state named {elem!r}")
    if not isinstance(st, SimpleState):
        raise NotSimpleError(f"{elem!r} is not a simple state")
    parent = idx.states.get(idx.parent[elem] or "")
    if not isinstance(parent, OrState):
        raise RewriteError(f"parent of {elem!r} owns no transitions")

    def usable(t: Transition) -> bool:
        if t.optional:
            return False
        return include_pending or t.name not in pending

    entries = [t for t in parent.transitions
               if t.target == elem and t.source != elem and usable(t)]
    exits = [t for t in parent.transitions
             if t.source == elem and t.target != elem and usable(t)]
    return {(te, ts) for te in entries for ts in exits}


# --- shared deletion machinery -------------------------------------------

def _lca_or_owner(idx: MachineIndex, source: str, target: str) -> str:
    """Owning Or-state for a transition between the two states, or an error
    when no Or-state may legally own it (e.g. it would cross And-regions)."""
    target_anc = set(idx.ancestors(target))
    owner = next((a for a in idx.ancestors(source) if a in target_anc), None)
    if owner is None:
        raise RewriteError(f"no common ancestor for {source!r} and {target!r}")
    st = idx.states[owner]
    if not isinstance(st, OrState):
        raise RewriteError(
            f"composition {source!r} -> {target!r} would cross regions of "
            f"{owner!r}")
    cs = idx.direct_child_within(owner, source)
    ct = idx.direct_child_within(owner, target)
    if cs == ct and source != cs and target != ct:
        raise RewriteError(
            f"composition {source!r} -> {target!r} has no legal owner")
    return owner


def _remove_states(sc: StateChart, idx: MachineIndex, doomed: set[str],
                   additions: list[Transition], pending: PendingSet) -> StateChart:
    """Drops the doomed states, every transition touching them, anywhere in
    the machine, and splices the composed replacements into the Or-state
    that may own them."""
    removed_t = {t.name for t in idx.transitions_touching(doomed)}
    by_owner: dict[str, list[Transition]] = {}
    for t in additions:
        by_owner.setdefault(_lca_or_owner(idx, t.source, t.target), []).append(t)

    def fn(state: State) -> State | None:
        if state.name in doomed:
            return None
        if isinstance(state, OrState):
            if not state.substates:
                raise EmptyCompositeError(
                    f"deleting would leave Or-state {state.name!r} empty")
            kept = tuple(t for t in state.transitions if t.name not in removed_t)
            extra = tuple(sorted(by_owner.get(state.name, ()),
                                 key=lambda t: t.name))
            if kept != state.transitions or extra:
                state = replace(state, transitions=kept + extra)
        elif isinstance(state, AndState) and len(state.regions) < 2:
            raise EmptyCompositeError(
                f"deleting would leave And-state {state.name!r} with "
                f"{len(state.regions)} region(s)")
        return state

    out = map_states(sc, fn)
    pending.discard(*doomed, *removed_t)
    return out


def _deletion_preamble(elem: str, sc: StateChart, pending: PendingSet):
    idx = MachineIndex(sc)
    st = idx.states.get(elem)
    if st is None:
        raise RewriteError(f"no state named {elem!r}")
    if elem not in pending:
        raise RewriteError(f"{elem!r} is not pending deletion")
    if not st.optional:
        raise NotOptionalError(f"{elem!r} is not optional")
    parent_name = idx.parent[elem]
    if parent_name is None:
        raise EmptyCompositeError("cannot delete the root state")
    parent = idx.states[parent_name]
    if isinstance(parent, OrState) and parent.initial == elem:
        raise IsInitialError(
            f"{elem!r} is still the initial substate of {parent_name!r}")
    if isinstance(parent, AndState) and len(parent.regions) <= 2:
        raise EmptyCompositeError(
            f"deleting region {elem!r} would leave {parent_name!r} with "
            "fewer than 2 regions")
    return idx, st, parent


def _boundary_transitions(parent: OrState, doomed: set[str],
                          pending: PendingSet, include_pending: bool):
    def usable(t: Transition) -> bool:
        if t.optional:
            return False
        return include_pending or t.name not in pending

    entries = [t for t in parent.transitions
               if t.target in doomed and t.source not in doomed and usable(t)]
    exits = [t for t in parent.transitions
             if t.source in doomed and t.target not in doomed and usable(t)]
    return entries, exits


# --- the deletion rules ---------------------------------------------------

def delete_simple_state(elem: str, sc: StateChart, pending: PendingSet, *,
                        include_pending: bool = False) -> StateChart:
    """Removes an optional simple state, drops every transition adjacent to
    it, and bridges each usable entry/exit pair with their composition."""
    idx, st, parent = _deletion_preamble(elem, sc, pending)
    if not isinstance(st, SimpleState):
        raise NotSimpleError(f"{elem!r} is not a simple state")
    additions: list[Transition] = []
    if isinstance(parent, OrState):
        pairs = entry_exit_pairs(elem, sc, pending,
                                 include_pending=include_pending)
        additions = [comp(te, ts) for te, ts in pairs]
    return _remove_states(sc, idx, {elem}, additions, pending)


def delete_or_state(elem: str, sc: StateChart, pending: PendingSet, *,
                    include_pending: bool = False) -> StateChart:
    """Removes an optional Or-state with everything inside it.  An entry
    composes with an exit when the exit's source substate is reachable
    from the entry's target substate over the composite's internal
    transitions; entries landing on the composite itself enter at its
    initial substate, exits leaving the composite as a unit pair with
    every entry."""
    idx, st, parent = _deletion_preamble(elem, sc, pending)
    if not isinstance(st, OrState):
        raise RewriteError(f"{elem!r} is not an Or-state")
    doomed = {elem} | idx.descendants(elem)
    additions: list[Transition] = []
    if isinstance(parent, OrState):
        entries, exits = _boundary_transitions(parent, doomed, pending,
                                               include_pending)
        reach_from: dict[str, set[str]] = {}
        for te in entries:
            start = (st.initial if te.target == elem
                     else idx.direct_child_within(elem, te.target))
            if start not in reach_from:
                reach_from[start] = reachable_or(
                    elem, start, sc, pending, include_pending=include_pending)
            for ts in exits:
                anchor = (None if ts.source == elem
                          else idx.direct_child_within(elem, ts.source))
                if anchor is None or anchor in reach_from[start]:
                    additions.append(comp(change_target(te, elem),
                                          change_source(ts, elem)))
    return _remove_states(sc, idx, doomed, additions, pending)


def delete_and_state(elem: str, sc: StateChart, pending: PendingSet, *,
                     include_pending: bool = False) -> StateChart:
    """Removes an optional And-state.  Pair composition uses reachability
    over region tuples: the start tuple is the default tuple of region
    initials with the entry's target substituted in its region, and an
    exit is reachable when some reachable tuple holds its source substate
    at that region's coordinate."""
    idx, st, parent = _deletion_preamble(elem, sc, pending)
    if not isinstance(st, AndState):
        raise NotAndError(f"{elem!r} is not an And-state")
    doomed = {elem} | idx.descendants(elem)
    additions: list[Transition] = []
    if isinstance(parent, OrState):
        entries, exits = _boundary_transitions(parent, doomed, pending,
                                               include_pending)
        default = tuple(_region_entry_node(r) for r in st.regions)
        reach_from: dict[tuple[str, ...], set[tuple[str, ...]]] = {}
        for te in entries:
            start = _substitute_coordinate(idx, st, default, te.target)
            if start not in reach_from:
                reach_from[start] = reachable_and(
                    elem, start, sc, pending, include_pending=include_pending)
            reach = reach_from[start]
            for ts in exits:
                if _exit_reached(idx, st, reach, ts.source):
                    additions.append(comp(change_target(te, elem),
                                          change_source(ts, elem)))
    return _remove_states(sc, idx, doomed, additions, pending)


def _region_entry_node(region: State) -> str:
    return region.initial if isinstance(region, OrState) else region.name


def _region_node(idx: MachineIndex, region: State, name: str) -> str:
    """Projects a state name inside (or equal to) a region onto that
    region's coordinate space."""
    if name == region.name:
        return _region_entry_node(region)
    if isinstance(region, OrState):
        node = idx.direct_child_within(region.name, name)
        if node is not None:
            return node
    return region.name


def _substitute_coordinate(idx: MachineIndex, st: AndState,
                           default: tuple[str, ...], target: str) -> tuple[str, ...]:
    if target == st.name:
        return default
    out = list(default)
    for i, region in enumerate(st.regions):
        if idx.is_within(target, region.name):
            out[i] = _region_node(idx, region, target)
            break
    return tuple(out)


def _exit_reached(idx: MachineIndex, st: AndState,
                  reach: set[tuple[str, ...]], source: str) -> bool:
    if source == st.name:
        return bool(reach)
    for j, region in enumerate(st.regions):
        if idx.is_within(source, region.name):
            if source == region.name:
                return bool(reach)
            node = _region_node(idx, region, source)
            return any(tup[j] == node for tup in reach)
    return False


# --- reachability ---------------------------------------------------------

def reachable_or(elem: str, start: str, sc: StateChart, pending: PendingSet,
                 *, include_pending: bool = False) -> set[str]:
    """Reflexive-transitive closure over an Or-state's internal transitions,
    projected onto its direct substates.  Pending transitions grant no
    reachability."""
    idx = MachineIndex(sc)
    st = idx.states.get(elem)
    if not isinstance(st, OrState):
        raise RewriteError(f"{elem!r} is not an Or-state")
    direct = {s.name for s in st.substates}
    if start not in direct:
        raise NotSubstateError(
            f"{start!r} is not a direct substate of {elem!r}")
    edges: dict[str, set[str]] = {}
    for t in st.transitions:
        if not include_pending and t.name in pending:
            continue
        u = idx.direct_child_within(elem, t.source)
        v = idx.direct_child_within(elem, t.target)
        if u is not None and v is not None:
            edges.setdefault(u, set()).add(v)
    seen = {start}
    frontier = [start]
    while frontier:
        u = frontier.pop()
        for v in edges.get(u, ()):
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    return seen


def reachable_and(elem: str, start: tuple[str, ...], sc: StateChart,
                  pending: PendingSet, *,
                  include_pending: bool = False) -> set[tuple[str, ...]]:
    """Reflexive-transitive closure over region tuples of an And-state.

    A step is labelled by one trigger sequence; every region whose current
    substate has an internal transition with that exact trigger and whose
    in-state atoms hold for the current tuple fires (maximal synchronous
    step), the others stay put, and at least one region must move.  Opaque
    guards and in-state atoms about foreign states are assumed satisfiable.
    """
    idx = MachineIndex(sc)
    st = idx.states.get(elem)
    if not isinstance(st, AndState):
        raise NotAndError(f"{elem!r} is not an And-state")
    regions = st.regions
    if len(start) != len(regions):
        raise NotSubstateError(
            f"start tuple has {len(start)} coordinates for "
            f"{len(regions)} regions")

    nodes: list[set[str]] = []
    moves: list[list[tuple[str, tuple[str, ...], Condition, str]]] = []
    for region in regions:
        if isinstance(region, OrState):
            nodes.append({s.name for s in region.substates})
            rt = []
            for t in region.transitions:
                if not include_pending and t.name in pending:
                    continue
                u = idx.direct_child_within(region.name, t.source)
                v = idx.direct_child_within(region.name, t.target)
                if u is not None and v is not None:
                    rt.append((u, t.trigger, t.cond, v))
            moves.append(rt)
        else:
            nodes.append({region.name})
            moves.append([])
    for i, coord in enumerate(start):
        if coord not in nodes[i]:
            raise NotSubstateError(
                f"{coord!r} is not a substate of region "
                f"{regions[i].name!r}")

    inside = {elem} | idx.descendants(elem)

    def atoms_ok(cond: Condition, cur: tuple[str, ...]) -> bool:
        for atom in cond.atoms:
            if not isinstance(atom, InState):
                continue
            if atom.state not in inside:
                continue  # foreign state: statically unknown
            if not any(idx.is_within(c, atom.state) or
                       idx.is_within(atom.state, c) for c in cur):
                return False
        return True

    labels = {trig for rt in moves for _, trig, _, _ in rt}

    def successors(cur: tuple[str, ...]):
        for label in labels:
            per_region: list[list[str]] = []
            fired = False
            for i in range(len(regions)):
                enabled = [v for u, trig, cond, v in moves[i]
                           if u == cur[i] and trig == label
                           and atoms_ok(cond, cur)]
                if enabled:
                    fired = True
                    per_region.append(sorted(set(enabled)))
                else:
                    per_region.append([cur[i]])
            if fired:
                yield from product(*per_region)

    seen = {start}
    frontier = [start]
    while frontier:
        cur = frontier.pop()
        for nxt in successors(cur):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


# --- repairs and sweeps ---------------------------------------------------

def repair_initial(parent: str, sc: StateChart, pending: PendingSet) -> StateChart:
    """Reassigns an Or-state's initial marker when the current initial is
    slated for deletion: the new initial is a surviving direct substate one
    internal transition away from the old one, ties broken by least
    transition name.  Chains of doomed initials are handled by calling
    this repeatedly."""
    idx = MachineIndex(sc)
    st = idx.states.get(parent)
    if not isinstance(st, OrState):
        raise RewriteError(f"{parent!r} is not an Or-state")
    old = st.initial
    if old not in pending:
        raise RewriteError(f"initial {old!r} of {parent!r} is not pending")
    surviving = None
    doomed_successor = None
    for t in sorted(st.transitions, key=lambda t: t.name):
        src = idx.direct_child_within(parent, t.source)
        tgt = idx.direct_child_within(parent, t.target)
        if src != old or tgt == old:
            continue
        if tgt not in pending:
            surviving = tgt
            break
        if doomed_successor is None:
            doomed_successor = tgt
    # A doomed successor is accepted so a chain of doomed initials can be
    # walked one hop per application; the caller iterates to a fixpoint.
    new_initial = surviving if surviving is not None else doomed_successor
    if new_initial is None:
        raise NoInitialError(
            f"no transition leads from {old!r} to a surviving substate of "
            f"{parent!r}")

    def fn(state: State) -> State:
        if isinstance(state, OrState) and state.name == parent:
            return replace(state, initial=new_initial)
        return state

    return map_states(sc, fn)


def prune_conditions(elem: str, sc: StateChart) -> StateChart:
    """Strips every in-state atom naming the given state or anything nested
    inside it from every condition in the machine.  Guards are untouched;
    a condition with no atoms left denotes true."""
    idx = MachineIndex(sc)
    if elem not in idx.states:
        raise RewriteError(f"no state named {elem!r}")
    closure = {elem} | idx.descendants(elem)

    def strip(t: Transition) -> Transition:
        kept = tuple(a for a in t.cond.atoms
                     if not (isinstance(a, InState) and a.state in closure))
        if len(kept) == len(t.cond.atoms):
            return t
        return replace(t, cond=Condition(kept))

    def fn(state: State) -> State:
        if isinstance(state, OrState):
            new = tuple(strip(t) for t in state.transitions)
            if new != state.transitions:
                return replace(state, transitions=new)
        return state

    return map_states(sc, fn)


def delete_transition(elem: str, sc: StateChart, pending: PendingSet) -> StateChart:
    """Removes a transition without any recomposition.  A no-op (that still
    clears the pending entry) when the transition already vanished as a
    side effect of a state deletion."""
    idx = MachineIndex(sc)
    pending.discard(elem)
    if elem not in idx.transitions:
        return sc
    owner = idx.owner[elem]

    def fn(state: State) -> State:
        if isinstance(state, OrState) and state.name == owner:
            return replace(state, transitions=tuple(
                t for t in state.transitions if t.name != elem))
        return state

    return map_states(sc, fn)


def finalize_optionals(sc: StateChart) -> StateChart:
    """Flips every remaining optional flag; the structure is untouched."""

    def fn(state: State) -> State:
        if isinstance(state, OrState):
            ts = tuple(replace(t, optional=False) if t.optional else t
                       for t in state.transitions)
            if state.optional or ts != state.transitions:
                return replace(state, optional=False, transitions=ts)
            return state
        if state.optional:
            return replace(state, optional=False)
        return state

    return map_states(sc, fn)
