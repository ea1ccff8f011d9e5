"""State-transition execution of attack paths.

The context state starts as the union of all context relations (as Between
facts) and the path prerequisites. Each step's preconditions must be
entailed by the current state; its postconditions then update it: Between
facts union in, multi-valued unit facts accumulate, single-valued unit
facts overwrite. Facts are never deleted, so Between facts and
multi-valued sets grow monotonically along a trace.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConflictingPrerequisite, ObjectiveNotReached, PreconditionUnsatisfied
from .model import (
    AttackPath,
    AttackTransition,
    Between,
    ContextGraph,
    Property,
    Trigger,
    Unit,
    is_multi_valued,
    sorted_properties,
)


class ContextState:
    """Immutable snapshot of all facts holding at one point of a scenario."""

    __slots__ = ("_betweens", "_singles", "_multis")

    def __init__(self, betweens=frozenset(), singles=None, multis=None):
        self._betweens: frozenset[Between] = frozenset(betweens)
        self._singles: dict = dict(singles or {})
        self._multis: dict = {k: frozenset(v) for k, v in (multis or {}).items()}

    def entails(self, prop: Property) -> bool:
        if isinstance(prop, Between):
            return prop in self._betweens
        key = (prop.subject, prop.label)
        if is_multi_valued(prop.label):
            return prop.value in self._multis.get(key, frozenset())
        return self._singles.get(key) == prop.value

    def with_facts(self, facts) -> "ContextState":
        """New state with the given properties added (single-valued units
        overwrite, multi-valued accumulate, Between facts union)."""
        betweens = set(self._betweens)
        singles = dict(self._singles)
        multis = {k: set(v) for k, v in self._multis.items()}
        for prop in sorted_properties(facts):
            if isinstance(prop, Between):
                betweens.add(prop)
            else:
                key = (prop.subject, prop.label)
                if is_multi_valued(prop.label):
                    multis.setdefault(key, set()).add(prop.value)
                else:
                    singles[key] = prop.value
        return ContextState(frozenset(betweens), singles, multis)

    def facts(self) -> frozenset:
        """All facts as Property values (multi-valued keys expand to one
        Unit per member)."""
        out: set[Property] = set(self._betweens)
        for (subject, label), value in self._singles.items():
            out.add(Unit(subject, label, value))
        for (subject, label), values in self._multis.items():
            for value in values:
                out.add(Unit(subject, label, value))
        return frozenset(out)

    @property
    def betweens(self) -> frozenset:
        return self._betweens

    def __len__(self) -> int:
        return len(self.facts())


@dataclass(frozen=True)
class Position:
    """A full context-state snapshot between two transitions."""

    id: str
    state: frozenset


@dataclass(frozen=True)
class SimulationTrace:
    positions: tuple[Position, ...]
    applied_steps: tuple[tuple[int, str, Trigger], ...]


def initial_state(context: ContextGraph, path: AttackPath) -> ContextState:
    """Context relations as Between facts, plus the path prerequisites."""
    betweens = {Between(rel.source, rel.label, rel.target) for rel in context.relations}
    state = ContextState(frozenset(betweens))
    singles_seen: dict = {}
    for prop in sorted_properties(path.prerequisites):
        if isinstance(prop, Unit) and not is_multi_valued(prop.label):
            key = (prop.subject, prop.label)
            if key in singles_seen and singles_seen[key] != prop.value:
                raise ConflictingPrerequisite(
                    f"prerequisites assign both {singles_seen[key]!r} and {prop.value!r} "
                    f"to {prop.label} of {prop.subject.name!r}"
                )
            singles_seen[key] = prop.value
    return state.with_facts(path.prerequisites)


def entails(state: ContextState, prop: Property) -> bool:
    return state.entails(prop)


def apply_transition(state: ContextState, transition: AttackTransition) -> ContextState:
    """Apply one transition; every precondition must already be entailed."""
    for prop in sorted_properties(transition.preconditions):
        if not state.entails(prop):
            raise PreconditionUnsatisfied(transition.name, prop)
    return state.with_facts(transition.postconditions)


def simulate(context: ContextGraph, path: AttackPath) -> SimulationTrace:
    """Execute all steps in index order and check the objectives.

    Returns the full trace (positions P0..Pn); raises PreconditionUnsatisfied
    naming the failing step, or ObjectiveNotReached listing unmet objectives
    (the exception carries the complete trace for rendering).
    """
    state = initial_state(context, path)
    positions = [Position("P0", state.facts())]
    applied: list[tuple[int, str, Trigger]] = []
    for step in path.steps:
        t = step.transition
        try:
            state = apply_transition(state, t)
        except PreconditionUnsatisfied as exc:
            raise PreconditionUnsatisfied(
                t.name, exc.missing, step_index=step.sequence_index
            ) from None
        positions.append(Position(f"P{step.sequence_index}", state.facts()))
        applied.append((step.sequence_index, t.name, t.trigger))
    trace = SimulationTrace(tuple(positions), tuple(applied))
    unmet = [p for p in sorted_properties(path.objectives) if not state.entails(p)]
    if unmet:
        raise ObjectiveNotReached(unmet, trace)
    return trace


def derive_positions(trace: SimulationTrace) -> list[Position]:
    """Positions P0..Pn of a successful trace, ready for graph export."""
    return list(trace.positions)


def render_trace(trace: SimulationTrace, goal_reached: bool = True) -> str:
    lines = [
        f"step {index}: {name} ({trigger.agent.name} {trigger.action.verb}) OK"
        for index, name, trigger in trace.applied_steps
    ]
    lines.append("goal: REACHED" if goal_reached else "goal: NOT REACHED")
    return "\n".join(lines)
