"""Static semantic checks over a (context, path) pair.

Constructor invariants already guarantee well-formed values; these checks
catch what only the pair reveals: unresolvable triggers, misplaced
properties, unreachable hosts, undeclared verbs, and unenriched imports.
Diagnostics are data, never exceptions.

Check catalogue (codes are stable test surface):
  V1  every trigger agent has exactly one operates relation (Error)
  V2  every condition references declared resources (Error)
  V3  isInState only on Interface resources (Error)
  V4  IsGranted values are Functionality resources (Error)
  V5  runtime-host connected to no network (Warning: unreachable)
  V6  trigger verbs are declared in the action vocabulary (Error)
  V7  objectives non-empty, unless goalTag marks a fresh import (Error)
  V8  assumes/concludes only on Agent resources (Error)
  V9  transition names unique across steps (Error)
  V10 transition with neither pre- nor postconditions (Warning: needs enrichment)
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    GRANT_LABEL,
    REASONING_LABELS,
    STATE_LABEL,
    ActionVocabulary,
    AttackPath,
    Between,
    ContextGraph,
    Property,
    RelationLabel,
    ResourceId,
    ResourceKind,
    Unit,
    property_key,
)

ERROR = "Error"
WARNING = "Warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    subject: str
    message: str
    step_index: int | None = None

    def render(self) -> str:
        return f"{self.severity} {self.code} at {self.subject}: {self.message}"


def render_diagnostics(diagnostics: list[Diagnostic]) -> str:
    return "\n".join(d.render() for d in diagnostics)


def _walk(prop: Property):
    yield prop
    if isinstance(prop, Unit) and isinstance(prop.value, (Between, Unit)):
        yield from _walk(prop.value)


def validate(
    context: ContextGraph,
    path: AttackPath,
    vocabulary: ActionVocabulary | None = None,
) -> list[Diagnostic]:
    """Run all checks; the empty list means the model passed.

    Pure and deterministic: diagnostics come back ordered by step index
    (path-level first), then code, then subject.
    """
    vocabulary = vocabulary or ActionVocabulary()
    out: list[Diagnostic] = []

    def condition_sites():
        for prop in sorted(path.prerequisites, key=property_key):
            yield prop, "prerequisites", None
        for prop in sorted(path.objectives, key=property_key):
            yield prop, "objectives", None
        for step in path.steps:
            t = step.transition
            where = f"step {step.sequence_index} ({t.name})"
            for prop in sorted(t.preconditions, key=property_key):
                yield prop, where, step.sequence_index
            for prop in sorted(t.postconditions, key=property_key):
                yield prop, where, step.sequence_index

    # V1: per distinct trigger agent
    seen_agents: list[str] = []
    for step in path.steps:
        agent = step.transition.trigger.agent
        if agent.name not in seen_agents:
            seen_agents.append(agent.name)
    for agent_name in seen_agents:
        count = len(context.operates_targets(agent_name))
        if count != 1:
            out.append(
                Diagnostic(
                    ERROR,
                    "V1",
                    agent_name,
                    f"trigger agent must have exactly one operates relation, found {count}",
                )
            )

    # V2 + V3 + V4 + V8 walk every condition, including nested facts
    reported_refs: set[tuple[str, str]] = set()
    for prop, where, index in condition_sites():
        for sub in _walk(prop):
            if isinstance(sub, Between):
                refs = (sub.source, sub.target)
            elif isinstance(sub.value, ResourceId):
                refs = (sub.subject, sub.value)
            else:
                refs = (sub.subject,)
            for ref in refs:
                if context.lookup(ref.name) != ref and (where, ref.name) not in reported_refs:
                    reported_refs.add((where, ref.name))
                    out.append(
                        Diagnostic(
                            ERROR,
                            "V2",
                            ref.name,
                            f"condition in {where} references undeclared resource",
                            step_index=index,
                        )
                    )
            if isinstance(sub, Unit):
                if sub.label == STATE_LABEL and sub.subject.kind is not ResourceKind.INTERFACE:
                    out.append(
                        Diagnostic(
                            ERROR,
                            "V3",
                            sub.subject.name,
                            f"interface-state property in {where} on {sub.subject.kind.value}",
                            step_index=index,
                        )
                    )
                if sub.label == GRANT_LABEL and (
                    not isinstance(sub.value, ResourceId)
                    or sub.value.kind is not ResourceKind.FUNCTIONALITY
                ):
                    out.append(
                        Diagnostic(
                            ERROR,
                            "V4",
                            sub.subject.name,
                            f"IsGranted value in {where} is not a Functionality",
                            step_index=index,
                        )
                    )
                if sub.label in REASONING_LABELS and sub.subject.kind is not ResourceKind.AGENT:
                    out.append(
                        Diagnostic(
                            ERROR,
                            "V8",
                            sub.subject.name,
                            f"reasoning property in {where} on {sub.subject.kind.value}",
                            step_index=index,
                        )
                    )

    # V5: unreachable runtime-hosts (warning: contexts may be under construction)
    for host in context.of_kind(ResourceKind.RUNTIME_HOST):
        if not context.relations_from(host.name, RelationLabel.CONNECTED_TO_NETWORK):
            out.append(
                Diagnostic(
                    WARNING,
                    "V5",
                    host.name,
                    "runtime-host is not connected to any network (unreachable)",
                )
            )

    # V6: undeclared verbs
    for step in path.steps:
        verb = step.transition.trigger.action.verb
        if not vocabulary.knows(verb):
            out.append(
                Diagnostic(
                    ERROR,
                    "V6",
                    verb,
                    f"action verb of step {step.sequence_index} ({step.transition.name}) is not declared",
                    step_index=step.sequence_index,
                )
            )

    # V7: objectives required unless the path is a goal-tagged fresh import
    if not path.objectives and path.goal_tag is None:
        out.append(Diagnostic(ERROR, "V7", path.name, "attack path declares no objectives"))

    # V9: duplicate transition names
    name_first: dict[str, int] = {}
    for step in path.steps:
        tname = step.transition.name
        if tname in name_first:
            out.append(
                Diagnostic(
                    ERROR,
                    "V9",
                    tname,
                    f"transition name already used by step {name_first[tname]}",
                    step_index=step.sequence_index,
                )
            )
        else:
            name_first[tname] = step.sequence_index

    # V10: unenriched transitions
    for step in path.steps:
        t = step.transition
        if not t.preconditions and not t.postconditions:
            out.append(
                Diagnostic(
                    WARNING,
                    "V10",
                    t.name,
                    "needs enrichment: transition has no preconditions or postconditions",
                    step_index=step.sequence_index,
                )
            )

    out.sort(key=lambda d: (d.step_index or 0, d.code, d.subject, d.message))
    return out


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity == ERROR for d in diagnostics)
