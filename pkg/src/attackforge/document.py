"""Scenario document format: a human-writable YAML tree holding one attack
context plus one attack path.

Key layout (frozen by golden tests; see docs/formats.md):

    format_version: '1'
    actions:                      # optional verb declarations: verb -> mutates
    context:
      resources: [{name, kind}]
      relations: [{source, label, target}]
    scenario:
      attack_path:
        name, description, goal_tag?, objectives, prerequisites,
        steps: [{name, description, trigger: {agent, action},
                 preconditions, postconditions, internal_tasks}]

Conditions are tagged records:
    {between: {source, label, target}}
    {unit: {subject, label, value: {state|grant|scalar: str} | {fact: <cond>}}}

write_document emits a canonical ordering (resources by name, relations and
conditions by canonical key, steps by index) so output is byte-stable and
read(write(m)) reproduces m exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .errors import ModelError, ParseError
from .model import (
    ActionVocabulary,
    AttackPath,
    AttackStep,
    Between,
    ContextGraph,
    Property,
    ResourceId,
    Trigger,
    Unit,
    build_attack_path,
    build_context,
    make_property,
    sorted_properties,
    transition,
)

FORMAT_VERSION = "1"


@dataclass
class ScenarioDocument:
    """One parsed scenario document: context, path, and verb vocabulary."""

    context: ContextGraph
    path: AttackPath
    vocabulary: ActionVocabulary = field(default_factory=ActionVocabulary)
    format_version: str = FORMAT_VERSION

    @classmethod
    def loads(cls, text: str) -> "ScenarioDocument":
        return _parse(text)

    def dumps(self) -> str:
        return _serialize(self.context, self.path, self.vocabulary)


def read_document(text: str) -> tuple[ContextGraph, AttackPath]:
    doc = ScenarioDocument.loads(text)
    return doc.context, doc.path


def write_document(context: ContextGraph, path: AttackPath) -> str:
    return _serialize(context, path, _vocabulary_from_path(path))


# --- parsing ----------------------------------------------------------------

_REQUIRED = object()


def _expect(mapping, key, loc, type_=None, default=_REQUIRED):
    if not isinstance(mapping, dict):
        raise ParseError(f"expected a mapping with key {key!r}", location=loc)
    value = mapping.get(key)
    if value is None:
        if default is not _REQUIRED:
            return default
        raise ParseError(f"missing required key {key!r}", location=loc)
    if type_ is not None and not isinstance(value, type_):
        raise ParseError(
            f"key {key!r} must be of type {getattr(type_, '__name__', type_)}",
            location=f"{loc}.{key}",
        )
    return value


def _parse(text: str) -> ScenarioDocument:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            raise ParseError(
                f"invalid YAML: {getattr(exc, 'problem', exc)}",
                line=mark.line + 1,
                column=mark.column + 1,
            ) from None
        raise ParseError(f"invalid YAML: {exc}") from None
    if raw is None:
        raise ParseError("empty document")
    if not isinstance(raw, dict):
        raise ParseError("document root must be a mapping")

    version = _expect(raw, "format_version", "document")
    if str(version) != FORMAT_VERSION:
        raise ParseError(
            f"unsupported format_version {version!r} (expected {FORMAT_VERSION!r})"
        )

    vocabulary = ActionVocabulary()
    actions = raw.get("actions") or {}
    if not isinstance(actions, dict):
        raise ParseError("actions must map verbs to mutates flags", location="actions")
    for verb, mutates in actions.items():
        if not isinstance(mutates, bool):
            raise ParseError(
                f"mutates flag for verb {verb!r} must be a boolean", location=f"actions.{verb}"
            )
        _wrap(lambda: vocabulary.declare(str(verb), mutates), f"actions.{verb}")

    ctx_raw = _expect(raw, "context", "document", dict)
    resources = []
    for i, entry in enumerate(_expect(ctx_raw, "resources", "context", list, default=[]) or []):
        loc = f"context.resources[{i}]"
        resources.append((_expect(entry, "name", loc, str), _expect(entry, "kind", loc, str)))
    relations = []
    for i, entry in enumerate(_expect(ctx_raw, "relations", "context", list, default=[]) or []):
        loc = f"context.relations[{i}]"
        relations.append(
            (
                _expect(entry, "source", loc, str),
                _expect(entry, "label", loc, str),
                _expect(entry, "target", loc, str),
            )
        )
    context = _wrap(lambda: build_context(resources, relations), "context")

    scenario = _expect(raw, "scenario", "document", dict)
    path_raw = _expect(scenario, "attack_path", "scenario", dict)
    ploc = "scenario.attack_path"
    name = _expect(path_raw, "name", ploc, str)
    description = _expect(path_raw, "description", ploc, str, default="")
    goal_tag = path_raw.get("goal_tag")
    if goal_tag is not None:
        goal_tag = str(goal_tag)

    objectives = _parse_conditions(context, path_raw.get("objectives"), f"{ploc}.objectives")
    prerequisites = _parse_conditions(
        context, path_raw.get("prerequisites"), f"{ploc}.prerequisites"
    )

    steps: list[AttackStep] = []
    steps_raw = _expect(path_raw, "steps", ploc, list, default=[]) or []
    for i, entry in enumerate(steps_raw):
        loc = f"{ploc}.steps[{i}]"
        trig_raw = _expect(entry, "trigger", loc, dict)
        agent_name = _expect(trig_raw, "agent", f"{loc}.trigger", str)
        verb = _expect(trig_raw, "action", f"{loc}.trigger", str)
        agent = context.lookup(agent_name)
        if agent is None:
            # defer to build_attack_path for a uniform DanglingResource, but
            # it needs a ResourceId to carry the name
            agent = ResourceId(agent_name, _agent_kind())
        trigger = Trigger(agent, vocabulary.resolve(verb))
        internal = _expect(entry, "internal_tasks", loc, list, default=[]) or []
        if not all(isinstance(t, str) for t in internal):
            raise ParseError("internal_tasks entries must be strings", location=loc)
        t = _wrap(
            lambda: transition(
                name=_expect(entry, "name", loc, str),
                description=_expect(entry, "description", loc, str, default=""),
                trigger=trigger,
                preconditions=_parse_conditions(
                    context, entry.get("preconditions"), f"{loc}.preconditions"
                ),
                postconditions=_parse_conditions(
                    context, entry.get("postconditions"), f"{loc}.postconditions"
                ),
                internal_tasks=internal,
            ),
            loc,
        )
        steps.append(AttackStep(i + 1, t))

    path = _wrap(
        lambda: build_attack_path(
            name, description, objectives, prerequisites, steps, context, goal_tag=goal_tag
        ),
        ploc,
    )
    return ScenarioDocument(context, path, vocabulary, str(version))


def _agent_kind():
    from .model import ResourceKind

    return ResourceKind.AGENT


def _wrap(fn, loc):
    """Attach the document location to domain construction errors."""
    try:
        return fn()
    except ParseError:
        raise
    except ModelError as exc:
        raise type(exc)(f"{exc} (at {loc})") from None


def _parse_conditions(context: ContextGraph, entries, loc: str) -> list[Property]:
    if entries is None:
        return []
    if not isinstance(entries, list):
        raise ParseError("conditions must form a list", location=loc)
    out = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ParseError("condition must be a tagged record", location=f"{loc}[{i}]")
        out.append(_wrap(lambda: make_property(context, entry), f"{loc}[{i}]"))
    return out


# --- serialization ----------------------------------------------------------

def _vocabulary_from_path(path: AttackPath) -> ActionVocabulary:
    vocabulary = ActionVocabulary()
    flags: dict[str, bool] = {}
    for step in path.steps:
        action = step.transition.trigger.action
        if action.verb in flags and flags[action.verb] != action.mutates:
            raise ModelError(
                f"verb {action.verb!r} used with conflicting mutates flags; cannot serialize"
            )
        flags[action.verb] = action.mutates
    for verb, mutates in flags.items():
        vocabulary.declare(verb, mutates)
    return vocabulary


def _condition_record(prop: Property) -> dict:
    if isinstance(prop, Between):
        return {
            "between": {
                "source": prop.source.name,
                "label": prop.label.value,
                "target": prop.target.name,
            }
        }
    value = prop.value
    if isinstance(value, ResourceId):
        tagged = {"grant": value.name}
    elif isinstance(value, (Between, Unit)):
        tagged = {"fact": _condition_record(value)}
    elif prop.label == "isInState":
        tagged = {"state": value}
    else:
        tagged = {"scalar": value}
    return {"unit": {"subject": prop.subject.name, "label": prop.label, "value": tagged}}


def _conditions(props) -> list[dict]:
    return [_condition_record(p) for p in sorted_properties(props)]


def _serialize(context: ContextGraph, path: AttackPath, vocabulary: ActionVocabulary) -> str:
    doc: dict = {"format_version": FORMAT_VERSION}
    declared = vocabulary.declared
    if declared:
        doc["actions"] = declared
    doc["context"] = {
        "resources": [
            {"name": r.name, "kind": r.kind.value}
            for r in sorted(context.resources, key=lambda r: r.name)
        ],
        "relations": [
            {"source": rel.source.name, "label": rel.label.value, "target": rel.target.name}
            for rel in sorted(
                context.relations,
                key=lambda rel: (rel.source.name, rel.label.value, rel.target.name),
            )
        ],
    }
    path_doc: dict = {"name": path.name, "description": path.description}
    if path.goal_tag is not None:
        path_doc["goal_tag"] = path.goal_tag
    path_doc["objectives"] = _conditions(path.objectives)
    path_doc["prerequisites"] = _conditions(path.prerequisites)
    path_doc["steps"] = [
        {
            "name": step.transition.name,
            "description": step.transition.description,
            "trigger": {
                "agent": step.transition.trigger.agent.name,
                "action": step.transition.trigger.action.verb,
            },
            "preconditions": _conditions(step.transition.preconditions),
            "postconditions": _conditions(step.transition.postconditions),
            "internal_tasks": list(step.transition.internal_tasks),
        }
        for step in path.steps
    ]
    doc["scenario"] = {"attack_path": path_doc}
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False, allow_unicode=True)
