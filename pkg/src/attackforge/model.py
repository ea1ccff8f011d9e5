"""Typed model of attack contexts and attack scenarios.

An attack context is a closed, typed graph: resources of fixed kinds joined
by relations from a closed label vocabulary, each label carrying a
(source-kind, target-kind) signature that is enforced at construction.
An attack scenario is a named path of ordered steps; each step is a
transition with a trigger (agent + action verb), preconditions and
postconditions expressed as properties over the context.

All values are immutable after construction and safe to share across
threads; constructors intern resources and reject dangling references.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence, Union

from .errors import (
    CardinalityViolation,
    DanglingResource,
    DuplicateResource,
    DuplicateStepName,
    EmptyObjectives,
    InvalidName,
    InvalidStateValue,
    NonContiguousIndices,
    SignatureViolation,
    UnknownEndpoint,
)

_FORBIDDEN_NAME_CHARS = set(':,"')


def check_name(name: str, what: str = "name") -> str:
    """Reject identifiers that would break generated artifacts (YAML keys,
    node names, load scripts)."""
    if not name:
        raise InvalidName(f"{what} must be non-empty")
    if any(c.isspace() for c in name) or any(c in _FORBIDDEN_NAME_CHARS for c in name):
        raise InvalidName(f'{what} {name!r} contains whitespace or one of : , "')
    return name


class ResourceKind(str, Enum):
    AGENT = "Agent"
    OWNER = "Owner"
    DATA_ASSET = "DataAsset"
    NETWORK = "Network"
    DEVICE = "Device"
    SOFTWARE = "Software"
    RUNTIME_HOST = "RuntimeHost"
    SERVICE = "Service"
    INTERFACE = "Interface"
    FUNCTIONALITY = "Functionality"

    @classmethod
    def parse(cls, value: "ResourceKind | str") -> "ResourceKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise SignatureViolation(f"unknown resource kind {value!r}") from None


#: Kinds that count as technological resources (valid targets of `owns`).
TECHNOLOGICAL_KINDS = frozenset(
    {
        ResourceKind.NETWORK,
        ResourceKind.DEVICE,
        ResourceKind.SOFTWARE,
        ResourceKind.RUNTIME_HOST,
        ResourceKind.SERVICE,
        ResourceKind.INTERFACE,
        ResourceKind.FUNCTIONALITY,
    }
)


class RelationLabel(str, Enum):
    PLUGGED_IN = "pluggedIn"
    LOGICALLY_CONNECTED_TO = "logicallyConnectedTo"
    INSTALLED_ON = "installedOn"
    IS_EXECUTION_OF = "isExecutionOf"
    HOSTED_ON = "hostedOn"
    CONNECTED_TO_NETWORK = "connectedToNetwork"
    PROVIDES_SERVICE = "providesService"
    GIVES_ACCESS_TO = "givesAccessTo"
    OFFERS_FUNCTIONALITY = "offersFunctionality"
    ACTS_ON = "actsOn"
    OPERATES = "operates"
    OWNS = "owns"
    STORES = "stores"
    CONTAINS = "contains"
    KNOWS = "knows"

    @classmethod
    def parse(cls, value: "RelationLabel | str") -> "RelationLabel":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise SignatureViolation(f"unknown relation label {value!r}") from None


_K = ResourceKind

#: label -> (allowed source kinds, allowed target kinds)
RELATION_SIGNATURES: dict[RelationLabel, tuple[frozenset[ResourceKind], frozenset[ResourceKind]]] = {
    RelationLabel.PLUGGED_IN: (frozenset({_K.DEVICE}), frozenset({_K.DEVICE})),
    RelationLabel.LOGICALLY_CONNECTED_TO: (frozenset({_K.DEVICE}), frozenset({_K.RUNTIME_HOST})),
    RelationLabel.INSTALLED_ON: (frozenset({_K.SOFTWARE}), frozenset({_K.RUNTIME_HOST, _K.DEVICE})),
    RelationLabel.IS_EXECUTION_OF: (frozenset({_K.RUNTIME_HOST}), frozenset({_K.SOFTWARE})),
    RelationLabel.HOSTED_ON: (frozenset({_K.RUNTIME_HOST}), frozenset({_K.DEVICE})),
    RelationLabel.CONNECTED_TO_NETWORK: (frozenset({_K.RUNTIME_HOST}), frozenset({_K.NETWORK})),
    RelationLabel.PROVIDES_SERVICE: (frozenset({_K.RUNTIME_HOST}), frozenset({_K.SERVICE})),
    RelationLabel.GIVES_ACCESS_TO: (frozenset({_K.INTERFACE}), frozenset({_K.SERVICE})),
    RelationLabel.OFFERS_FUNCTIONALITY: (frozenset({_K.SERVICE}), frozenset({_K.FUNCTIONALITY})),
    RelationLabel.ACTS_ON: (frozenset({_K.FUNCTIONALITY}), frozenset({_K.DATA_ASSET})),
    RelationLabel.OPERATES: (frozenset({_K.AGENT}), frozenset({_K.RUNTIME_HOST})),
    RelationLabel.OWNS: (frozenset({_K.OWNER}), TECHNOLOGICAL_KINDS),
    RelationLabel.STORES: (frozenset({_K.RUNTIME_HOST, _K.SERVICE}), frozenset({_K.DATA_ASSET})),
    RelationLabel.CONTAINS: (frozenset({_K.DATA_ASSET}), frozenset({_K.DATA_ASSET})),
    RelationLabel.KNOWS: (frozenset({_K.AGENT}), frozenset({_K.DATA_ASSET})),
}


@dataclass(frozen=True)
class ResourceId:
    name: str
    kind: ResourceKind

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ContextRelation:
    source: ResourceId
    label: RelationLabel
    target: ResourceId

    def __str__(self) -> str:
        return f"{self.source.name} {self.label.value} {self.target.name}"


def check_relation_signature(source: ResourceId, label: RelationLabel, target: ResourceId) -> None:
    src_kinds, tgt_kinds = RELATION_SIGNATURES[label]
    if source.kind not in src_kinds:
        raise SignatureViolation(
            f"{label.value} requires source of kind "
            f"{'/'.join(sorted(k.value for k in src_kinds))}, "
            f"got {source.kind.value} {source.name!r}"
        )
    if target.kind not in tgt_kinds:
        raise SignatureViolation(
            f"{label.value} requires target of kind "
            f"{'/'.join(sorted(k.value for k in tgt_kinds))}, "
            f"got {target.kind.value} {target.name!r}"
        )
    if source == target:
        raise SignatureViolation(f"{label.value} does not permit self-loops ({source.name!r})")


# --- Properties -------------------------------------------------------------

STATE_LABEL = "isInState"
GRANT_LABEL = "IsGranted"
REASONING_LABELS = frozenset({"assumes", "concludes"})
STATE_VALUES = frozenset({"active", "inactive"})


def is_multi_valued(label: str) -> bool:
    """IsGranted and the reasoning operators accumulate value sets; interface
    state and scalar labels hold a single value per subject."""
    return label == GRANT_LABEL or label in REASONING_LABELS


@dataclass(frozen=True)
class Between:
    """A labeled relationship asserted between two resources."""

    source: ResourceId
    label: RelationLabel
    target: ResourceId

    def __str__(self) -> str:
        return f"Between({self.source.name}, {self.label.value}, {self.target.name})"


@dataclass(frozen=True)
class Unit:
    """A labeled, valued characterization of a single resource.

    The value is a state string for isInState, a Functionality ResourceId
    for IsGranted, a nested property (fact) for assumes/concludes, and a
    plain string for any other (scalar) label.
    """

    subject: ResourceId
    label: str
    value: "str | ResourceId | Property"

    def __str__(self) -> str:
        if isinstance(self.value, ResourceId):
            rendered = self.value.name
        else:
            rendered = str(self.value)
        return f"Unit({self.subject.name}, {self.label}, {rendered})"


Property = Union[Between, Unit]


def property_key(prop: Property) -> tuple:
    """Total, deterministic ordering key: Between facts before Unit facts,
    then lexicographic on parts. Used everywhere "canonical order" matters."""
    if isinstance(prop, Between):
        return ("0between", prop.source.name, prop.label.value, prop.target.name)
    value = prop.value
    if isinstance(value, str):
        vkey: tuple = ("s", value)
    elif isinstance(value, ResourceId):
        vkey = ("r", value.name)
    else:
        vkey = ("p",) + property_key(value)
    return ("1unit", prop.subject.name, prop.label, vkey)


def sorted_properties(props: Iterable[Property]) -> list[Property]:
    return sorted(props, key=property_key)


def property_references(prop: Property) -> Iterator[ResourceId]:
    """All resource ids a property mentions, recursing into nested facts."""
    if isinstance(prop, Between):
        yield prop.source
        yield prop.target
    else:
        yield prop.subject
        if isinstance(prop.value, ResourceId):
            yield prop.value
        elif isinstance(prop.value, (Between, Unit)):
            yield from property_references(prop.value)


# --- Actions ----------------------------------------------------------------

#: Default verb vocabulary; mutation flags follow the ok/changed pattern of
#: automated playbook runs.
BUILTIN_ACTIONS: dict[str, bool] = {
    "scans": False,
    "claims": False,
    "stores": True,
    "sends": True,
    "reads": False,
    "authenticates": True,
}


@dataclass(frozen=True)
class ActionName:
    verb: str
    mutates: bool


class ActionVocabulary:
    """Closed verb enumeration for one document: built-in verbs plus any the
    document declares. Declarations may override a built-in mutation flag."""

    def __init__(self, declared: dict[str, bool] | None = None):
        self._verbs = dict(BUILTIN_ACTIONS)
        self._declared: dict[str, bool] = {}
        for verb, mutates in (declared or {}).items():
            self.declare(verb, mutates)

    def declare(self, verb: str, mutates: bool) -> None:
        check_name(verb, "action verb")
        self._verbs[verb] = bool(mutates)
        self._declared[verb] = bool(mutates)

    def knows(self, verb: str) -> bool:
        return verb in self._verbs

    def resolve(self, verb: str) -> ActionName:
        """Resolve leniently: unknown verbs become non-mutating actions and
        are flagged later by validation (check V6)."""
        return ActionName(verb, self._verbs.get(verb, False))

    @property
    def declared(self) -> dict[str, bool]:
        """Verbs that differ from the built-in defaults (what a document
        needs to declare explicitly)."""
        return {
            verb: mutates
            for verb, mutates in sorted(self._declared.items())
            if BUILTIN_ACTIONS.get(verb) != mutates
        }


# --- Context graph ----------------------------------------------------------

class ContextGraph:
    """Interned set of resources plus the relations between them.

    Treat as immutable once built; use :func:`build_context`.
    """

    def __init__(self, resources: dict[str, ResourceId], relations: tuple[ContextRelation, ...]):
        self._resources = resources
        self._relations = relations

    @property
    def resources(self) -> tuple[ResourceId, ...]:
        return tuple(self._resources.values())

    @property
    def relations(self) -> tuple[ContextRelation, ...]:
        return self._relations

    def lookup(self, name: str) -> ResourceId | None:
        """Exact, case-sensitive lookup by name; absence is not an error."""
        return self._resources.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._resources

    def __len__(self) -> int:
        return len(self._resources)

    def of_kind(self, kind: ResourceKind) -> list[ResourceId]:
        return sorted(
            (r for r in self._resources.values() if r.kind is kind),
            key=lambda r: r.name,
        )

    def relations_from(self, name: str, label: RelationLabel | None = None) -> list[ContextRelation]:
        return [
            rel
            for rel in self._relations
            if rel.source.name == name and (label is None or rel.label is label)
        ]

    def relations_with(self, label: RelationLabel) -> list[ContextRelation]:
        return [rel for rel in self._relations if rel.label is label]

    def operates_targets(self, agent_name: str) -> list[ResourceId]:
        return [rel.target for rel in self.relations_from(agent_name, RelationLabel.OPERATES)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContextGraph):
            return NotImplemented
        return (
            set(self._resources.values()) == set(other._resources.values())
            and set(self._relations) == set(other._relations)
        )

    def __repr__(self) -> str:
        return f"ContextGraph({len(self._resources)} resources, {len(self._relations)} relations)"


def build_context(
    resources: Iterable[tuple[str, "ResourceKind | str"]],
    relations: Iterable[tuple[str, "RelationLabel | str", str]] = (),
) -> ContextGraph:
    """Intern resource declarations and relation triples into a ContextGraph.

    Raises DuplicateResource for a name redeclared with a different kind,
    UnknownEndpoint for relations naming undeclared resources, and
    SignatureViolation for label/kind mismatches. Exact duplicate
    declarations intern silently (set semantics).
    """
    interned: dict[str, ResourceId] = {}
    for name, kind in resources:
        kind = ResourceKind.parse(kind)
        check_name(name, "resource name")
        existing = interned.get(name)
        if existing is not None:
            if existing.kind is not kind:
                raise DuplicateResource(
                    f"resource {name!r} declared as both {existing.kind.value} and {kind.value}"
                )
            continue
        interned[name] = ResourceId(name, kind)

    rels: list[ContextRelation] = []
    seen: set[tuple[str, RelationLabel, str]] = set()
    for src_name, label, tgt_name in relations:
        label = RelationLabel.parse(label)
        source = interned.get(src_name)
        target = interned.get(tgt_name)
        if source is None:
            raise UnknownEndpoint(f"relation source {src_name!r} is not a declared resource")
        if target is None:
            raise UnknownEndpoint(f"relation target {tgt_name!r} is not a declared resource")
        check_relation_signature(source, label, target)
        key = (src_name, label, tgt_name)
        if key in seen:
            continue
        seen.add(key)
        rels.append(ContextRelation(source, label, target))

    for host in interned.values():
        if host.kind is not ResourceKind.RUNTIME_HOST:
            continue
        for label in (RelationLabel.IS_EXECUTION_OF, RelationLabel.HOSTED_ON):
            count = sum(1 for rel in rels if rel.source == host and rel.label is label)
            if count > 1:
                raise CardinalityViolation(
                    f"runtime-host {host.name!r} has {count} {label.value} relations; at most one allowed"
                )

    return ContextGraph(interned, tuple(rels))


def lookup_resource(context: ContextGraph, name: str) -> ResourceId | None:
    return context.lookup(name)


# --- Property constructors --------------------------------------------------

def _resolve(context: ContextGraph, name: str, role: str) -> ResourceId:
    resource = context.lookup(name)
    if resource is None:
        raise DanglingResource(f"{role} {name!r} is not a declared resource")
    return resource


def between_property(
    context: ContextGraph, source: str, label: "RelationLabel | str", target: str
) -> Between:
    label = RelationLabel.parse(label)
    src = _resolve(context, source, "property source")
    tgt = _resolve(context, target, "property target")
    check_relation_signature(src, label, tgt)
    return Between(src, label, tgt)


def unit_property(
    context: ContextGraph,
    subject: str,
    label: str,
    value: "str | Property",
) -> Unit:
    """Build a validated resource property unit.

    ``value`` is the state/scalar string, the functionality name for
    IsGranted, or an already-built nested Property for assumes/concludes.
    """
    subj = _resolve(context, subject, "property subject")
    check_name(label, "unit label")
    if label == STATE_LABEL:
        if subj.kind is not ResourceKind.INTERFACE:
            raise SignatureViolation(
                f"{STATE_LABEL} applies only to Interface resources, got {subj.kind.value} {subj.name!r}"
            )
        if value not in STATE_VALUES:
            raise InvalidStateValue(
                f"{STATE_LABEL} value must be 'active' or 'inactive', got {value!r}"
            )
        return Unit(subj, label, value)
    if label == GRANT_LABEL:
        if subj.kind is not ResourceKind.AGENT:
            raise SignatureViolation(
                f"{GRANT_LABEL} applies only to Agent resources, got {subj.kind.value} {subj.name!r}"
            )
        if not isinstance(value, str):
            raise SignatureViolation(f"{GRANT_LABEL} value must name a functionality")
        granted = _resolve(context, value, "granted functionality")
        if granted.kind is not ResourceKind.FUNCTIONALITY:
            raise SignatureViolation(
                f"{GRANT_LABEL} value must be a Functionality, got {granted.kind.value} {granted.name!r}"
            )
        return Unit(subj, label, granted)
    if label in REASONING_LABELS:
        if subj.kind is not ResourceKind.AGENT:
            raise SignatureViolation(
                f"{label} applies only to Agent resources, got {subj.kind.value} {subj.name!r}"
            )
        if not isinstance(value, (Between, Unit)):
            raise SignatureViolation(f"{label} value must be a nested fact")
        return Unit(subj, label, value)
    # any other label is a single-valued scalar characterization
    if not isinstance(value, str):
        raise SignatureViolation(f"scalar property {label!r} requires a string value")
    return Unit(subj, label, value)


def make_property(context: ContextGraph, spec: dict) -> Property:
    """Build a property from its tagged-record form, the same shape the
    scenario document format uses::

        {"between": {"source": ..., "label": ..., "target": ...}}
        {"unit": {"subject": ..., "label": ...,
                  "value": {"state"|"grant"|"scalar": str} | {"fact": <record>}}}
    """
    if not isinstance(spec, dict) or len(spec) != 1:
        raise SignatureViolation(f"property record must have exactly one tag key, got {spec!r}")
    tag, body = next(iter(spec.items()))
    if tag == "between":
        return between_property(context, body["source"], body["label"], body["target"])
    if tag == "unit":
        value = body["value"]
        if not isinstance(value, dict) or len(value) != 1:
            raise SignatureViolation(f"unit value must have exactly one tag key, got {value!r}")
        vtag, vbody = next(iter(value.items()))
        if vtag == "fact":
            return unit_property(context, body["subject"], body["label"], make_property(context, vbody))
        if vtag in ("state", "grant", "scalar"):
            return unit_property(context, body["subject"], body["label"], vbody)
        raise SignatureViolation(f"unknown unit value tag {vtag!r}")
    raise SignatureViolation(f"unknown property tag {tag!r}")


# --- Scenario types ---------------------------------------------------------

@dataclass(frozen=True)
class Trigger:
    agent: ResourceId
    action: ActionName

    def __str__(self) -> str:
        return f"{self.agent.name} {self.action.verb}"


@dataclass(frozen=True)
class AttackTransition:
    name: str
    description: str
    trigger: Trigger
    preconditions: frozenset
    postconditions: frozenset
    internal_tasks: tuple[str, ...] = ()


@dataclass(frozen=True)
class AttackStep:
    sequence_index: int
    transition: AttackTransition


@dataclass(frozen=True)
class AttackPath:
    name: str
    description: str
    objectives: frozenset
    prerequisites: frozenset
    steps: tuple[AttackStep, ...]
    goal_tag: str | None = None


def transition(
    name: str,
    description: str,
    trigger: Trigger,
    preconditions: Iterable[Property] = (),
    postconditions: Iterable[Property] = (),
    internal_tasks: Sequence[str] = (),
) -> AttackTransition:
    check_name(name, "transition name")
    return AttackTransition(
        name=name,
        description=description,
        trigger=trigger,
        preconditions=frozenset(preconditions),
        postconditions=frozenset(postconditions),
        internal_tasks=tuple(internal_tasks),
    )


def steps_from_transitions(transitions: Sequence[AttackTransition]) -> tuple[AttackStep, ...]:
    """Assign contiguous sequence indices 1..n in list order."""
    return tuple(AttackStep(i, t) for i, t in enumerate(transitions, start=1))


def build_attack_path(
    name: str,
    description: str,
    objectives: Iterable[Property],
    prerequisites: Iterable[Property],
    steps: Sequence[AttackStep],
    context: ContextGraph,
    goal_tag: str | None = None,
) -> AttackPath:
    """Validate and assemble an attack path against its context.

    Objectives must be non-empty unless goal_tag marks the path as a fresh,
    unenriched import. Every resource referenced by any condition or trigger
    must be declared in the context.
    """
    check_name(name, "attack path name")
    objectives = frozenset(objectives)
    prerequisites = frozenset(prerequisites)
    steps = tuple(steps)

    if not objectives and goal_tag is None:
        raise EmptyObjectives(f"attack path {name!r} declares no objectives")

    indices = [s.sequence_index for s in steps]
    if indices != list(range(1, len(steps) + 1)):
        raise NonContiguousIndices(
            f"step indices must be exactly 1..{len(steps)} in order, got {indices}"
        )
    names_seen: set[str] = set()
    for step in steps:
        tname = step.transition.name
        if tname in names_seen:
            raise DuplicateStepName(f"transition name {tname!r} used by more than one step")
        names_seen.add(tname)

    def check_declared(prop: Property, where: str) -> None:
        for ref in property_references(prop):
            if context.lookup(ref.name) != ref:
                raise DanglingResource(f"{where} references undeclared resource {ref.name!r}")

    for prop in objectives:
        check_declared(prop, f"objective of {name!r}")
    for prop in prerequisites:
        check_declared(prop, f"prerequisite of {name!r}")
    for step in steps:
        t = step.transition
        if context.lookup(t.trigger.agent.name) != t.trigger.agent:
            raise DanglingResource(
                f"trigger of step {step.sequence_index} ({t.name!r}) references "
                f"undeclared agent {t.trigger.agent.name!r}"
            )
        for prop in t.preconditions:
            check_declared(prop, f"precondition of {t.name!r}")
        for prop in t.postconditions:
            check_declared(prop, f"postcondition of {t.name!r}")

    return AttackPath(
        name=name,
        description=description,
        objectives=objectives,
        prerequisites=prerequisites,
        steps=steps,
        goal_tag=goal_tag,
    )
