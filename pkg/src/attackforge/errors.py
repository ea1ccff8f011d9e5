"""Exception types raised across the toolchain.

Every error is a ModelError so callers can catch the whole family; the CLI
additionally distinguishes ParseError (malformed input text) from semantic
construction failures.
"""

from __future__ import annotations


class ModelError(Exception):
    """Base class for all model construction and pipeline errors."""


class InvalidName(ModelError):
    """Identifier contains whitespace or one of the reserved characters : , "."""


class DuplicateResource(ModelError):
    """Same resource name declared twice with different kinds."""


class UnknownEndpoint(ModelError):
    """Relation references a resource name that was never declared."""


class SignatureViolation(ModelError):
    """Relation label used with a source/target kind outside its signature."""


class CardinalityViolation(ModelError):
    """A runtime-host carries more than one isExecutionOf or hostedOn relation."""


class InvalidStateValue(ModelError):
    """Interface state value outside {active, inactive}."""


class DanglingResource(ModelError):
    """Scenario condition or trigger references an undeclared resource."""


class DuplicateStepName(ModelError):
    pass


class NonContiguousIndices(ModelError):
    """Step sequence indices are not exactly 1..n in order."""


class EmptyObjectives(ModelError):
    pass


class ConflictingPrerequisite(ModelError):
    """Two single-valued unit prerequisites disagree on the same subject/label."""


class PreconditionUnsatisfied(ModelError):
    """A transition was applied in a state that does not entail a precondition.

    Carries the transition name, the first missing property in canonical
    order, and (when raised from simulate) the 1-based step index.
    """

    def __init__(self, transition_name, missing, step_index=None):
        self.transition_name = transition_name
        self.missing = missing
        self.step_index = step_index
        where = f"step {step_index} ({transition_name})" if step_index else transition_name
        super().__init__(f"precondition unsatisfied at {where}: missing {missing}")


class ObjectiveNotReached(ModelError):
    """Final simulation state does not entail every objective."""

    def __init__(self, unmet, trace=None):
        self.unmet = list(unmet)
        self.trace = trace
        listing = "; ".join(str(p) for p in self.unmet)
        super().__init__(f"objectives not reached: {listing}")


class MissingDevice(ModelError):
    """Runtime-host has no hostedOn device, so no topology can be emitted."""


class UnresolvedTarget(ModelError):
    """Trigger agent does not operate exactly one runtime-host."""


class ParseError(ModelError):
    """Malformed input text. Carries line/column when known, else a key path."""

    def __init__(self, message, line=None, column=None, location=None):
        self.line = line
        self.column = column
        self.location = location
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{message} ({where})"
        elif location:
            message = f"{message} (at {location})"
        super().__init__(message)


class UndeclaredState(ModelError):
    pass


class MissingGoal(ModelError):
    pass


class NotLinear(ModelError):
    """State graph branches or its goal is unreachable from the initial state."""
