"""Exception types shared across the package."""


class SforgeError(Exception):
    """Base class for all package errors."""


# --- scenario / schema ---

class SchemaError(SforgeError):
    """A document is missing a required field or has the wrong shape."""


class DanglingReference(SforgeError):
    """A document references a unit or map element that does not exist."""


class IllegalTransition(SforgeError):
    """A review event is not legal for the block's current state."""


# --- dependency graph ---

class CycleError(SforgeError):
    """The dependency edges contain a cycle."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("dependency cycle: " + " -> ".join(str(k) for k in self.cycle))


class DanglingEdge(SforgeError):
    """An edge endpoint is not a declared node."""


# --- map engine ---

class EmptyGraph(SforgeError):
    """Waypoint construction excluded every candidate node."""


class Unreachable(SforgeError):
    """No path exists between the requested endpoints."""


class AmbiguousGeometry(SforgeError):
    """The query point lies on a phase line, so bracketing is undefined."""


class UnknownElement(SforgeError):
    """A selected name does not exist on the map."""


# --- retrieval ---

class ParseError(SforgeError):
    """A helper-agent document could not be parsed."""


# --- agents / tools ---

class UnknownTool(SforgeError):
    """The requested tool is not offered by this agent."""


class ArgsError(SforgeError):
    """Tool arguments do not satisfy the tool's parameter schema."""


# --- orchestrator ---

class FormatError(SforgeError):
    """Model output does not follow the Thought/Action/Action Input format."""


class OrchestratorAbort(SforgeError):
    """Base for task aborts; carries the persisted trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class BudgetExhausted(OrchestratorAbort):
    """The step budget ran out before a final answer."""


class PersistentFormatError(OrchestratorAbort):
    """Three consecutive malformed model outputs."""


class TimelineInvalid(SforgeError):
    """A generated unit timeline violates its invariants."""


class CoverageError(SforgeError):
    """Generated maneuver text fails the unit/phase-line coverage check."""

    def __init__(self, missing, draft=""):
        self.missing = list(missing)
        self.draft = draft
        super().__init__("coverage check failed, missing: " + ", ".join(self.missing))


# --- llm gateway ---

class GatewayError(SforgeError):
    """Base for completion-gateway failures."""

    def __init__(self, message, reason="gateway"):
        super().__init__(message)
        self.reason = reason


class ReplayMiss(GatewayError):
    """Request key not present in the replay cassette."""

    def __init__(self, key, message):
        super().__init__(message, reason="replay-miss")
        self.key = key


class ScriptExhausted(GatewayError):
    """The scripted response queue is empty."""

    def __init__(self, message="scripted response queue exhausted"):
        super().__init__(message, reason="script-exhausted")


class TransportError(GatewayError):
    """HTTP transport failed after retries."""


class CassetteConflict(GatewayError):
    """Re-recording an existing key with a different response."""

    def __init__(self, key):
        super().__init__(f"cassette already holds a different response for key {key}",
                         reason="cassette-conflict")
        self.key = key


# --- persistence ---

class StorageError(SforgeError):
    """Persistence layer failure."""
