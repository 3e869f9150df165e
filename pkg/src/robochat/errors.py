"""Exception types shared across the package.

Everything raised on purpose derives from RobochatError so callers can
catch one base.  In-band execution failures (an action that fails in the
world) are NOT exceptions; they travel as failure flags in results.
"""
from __future__ import annotations


class RobochatError(Exception):
    pass


# --- action library ---------------------------------------------------------

class MalformedFile(RobochatError):
    pass


class MissingField(RobochatError):
    def __init__(self, field: str, where: str = ""):
        self.field = field
        super().__init__(f"missing field {field!r}" + (f" in {where}" if where else ""))


class DuplicateName(RobochatError):
    pass


class UnknownEndpointType(RobochatError):
    pass


# --- simulated world --------------------------------------------------------

class InvalidBoxCount(RobochatError):
    pass


class UnknownBuiltin(RobochatError):
    pass


class UnknownObject(RobochatError):
    pass


class ObjectHeld(RobochatError):
    pass


class InvalidLocation(RobochatError):
    pass


class UnknownTask(RobochatError):
    pass


# --- observation ------------------------------------------------------------

class DuplicateObserver(RobochatError):
    pass


class EmptyConfig(RobochatError):
    pass


# --- prompting --------------------------------------------------------------

class EmptyTask(RobochatError):
    pass


class UnsupportedMode(RobochatError):
    pass


class MissingFormatNote(RobochatError):
    def __init__(self, mode: str):
        self.mode = mode
        super().__init__(f"template has no format note for mode {mode!r}")


class BadExemplarFence(RobochatError):
    def __init__(self, index: int, reason: str = ""):
        self.index = index
        super().__init__(f"exemplar {index} needs exactly one fenced block"
                         + (f": {reason}" if reason else ""))


# --- gateway ----------------------------------------------------------------

class GatewayTimeout(RobochatError):
    pass


class TransportError(RobochatError):
    pass


class NoTranscriptEntry(RobochatError):
    def __init__(self, prompt_hash: str):
        self.prompt_hash = prompt_hash
        super().__init__(f"transcript has no entry for prompt hash {prompt_hash}")


# --- parsing ----------------------------------------------------------------

class ParseError(RobochatError):
    """Base for everything the behavior parser can reject."""


class NoFence(ParseError):
    pass


class UnterminatedFence(ParseError):
    pass


class SchemaError(ParseError):
    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class XmlError(ParseError):
    def __init__(self, line: int, reason: str):
        self.line = line
        super().__init__(f"line {line}: {reason}")


class UnknownElement(ParseError):
    def __init__(self, tag: str):
        self.tag = tag
        super().__init__(f"unknown element <{tag}>")


class ArityError(ParseError):
    pass


class DanglingTransition(ParseError):
    def __init__(self, state: str, label: str, target: str):
        self.state = state
        self.label = label
        self.target = target
        super().__init__(f"state {state!r} {label} -> undefined {target!r}")


class NoSuccessTerminal(ParseError):
    pass


class UnsupportedConstruct(ParseError):
    def __init__(self, line_no: int, text: str):
        self.line_no = line_no
        self.text = text
        super().__init__(f"line {line_no}: unsupported construct {text!r}")


# --- engine -----------------------------------------------------------------

class UnvalidatedBehavior(RobochatError):
    pass


class BadBeta(RobochatError):
    pass


class BadFlag(RobochatError):
    pass


# --- skills -----------------------------------------------------------------

class DegenerateDemo(RobochatError):
    pass


class SingularRegression(RobochatError):
    """A basis function saw no support; a regularized fallback was applied."""

    def __init__(self, dimension: int, basis_index: int):
        super().__init__(f"dimension {dimension}, basis {basis_index}: "
                         f"no support, ridge fallback applied")
        self.dimension = dimension
        self.basis_index = basis_index


class BadDt(RobochatError):
    pass


class EmptyDescription(RobochatError):
    pass


# --- session ----------------------------------------------------------------

class BadConfig(RobochatError):
    pass


class UnknownSession(RobochatError):
    pass


class SessionClosed(RobochatError):
    pass


class EmptyMessage(RobochatError):
    pass
