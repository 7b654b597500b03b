"""
Error types raised across the package.

Every domain error also derives from the builtin a caller would expect
(ValueError / KeyError), so `except ValueError` keeps working.
"""
from dataclasses import dataclass, field


class MoedaError(Exception):
    """Base class for every error raised by moeda"""


# ============================================================================
# CELL LIBRARY
# ============================================================================

class LibraryError(MoedaError, ValueError):
    pass


class UnsupportedArityError(LibraryError):
    def __init__(self, function_id, arity):
        self.function_id = function_id
        self.arity = arity
        super().__init__(f"Unsupported arity for {function_id}/{arity}")


class LibraryParseError(LibraryError):
    def __init__(self, message, line=None, field_name=None):
        self.line = line
        self.field = field_name
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class DuplicateVariantError(LibraryError):
    def __init__(self, function_id, arity, label):
        self.key = (function_id, arity, label)
        super().__init__(f"Duplicate variant {function_id}/{arity} {label}")


class UnknownVariantError(LibraryError):
    def __init__(self, function_id, arity, label):
        self.key = (function_id, arity, label)
        super().__init__(f"Unknown variant {function_id}/{arity} {label}")


class UnknownCellError(MoedaError, KeyError):
    def __init__(self, function_id, arity):
        self.key = (function_id, arity)
        super().__init__(f"Unknown cell {function_id}/{arity}")

    def __str__(self):
        return self.args[0]


# ============================================================================
# NETLIST
# ============================================================================

@dataclass(frozen=True)
class Diagnostic:
    """One netlist violation. `gates` holds instance names involved."""
    kind: str
    message: str
    line: int | None = None
    gates: tuple = field(default_factory=tuple)

    def __str__(self):
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}[{self.kind}] {self.message}"


class NetlistError(MoedaError, ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class BenchParseError(NetlistError):
    pass


class CycleError(NetlistError):
    pass


class UnmappedGateError(MoedaError, ValueError):
    def __init__(self, gate, function_id, arity):
        self.gate = gate
        self.key = (function_id, arity)
        super().__init__(f"Gate {gate} has no library cell {function_id}/{arity}")


class InvalidChromosomeError(MoedaError, ValueError):
    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


# ============================================================================
# EVALUATION / OPTIMISATION
# ============================================================================

class InvalidConstraintError(MoedaError, ValueError):
    pass


class TimingNotMetError(MoedaError, ValueError):
    pass


class InvalidConfigError(MoedaError, ValueError):
    pass


class InvalidReferenceError(MoedaError, ValueError):
    pass


class EvaluationError(MoedaError):
    def __init__(self, message, generation=None, individual=None):
        self.generation = generation
        self.individual = individual
        super().__init__(
            f"{message} (generation={generation}, individual={individual})"
        )


class BenchmarkFetchError(MoedaError):
    def __init__(self, name, url):
        self.name = name
        self.url = url
        super().__init__(f"Could not download {name} from {url}")
