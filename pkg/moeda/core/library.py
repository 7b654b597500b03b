"""
Standard-cell library model with drive-strength variants.

A library maps (function_id, arity) to an ascending ladder of variants.
Synthetic libraries follow simple scaling laws so results are reproducible
without proprietary characterisation data.
"""
import json
import re
from dataclasses import dataclass, field, fields
from pathlib import Path

from moeda.config import (
    STRENGTH_LABELS, DEFAULT_LIBRARY_NAME, DEFAULT_VOLTAGE,
    BASE_RESISTANCE, BASE_INPUT_CAP, BASE_AREA, BASE_LEAKAGE,
    BASE_INTERNAL_ENERGY, BASE_INTRINSIC_DELAY, ARITY_FACTOR,
    WIRE_CAP_PER_FANOUT, MAX_ARITY, CELL_FUNCTIONS, SINGLE_INPUT_FUNCTIONS,
    logger
)
from moeda.core.errors import (
    LibraryError, UnsupportedArityError, LibraryParseError,
    DuplicateVariantError, UnknownVariantError, UnknownCellError
)

_LABEL_RE = re.compile(r"^D(\d+)$")


def strength_of(label):
    """Numeric drive of a strength label: D0 -> 0.5, Dk -> k"""
    match = _LABEL_RE.match(label)
    if not match:
        raise LibraryError(f"Malformed strength label {label!r}")
    k = int(match.group(1))
    return 0.5 if k == 0 else float(k)


@dataclass(frozen=True)
class CellVariant:
    function_id: str
    arity: int
    strength_label: str
    strength: float
    input_cap_per_pin: float
    drive_resistance: float
    intrinsic_delay: float
    area: float
    leakage_power: float
    internal_energy: float

    def __post_init__(self):
        for name in ("strength", "input_cap_per_pin", "drive_resistance",
                     "intrinsic_delay", "area", "leakage_power",
                     "internal_energy"):
            value = getattr(self, name)
            if not value > 0:
                raise LibraryError(
                    f"{self.function_id}/{self.arity} {self.strength_label}: "
                    f"{name} must be > 0, got {value}"
                )

    @property
    def cell_name(self):
        return f"{self.function_id}{self.arity}"


# Scalar fields written per variant in a library document
VARIANT_FIELDS = [
    f.name for f in fields(CellVariant) if f.name not in ("function_id", "arity")
]


@dataclass(frozen=True)
class CellFunction:
    function_id: str
    arity: int
    variants: tuple

    def __post_init__(self):
        if not self.variants:
            raise LibraryError(f"{self.function_id}/{self.arity} has no variants")
        seen = set()
        previous = None
        for v in self.variants:
            if (v.function_id, v.arity) != (self.function_id, self.arity):
                raise LibraryError(
                    f"Variant {v.strength_label} belongs to "
                    f"{v.function_id}/{v.arity}, not {self.function_id}/{self.arity}"
                )
            if v.strength_label in seen:
                raise DuplicateVariantError(self.function_id, self.arity,
                                            v.strength_label)
            seen.add(v.strength_label)
            if previous is not None and not v.strength > previous.strength:
                raise LibraryError(
                    f"{self.function_id}/{self.arity}: variants must be in "
                    f"ascending strength ({previous.strength_label} then "
                    f"{v.strength_label})"
                )
            previous = v

    def index_of(self, label):
        for i, v in enumerate(self.variants):
            if v.strength_label == label:
                return i
        raise UnknownVariantError(self.function_id, self.arity, label)


@dataclass(frozen=True)
class CellLibrary:
    """Immutable after construction; share freely between workers."""
    name: str
    voltage: float
    functions: dict
    wire_cap_per_fanout: float

    def __contains__(self, key):
        return key in self.functions

    def keys(self):
        return sorted(self.functions)


@dataclass(frozen=True)
class ScalingProfile:
    base_resistance: float = BASE_RESISTANCE
    base_input_cap: float = BASE_INPUT_CAP
    base_area: float = BASE_AREA
    base_leakage: float = BASE_LEAKAGE
    base_internal_energy: float = BASE_INTERNAL_ENERGY
    base_intrinsic_delay: float = BASE_INTRINSIC_DELAY
    arity_factor: float = ARITY_FACTOR
    strength_labels: tuple = field(
        default_factory=lambda: tuple(STRENGTH_LABELS)
    )

    def __post_init__(self):
        for name in ("base_resistance", "base_input_cap", "base_area",
                     "base_leakage", "base_internal_energy",
                     "base_intrinsic_delay"):
            if not getattr(self, name) > 0:
                raise LibraryError(f"Scaling profile {name} must be > 0")
        if self.arity_factor < 1:
            raise LibraryError(
                f"arity_factor must be >= 1, got {self.arity_factor}"
            )
        if not self.strength_labels:
            raise LibraryError("Scaling profile needs at least one strength label")
        strengths = self.strengths
        for a, b in zip(strengths, strengths[1:]):
            if not b > a:
                raise LibraryError(
                    f"Strength labels must be strictly increasing: "
                    f"{list(self.strength_labels)}"
                )

    @property
    def strengths(self):
        return [strength_of(label) for label in self.strength_labels]


def check_arity(function_id, arity):
    """Raise UnsupportedArityError unless the (function, arity) can be generated"""
    if function_id not in CELL_FUNCTIONS:
        raise UnsupportedArityError(function_id, arity)
    if function_id in SINGLE_INPUT_FUNCTIONS:
        if arity != 1:
            raise UnsupportedArityError(function_id, arity)
    elif not 1 <= arity <= MAX_ARITY:
        raise UnsupportedArityError(function_id, arity)


def generate_synthetic_library(profile, required, name=DEFAULT_LIBRARY_NAME,
                               voltage=DEFAULT_VOLTAGE,
                               wire_cap_per_fanout=WIRE_CAP_PER_FANOUT):
    """
    Build a library with one variant per strength label for every required
    (function_id, arity).

    With a = arity_factor ** (arity - 1) and s the numeric strength:
        drive_resistance = R0 * a / s      input_cap_per_pin = C0 * s
        area = A0 * s * a                  leakage = L0 * s * a
        internal_energy = E0 * s * a       intrinsic_delay = d0 * a
    """
    required = set(required)
    if not required:
        raise LibraryError("At least one (function, arity) is required")
    for function_id, arity in sorted(required):
        check_arity(function_id, arity)

    functions = {}
    for function_id, arity in sorted(required):
        a = profile.arity_factor ** (arity - 1)
        variants = []
        for label, s in zip(profile.strength_labels, profile.strengths):
            variants.append(CellVariant(
                function_id=function_id,
                arity=arity,
                strength_label=label,
                strength=s,
                input_cap_per_pin=profile.base_input_cap * s,
                drive_resistance=profile.base_resistance * a / s,
                intrinsic_delay=profile.base_intrinsic_delay * a,
                area=profile.base_area * s * a,
                leakage_power=profile.base_leakage * s * a,
                internal_energy=profile.base_internal_energy * s * a,
            ))
        functions[(function_id, arity)] = CellFunction(
            function_id, arity, tuple(variants)
        )

    logger.info(f"Generated library '{name}': {len(functions)} functions x "
                f"{len(profile.strength_labels)} strengths")
    return CellLibrary(name=name, voltage=voltage, functions=functions,
                       wire_cap_per_fanout=wire_cap_per_fanout)


# ============================================================================
# DOCUMENT FORMAT
# ============================================================================

_TOP_FIELDS = {"name", "voltage", "wire_cap_per_fanout", "functions"}
_FUNCTION_FIELDS = {"function_id", "arity", "variants"}


def library_to_document(lib):
    """Serialise a library to its JSON text document (deterministic order)"""
    doc = {
        "name": lib.name,
        "voltage": lib.voltage,
        "wire_cap_per_fanout": lib.wire_cap_per_fanout,
        "functions": [
            {
                "function_id": cf.function_id,
                "arity": cf.arity,
                "variants": [
                    {name: getattr(v, name) for name in VARIANT_FIELDS}
                    for v in cf.variants
                ],
            }
            for _, cf in sorted(lib.functions.items())
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _require(obj, expected, where, line):
    if not isinstance(obj, dict):
        raise LibraryParseError(f"{where} must be an object", line)
    unknown = set(obj) - expected
    if unknown:
        name = sorted(unknown)[0]
        raise LibraryParseError(f"Unknown field {name!r} in {where}", line, name)
    missing = expected - set(obj)
    if missing:
        name = sorted(missing)[0]
        raise LibraryParseError(f"Missing field {name!r} in {where}", line, name)


def _line_of(document, needle, start=0):
    """1-based line of the first occurrence of needle after start, or None"""
    pos = document.find(needle, start)
    if pos < 0:
        return None, start
    return document.count("\n", 0, pos) + 1, pos + 1


def load_library(document):
    """
    Parse a library JSON document.

    Raises LibraryParseError (with line number where known) on malformed
    input and DuplicateVariantError on repeated (function, arity, label).
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as e:
        raise LibraryParseError(f"Malformed library document: {e.msg}", e.lineno)

    _require(doc, _TOP_FIELDS, "library", 1)
    if not isinstance(doc["functions"], list):
        raise LibraryParseError("'functions' must be an array",
                                _line_of(document, '"functions"')[0], "functions")

    functions = {}
    cursor = 0
    for entry in doc["functions"]:
        line, cursor = _line_of(document, '"function_id"', cursor)
        _require(entry, _FUNCTION_FIELDS, "function", line)
        function_id = entry["function_id"]
        arity = entry["arity"]
        if not isinstance(arity, int) or isinstance(arity, bool):
            raise LibraryParseError(f"arity of {function_id} must be an integer",
                                    line, "arity")
        variants = []
        labels = set()
        for raw in entry["variants"]:
            vline, _ = _line_of(document, '"strength_label"', cursor)
            _require(raw, set(VARIANT_FIELDS), f"variant of {function_id}/{arity}",
                     vline)
            label = raw["strength_label"]
            if label in labels:
                raise DuplicateVariantError(function_id, arity, label)
            labels.add(label)
            try:
                variants.append(CellVariant(function_id=function_id, arity=arity,
                                            **raw))
            except TypeError as e:
                raise LibraryParseError(str(e), vline)
            _, cursor = _line_of(document, '"strength_label"', cursor)
        if (function_id, arity) in functions:
            raise DuplicateVariantError(function_id, arity,
                                        variants[0].strength_label if variants else "")
        functions[(function_id, arity)] = CellFunction(
            function_id, arity, tuple(variants)
        )

    return CellLibrary(name=doc["name"], voltage=doc["voltage"],
                       functions=functions,
                       wire_cap_per_fanout=doc["wire_cap_per_fanout"])


def read_library(path):
    path = Path(path)
    logger.debug(f"Reading library {path}")
    return load_library(path.read_text(encoding="utf-8"))


def write_library(lib, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(library_to_document(lib), encoding="utf-8")
    logger.info(f"Wrote library '{lib.name}' to {path}")
    return path


# ============================================================================
# LOOKUP / RESTRICTION
# ============================================================================

def variants_of(lib, function_id, arity):
    """Ascending-strength variants of a cell (never empty)"""
    try:
        return lib.functions[(function_id, arity)].variants
    except KeyError:
        raise UnknownCellError(function_id, arity) from None


def restrict_library(lib, allow):
    """
    Keep only the allowed variants.

    `allow` maps (function_id, arity) to a set of strength labels, or to
    None for "every variant". Functions not named are dropped.
    """
    functions = {}
    for key, labels in allow.items():
        function_id, arity = key
        cf = lib.functions.get(key)
        if cf is None:
            raise UnknownCellError(function_id, arity)
        if labels is None:
            functions[key] = cf
            continue
        known = {v.strength_label for v in cf.variants}
        for label in sorted(labels):
            if label not in known:
                raise UnknownVariantError(function_id, arity, label)
        kept = tuple(v for v in cf.variants if v.strength_label in labels)
        functions[key] = CellFunction(function_id, arity, kept)

    return CellLibrary(name=lib.name, voltage=lib.voltage, functions=functions,
                       wire_cap_per_fanout=lib.wire_cap_per_fanout)


def reduced_library(lib):
    """NAND2 at its smallest drive only, plus the full inverter ladder"""
    smallest = variants_of(lib, "NAND", 2)[0].strength_label
    return restrict_library(lib, {("NAND", 2): {smallest}, ("NOT", 1): None})
