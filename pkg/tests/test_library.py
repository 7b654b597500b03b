"""Tests for the cell library: synthetic generation, documents, restriction."""
import json

import pytest

from moeda.config import STRENGTH_LABELS
from moeda.core.errors import (
    DuplicateVariantError, LibraryError, LibraryParseError, UnknownCellError,
    UnknownVariantError, UnsupportedArityError
)
from moeda.core.library import (
    ScalingProfile, check_arity, generate_synthetic_library, library_to_document,
    load_library, read_library, reduced_library, restrict_library, strength_of,
    variants_of, write_library
)


@pytest.fixture
def lib():
    return generate_synthetic_library(ScalingProfile(), {("NAND", 2), ("NOT", 1), ("XOR", 3)})


# =============================================================================
# Strength labels / arity
# =============================================================================

class TestStrengthLabels:
    def test_d0_is_half_strength(self):
        assert strength_of("D0") == 0.5
        assert strength_of("D12") == 12.0

    def test_malformed_label(self):
        with pytest.raises(LibraryError):
            strength_of("X4")

    def test_check_arity(self):
        check_arity("NAND", 4)
        with pytest.raises(UnsupportedArityError):
            check_arity("NOT", 2)
        with pytest.raises(UnsupportedArityError):
            check_arity("MUX", 2)
        with pytest.raises(UnsupportedArityError):
            check_arity("AND", 11)


# =============================================================================
# Synthetic generation
# =============================================================================

class TestGenerateSyntheticLibrary:
    def test_every_required_function_gets_full_ladder(self, lib):
        """One variant per label, ascending strength"""
        assert set(lib.keys()) == {("NAND", 2), ("NOT", 1), ("XOR", 3)}
        for key in lib.keys():
            variants = variants_of(lib, *key)
            assert [v.strength_label for v in variants] == STRENGTH_LABELS
            strengths = [v.strength for v in variants]
            assert strengths == sorted(strengths)

    def test_scaling_laws(self, lib):
        """R falls with strength, C/area/leakage grow with it"""
        p = ScalingProfile()
        inv = variants_of(lib, "NOT", 1)
        d1, d8 = inv[1], inv[6]
        assert d1.strength_label == "D1" and d8.strength_label == "D8"
        assert d8.drive_resistance == pytest.approx(d1.drive_resistance / 8)
        assert d8.input_cap_per_pin == pytest.approx(8 * d1.input_cap_per_pin)
        assert d8.area == pytest.approx(8 * d1.area)
        assert d1.input_cap_per_pin == pytest.approx(p.base_input_cap)

    def test_arity_factor(self, lib):
        """Wider gates are bigger and weaker at equal strength"""
        a = ScalingProfile().arity_factor ** 2
        inv = variants_of(lib, "NOT", 1)[3]
        xor3 = variants_of(lib, "XOR", 3)[3]
        assert xor3.area == pytest.approx(inv.area * a)
        assert xor3.drive_resistance == pytest.approx(inv.drive_resistance * a)
        assert xor3.intrinsic_delay == pytest.approx(inv.intrinsic_delay * a)

    def test_unsupported_arity_rejected(self):
        with pytest.raises(UnsupportedArityError):
            generate_synthetic_library(ScalingProfile(), {("BUF", 2)})

    def test_profile_validation(self):
        with pytest.raises(LibraryError):
            ScalingProfile(strength_labels=("D2", "D1"))
        with pytest.raises(LibraryError):
            ScalingProfile(base_area=0.0)


# =============================================================================
# Documents
# =============================================================================

class TestLibraryDocument:
    def test_reload_preserves_library(self, lib, tmp_path):
        path = write_library(lib, tmp_path / "lib.json")
        again = read_library(path)
        assert again == lib
        assert library_to_document(again) == library_to_document(lib)

    def test_unknown_field_reports_line(self, lib):
        doc = json.loads(library_to_document(lib))
        doc["functions"][1]["variants"][2]["slew"] = 1.0
        text = json.dumps(doc, indent=2)
        with pytest.raises(LibraryParseError) as err:
            load_library(text)
        assert err.value.field == "slew"
        assert err.value.line is not None

    def test_missing_field(self, lib):
        doc = json.loads(library_to_document(lib))
        del doc["functions"][0]["variants"][0]["area"]
        with pytest.raises(LibraryParseError) as err:
            load_library(json.dumps(doc, indent=2))
        assert err.value.field == "area"

    def test_duplicate_variant(self, lib):
        doc = json.loads(library_to_document(lib))
        variants = doc["functions"][0]["variants"]
        variants.insert(1, dict(variants[0]))
        with pytest.raises(DuplicateVariantError):
            load_library(json.dumps(doc, indent=2))

    def test_malformed_json(self):
        with pytest.raises(LibraryParseError) as err:
            load_library('{\n  "name": \n}')
        assert err.value.line == 3


# =============================================================================
# Restriction
# =============================================================================

class TestRestrictLibrary:
    def test_keeps_only_allowed_labels(self, lib):
        small = restrict_library(lib, {("NAND", 2): {"D1", "D4"}, ("NOT", 1): None})
        assert [v.strength_label for v in variants_of(small, "NAND", 2)] == ["D1", "D4"]
        assert len(variants_of(small, "NOT", 1)) == len(STRENGTH_LABELS)
        assert ("XOR", 3) not in small

    def test_unknown_label(self, lib):
        with pytest.raises(UnknownVariantError):
            restrict_library(lib, {("NAND", 2): {"D5"}})

    def test_unknown_cell(self, lib):
        with pytest.raises(UnknownCellError):
            restrict_library(lib, {("NOR", 2): None})
        with pytest.raises(KeyError):
            variants_of(lib, "NOR", 2)

    def test_reduced_library(self, lib):
        """NAND2 at D0 only plus the whole inverter ladder"""
        reduced = reduced_library(lib)
        assert [v.strength_label for v in variants_of(reduced, "NAND", 2)] == ["D0"]
        assert len(variants_of(reduced, "NOT", 1)) == 11
