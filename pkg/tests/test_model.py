from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmdl.dread import band_of, compute_score
from tmdl.model import (
    DataFlowSpec,
    DreadVector,
    Element,
    ElementKind,
    Mitigation,
    Score,
    Threat,
    ThreatCategory,
    ThreatModel,
    ThreatStatus,
    decimal_to_tenths,
    tenths_to_decimal,
    validate_model,
)

components = st.integers(min_value=1, max_value=4)
vectors = st.builds(DreadVector, components, components, components, components, components)


def _element(el_id: str, kind=ElementKind.PROCESS, **kwargs) -> Element:
    return Element(id=el_id, name=el_id, kind=kind, **kwargs)


def _threat(tid: int, target: str, **kwargs) -> Threat:
    kwargs.setdefault("category", ThreatCategory.TAMPERING)
    kwargs.setdefault("dread", DreadVector(1, 1, 1, 1, 1))
    return Threat(id=tid, title=f"t{tid}", target=target, **kwargs)


class TestDreadVector:
    @pytest.mark.parametrize("bad", [0, 5, -1, 2.5, "3"])
    def test_rejects_out_of_range_components(self, bad):
        with pytest.raises(ValueError):
            DreadVector(bad, 1, 1, 1, 1)

    def test_from_components_requires_five(self):
        with pytest.raises(ValueError):
            DreadVector.from_components([1, 2, 3, 4])

    @given(vectors)
    def test_score_times_five_is_component_sum(self, vector):
        assert compute_score(vector).tenths * 5 == vector.total() * 10

    @given(vectors)
    def test_mean_is_permutation_invariant(self, vector):
        expected = compute_score(vector)
        for perm in itertools.permutations(vector.components()):
            assert compute_score(DreadVector(*perm)) == expected


class TestScore:
    @pytest.mark.parametrize("bad", [9, 41, 25, 0])
    def test_rejects_non_sum_tenths(self, bad):
        with pytest.raises(ValueError):
            Score(tenths=bad)

    def test_display_is_one_decimal(self):
        assert Score(tenths=30).display == "3.0"
        assert Score(tenths=38).display == "3.8"

    def test_ordering(self):
        assert Score(tenths=24) < Score(tenths=26)

    @given(vectors, vectors)
    def test_banding_is_monotone(self, a, b):
        sa, sb = compute_score(a), compute_score(b)
        if sa <= sb:
            assert band_of(sa).rank <= band_of(sb).rank


class TestDecimalTenths:
    @pytest.mark.parametrize(
        "text,tenths", [("3", 30), ("3.8", 38), ("2.5", 25), ("0.0", 0)]
    )
    def test_round_trips(self, text, tenths):
        assert decimal_to_tenths(text) == tenths

    def test_tenths_to_decimal(self):
        assert tenths_to_decimal(25) == "2.5"

    @pytest.mark.parametrize("bad", ["2.55", "x", "3.", "-1", "1.2.3"])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ValueError):
            decimal_to_tenths(bad)


class TestThreat:
    def test_rejects_non_positive_id(self):
        with pytest.raises(ValueError):
            _threat(0, "x")

    def test_mitigation_refs_are_sorted_and_deduped(self):
        t = _threat(1, "x", mitigations=("b", "a", "b"))
        assert t.mitigations == ("a", "b")


class TestMitigation:
    def test_addresses_normalized_to_stride_order(self):
        m = Mitigation("m", "d", (ThreatCategory.ELEVATION_OF_PRIVILEGE, ThreatCategory.SPOOFING))
        assert m.addresses == (ThreatCategory.SPOOFING, ThreatCategory.ELEVATION_OF_PRIVILEGE)

    def test_rejects_empty_addresses(self):
        with pytest.raises(ValueError):
            Mitigation("m", "d", ())


class TestModelEquality:
    def test_order_insensitive(self):
        a, b = _element("a"), _element("b")
        assert ThreatModel("m", (a, b)) == ThreatModel("m", (b, a))

    def test_content_sensitive(self):
        assert ThreatModel("m", (_element("a"),)) != ThreatModel("m", (_element("b"),))
        assert ThreatModel("m") != ThreatModel("n")

    def test_spans_do_not_affect_equality(self):
        assert ThreatModel("m", spans={"a": (1, 1)}) == ThreatModel("m")


class TestValidateModel:
    def test_empty_model_is_valid(self):
        assert validate_model(ThreatModel("M")) == []

    def test_corpus_is_valid(self, corpus):
        assert validate_model(corpus) == []

    def test_unresolved_target(self):
        model = ThreatModel("m", (_element("ecu"),), threats=(_threat(7, "GhostECU"),))
        violations = validate_model(model)
        assert [v.rule for v in violations] == ["unresolved-target"]
        assert "GhostECU" in violations[0].message

    def test_duplicate_id_across_kinds(self):
        model = ThreatModel(
            "m", (_element("x"), _element("x", kind=ElementKind.DATA_STORE))
        )
        assert [v.rule for v in validate_model(model)] == ["duplicate-id"]

    def test_flow_endpoint_rules(self):
        boundary = _element("zone", kind=ElementKind.TRUST_BOUNDARY)
        model = ThreatModel(
            "m",
            (_element("a"), boundary),
            flows=(
                DataFlowSpec("f1", "a", "a"),
                DataFlowSpec("f2", "a", "missing"),
                DataFlowSpec("f3", "zone", "a"),
            ),
        )
        assert [v.offender for v in validate_model(model)] == ["f1", "f2", "f3"]
        assert {v.rule for v in validate_model(model)} == {"flow-endpoints"}

    def test_zone_rules(self):
        model = ThreatModel(
            "m",
            (
                _element("a", zone="nowhere"),
                Element("b", "b", ElementKind.TRUST_BOUNDARY, zone="a"),
            ),
        )
        assert [v.rule for v in validate_model(model)] == [
            "unresolved-zone",
            "boundary-zone",
        ]

    def test_mitigation_rules(self):
        model = ThreatModel(
            "m",
            (_element("a"),),
            threats=(
                _threat(1, "a", status=ThreatStatus.MITIGATED),
                _threat(2, "a", mitigations=("ghost",)),
            ),
            mitigations=(
                Mitigation("m1", "d", (ThreatCategory.SPOOFING,), standards=("bogus",)),
            ),
        )
        assert [(v.offender, v.rule) for v in validate_model(model)] == [
            ("1", "mitigated-without-mitigations"),
            ("2", "unresolved-mitigation"),
            ("m1", "standards-vocabulary"),
        ]

    def test_custom_standards_prefix_is_allowed(self):
        model = ThreatModel(
            "m",
            mitigations=(
                Mitigation("m1", "d", (ThreatCategory.SPOOFING,), standards=("custom:fleet",)),
            ),
        )
        assert validate_model(model) == []

    def test_deterministic_order(self):
        model = ThreatModel(
            "m",
            (_element("b", zone="nowhere"), _element("a", zone="nowhere")),
        )
        assert [v.offender for v in validate_model(model)] == ["a", "b"]
