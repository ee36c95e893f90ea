from __future__ import annotations

import random

import pytest

from tmdl.model import (
    DreadVector,
    Element,
    ElementKind,
    Threat,
    ThreatCategory,
    ThreatModel,
    entity_kind,
)
from tmdl.parser import TmdlParseError, parse_model
from tmdl.stride import (
    DEFAULT_MATRIX,
    ApplicabilityMatrix,
    applicable_categories,
    generate_candidates,
    parse_matrix,
    validate_assignments,
)

from _modelgen import random_model

S, T, R, I, D, E = ThreatCategory

# The standard per-element table, spelled out by hand as the oracle.
EXPECTED_ROWS = {
    ElementKind.EXTERNAL_ACTOR: (S, R),
    ElementKind.PROCESS: (S, T, R, I, D, E),
    ElementKind.DATA_STORE: (T, R, I, D),
    ElementKind.DATA_FLOW: (T, I, D),
    ElementKind.TRUST_BOUNDARY: (),
}


class TestApplicabilityMatrix:
    @pytest.mark.parametrize("kind", list(ElementKind))
    def test_default_rows_match_hand_enumeration(self, kind):
        assert applicable_categories(kind) == EXPECTED_ROWS[kind]

    def test_rows_are_normalized(self):
        matrix = ApplicabilityMatrix({ElementKind.PROCESS: (E, S, E)})
        assert matrix[ElementKind.PROCESS] == (S, E)
        assert matrix[ElementKind.DATA_STORE] == ()


class TestGenerateCandidates:
    def test_empty_model(self):
        assert generate_candidates(ThreatModel("M")) == []

    def test_single_process_yields_six(self):
        model = ThreatModel("M", (Element("p", "p", ElementKind.PROCESS),))
        candidates = generate_candidates(model)
        assert len(candidates) == 6
        assert [c.category for c in candidates] == list(EXPECTED_ROWS[ElementKind.PROCESS])
        assert candidates[0].template_title == "Spoofing against p"

    def test_corpus_candidate_count(self, corpus):
        # 10 actors x 2 + 10 processes x 6 + 7 stores x 4 + 14 flows x 3.
        assert len(generate_candidates(corpus)) == 150

    def test_counting_law_on_random_models(self):
        for seed in range(100):
            model = random_model(random.Random(2000 + seed))
            expected = sum(
                len(DEFAULT_MATRIX[entity_kind(e)]) for e in model.entities()
            )
            assert len(generate_candidates(model)) == expected, f"seed {seed}"

    def test_candidates_never_leave_the_matrix(self, corpus):
        for c in generate_candidates(corpus):
            kind = corpus.kind_of(c.target)
            assert c.category in DEFAULT_MATRIX[kind]

    def test_covered_marking(self):
        model = parse_model(
            'model "M" { process p { } threat 1 "t" on p '
            '{ category = Tampering dread = [1,1,1,1,1] } }'
        )
        by_cat = {c.category: c for c in generate_candidates(model)}
        assert by_cat[T].covered
        assert by_cat[T].rule == "Process -> Tampering (covered)"
        assert not by_cat[S].covered

    def test_pairs_unique_per_run(self, corpus):
        pairs = [(c.target, c.category) for c in generate_candidates(corpus)]
        assert len(pairs) == len(set(pairs))

    def test_declared_legal_threats_appear_among_candidates(self, corpus):
        assert validate_assignments(corpus) == []
        pairs = {(c.target, c.category) for c in generate_candidates(corpus)}
        for t in corpus.threats:
            assert (t.target, t.category) in pairs


class TestValidateAssignments:
    def test_spoofing_on_store_is_flagged(self):
        model = ThreatModel(
            "M",
            (Element("db", "db", ElementKind.DATA_STORE),),
            threats=(
                Threat(1, "t", "db", S, DreadVector(1, 1, 1, 1, 1)),
            ),
        )
        violations = validate_assignments(model)
        assert len(violations) == 1
        assert violations[0].rule == "category-not-applicable"

    def test_corpus_assignments_all_legal(self, corpus):
        assert validate_assignments(corpus) == []

    def test_empty_threat_list(self):
        assert validate_assignments(ThreatModel("M")) == []

    def test_injected_illegal_threats_on_random_models(self):
        flagged_models = 0
        for seed in range(100):
            rng = random.Random(3000 + seed)
            model = random_model(rng)
            illegal_targets = [
                e for e in model.entities()
                if len(DEFAULT_MATRIX[entity_kind(e)]) < len(ThreatCategory)
            ]
            if not illegal_targets:
                continue
            used = {t.id for t in model.threats}
            injected_ids = []
            injected = list(model.threats)
            for entity in illegal_targets[:3]:
                row = DEFAULT_MATRIX[entity_kind(entity)]
                bad_category = rng.choice([c for c in ThreatCategory if c not in row])
                new_id = max(used, default=0) + 1 + len(injected_ids)
                injected_ids.append(new_id)
                injected.append(
                    Threat(new_id, "injected", entity.id, bad_category,
                           DreadVector(1, 1, 1, 1, 1))
                )
            tampered = ThreatModel(
                model.name, model.elements, model.flows, tuple(injected),
                model.mitigations,
            )
            flagged = {int(v.offender) for v in validate_assignments(tampered)}
            assert set(injected_ids) <= flagged, f"seed {seed}"
            assert flagged - set(injected_ids) == set(), f"seed {seed}"
            flagged_models += 1
        assert flagged_models > 50  # generator must actually exercise this


class TestMatrixOverride:
    def test_parse_override(self):
        matrix = parse_matrix("matrix { Process = [S, T] DataFlow = [T] }")
        assert matrix[ElementKind.PROCESS] == (S, T)
        assert matrix[ElementKind.DATA_FLOW] == (T,)
        # Unmentioned kinds keep their default rows.
        assert matrix[ElementKind.DATA_STORE] == EXPECTED_ROWS[ElementKind.DATA_STORE]

    def test_full_names_accepted(self):
        matrix = parse_matrix("matrix { DataStore = [InformationDisclosure] }")
        assert matrix[ElementKind.DATA_STORE] == (I,)

    def test_unknown_kind_rejected(self):
        with pytest.raises(TmdlParseError):
            parse_matrix("matrix { Widget = [S] }")

    def test_duplicate_kind_rejected(self):
        with pytest.raises(TmdlParseError):
            parse_matrix("matrix { Process = [S] Process = [T] }")

    def test_override_changes_candidates(self, corpus):
        matrix = parse_matrix("matrix { ExternalActor = [S] TrustBoundary = [R] }")
        total = len(generate_candidates(corpus, matrix))
        # 10 actors x 1 + 10 processes x 6 + 7 stores x 4 + 1 boundary x 1 + 14 flows x 3.
        assert total == 10 + 60 + 28 + 1 + 42
