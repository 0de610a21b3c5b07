from __future__ import annotations

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lecturemap.concepts import Concept, DeliveryStyle, Mention
from lecturemap.ingest.subtitles import parse_subtitles
from lecturemap.relations import (Evidence, RelationKind, Relationship,
                                  chunk_cues, label_inclusions, llm_enrich,
                                  merge_validate, pmi_associations,
                                  rule_relations, tfidf_similarities,
                                  topological_order, window_pmi)
from lecturemap.slideseg import SlideSegment

from oracles import cycle_cut_simulation
from stubserver import StubServer
from test_elements import srt


def concept(cid, label, cue_indices, t_per_cue=4000):
    mentions = tuple(Mention(i * t_per_cue, f"cue:{i}") for i in cue_indices)
    intervals = tuple((i * t_per_cue, (i + 1) * t_per_cue) for i in cue_indices)
    return Concept(cid, label, mentions, len(cue_indices) * t_per_cue,
                   intervals, DeliveryStyle.SLIDE_BASED, 0.5, 1.0)


def flat_transcript(n_cues, text="filler words here"):
    return parse_subtitles(srt(
        [(i * 4000, (i + 1) * 4000, text) for i in range(n_cues)]), "srt")


class TestPmiAssociations:
    def test_hand_count_reproduces_ln2(self):
        # 10 windows, a in 4, b in 5, both in 4
        presence_a = {0, 1, 2, 3}
        presence_b = {0, 1, 2, 3, 4}
        pmi = window_pmi(presence_a, presence_b, 10)
        assert pmi == pytest.approx(math.log(2), abs=1e-12)

    def test_association_created_above_threshold(self):
        transcript = flat_transcript(50)  # 10 windows of 5 cues
        a = concept("c0", "alpha", [0, 5, 10, 15])        # windows 0-3
        b = concept("c1", "beta", [1, 6, 11, 16, 21])     # windows 0-4
        rels = pmi_associations([a, b], transcript, 5, 0.5)
        assert len(rels) == 1
        rel = rels[0]
        assert (rel.src, rel.dst, rel.kind) == ("c0", "c1",
                                                RelationKind.ASSOCIATION)
        expected_weight = math.log(2) / -math.log(0.4)
        assert rel.weight == pytest.approx(expected_weight, abs=1e-12)

    def test_no_shared_window_no_association(self):
        transcript = flat_transcript(20)
        a = concept("c0", "alpha", [0, 1])    # window 0
        b = concept("c1", "beta", [10, 11])   # window 2
        assert pmi_associations([a, b], transcript, 5, 0.0) == []


class TestInclusions:
    def test_label_containment(self):
        a = concept("c0", "chart", [0])
        b = concept("c1", "bar chart", [1])
        rels = label_inclusions([a, b])
        assert [(r.src, r.dst) for r in rels] == [("c0", "c1")]
        assert rels[0].kind is RelationKind.INCLUSION

    def test_subsequence_allows_gaps_but_not_reorder(self):
        a = concept("c0", "bar chart", [0])
        b = concept("c1", "bar of the chart kind", [1])
        c = concept("c2", "chart bar", [2])
        rels = label_inclusions([a, b, c])
        assert ("c0", "c1") in [(r.src, r.dst) for r in rels]
        assert ("c0", "c2") not in [(r.src, r.dst) for r in rels]


class TestSimilarities:
    def test_shared_context_similar(self):
        transcript = parse_subtitles(srt([
            (0, 4000, "the mean summarizes numbers with average spread"),
            (4000, 8000, "the median summarizes numbers with average spread"),
            (8000, 12000, "weather is unrelated to much"),
        ]), "srt")
        a = concept("c0", "mean", [0])
        b = concept("c1", "median", [1])
        c = concept("c2", "weather", [2])
        rels = tfidf_similarities([a, b, c], transcript, 0.6)
        pairs = [(r.src, r.dst) for r in rels]
        assert ("c0", "c1") in pairs
        assert all("c2" not in p for p in pairs)


class TestLlmEnrich:
    TEMPLATE = {"system": "s", "examples": [], "instruction": "i"}

    def concepts(self):
        return [concept("c0", "pie chart", [0]), concept("c1", "chart", [1]),
                concept("c2", "histogram", [2])]

    def test_wellformed_fixture_yields_weighted_proposals(self):
        payload = [
            {"src_label": "chart", "dst_label": "pie chart",
             "kind": "Inclusion", "confidence": 0.9},
            {"src_label": "pie chart", "dst_label": "histogram",
             "kind": "Association", "confidence": 0.7},
            {"src_label": "chart", "dst_label": "histogram",
             "kind": "Inclusion", "confidence": 0.8},
            {"src_label": "pie chart", "dst_label": "histogram",
             "kind": "Similarity", "confidence": 0.6},
        ]
        with StubServer([{"text": json.dumps(payload)}]) as stub:
            rels, log = llm_enrich(stub.url, flat_transcript(3),
                                   self.concepts(), self.TEMPLATE,
                                   llm_weight=0.6)
        assert len(rels) == 4
        assert all(r.weight == 0.6 for r in rels)
        assert all(ev.source == "LLM" for r in rels for ev in r.evidence)
        assert log.proposals == 4

    def test_unknown_concept_label_dropped(self):
        payload = [{"src_label": "galaxy", "dst_label": "chart",
                    "kind": "Association", "confidence": 0.5}]
        with StubServer([{"text": json.dumps(payload)}]) as stub:
            rels, log = llm_enrich(stub.url, flat_transcript(2),
                                   self.concepts(), self.TEMPLATE)
        assert rels == []
        assert any("unknown concept" in d for d in log.dropped)

    def test_empty_response_array_is_fine(self):
        with StubServer([{"text": "[]"}]) as stub:
            rels, log = llm_enrich(stub.url, flat_transcript(2),
                                   self.concepts(), self.TEMPLATE)
        assert rels == [] and log.dropped == []

    def test_self_loop_dropped(self):
        payload = [{"src_label": "chart", "dst_label": "chart",
                    "kind": "Similarity", "confidence": 0.5}]
        with StubServer([{"text": json.dumps(payload)}]) as stub:
            rels, log = llm_enrich(stub.url, flat_transcript(2),
                                   self.concepts(), self.TEMPLATE)
        assert rels == []
        assert any("self-loop" in d for d in log.dropped)

    def test_malformed_output_retried_then_chunk_skipped(self):
        responses = [{"text": "not json"}, {"text": "{broken"},
                     {"text": "still wrong"}]
        with StubServer(responses) as stub:
            rels, log = llm_enrich(stub.url, flat_transcript(2),
                                   self.concepts(), self.TEMPLATE, retries=2)
        assert rels == []
        assert log.skipped_chunks == 1
        assert log.chunks_sent == 3  # 1 + 2 retries

    def test_unreachable_client_skips_enrichment(self):
        rels, log = llm_enrich("http://127.0.0.1:1/", flat_transcript(2),
                               self.concepts(), self.TEMPLATE, timeout_s=0.2)
        assert rels == []
        assert log.client_error is not None

    def test_chunks_overlap_one_cue(self):
        transcript = flat_transcript(6, text="four small words here")
        chunks = chunk_cues(transcript, token_budget=8)  # 2 cues per chunk
        for prev, nxt in zip(chunks, chunks[1:]):
            assert prev[-1] == nxt[0]
        covered = {i for chunk in chunks for i in chunk}
        assert covered == set(range(6))


class TestMergeValidate:
    def concepts(self):
        return [concept(f"c{i}", f"label{i}", [i]) for i in range(4)]

    def rel(self, src, dst, kind, weight, source="Rule"):
        return Relationship(src, dst, kind, weight,
                            (Evidence(source, "test"),))

    def test_noisy_or_merges_duplicates(self):
        rels = [self.rel("c0", "c1", RelationKind.ASSOCIATION, 0.5),
                self.rel("c0", "c1", RelationKind.ASSOCIATION, 0.5, "LLM")]
        graph = merge_validate(self.concepts(), rels[:1], rels[1:])
        edges = graph.edges(RelationKind.ASSOCIATION)
        assert len(edges) == 1
        assert edges[0].weight == pytest.approx(0.75)
        assert len(edges[0].evidence) == 2

    def test_symmetric_canonicalization(self):
        rels = [self.rel("c1", "c0", RelationKind.SIMILARITY, 0.7)]
        graph = merge_validate(self.concepts(), rels, [])
        assert graph.weight_between("c0", "c1", RelationKind.SIMILARITY) == \
            pytest.approx(0.7)
        assert graph.weight_between("c1", "c0", RelationKind.SIMILARITY) == \
            pytest.approx(0.7)

    def test_two_cycle_removes_lower_weight_edge(self):
        rels = [self.rel("c0", "c1", RelationKind.INCLUSION, 0.9),
                self.rel("c1", "c0", RelationKind.INCLUSION, 0.2)]
        graph = merge_validate(self.concepts(), rels, [])
        edges = [(r.src, r.dst) for r in graph.edges(RelationKind.INCLUSION)]
        assert edges == [("c0", "c1")]

    def test_idempotent(self):
        rels = [self.rel("c0", "c1", RelationKind.ASSOCIATION, 0.4),
                self.rel("c0", "c2", RelationKind.INCLUSION, 0.9),
                self.rel("c2", "c3", RelationKind.SIMILARITY, 0.8)]
        graph = merge_validate(self.concepts(), rels, [])
        again = merge_validate(self.concepts(), list(graph.relationships), [])
        assert again.relationships == graph.relationships

    def test_llm_disabled_never_changes_rule_edges(self):
        rules = [self.rel("c0", "c1", RelationKind.ASSOCIATION, 0.4)]
        llm = [self.rel("c2", "c3", RelationKind.SIMILARITY, 0.6, "LLM")]
        alone = merge_validate(self.concepts(), rules, [])
        combined = merge_validate(self.concepts(), rules, llm)
        rule_edges = lambda g: [r for r in g.relationships
                                if all(e.source == "Rule" for e in r.evidence)]
        assert rule_edges(alone) == rule_edges(combined)

    def test_unknown_concepts_dropped(self):
        rels = [self.rel("c0", "zz", RelationKind.ASSOCIATION, 0.4)]
        graph = merge_validate(self.concepts(), rels, [])
        assert graph.relationships == ()

    @settings(max_examples=40, deadline=None)
    @given(st.integers(3, 8), st.data())
    def test_planted_cycles_match_bruteforce_cuts(self, n, data):
        nodes = [f"c{i}" for i in range(n)]
        possible = [(a, b) for a in nodes for b in nodes if a != b]
        edges = data.draw(st.lists(st.sampled_from(possible), min_size=2,
                                   max_size=min(14, len(possible)),
                                   unique=True))
        # plant at least one cycle
        edges = list(dict.fromkeys(edges + [("c0", "c1"), ("c1", "c0")]))
        weights = {}
        for i, e in enumerate(edges):
            weights[e] = round(0.1 + 0.07 * ((i * 13) % 11), 3)
        concepts = [concept(cid, f"l{cid}", [i]) for i, cid in enumerate(nodes)]
        rels = [self.rel(a, b, RelationKind.INCLUSION, weights[(a, b)])
                for a, b in edges]
        graph = merge_validate(concepts, rels, [])
        surviving = {(r.src, r.dst): round(r.weight, 3)
                     for r in graph.edges(RelationKind.INCLUSION)}
        expected = cycle_cut_simulation(nodes, weights)
        assert surviving == {k: round(v, 3) for k, v in expected.items()}
        assert topological_order(graph) is not None

    def test_topological_order_on_acyclic_graph(self):
        rels = [self.rel("c0", "c1", RelationKind.INCLUSION, 0.9),
                self.rel("c1", "c2", RelationKind.INCLUSION, 0.8)]
        graph = merge_validate(self.concepts(), rels, [])
        order = topological_order(graph)
        assert order.index("c0") < order.index("c1") < order.index("c2")


class TestRuleRelationsEndToEnd:
    def test_isolated_rule_baseline(self):
        transcript = parse_subtitles(srt([
            (0, 4000, "the chart shows data"),
            (4000, 8000, "a bar chart compares categories"),
            (8000, 12000, "the chart again with the bar chart"),
        ]), "srt")
        segments = [SlideSegment(0, 0, 12000, 0, 1.0)]
        # windows of one cue: a in {0, 2}, b in {2} -> pmi = ln(1.5) > 0.1
        a = concept("c0", "chart", [0, 2])
        b = concept("c1", "bar chart", [2])
        rels = rule_relations([a, b], transcript, [], segments,
                              window_cues=1, pmi_threshold=0.1,
                              similarity_threshold=0.99)
        kinds = {r.kind for r in rels}
        assert RelationKind.INCLUSION in kinds
        assert RelationKind.ASSOCIATION in kinds
