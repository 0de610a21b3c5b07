"""Concept relationship graph: deterministic rules plus optional LLM
enrichment through a validated client protocol.

Rules produce the same three relationship kinds the event-level model uses:
window co-occurrence (pointwise mutual information) for associations, label
containment and heading nesting for inclusions, and TF-IDF context cosine
for similarities.  LLM proposals arrive over a tiny JSON protocol
(request ``{"prompt", "max_tokens"}``, response ``{"text"}``) and are
validated against the closed concept set before merging.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

from .concepts import Concept
from .elements import Element
from .errors import ClientUnreachable
from .httpclient import post_json
from .ingest.subtitles import Transcript
from .slideseg import SlideSegment
from .text import content_lemmas

log = logging.getLogger(__name__)


class RelationKind(Enum):
    ASSOCIATION = "Association"
    INCLUSION = "Inclusion"
    SIMILARITY = "Similarity"


SYMMETRIC_KINDS = (RelationKind.ASSOCIATION, RelationKind.SIMILARITY)


@dataclass(frozen=True)
class Evidence:
    source: str  # "Rule" | "LLM"
    detail: str


@dataclass(frozen=True)
class Relationship:
    src: str
    dst: str
    kind: RelationKind
    weight: float
    evidence: tuple[Evidence, ...] = ()


@dataclass(frozen=True)
class ConceptGraph:
    concepts: tuple[Concept, ...]
    relationships: tuple[Relationship, ...]

    def edges(self, kind: RelationKind) -> list[Relationship]:
        return [r for r in self.relationships if r.kind == kind]

    def degree(self, concept_id: str, kind: RelationKind) -> int:
        return sum(1 for r in self.relationships if r.kind == kind
                   and concept_id in (r.src, r.dst))

    def neighbors(self, concept_id: str, kind: RelationKind
                  ) -> list[tuple[str, float]]:
        """Neighbors under a symmetric kind, or either-direction inclusion."""
        out = []
        for r in self.relationships:
            if r.kind != kind:
                continue
            if r.src == concept_id:
                out.append((r.dst, r.weight))
            elif r.dst == concept_id:
                out.append((r.src, r.weight))
        return out

    def inclusion_children(self, concept_id: str) -> list[tuple[str, float]]:
        return [(r.dst, r.weight) for r in self.relationships
                if r.kind == RelationKind.INCLUSION and r.src == concept_id]

    def weight_between(self, a: str, b: str, kind: RelationKind) -> float | None:
        for r in self.relationships:
            if r.kind != kind:
                continue
            if (r.src, r.dst) == (a, b):
                return r.weight
            if kind in SYMMETRIC_KINDS and (r.src, r.dst) == (b, a):
                return r.weight
        return None


# --- rule extraction ------------------------------------------------------------

def cue_windows(transcript: Transcript, window_cues: int) -> list[tuple[int, int]]:
    """Consecutive cue-index windows [start, end) of fixed width."""
    n = len(transcript.cues)
    return [(i, min(i + window_cues, n)) for i in range(0, n, window_cues)]


def _concept_window_sets(concepts: list[Concept],
                         windows: list[tuple[int, int]]) -> dict[str, set[int]]:
    presence: dict[str, set[int]] = {c.id: set() for c in concepts}
    for concept in concepts:
        cue_indices = {int(m.location[4:]) for m in concept.mentions
                       if m.location.startswith("cue:")}
        for w, (lo, hi) in enumerate(windows):
            if any(lo <= idx < hi for idx in cue_indices):
                presence[concept.id].add(w)
    return presence


def window_pmi(presence_a: set[int], presence_b: set[int],
               n_windows: int) -> float | None:
    """Pointwise mutual information of window presence; None when the pair
    never co-occurs."""
    both = len(presence_a & presence_b)
    if both == 0:
        return None
    p_a = len(presence_a) / n_windows
    p_b = len(presence_b) / n_windows
    p_ab = both / n_windows
    return math.log(p_ab / (p_a * p_b))


def pmi_associations(concepts: list[Concept], transcript: Transcript,
                     window_cues: int = 5,
                     pmi_threshold: float = 0.5) -> list[Relationship]:
    windows = cue_windows(transcript, window_cues)
    n = len(windows)
    if n == 0:
        return []
    presence = _concept_window_sets(concepts, windows)
    out = []
    ordered = sorted(concepts, key=lambda c: c.id)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            pmi = window_pmi(presence[a.id], presence[b.id], n)
            if pmi is not None and pmi > pmi_threshold:
                p_ab = len(presence[a.id] & presence[b.id]) / n
                npmi = pmi / -math.log(p_ab)
                out.append(Relationship(
                    a.id, b.id, RelationKind.ASSOCIATION, min(1.0, npmi),
                    (Evidence("Rule", f"pmi={pmi:.4f} over {n} windows"),)))
    return out


def _is_subsequence(needle: list[str], haystack: list[str]) -> bool:
    it = iter(haystack)
    return all(tok in it for tok in needle)


def label_inclusions(concepts: list[Concept]) -> list[Relationship]:
    """a includes b when a's label is a strict token subsequence of b's."""
    out = []
    for a in concepts:
        a_tokens = a.label.split(" ")
        for b in concepts:
            if a.id == b.id:
                continue
            b_tokens = b.label.split(" ")
            if len(a_tokens) < len(b_tokens) and _is_subsequence(a_tokens, b_tokens):
                out.append(Relationship(
                    a.id, b.id, RelationKind.INCLUSION, 1.0,
                    (Evidence("Rule", f"label {a.label!r} within {b.label!r}"),)))
    return out


def heading_inclusions(concepts: list[Concept], elements: list[Element],
                       segments: list["SlideSegment"]) -> list[Relationship]:
    """a includes b when every mention of b falls in segments whose heading
    block (topmost text element) names a."""
    headings: dict[int, Element] = {}
    for element in elements:
        if not element.text or not element.kind.is_basic:
            continue
        current = headings.get(element.segment_index)
        if current is None or (element.bbox.y, element.bbox.x) < (current.bbox.y, current.bbox.x):
            headings[element.segment_index] = element

    heading_lemmas = {idx: content_lemmas(el.text)
                      for idx, el in headings.items()}
    element_segment = {e.id: e.segment_index for e in elements}
    out = []
    for a in concepts:
        a_tokens = a.label.split(" ")
        headed = {idx for idx, lemmas in heading_lemmas.items()
                  if _contains_run(lemmas, a_tokens)}
        if not headed:
            continue
        for b in concepts:
            if b.id == a.id or not b.mentions:
                continue
            segs = {_mention_segment(m, element_segment, segments)
                    for m in b.mentions}
            if segs <= headed:
                out.append(Relationship(
                    a.id, b.id, RelationKind.INCLUSION, 1.0,
                    (Evidence("Rule", f"mentions nested under {a.label!r} headings"),)))
    return out


def _contains_run(haystack: list[str], needle: list[str]) -> bool:
    n = len(needle)
    return n > 0 and any(haystack[i:i + n] == needle
                         for i in range(len(haystack) - n + 1))


def _mention_segment(mention, element_segment: dict[str, int],
                     segments: list["SlideSegment"]) -> int:
    if not mention.location.startswith("cue:"):
        return element_segment.get(mention.location, -1)
    for seg in segments:
        if seg.contains(mention.t_ms):
            return seg.index
    return segments[-1].index if segments else -1


def tfidf_similarities(concepts: list[Concept], transcript: Transcript,
                       similarity_threshold: float = 0.6) -> list[Relationship]:
    """Similarity between concepts whose mention contexts share vocabulary."""
    docs: dict[str, dict[str, int]] = {}
    for concept in concepts:
        label_tokens = set(concept.label.split(" "))
        counts: dict[str, int] = {}
        for mention in concept.mentions:
            if not mention.location.startswith("cue:"):
                continue
            cue = transcript.cues[int(mention.location[4:])]
            for lemma in content_lemmas(cue.text):
                if lemma not in label_tokens:
                    counts[lemma] = counts.get(lemma, 0) + 1
        docs[concept.id] = counts

    n_docs = len(concepts)
    df: dict[str, int] = {}
    for counts in docs.values():
        for term in counts:
            df[term] = df.get(term, 0) + 1
    idf = {term: math.log(n_docs / d) for term, d in df.items()}

    vectors = {
        cid: {term: tf * idf[term] for term, tf in counts.items()}
        for cid, counts in docs.items()
    }
    norms = {cid: math.sqrt(sum(v * v for v in vec.values()))
             for cid, vec in vectors.items()}

    out = []
    ordered = sorted(concepts, key=lambda c: c.id)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if norms[a.id] == 0 or norms[b.id] == 0:
                continue
            dot = sum(w * vectors[b.id].get(term, 0.0)
                      for term, w in sorted(vectors[a.id].items()))
            cosine = dot / (norms[a.id] * norms[b.id])
            if cosine >= similarity_threshold:
                out.append(Relationship(
                    a.id, b.id, RelationKind.SIMILARITY, min(1.0, cosine),
                    (Evidence("Rule", f"context cosine {cosine:.4f}"),)))
    return out


def rule_relations(concepts: list[Concept], transcript: Transcript,
                   elements: list[Element], segments: list["SlideSegment"],
                   window_cues: int = 5, pmi_threshold: float = 0.5,
                   similarity_threshold: float = 0.6) -> list[Relationship]:
    rels = pmi_associations(concepts, transcript, window_cues, pmi_threshold)
    rels += label_inclusions(concepts)
    rels += heading_inclusions(concepts, elements, segments)
    rels += tfidf_similarities(concepts, transcript, similarity_threshold)
    return rels


# --- LLM enrichment ---------------------------------------------------------------

_KIND_BY_NAME = {k.value: k for k in RelationKind}


@dataclass
class EnrichmentLog:
    chunks_sent: int = 0
    proposals: int = 0
    dropped: list[str] = field(default_factory=list)
    skipped_chunks: int = 0
    client_error: str | None = None


def chunk_cues(transcript: Transcript, token_budget: int) -> list[list[int]]:
    """Cue-index chunks within the token budget, overlapping by one cue."""
    chunks: list[list[int]] = []
    current: list[int] = []
    used = 0
    for idx, cue in enumerate(transcript.cues):
        cost = len(cue.text.split())
        if current and used + cost > token_budget:
            chunks.append(current)
            current = [current[-1]]  # one-cue overlap
            used = len(transcript.cues[current[0]].text.split())
        current.append(idx)
        used += cost
    if current:
        chunks.append(current)
    return chunks


def render_prompt(template: dict, concept_labels: list[str], chunk_text: str) -> str:
    examples = "\n".join(
        f"Input: {ex['input']}\nOutput: {ex['output']}"
        for ex in template.get("examples", []))
    return (f"{template['system']}\n\n{examples}\n\n"
            f"Concepts: {json.dumps(concept_labels)}\n"
            f"Transcript:\n{chunk_text}\n\n{template['instruction']}")


def _parse_llm_payload(text: str, label_to_id: dict[str, str],
                       llm_weight: float, dropped: list[str]
                       ) -> list[Relationship] | None:
    """None = malformed (retry); otherwise the validated proposals."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError:
        return None
    if not isinstance(payload, list):
        return None
    out = []
    for item in payload:
        if not isinstance(item, dict):
            dropped.append("proposal is not an object")
            continue
        src = label_to_id.get(str(item.get("src_label", "")).lower())
        dst = label_to_id.get(str(item.get("dst_label", "")).lower())
        kind = _KIND_BY_NAME.get(item.get("kind"))
        if src is None or dst is None:
            dropped.append(f"unknown concept label in {item!r}")
            continue
        if kind is None:
            dropped.append(f"unknown kind {item.get('kind')!r}")
            continue
        if src == dst:
            dropped.append(f"self-loop on {item.get('src_label')!r}")
            continue
        confidence = item.get("confidence", 1.0)
        out.append(Relationship(
            src, dst, kind, llm_weight,
            (Evidence("LLM", f"confidence={confidence}"),)))
    return out


def llm_enrich(endpoint: str, transcript: Transcript, concepts: list[Concept],
               template: dict, llm_weight: float = 0.6, retries: int = 2,
               chunk_tokens: int = 700, max_tokens: int = 800,
               timeout_s: float = 10.0
               ) -> tuple[list[Relationship], EnrichmentLog]:
    """Propose relationships for each transcript chunk.  Unreachable client
    skips enrichment entirely; persistent malformed output skips its chunk."""
    enrichment = EnrichmentLog()
    label_to_id = {c.label.lower(): c.id for c in concepts}
    labels = [c.label for c in concepts]
    proposals: list[Relationship] = []
    for chunk in chunk_cues(transcript, chunk_tokens):
        chunk_text = "\n".join(transcript.cues[i].text for i in chunk)
        prompt = render_prompt(template, labels, chunk_text)
        parsed = None
        for _attempt in range(retries + 1):
            try:
                response = post_json(endpoint, {"prompt": prompt,
                                                "max_tokens": max_tokens},
                                     timeout_s)
            except ClientUnreachable as exc:
                enrichment.client_error = str(exc)
                log.warning("LLM client unreachable, enrichment skipped: %s", exc)
                return proposals, enrichment
            enrichment.chunks_sent += 1
            parsed = _parse_llm_payload(str(response.get("text", "")),
                                        label_to_id, llm_weight,
                                        enrichment.dropped)
            if parsed is not None:
                break
        if parsed is None:
            enrichment.skipped_chunks += 1
            log.warning("all retries malformed, chunk skipped")
            continue
        proposals.extend(parsed)
    enrichment.proposals = len(proposals)
    return proposals, enrichment


# --- merge and validation -----------------------------------------------------

def _canonical(rel: Relationship) -> Relationship:
    if rel.kind in SYMMETRIC_KINDS and rel.dst < rel.src:
        return Relationship(rel.dst, rel.src, rel.kind, rel.weight, rel.evidence)
    return rel


def noisy_or(weights: list[float]) -> float:
    product = 1.0
    for w in weights:
        product *= 1.0 - w
    return 1.0 - product


def merge_validate(concepts: list[Concept], rule_rels: list[Relationship],
                   llm_rels: list[Relationship]) -> ConceptGraph:
    """Merge duplicate edges (noisy-or weights), drop edges naming unknown
    concepts, and break inclusion cycles deterministically."""
    known = {c.id for c in concepts}
    grouped: dict[tuple[str, str, RelationKind], list[Relationship]] = {}
    for rel in [_canonical(r) for r in rule_rels + llm_rels]:
        if rel.src not in known or rel.dst not in known or rel.src == rel.dst:
            continue
        grouped.setdefault((rel.src, rel.dst, rel.kind), []).append(rel)

    merged = []
    for (src, dst, kind), group in sorted(
            grouped.items(), key=lambda kv: (kv[0][2].value, kv[0][0], kv[0][1])):
        weight = noisy_or([r.weight for r in group])
        evidence = tuple(ev for r in group for ev in r.evidence)
        merged.append(Relationship(src, dst, kind, weight, evidence))

    inclusion = [r for r in merged if r.kind == RelationKind.INCLUSION]
    others = [r for r in merged if r.kind != RelationKind.INCLUSION]
    inclusion = _break_cycles(inclusion)
    relationships = tuple(others + inclusion)

    graph = ConceptGraph(tuple(concepts), relationships)
    assert topological_order(graph) is not None, "inclusion cycle survived"
    return graph


def _reachable(edges: list[Relationship], start: str, goal: str) -> bool:
    adjacency: dict[str, list[str]] = {}
    for r in edges:
        adjacency.setdefault(r.src, []).append(r.dst)
    stack, seen = [start], set()
    while stack:
        node = stack.pop()
        if node == goal:
            return True
        if node in seen:
            continue
        seen.add(node)
        stack.extend(adjacency.get(node, []))
    return False


def _break_cycles(inclusion: list[Relationship]) -> list[Relationship]:
    edges = list(inclusion)
    while True:
        on_cycle = [r for r in edges if _reachable(edges, r.dst, r.src)]
        if not on_cycle:
            return edges
        victim = min(on_cycle, key=lambda r: (r.weight, r.src, r.dst))
        edges = [r for r in edges if r is not victim]


def topological_order(graph: ConceptGraph) -> list[str] | None:
    """Topological order of the inclusion subgraph, None if cyclic."""
    nodes = sorted(c.id for c in graph.concepts)
    indegree = {n: 0 for n in nodes}
    children: dict[str, list[str]] = {n: [] for n in nodes}
    for r in graph.edges(RelationKind.INCLUSION):
        children[r.src].append(r.dst)
        indegree[r.dst] += 1
    ready = sorted(n for n in nodes if indegree[n] == 0)
    order = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        for child in sorted(children[node]):
            indegree[child] -= 1
            if indegree[child] == 0:
                ready.append(child)
        ready.sort()
    return order if len(order) == len(nodes) else None
