"""Concept extraction and event-level attributes.

Keywords come from a co-occurrence-graph ranking over the transcript's
content words; adjacent top terms merge into keyphrases; each concept then
gets its mentions, speaking duration, delivery style, and an importance
score combining duration with its relationship degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .elements import Element
from .errors import EmptyInput
from .ingest.subtitles import Transcript
from .text import Lemmatizer, content_lemmas, default_lemmatize, lemma_sequence


class DeliveryStyle(Enum):
    WHITEBOARD_ANNOTATION = "WhiteboardAnnotation"
    SLIDE_BASED = "SlideBased"
    DIRECT_LECTURE = "DirectLecture"


@dataclass(frozen=True)
class Mention:
    t_ms: int
    location: str  # "cue:<index>" or an element id


@dataclass(frozen=True)
class Concept:
    id: str
    label: str
    mentions: tuple[Mention, ...]
    duration_ms: int
    intervals: tuple[tuple[int, int], ...]  # merged mention intervals
    delivery_style: DeliveryStyle
    importance: float
    textrank_score: float

    @property
    def first_mention_ms(self) -> int:
        return self.mentions[0].t_ms

    def active_at(self, t_ms: int) -> bool:
        return any(s <= t_ms < e for s, e in self.intervals)


@dataclass(frozen=True)
class DeliveryEvidence:
    segment_index: int
    start_ms: int
    end_ms: int
    handwritten_text: bool
    teacher_head: bool
    slide_present: bool


# --- keyword ranking ----------------------------------------------------------

def textrank(tokens: list[str], window: int = 4, damping: float = 0.85,
             tol: float = 1e-6, max_iter: int = 200) -> list[tuple[str, float]]:
    """Rank terms by iterating the weighted random-surfer score over the
    sliding-window co-occurrence graph.  Ties break lexicographically."""
    if window < 2:
        raise ValueError("window must be >= 2")
    if not 0 < damping < 1:
        raise ValueError("damping must be in (0, 1)")
    if not tokens:
        raise EmptyInput("no tokens")

    vocab = sorted(set(tokens))
    index = {term: i for i, term in enumerate(vocab)}
    n = len(vocab)
    weights: dict[tuple[int, int], float] = {}
    for i, token in enumerate(tokens):
        for j in range(i + 1, min(i + window, len(tokens))):
            a, b = index[token], index[tokens[j]]
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            weights[key] = weights.get(key, 0.0) + 1.0

    neighbors: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (a, b), w in sorted(weights.items()):
        neighbors[a].append((b, w))
        neighbors[b].append((a, w))
    out_weight = [sum(w for _, w in nbrs) for nbrs in neighbors]

    scores = [1.0] * n
    for _ in range(max_iter):
        new_scores = []
        for i in range(n):
            acc = 0.0
            for j, w in neighbors[i]:
                acc += scores[j] * w / out_weight[j]
            new_scores.append((1.0 - damping) + damping * acc)
        delta = max(abs(a - b) for a, b in zip(new_scores, scores))
        scores = new_scores
        if delta < tol:
            break
    ranked = sorted(zip(vocab, scores), key=lambda kv: (-kv[1], kv[0]))
    return ranked


def assemble_keyphrases(ranked: list[tuple[str, float]],
                        token_streams: list[list[str]],
                        top_fraction: float = 1 / 3,
                        max_labels: int = 15) -> list[tuple[str, float]]:
    """Merge top-ranked terms that sit adjacent in the source text into
    multiword labels; return the top labels by summed member score.

    ``token_streams`` must be the full lemma sequences of the source text
    (stopwords included): stopwords are never ranked, so they break runs,
    and a resulting label is always a contiguous phrase of the original.
    """
    if not ranked:
        return []
    top_count = max(1, math.ceil(len(ranked) * top_fraction))
    score_of = dict(ranked)
    top_terms = {term for term, _ in ranked[:top_count]}

    labels: dict[str, float] = {}
    for stream in token_streams:
        run: list[str] = []
        for token in stream + [""]:  # sentinel flushes the last run
            if token in top_terms:
                run.append(token)
                continue
            if run:
                label = " ".join(run)
                labels.setdefault(label, sum(score_of[t] for t in run))
                run = []
    ordered = sorted(labels.items(), key=lambda kv: (-kv[1], kv[0]))
    return ordered[:max_labels]


# --- mentions and duration ------------------------------------------------------

def _contains_seq(haystack: list[str], needle: list[str]) -> bool:
    n = len(needle)
    if n == 0 or n > len(haystack):
        return False
    return any(haystack[i:i + n] == needle
               for i in range(len(haystack) - n + 1))


def link_mentions(labels: list[str], transcript: Transcript,
                  elements: list[Element],
                  lemmatize: Lemmatizer = default_lemmatize
                  ) -> tuple[dict[str, list[Mention]], list[Element], list[str]]:
    """Locate every token-boundary occurrence of each label.

    Returns mentions per label, elements with concept back-references filled
    in (keyed by label until ids are assigned), and labels that matched
    nowhere (dropped with a build warning).
    """
    label_seqs = {label: label.split(" ") for label in labels}
    cue_lemmas = [lemma_sequence(cue.text, lemmatize) for cue in transcript.cues]
    element_lemmas = {e.id: lemma_sequence(e.text, lemmatize)
                      for e in elements if e.text}

    mentions: dict[str, list[Mention]] = {label: [] for label in labels}
    element_labels: dict[str, list[str]] = {e.id: [] for e in elements}
    for label, seq in label_seqs.items():
        for idx, cue in enumerate(transcript.cues):
            if _contains_seq(cue_lemmas[idx], seq):
                mentions[label].append(Mention(cue.start_ms, f"cue:{idx}"))
        for element in elements:
            lemmas = element_lemmas.get(element.id)
            if lemmas and _contains_seq(lemmas, seq):
                mentions[label].append(Mention(element.t_start_ms, element.id))
                element_labels[element.id].append(label)

    dropped = [label for label in labels if not mentions[label]]
    for label in dropped:
        del mentions[label]
    for label in mentions:
        mentions[label].sort(key=lambda m: (m.t_ms, m.location))
    linked = [replace(e, concept_ids=tuple(element_labels[e.id]))
              for e in elements]
    return mentions, linked, dropped


def merge_intervals(intervals: list[tuple[int, int]],
                    gap_ms: int) -> list[tuple[int, int]]:
    """Union of intervals, additionally bridging gaps shorter than gap_ms."""
    if not intervals:
        return []
    ordered = sorted(intervals)
    merged = [list(ordered[0])]
    for start, end in ordered[1:]:
        if start - merged[-1][1] < gap_ms:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return [(s, e) for s, e in merged]


def mention_cue_intervals(mentions: list[Mention],
                          transcript: Transcript) -> list[tuple[int, int]]:
    intervals = []
    for mention in mentions:
        if mention.location.startswith("cue:"):
            cue = transcript.cues[int(mention.location[4:])]
            intervals.append((cue.start_ms, cue.end_ms))
    return intervals


def compute_duration(mentions: list[Mention], transcript: Transcript,
                     gap_ms: int = 5000) -> tuple[int, list[tuple[int, int]]]:
    """Total speaking time: merged mention-containing cue intervals, bridged
    gaps included in the total."""
    merged = merge_intervals(mention_cue_intervals(mentions, transcript), gap_ms)
    return sum(e - s for s, e in merged), merged


# --- delivery style ---------------------------------------------------------

_STYLE_ORDER = [
    ((True, True), DeliveryStyle.WHITEBOARD_ANNOTATION),
    ((True, False), DeliveryStyle.WHITEBOARD_ANNOTATION),
    ((False, True), DeliveryStyle.SLIDE_BASED),
    ((False, False), DeliveryStyle.DIRECT_LECTURE),
]


def style_for_flags(handwritten: bool, slide_present: bool) -> DeliveryStyle:
    if handwritten:
        return DeliveryStyle.WHITEBOARD_ANNOTATION
    if slide_present:
        return DeliveryStyle.SLIDE_BASED
    return DeliveryStyle.DIRECT_LECTURE


def classify_delivery(intervals: list[tuple[int, int]],
                      evidence: list[DeliveryEvidence]) -> DeliveryStyle:
    """Style of the flag combination covering the greatest total overlap
    time between the concept's intervals and the segments."""
    combo_time: dict[tuple[bool, bool], int] = {}
    for ev in evidence:
        overlap = 0
        for start, end in intervals:
            overlap += max(0, min(end, ev.end_ms) - max(start, ev.start_ms))
        if overlap > 0:
            combo = (ev.handwritten_text, ev.slide_present)
            combo_time[combo] = combo_time.get(combo, 0) + overlap
    if not combo_time:
        return DeliveryStyle.DIRECT_LECTURE
    best_time = max(combo_time.values())
    for combo, _style in _STYLE_ORDER:
        if combo_time.get(combo) == best_time:
            return style_for_flags(*combo)
    raise AssertionError("unreachable")


# --- importance ----------------------------------------------------------------

@dataclass(frozen=True)
class ImportanceWeights:
    duration: float = 1.0
    association: float = 1.0
    inclusion: float = 1.5
    similarity: float = 0.5


def raw_importance(duration_ms: int, deg_assoc: int, deg_incl: int,
                   deg_sim: int, weights: ImportanceWeights) -> float:
    return (weights.duration * math.log1p(duration_ms / 1000.0)
            + weights.association * deg_assoc
            + weights.inclusion * deg_incl
            + weights.similarity * deg_sim)


def score_importance(raw_scores: list[float]) -> list[float]:
    """Min-max normalize across the course; a degenerate spread (single
    concept or all-equal raws) maps everything to 1.0."""
    if not raw_scores:
        return []
    lo, hi = min(raw_scores), max(raw_scores)
    if hi - lo <= 0:
        return [1.0] * len(raw_scores)
    return [(r - lo) / (hi - lo) for r in raw_scores]


# --- course-level helpers ----------------------------------------------------

def extract_ranked_terms(transcript: Transcript, elements: list[Element],
                         stopwords: frozenset[str] | None = None,
                         lemmatize: Lemmatizer = default_lemmatize,
                         window: int = 4, damping: float = 0.85,
                         tol: float = 1e-6, max_iter: int = 200
                         ) -> tuple[list[tuple[str, float]], list[list[str]]]:
    """TextRank over transcript + slide text.

    Ranking runs on content words only; the returned streams are the full
    lemma sequences (stopwords kept) that the phrase-merge step scans for
    adjacent top terms.
    """
    sources = [cue.text for cue in transcript.cues]
    sources += [e.text for e in elements
                if e.text and e.kind.value != "Subtitle"]
    tokens = [t for text in sources
              for t in content_lemmas(text, stopwords, lemmatize)]
    if not tokens:
        raise EmptyInput("transcript and slides contain no content words")
    ranked = textrank(tokens, window, damping, tol, max_iter)
    full_streams = [lemma_sequence(text, lemmatize) for text in sources]
    return ranked, full_streams


def active_concept_at(t_ms: int, concepts: list[Concept]) -> Concept | None:
    """The concept being explained at t: highest importance among those whose
    merged intervals cover t; ties break on id."""
    active = [c for c in concepts if c.active_at(t_ms)]
    if not active:
        return None
    return min(active, key=lambda c: (-c.importance, c.id))
