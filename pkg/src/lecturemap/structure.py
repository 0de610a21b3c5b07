"""Conclusion-level analysis: the topics-over-time course structure, the
progress-bar importance curve, key time nodes, and the overview partition.

The topic model couples word counts with per-token Beta timestamp densities
and is fit by collapsed Gibbs sampling.  The sweep itself runs in the kernel
backend; timestamp densities and draws are precomputed here each sweep so
the compiled and pure backends consume identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betaln

from . import _accel
from .concepts import Concept, DeliveryStyle
from .errors import EmptyCorpus

TIME_EPS = 1e-3
PSI_VARIANCE_FLOOR = 1e-4


@dataclass(frozen=True)
class TotDocument:
    tokens: tuple[str, ...]
    timestamp: float  # normalized course time in (0, 1)


@dataclass(frozen=True)
class TotModel:
    n_topics: int
    vocab: tuple[str, ...]
    phi: np.ndarray         # (K, V) topic-word distributions
    theta: np.ndarray       # (D, K) document-topic distributions
    psi: np.ndarray         # (K, 2) Beta shape parameters over time
    assignments: np.ndarray  # (n_tokens,) topic labels
    doc_of: np.ndarray
    word_of: np.ndarray
    token_time: np.ndarray
    alpha: float
    beta: float

    def top_words(self, k: int, n: int = 10) -> list[str]:
        order = np.argsort(-self.phi[k], kind="stable")
        return [self.vocab[i] for i in order[:n]]

    def topic_mode(self, k: int) -> float:
        a, b = self.psi[k]
        if a > 1 and b > 1:
            return float((a - 1) / (a + b - 2))
        return float(a / (a + b))


def beta_pdf_matrix(t: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Beta densities of each token time under each topic, (n_tokens, K)."""
    a = psi[:, 0][None, :]
    b = psi[:, 1][None, :]
    lt = np.log(t)[:, None]
    l1t = np.log1p(-t)[:, None]
    return np.exp((a - 1.0) * lt + (b - 1.0) * l1t - betaln(a, b))


def estimate_psi(assignments: np.ndarray, token_time: np.ndarray,
                 n_topics: int) -> np.ndarray:
    """Method-of-moments Beta fit per topic, with a variance floor and a
    uniform Beta(1, 1) fallback for degenerate topics."""
    psi = np.ones((n_topics, 2), dtype=np.float64)
    for k in range(n_topics):
        times = token_time[assignments == k]
        if times.size < 2:
            continue
        m = float(times.mean())
        v = float(times.var(ddof=1))
        if v == 0.0 or not 0.0 < m < 1.0:
            continue
        v = max(v, PSI_VARIANCE_FLOOR)
        common = m * (1.0 - m) / v - 1.0
        if common <= 0.0:
            continue
        a = m * common
        b = (1.0 - m) * common
        if a > 0.0 and b > 0.0:
            psi[k, 0] = a
            psi[k, 1] = b
    return psi


def tot_fit(docs: list[TotDocument], n_topics: int, sweeps: int = 500,
            alpha: float | None = None, beta: float = 0.01,
            seed: int = 12345, check_counts: bool = False) -> TotModel:
    """Collapsed Gibbs sampling with per-sweep psi re-estimation.

    Deterministic under a fixed seed: draws come from one PCG64 stream in
    token order, so reruns (and both kernel backends) reproduce bit-identical
    assignments.
    """
    if n_topics < 1:
        raise ValueError(f"K must be >= 1, got {n_topics}")
    if not docs:
        raise EmptyCorpus("no documents")
    for i, doc in enumerate(docs):
        if not doc.tokens:
            raise EmptyCorpus(f"document {i} is empty")
    if alpha is None:
        alpha = 50.0 / n_topics

    vocab = tuple(sorted({tok for doc in docs for tok in doc.tokens}))
    word_index = {w: i for i, w in enumerate(vocab)}
    doc_of = np.array([d for d, doc in enumerate(docs) for _ in doc.tokens],
                      dtype=np.int64)
    word_of = np.array([word_index[tok] for doc in docs for tok in doc.tokens],
                       dtype=np.int64)
    token_time = np.array(
        [min(1.0 - TIME_EPS, max(TIME_EPS, doc.timestamp))
         for doc in docs for _ in doc.tokens], dtype=np.float64)
    n_tokens = word_of.shape[0]
    n_docs = len(docs)
    n_vocab = len(vocab)

    rng = np.random.Generator(np.random.PCG64(seed))
    z = np.minimum((rng.random(n_tokens) * n_topics).astype(np.int64),
                   n_topics - 1)
    n_dk = np.zeros((n_docs, n_topics), dtype=np.int64)
    n_kw = np.zeros((n_topics, n_vocab), dtype=np.int64)
    n_k = np.zeros(n_topics, dtype=np.int64)
    np.add.at(n_dk, (doc_of, z), 1)
    np.add.at(n_kw, (z, word_of), 1)
    np.add.at(n_k, z, 1)

    psi = estimate_psi(z, token_time, n_topics)
    for _sweep in range(sweeps):
        pdf = beta_pdf_matrix(token_time, psi)
        uniforms = rng.random(n_tokens)
        _accel.gibbs_sweep(z, doc_of, word_of, n_dk, n_kw, n_k,
                           alpha, beta, pdf, uniforms)
        psi = estimate_psi(z, token_time, n_topics)
        if check_counts:
            _assert_counts(z, doc_of, word_of, n_dk, n_kw, n_k)

    phi = (n_kw + beta) / (n_k[:, None] + n_vocab * beta)
    theta = (n_dk + alpha) / (n_dk.sum(axis=1, keepdims=True) + n_topics * alpha)
    return TotModel(n_topics, vocab, phi, theta, psi, z, doc_of, word_of,
                    token_time, alpha, beta)


def _assert_counts(z, doc_of, word_of, n_dk, n_kw, n_k) -> None:
    check_dk = np.zeros_like(n_dk)
    check_kw = np.zeros_like(n_kw)
    check_k = np.zeros_like(n_k)
    np.add.at(check_dk, (doc_of, z), 1)
    np.add.at(check_kw, (z, word_of), 1)
    np.add.at(check_k, z, 1)
    assert np.array_equal(check_dk, n_dk), "doc-topic counts drifted"
    assert np.array_equal(check_kw, n_kw), "topic-word counts drifted"
    assert np.array_equal(check_k, n_k), "topic counts drifted"


def clamp_topic_count(segment_count: int, lo: int = 2, hi: int = 10) -> int:
    return max(lo, min(hi, segment_count))


def topic_report(model: TotModel, doc_segments: list[int]) -> dict:
    """Build-report section: top words, psi, per-segment dominant topic."""
    dominant: dict[int, np.ndarray] = {}
    for d, seg in enumerate(doc_segments):
        dominant.setdefault(seg, np.zeros(model.n_topics))
        dominant[seg] += model.theta[d]
    return {
        "topics": [
            {
                "topic": k,
                "top_words": model.top_words(k),
                "psi": [float(model.psi[k, 0]), float(model.psi[k, 1])],
                "time_mode": model.topic_mode(k),
            }
            for k in range(model.n_topics)
        ],
        "segment_dominant_topic": {
            str(seg): int(np.argmax(weights))
            for seg, weights in sorted(dominant.items())
        },
    }


# --- importance curve -------------------------------------------------------

@dataclass(frozen=True)
class ImportanceCurve:
    samples: tuple[tuple[int, float], ...]

    @property
    def times(self) -> list[int]:
        return [t for t, _ in self.samples]

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.samples]


def importance_curve(concepts: list[Concept], stride_ms: int,
                     duration_ms: int) -> ImportanceCurve:
    """value(t) = max importance over concepts active at t, 0 where none."""
    samples = []
    for t in range(0, duration_ms + 1, stride_ms):
        value = 0.0
        for concept in concepts:
            if concept.active_at(t) and concept.importance > value:
                value = concept.importance
        samples.append((t, value))
    return ImportanceCurve(tuple(samples))


@dataclass(frozen=True)
class TimeNode:
    t_ms: int
    value: float


def key_time_nodes(curve: ImportanceCurve, quantile: float = 0.7,
                   min_gap_ms: int = 15000) -> list[TimeNode]:
    """Strict local maxima of the curve at or above the value quantile, with
    a minimum spacing where the higher value wins."""
    samples = curve.samples
    if not samples:
        raise ValueError("curve is empty")
    values = [v for _, v in samples]

    # collapse plateaus into runs, then keep runs strictly above neighbors
    runs: list[tuple[int, float]] = []  # (start sample index, value)
    peaks: list[TimeNode] = []
    i = 0
    while i < len(samples):
        j = i
        while j + 1 < len(samples) and values[j + 1] == values[i]:
            j += 1
        runs.append((i, values[i]))
        i = j + 1
    for r, (start, value) in enumerate(runs):
        left = runs[r - 1][1] if r > 0 else None
        right = runs[r + 1][1] if r + 1 < len(runs) else None
        if left is None and right is None:
            continue
        if (left is None or left < value) and (right is None or right < value):
            peaks.append(TimeNode(samples[start][0], value))

    threshold = float(np.quantile(values, quantile))
    peaks = [p for p in peaks if p.value >= threshold]

    accepted: list[TimeNode] = []
    for peak in sorted(peaks, key=lambda p: (-p.value, p.t_ms)):
        if all(abs(peak.t_ms - a.t_ms) >= min_gap_ms for a in accepted):
            accepted.append(peak)
    return sorted(accepted, key=lambda p: p.t_ms)


# --- overview partition ---------------------------------------------------------

@dataclass(frozen=True)
class OverviewGroup:
    style: DeliveryStyle
    concept_ids: tuple[str, ...]


def partition_overview(concepts: list[Concept]) -> list[OverviewGroup]:
    """Group concepts by delivery style (at most three groups), groups and
    members both in chronological first-mention order."""
    by_style: dict[DeliveryStyle, list[Concept]] = {}
    for concept in concepts:
        by_style.setdefault(concept.delivery_style, []).append(concept)
    groups = []
    for style, members in by_style.items():
        members.sort(key=lambda c: (c.first_mention_ms, c.id))
        groups.append(OverviewGroup(style, tuple(c.id for c in members)))
    groups.sort(key=lambda g: min(
        c.first_mention_ms for c in concepts if c.id in g.concept_ids))
    return groups
