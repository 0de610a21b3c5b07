"""Tokenization, stopwords, and the default lemmatizer.

The lemmatizer is deliberately small: a rule-based plural reducer.  Both the
stopword list and the lemmatizer are pluggable; the defaults ship as data
files so courses in other languages can swap them via config.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from typing import Callable

_WORD = re.compile(r"\w+", re.UNICODE)

Lemmatizer = Callable[[str], str]


def words(text: str) -> list[str]:
    return _WORD.findall(text)


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    data = resources.files("lecturemap.data").joinpath("stopwords_en.txt")
    lines = data.read_text(encoding="utf-8").splitlines()
    return frozenset(w.strip() for w in lines if w.strip() and not w.startswith("#"))


def load_lexicon(name: str) -> list[str]:
    data = resources.files("lecturemap.data").joinpath(name)
    lines = data.read_text(encoding="utf-8").splitlines()
    return [w.strip() for w in lines if w.strip() and not w.startswith("#")]


def default_lemmatize(word: str) -> str:
    w = word.lower()
    if len(w) > 4 and w.endswith("ies"):
        return w[:-3] + "y"
    if len(w) > 4 and w.endswith(("sses", "shes", "ches", "xes")):
        return w[:-2]
    if len(w) > 3 and w.endswith("s") and not w.endswith(("ss", "us", "is")):
        return w[:-1]
    return w


def content_lemmas(text: str, stopwords: frozenset[str] | None = None,
                   lemmatize: Lemmatizer = default_lemmatize) -> list[str]:
    """Lemmatized content words: lowercased, stopwords and digits removed."""
    if stopwords is None:
        stopwords = default_stopwords()
    out = []
    for token in words(text):
        low = token.lower()
        lemma = lemmatize(low)
        if low in stopwords or lemma in stopwords or low.isdigit():
            continue
        out.append(lemma)
    return out


def lemma_sequence(text: str, lemmatize: Lemmatizer = default_lemmatize) -> list[str]:
    """All tokens lemmatized, stopwords kept (for adjacency and matching)."""
    return [lemmatize(t.lower()) for t in words(text)]
