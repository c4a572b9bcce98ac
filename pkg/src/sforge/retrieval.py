"""Deterministic chunking and BM25 ranking for helper-agent corpora.

No embeddings and no stemming: unit designators like "25ID" must survive
normalization intact, and every ranking must be reproducible by hand.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

from .errors import ParseError

BM25_K1 = 1.2
BM25_B = 0.75
DEFAULT_TOP_K = 5

_TOKEN_RE = re.compile(r"[0-9A-Za-z]+")


def normalize(text: str) -> list[str]:
    """Lowercase alphanumeric word split."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


@dataclass(frozen=True)
class Chunk:
    id: str
    source_path: str
    text: str
    tokens: tuple[str, ...]

    @classmethod
    def make(cls, chunk_id: str, source_path: str, text: str) -> "Chunk":
        return cls(chunk_id, source_path, text, tuple(normalize(text)))


def _scalar(value) -> bool:
    return isinstance(value, (str, int, float, bool)) or value is None


def _scalar_list(value) -> bool:
    return isinstance(value, list) and all(_scalar(v) for v in value)


def _render_value(value) -> str:
    if isinstance(value, list):
        return ", ".join(_render_value(v) for v in value)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _walk_json(node, path: str, out: list[tuple[str, str]]):
    if isinstance(node, dict):
        lines = [f"{k}: {_render_value(v)}" for k, v in node.items()
                 if _scalar(v) or _scalar_list(v)]
        if lines:
            out.append((path, "\n".join(lines)))
        for k, v in node.items():
            if isinstance(v, dict):
                _walk_json(v, f"{path}.{k}", out)
            elif isinstance(v, list) and not _scalar_list(v):
                for i, item in enumerate(v):
                    _walk_json(item, f"{path}.{k}[{i}]", out)
    elif isinstance(node, list):
        for i, item in enumerate(node):
            _walk_json(item, f"{path}[{i}]", out)
    elif _scalar(node) and node not in (None, ""):
        out.append((path, _render_value(node)))


def chunk_document(doc, source: str = "doc") -> list[Chunk]:
    """Structured documents yield one chunk per leaf-bearing object (with its
    JSON path); plain text yields one chunk per blank-line paragraph."""
    if isinstance(doc, (bytes, bytearray)):
        try:
            doc = doc.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"document is not UTF-8: {exc}") from exc
    if isinstance(doc, str):
        stripped = doc.strip()
        if stripped.startswith(("{", "[")):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError:
                pass  # JSON-looking plain text falls through to paragraphs
    if isinstance(doc, str):
        paragraphs = [p.strip() for p in re.split(r"\n\s*\n", doc) if p.strip()]
        return [Chunk.make(f"{source}:p{i}", f"{source}#para{i}", p)
                for i, p in enumerate(paragraphs)]
    found: list[tuple[str, str]] = []
    _walk_json(doc, "$", found)
    return [Chunk.make(f"{source}:{path}", f"{source}#{path}", text)
            for path, text in found]


@dataclass
class Corpus:
    """Immutable-after-build chunk collection with BM25 statistics."""

    chunks: list[Chunk] = field(default_factory=list)
    doc_freq: dict[str, int] = field(default_factory=dict)
    avg_len: float = 0.0

    @classmethod
    def build(cls, chunks: list[Chunk]) -> "Corpus":
        ids = [c.id for c in chunks]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate chunk ids")
        df: dict[str, int] = {}
        for chunk in chunks:
            for term in set(chunk.tokens):
                df[term] = df.get(term, 0) + 1
        avg = (sum(len(c.tokens) for c in chunks) / len(chunks)) if chunks else 0.0
        return cls(chunks=list(chunks), doc_freq=df, avg_len=avg)


def bm25_score(corpus: Corpus, chunk: Chunk, query_terms: list[str]) -> float:
    """BM25 with the non-negative idf variant ln(1 + (N-df+0.5)/(df+0.5))."""
    n = len(corpus.chunks)
    length = len(chunk.tokens)
    score = 0.0
    for term in query_terms:
        df = corpus.doc_freq.get(term, 0)
        if df == 0:
            continue
        tf = chunk.tokens.count(term)
        if tf == 0:
            continue
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        denom = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * length / corpus.avg_len)
        score += idf * tf * (BM25_K1 + 1.0) / denom
    return score


def retrieve_top_k(corpus: Corpus, query: str, k: int | None = DEFAULT_TOP_K
                   ) -> list[tuple[Chunk, float]]:
    """Ranked (chunk, score) pairs: score descending, ties by chunk id."""
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    terms = normalize(query)
    scored = [(chunk, bm25_score(corpus, chunk, terms)) for chunk in corpus.chunks]
    scored.sort(key=lambda pair: (-pair[1], pair[0].id))
    return scored if k is None else scored[:k]
