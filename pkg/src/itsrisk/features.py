"""Text featurization for CVE descriptions: TF-IDF bag of words, plus a
loader for externally computed sentence-embedding vectors.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from sklearn.feature_extraction.text import TfidfVectorizer

from .errors import ParseError, ValidationError

logger = logging.getLogger(__name__)


@dataclass
class FeatureMatrix:
    """Row-aligned feature vectors for a list of CVE ids."""

    ids: list[str]
    vectors: np.ndarray | sp.spmatrix
    kind: str  # "BagOfWords" or "Embedding"

    def __post_init__(self):
        if self.vectors.shape[0] != len(self.ids):
            raise ValidationError(
                f"{self.vectors.shape[0]} rows for {len(self.ids)} ids"
            )
        data = self.vectors.data if sp.issparse(self.vectors) else self.vectors
        if data.size and not np.all(np.isfinite(data)):
            raise ValidationError("feature matrix contains non-finite values")

    def dense(self) -> np.ndarray:
        if sp.issparse(self.vectors):
            return np.asarray(self.vectors.todense(), dtype=float)
        return np.asarray(self.vectors, dtype=float)

    def take(self, order: list[int]) -> "FeatureMatrix":
        """Reindex rows (used by permutation tests)."""
        return FeatureMatrix(
            ids=[self.ids[i] for i in order],
            vectors=self.vectors[order],
            kind=self.kind,
        )


def build_vectorizer() -> TfidfVectorizer:
    """The shared TF-IDF featurizer (also used by the score predictor)."""
    return TfidfVectorizer(lowercase=True, stop_words="english")


def featurize_bow(corpus: list[tuple[str, str]]) -> FeatureMatrix:
    """TF-IDF matrix over (cve_id, description) pairs.

    Tokenization lowercases, strips punctuation, and drops English stop
    words; the vocabulary is sorted, so the output is deterministic for a
    given corpus order.
    """
    if not corpus:
        raise ValidationError("empty corpus")
    ids = [cve_id for cve_id, _ in corpus]
    texts = []
    for cve_id, description in corpus:
        if not description.strip():
            logger.warning("%s: empty description, featurized as a zero row", cve_id)
        texts.append(description)
    vectorizer = build_vectorizer()
    try:
        matrix = vectorizer.fit_transform(texts)
    except ValueError:
        # Corpus of only stop words/empty strings: no vocabulary at all.
        matrix = sp.csr_matrix((len(texts), 0))
    return FeatureMatrix(ids=ids, vectors=matrix, kind="BagOfWords")


def load_embeddings(path: str | Path) -> FeatureMatrix:
    """Load `{"id": ..., "vector": [...]}` JSONL into a dense matrix.

    Rows keep file order; every vector must share one dimension and be
    finite, and errors point at the offending line.
    """
    path = Path(path)
    ids: list[str] = []
    rows: list[list[float]] = []
    dim: int | None = None
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path.name}: invalid JSON: {exc.msg}", lineno) from None
            if "id" not in doc:
                raise ParseError(f"{path.name}: missing 'id' field", lineno)
            vector = doc.get("vector")
            if not isinstance(vector, list) or not vector:
                raise ParseError(f"{path.name}: missing or empty 'vector'", lineno)
            if dim is None:
                dim = len(vector)
            elif len(vector) != dim:
                raise ParseError(
                    f"{path.name}: vector dimension {len(vector)} != {dim}", lineno
                )
            values = np.asarray(vector, dtype=float)
            if not np.all(np.isfinite(values)):
                raise ParseError(f"{path.name}: non-finite vector value", lineno)
            ids.append(str(doc["id"]))
            rows.append(values)
    if not rows:
        raise ParseError(f"{path.name}: no embedding rows found")
    return FeatureMatrix(ids=ids, vectors=np.vstack(rows), kind="Embedding")
