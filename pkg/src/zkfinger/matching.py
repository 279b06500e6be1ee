"""Similarity scoring between cancelable templates.

Local score between two projected entries: one minus the normalized
distance ||a-b|| / (||a|| + ||b||), which lands in [0, 1] with 1 meaning
identical entries. The global score averages the non-zero entries of
the all-pairs similarity matrix. Fixed-point conversion to integer
percentages feeds the threshold circuit.
"""

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .template import CancelableTemplate


class MatchError(ValueError):
    pass


class IncompatibleTemplateError(MatchError):
    pass


@dataclass(frozen=True)
class SimilarityMatrix:
    scores: np.ndarray  # float64, shape (e, q), values in [0, 1]

    @property
    def rows(self) -> int:
        return self.scores.shape[0]

    @property
    def cols(self) -> int:
        return self.scores.shape[1]


@dataclass(frozen=True)
class FixedPointLSM:
    entries: np.ndarray  # int64, shape (rows, cols), values in [0, 100]

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def to_lists(self) -> list:
        return [[int(v) for v in row] for row in self.entries]

    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols}"]
        lines.extend(" ".join(str(int(v)) for v in row) for row in self.entries)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FixedPointLSM":
        lines = [l for l in (raw.strip() for raw in text.splitlines()) if l and not l.startswith("#")]
        if not lines:
            raise MatchError("empty score-matrix file")
        try:
            rows, cols = (int(v) for v in lines[0].split())
        except ValueError as exc:
            raise MatchError(f"bad score-matrix header: {exc}") from exc
        if len(lines) != rows + 1:
            raise MatchError(f"expected {rows} matrix rows, got {len(lines) - 1}")
        entries = np.zeros((rows, cols), dtype=np.int64)
        for i, line in enumerate(lines[1:]):
            values = line.split()
            if len(values) != cols:
                raise MatchError(f"row {i}: expected {cols} entries, got {len(values)}")
            for j, v in enumerate(values):
                entry = int(v)
                if not 0 <= entry <= 100:
                    raise MatchError(f"row {i}: entry {entry} outside [0, 100]")
                entries[i, j] = entry
        return cls(entries)


@dataclass(frozen=True)
class MatchDecision:
    gms: float
    threshold: float
    accepted: bool


def lms(a: np.ndarray, b: np.ndarray) -> float:
    """Local score in [0, 1]; two all-zero entries count as identical."""
    if a.shape != b.shape:
        raise MatchError(f"entry length mismatch: {a.shape} vs {b.shape}")
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0.0 and norm_b == 0.0:
        return 1.0
    d = np.linalg.norm(a - b) / (norm_a + norm_b)
    return float(min(max(1.0 - d, 0.0), 1.0))


def similarity(enrolled: CancelableTemplate, query: CancelableTemplate) -> SimilarityMatrix:
    """All-pairs local scores: entry (i, j) compares T_i with query_j."""
    if enrolled.params_digest != query.params_digest:
        raise IncompatibleTemplateError("templates built under different parameters")
    if enrolled.p != query.p:
        raise IncompatibleTemplateError("templates have different projection sizes")
    a = enrolled.entries
    b = query.entries
    if a.shape[0] == 0 or b.shape[0] == 0:
        return SimilarityMatrix(np.zeros((a.shape[0], b.shape[0])))
    norms_a = np.linalg.norm(a, axis=1)
    norms_b = np.linalg.norm(b, axis=1)
    # Difference norms computed directly (not via the Gram identity) so
    # identical entries score exactly 1.0 with no float dust.
    dist = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    denom = norms_a[:, None] + norms_b[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        scores = 1.0 - np.where(denom > 0.0, dist / denom, 0.0)
    return SimilarityMatrix(np.clip(scores, 0.0, 1.0))


def gms(s: SimilarityMatrix) -> float:
    """Mean of the non-zero scores; zero when every score is zero."""
    nonzero = np.count_nonzero(s.scores)
    if nonzero == 0:
        return 0.0
    return float(s.scores.sum() / nonzero)


def to_fixed_point(s: SimilarityMatrix) -> FixedPointLSM:
    """Integer percentages, rounding halves away from zero.

    Rounding goes through the shortest decimal representation of each
    score, so 0.305 becomes 31 even though its binary value sits a hair
    below 0.305.
    """
    entries = np.zeros(s.scores.shape, dtype=np.int64)
    flat = s.scores.reshape(-1)
    out = entries.reshape(-1)
    for i in range(flat.size):
        scaled = (Decimal(repr(float(flat[i]))) * 100).quantize(
            Decimal("1"), rounding=ROUND_HALF_UP
        )
        out[i] = int(min(max(scaled, 0), 100))
    return FixedPointLSM(entries)


def decide(s: SimilarityMatrix, threshold: float) -> MatchDecision:
    if not 0.0 <= threshold <= 1.0:
        raise MatchError("threshold must lie in [0, 1]")
    score = gms(s)
    return MatchDecision(score, threshold, score >= threshold)
