"""Order-N gram statistics over label corpora, with add-alpha smoothing.

Counts are per-utterance sliding windows: a gram never spans two utterances
and no padding symbols are invented, so a sequence shorter than N contributes
nothing. Storage is sparse (dict keyed by gram tuple); the full support size
K**N enters only the smoothing denominator, as an exact Python integer.

The smoothed probability of any gram l, seen or not, is

    P(l) = (cnt(l) + alpha) / (total + alpha * K**N)

which sums to exactly 1 over the full support and is strictly positive for
alpha > 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .corpus import LabelCorpus

Gram = tuple[int, ...]

# Above this support size, dense enumeration helpers refuse to materialize.
DENSE_SUPPORT_LIMIT = 4_000_000

# Window codes are packed into int64 while K**order fits.
_ENCODE_LIMIT = 2**62


@dataclass(frozen=True)
class NGramStats:
    """Sparse gram counts for one corpus at a fixed order."""

    order: int
    alphabet_size: int
    counts: Mapping[Gram, int]
    total: int
    smoothing_alpha: float

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if self.alphabet_size < 1:
            raise ValueError("alphabet_size must be >= 1")
        if self.smoothing_alpha < 0:
            raise ValueError("smoothing alpha must be >= 0")
        if self.total != sum(self.counts.values()):
            raise ValueError("total does not match the sum of the count map")
        for gram, count in self.counts.items():
            if len(gram) != self.order:
                raise ValueError(f"gram {gram} has wrong order (expected {self.order})")
            if count < 1:
                raise ValueError(f"gram {gram} has non-positive count {count}")
            if any(g < 0 or g >= self.alphabet_size for g in gram):
                raise ValueError(f"gram {gram} outside alphabet [0, {self.alphabet_size})")

    @property
    def support_size(self) -> int:
        return self.alphabet_size**self.order

    def distribution(self) -> "Distribution":
        """Smoothed probability view of these counts."""
        denom = self.total + self.smoothing_alpha * float(self.support_size)
        if denom <= 0:
            raise ValueError(
                "cannot form a distribution from empty counts with alpha=0; "
                "use alpha > 0 or non-empty stats"
            )
        explicit = {gram: (count + self.smoothing_alpha) / denom for gram, count in self.counts.items()}
        floor = self.smoothing_alpha / denom
        return Distribution(
            order=self.order,
            alphabet_size=self.alphabet_size,
            explicit=explicit,
            floor=floor,
        )


@dataclass(frozen=True)
class Distribution:
    """Categorical distribution over all K**N grams.

    ``explicit`` holds probabilities for an enumerated sparse support; every
    other gram has probability ``floor`` (constant, possibly zero).
    """

    order: int
    alphabet_size: int
    explicit: Mapping[Gram, float]
    floor: float

    @property
    def support_size(self) -> int:
        return self.alphabet_size**self.order

    def probability(self, gram: Iterable[int]) -> float:
        """Smoothed probability of one gram (seen or unseen)."""
        gram = tuple(int(g) for g in gram)
        if len(gram) != self.order:
            raise ValueError(f"gram {gram} has wrong order (expected {self.order})")
        if any(g < 0 or g >= self.alphabet_size for g in gram):
            raise ValueError(f"gram {gram} outside alphabet [0, {self.alphabet_size})")
        return self.explicit.get(gram, self.floor)

    def to_dense(self) -> np.ndarray:
        """All K**N probabilities in lexicographic gram order (small supports only)."""
        size = self.support_size
        if size > DENSE_SUPPORT_LIMIT:
            raise ValueError(f"support size {size} too large to materialize")
        dense = np.full(size, self.floor, dtype=np.float64)
        for gram, prob in self.explicit.items():
            dense[_encode_gram(gram, self.alphabet_size)] = prob
        return dense


def _encode_gram(gram: Gram, alphabet_size: int) -> int:
    code = 0
    for g in gram:
        code = code * alphabet_size + int(g)
    return code


def _decode_code(code: int, alphabet_size: int, order: int) -> Gram:
    out = []
    for _ in range(order):
        code, rem = divmod(code, alphabet_size)
        out.append(int(rem))
    return tuple(reversed(out))


def _window_codes(labels: np.ndarray, order: int, alphabet_size: int) -> np.ndarray:
    """Encode every length-``order`` window of one sequence as an int64 code."""
    n_windows = labels.shape[0] - order + 1
    codes = np.zeros(n_windows, dtype=np.int64)
    labels64 = labels.astype(np.int64, copy=False)
    for j in range(order):
        codes *= alphabet_size
        codes += labels64[j : j + n_windows]
    return codes


def sequence_gram_counts(labels, order: int, alphabet_size: int) -> dict[Gram, int]:
    """Sliding-window gram counts of a single label sequence."""
    labels = np.asarray(labels).reshape(-1)
    if labels.shape[0] < order:
        return {}
    if order == 1:
        dense = np.bincount(labels)
        nonzero = np.nonzero(dense)[0]
        return {(int(g),): int(dense[g]) for g in nonzero}
    if alphabet_size**order <= _ENCODE_LIMIT:
        codes, counts = np.unique(_window_codes(labels, order, alphabet_size), return_counts=True)
        return {
            _decode_code(int(code), alphabet_size, order): int(count)
            for code, count in zip(codes, counts)
        }
    out: dict[Gram, int] = {}
    values = labels.tolist()
    for i in range(len(values) - order + 1):
        gram = tuple(values[i : i + order])
        out[gram] = out.get(gram, 0) + 1
    return out


def count_ngrams(corpus: LabelCorpus, order: int, alpha: float = 0.5) -> NGramStats:
    """Count order-N grams over a corpus with per-utterance sliding windows."""
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if alpha < 0:
        raise ValueError("smoothing alpha must be >= 0")
    k = corpus.alphabet_size

    counts: dict[Gram, int]
    if order == 1:
        dense = np.zeros(k, dtype=np.int64)
        for seq in corpus:
            if len(seq):
                dense += np.bincount(seq.labels, minlength=k)
        nonzero = np.nonzero(dense)[0]
        counts = {(int(g),): int(dense[g]) for g in nonzero}
    elif k**order <= _ENCODE_LIMIT:
        chunks = [
            _window_codes(seq.labels, order, k) for seq in corpus if len(seq) >= order
        ]
        if chunks:
            codes, code_counts = np.unique(np.concatenate(chunks), return_counts=True)
            counts = {
                _decode_code(int(code), k, order): int(count)
                for code, count in zip(codes, code_counts)
            }
        else:
            counts = {}
    else:
        counts = {}
        for seq in corpus:
            labels = seq.labels.tolist()
            for i in range(len(labels) - order + 1):
                gram = tuple(labels[i : i + order])
                counts[gram] = counts.get(gram, 0) + 1

    return NGramStats(
        order=order,
        alphabet_size=k,
        counts=counts,
        total=sum(counts.values()),
        smoothing_alpha=alpha,
    )


def prune(stats: NGramStats, min_count: int) -> NGramStats:
    """Drop grams counted fewer than ``min_count`` times; total is recomputed."""
    if min_count < 0:
        raise ValueError("min_count must be >= 0")
    if min_count == 0:
        return stats
    kept = {gram: count for gram, count in stats.counts.items() if count >= min_count}
    return NGramStats(
        order=stats.order,
        alphabet_size=stats.alphabet_size,
        counts=kept,
        total=sum(kept.values()),
        smoothing_alpha=stats.smoothing_alpha,
    )


def interpolate(q: NGramStats, u: NGramStats, lam: float) -> Distribution:
    """Pointwise mixture lam * P_q + (1 - lam) * P_u of two smoothed views."""
    if q.order != u.order:
        raise ValueError(f"order mismatch: {q.order} vs {u.order}")
    if q.alphabet_size != u.alphabet_size:
        raise ValueError(f"alphabet mismatch: {q.alphabet_size} vs {u.alphabet_size}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    dist_q = q.distribution()
    dist_u = u.distribution()
    union = set(dist_q.explicit) | set(dist_u.explicit)
    explicit = {
        gram: lam * dist_q.explicit.get(gram, dist_q.floor)
        + (1.0 - lam) * dist_u.explicit.get(gram, dist_u.floor)
        for gram in union
    }
    floor = lam * dist_q.floor + (1.0 - lam) * dist_u.floor
    return Distribution(
        order=q.order,
        alphabet_size=q.alphabet_size,
        explicit=explicit,
        floor=floor,
    )


def save_stats_dump(
    stats: NGramStats, path: str | Path, comments: Iterable[str] = ()
) -> None:
    """Write counts as ``<gram>\\t<count>`` lines under a small header, for diffing."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"#order={stats.order}\n")
        handle.write(f"#K={stats.alphabet_size}\n")
        handle.write(f"#total={stats.total}\n")
        handle.write(f"#alpha={stats.smoothing_alpha!r}\n")
        for comment in comments:
            handle.write(f"#{comment}\n")
        for gram in sorted(stats.counts):
            gram_text = " ".join(map(str, gram))
            handle.write(f"{gram_text}\t{stats.counts[gram]}\n")
