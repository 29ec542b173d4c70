"""KL divergence between smoothed gram distributions.

The divergence of p from q is summed explicitly over the union of the two
sparse supports; the remaining (K**N - |union|) grams, unseen in both
operands, all share the constant floor probabilities of the two sides and
contribute one closed-form term. The result is therefore a pure function of
the two distributions, independent of how their supports are represented.

Natural log throughout; values are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .corpus import LabelSequence
from .ngram import Distribution, Gram, NGramStats, sequence_gram_counts


class DivergenceUndefinedError(ValueError):
    """q assigns zero probability to a gram p gives positive mass (alpha=0 only)."""


@dataclass(frozen=True)
class ScdValue:
    """A divergence in nats plus a breakdown of how it was summed.

    ``support_terms`` counts the explicitly summed grams; ``implicit_mass``
    is the aggregated contribution of grams unseen in both operands.
    """

    nats: float
    support_terms: int
    implicit_mass: float

    def __float__(self) -> float:
        return self.nats


def scd(p: Distribution, q: Distribution) -> ScdValue:
    """Divergence of p from q: sum over all K**N grams of p(l)*ln(p(l)/q(l))."""
    if p.order != q.order:
        raise ValueError(f"order mismatch: {p.order} vs {q.order}")
    if p.alphabet_size != q.alphabet_size:
        raise ValueError(f"alphabet mismatch: {p.alphabet_size} vs {q.alphabet_size}")

    union = set(p.explicit) | set(q.explicit)
    explicit_sum = 0.0
    for gram in union:
        pp = p.explicit.get(gram, p.floor)
        if pp <= 0.0:
            continue
        qq = q.explicit.get(gram, q.floor)
        if qq <= 0.0:
            raise DivergenceUndefinedError(
                f"q has zero probability at gram {gram} where p is positive; "
                "divergence is undefined (use alpha > 0)"
            )
        explicit_sum += pp * math.log(pp / qq)

    remaining = p.support_size - len(union)
    implicit = 0.0
    if remaining > 0 and p.floor > 0.0:
        if q.floor <= 0.0:
            raise DivergenceUndefinedError(
                "q has zero floor probability on grams where p has positive floor; "
                "divergence is undefined (use alpha > 0)"
            )
        implicit = float(remaining) * p.floor * math.log(p.floor / q.floor)

    return ScdValue(
        nats=explicit_sum + implicit,
        support_terms=len(union),
        implicit_mass=implicit,
    )


@dataclass
class CandidateStats:
    """Mutable gram counts for a growing candidate subset.

    One instance per worker: concurrent mutation is not synchronized here.
    """

    order: int
    alphabet_size: int
    alpha: float
    counts: dict[Gram, int] = field(default_factory=dict)
    total: int = 0

    def add(self, labels: LabelSequence | Iterable[int]) -> None:
        """Fold one utterance's gram counts into the accumulator."""
        for gram, count in sequence_gram_counts(
            _label_array(labels), self.order, self.alphabet_size
        ).items():
            self.counts[gram] = self.counts.get(gram, 0) + count
            self.total += count

    def copy(self) -> "CandidateStats":
        return CandidateStats(
            order=self.order,
            alphabet_size=self.alphabet_size,
            alpha=self.alpha,
            counts=dict(self.counts),
            total=self.total,
        )

    def to_stats(self) -> NGramStats:
        return NGramStats(
            order=self.order,
            alphabet_size=self.alphabet_size,
            counts=dict(self.counts),
            total=self.total,
            smoothing_alpha=self.alpha,
        )

    def distribution(self) -> Distribution:
        return self.to_stats().distribution()


def _label_array(labels: LabelSequence | Iterable[int]) -> np.ndarray:
    if isinstance(labels, LabelSequence):
        return labels.labels
    return np.asarray(labels, dtype=np.int64).reshape(-1)


def scd_incremental(
    base: CandidateStats,
    addition: LabelSequence | Iterable[int],
    query: Distribution,
) -> ScdValue:
    """Divergence of ``query`` from the counts of ``base`` with ``addition`` appended.

    ``base`` is left untouched; the result is exactly what a from-scratch
    recount of the extended subset would give.
    """
    labels = _label_array(addition)
    if labels.size and (labels.min() < 0 or labels.max() >= base.alphabet_size):
        raise ValueError(
            f"addition has labels outside [0, {base.alphabet_size})"
        )
    merged = base.copy()
    merged.add(labels)
    return scd(query, merged.distribution())
