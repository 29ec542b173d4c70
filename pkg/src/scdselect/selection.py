"""Subset selection strategies over label corpora.

``select_greedy_scd`` implements the bucketed greedy divergence search:
sort the pool by length, build the interpolated target distribution once,
split the sorted pool into C contiguous buckets, and pick from each bucket
the utterance whose addition to the growing subset minimizes the divergence
from the target. ``select_random``, ``select_contrastive`` and
``select_oracle`` are the baselines and the exact reference; they all report
their divergence trace against the same interpolated target so results are
directly comparable.

Every strategy is deterministic given its inputs and config.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import LabelCorpus, LabelSequence, sort_by_length
from .divergence import CandidateStats, ScdValue, scd, scd_incremental
from .ngram import (
    DENSE_SUPPORT_LIMIT,
    Distribution,
    Gram,
    count_ngrams,
    interpolate,
    prune,
    sequence_gram_counts,
    _window_codes,
)

logger = logging.getLogger(__name__)

STRATEGY_GREEDY = "greedy-scd"
STRATEGY_RANDOM = "random"
STRATEGY_CONTRASTIVE = "contrastive"
STRATEGY_ORACLE = "oracle"


@dataclass(frozen=True)
class SelectionConfig:
    """Hyperparameters of one selection run.

    Exactly one of ``budget_c`` (utterance count) and ``duration_budget_s``
    (seconds) must be set. ``lam`` blends the query distribution with the
    pool distribution to keep a small query from being overfit; ``alpha`` is
    the add-alpha smoothing pseudo-count applied on every estimated
    distribution; ``prune_min_count`` drops rare grams from the pool/query
    models before the target is formed.
    """

    budget_c: int | None = None
    duration_budget_s: float | None = None
    order: int = 1
    lam: float = 0.5
    alpha: float = 0.5
    prune_min_count: int = 0
    seed: int = 0

    def __post_init__(self):
        if (self.budget_c is None) == (self.duration_budget_s is None):
            raise ValueError("exactly one of budget_c and duration_budget_s must be set")
        if self.budget_c is not None and self.budget_c < 1:
            raise ValueError("budget_c must be >= 1")
        if self.duration_budget_s is not None and self.duration_budget_s < 0:
            raise ValueError("duration_budget_s must be >= 0")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must be in [0, 1], got {self.lam}")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.prune_min_count < 0:
            raise ValueError("prune_min_count must be >= 0")

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SelectionConfig":
        return cls(**json.loads(text))


@dataclass(frozen=True)
class SelectionResult:
    """Chosen ids in pick order, the divergence trace, and provenance."""

    selected_ids: tuple[str, ...]
    scd_trace: tuple[float, ...]
    final_scd: ScdValue | None
    strategy: str
    config_echo: SelectionConfig

    def __post_init__(self):
        if len(set(self.selected_ids)) != len(self.selected_ids):
            raise ValueError("selected ids must be unique")
        if self.scd_trace and self.final_scd is not None:
            if self.scd_trace[-1] != self.final_scd.nats:
                raise ValueError("trace must end at final_scd")


@dataclass(frozen=True)
class MarkovSource:
    """First-order Markov chain over the label alphabet, for synthetic corpora."""

    alphabet_size: int
    initial_probs: np.ndarray
    transition: np.ndarray
    seed: int = 0

    def __post_init__(self):
        initial = np.asarray(self.initial_probs, dtype=np.float64).reshape(-1)
        transition = np.asarray(self.transition, dtype=np.float64)
        if initial.shape != (self.alphabet_size,):
            raise ValueError("initial_probs must have length K")
        if transition.shape != (self.alphabet_size, self.alphabet_size):
            raise ValueError("transition must be K x K")
        if initial.min() < 0 or transition.min() < 0:
            raise ValueError("probabilities must be non-negative")
        if abs(initial.sum() - 1.0) > 1e-9:
            raise ValueError("initial_probs must sum to 1")
        row_sums = transition.sum(axis=1)
        if np.max(np.abs(row_sums - 1.0)) > 1e-9:
            raise ValueError("transition rows must sum to 1")
        object.__setattr__(self, "initial_probs", initial)
        object.__setattr__(self, "transition", transition)

    def sample_sequence(self, length: int, rng: np.random.Generator) -> np.ndarray:
        cum_init = np.cumsum(self.initial_probs)
        cum_rows = np.cumsum(self.transition, axis=1)
        out = np.empty(length, dtype=np.int64)
        if length == 0:
            return out
        state = int(np.searchsorted(cum_init, rng.random(), side="right"))
        state = min(state, self.alphabet_size - 1)
        out[0] = state
        for t in range(1, length):
            state = int(np.searchsorted(cum_rows[state], rng.random(), side="right"))
            state = min(state, self.alphabet_size - 1)
            out[t] = state
        return out


def build_target_distribution(
    universal: LabelCorpus, query: LabelCorpus, config: SelectionConfig
) -> Distribution:
    """Interpolated target: lam * P_query + (1 - lam) * P_pool.

    Both component models are estimated on the full corpora at
    ``config.order``, pruned at ``config.prune_min_count``, and smoothed with
    ``config.alpha``. The pool model is computed once, never on a shrinking
    remainder.
    """
    if len(universal) == 0:
        raise ValueError("universal corpus is empty")
    if len(query) == 0:
        raise ValueError("query corpus is empty")
    if universal.alphabet_size != query.alphabet_size:
        raise ValueError(
            f"alphabet mismatch: universal K={universal.alphabet_size}, "
            f"query K={query.alphabet_size}"
        )
    stats_u = prune(count_ngrams(universal, config.order, config.alpha), config.prune_min_count)
    stats_q = prune(count_ngrams(query, config.order, config.alpha), config.prune_min_count)
    return interpolate(stats_q, stats_u, config.lam)


def partition_buckets(n_items: int, n_buckets: int) -> list[tuple[int, int]]:
    """Split ``range(n_items)`` into contiguous buckets whose sizes differ by <= 1.

    The first ``n_items % n_buckets`` buckets take the extra element.
    """
    if not 1 <= n_buckets <= n_items:
        raise ValueError(f"need 1 <= n_buckets <= n_items, got {n_buckets}, {n_items}")
    base, extra = divmod(n_items, n_buckets)
    bounds = []
    start = 0
    for i in range(n_buckets):
        size = base + (1 if i < extra else 0)
        bounds.append((start, start + size))
        start += size
    return bounds


class _IncrementalScorer:
    """Evaluates SCD(target, S + {u}) for a stream of candidates.

    Uses the factorization

        SCD = H - A - corr(u) + log(T_S + T_u + alpha * K**N)

    where H is the target's entropy-like constant, A tracks
    sum_g P_t(g) * log(cnt_S(g) + alpha) over the full support, and corr(u)
    only touches the grams present in u. Requires alpha > 0. Keeps counts
    dense when K**N is small, sparse dicts otherwise.
    """

    def __init__(self, target: Distribution, alpha: float):
        if alpha <= 0:
            raise ValueError("incremental scorer requires alpha > 0")
        self.target = target
        self.alpha = float(alpha)
        self.order = target.order
        self.k = target.alphabet_size
        self.support = target.support_size
        self.alpha_mass = self.alpha * float(self.support)
        self.total = 0
        self.dense = self.support <= DENSE_SUPPORT_LIMIT
        if self.dense:
            self.pq = target.to_dense()
            self.counts = np.zeros(self.support, dtype=np.float64)
            positive = self.pq > 0
            self.h_const = float(np.sum(self.pq[positive] * np.log(self.pq[positive])))
        else:
            self.pq_map = dict(target.explicit)
            self.floor = target.floor
            self.counts_map: dict[Gram, float] = {}
            h = sum(p * math.log(p) for p in self.pq_map.values() if p > 0)
            rest = self.support - len(self.pq_map)
            if rest > 0 and self.floor > 0:
                h += float(rest) * self.floor * math.log(self.floor)
            self.h_const = h
        # A with an empty subset: every gram count is zero, so the sum
        # collapses to log(alpha) times the total target mass (exactly 1).
        self.a_sum = math.log(self.alpha)

    def prepare(self, labels: np.ndarray):
        """Pre-digest one candidate's labels into (indices, counts, n_windows)."""
        if labels.shape[0] < self.order:
            if self.dense:
                return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64), 0
            return {}, 0
        if self.dense:
            if self.order == 1:
                codes = labels.astype(np.int64, copy=False)
            else:
                codes = _window_codes(labels, self.order, self.k)
            idx, cnt = np.unique(codes, return_counts=True)
            return idx, cnt.astype(np.float64), int(codes.shape[0])
        gram_counts = sequence_gram_counts(labels, self.order, self.k)
        return gram_counts, sum(gram_counts.values())

    def _correction(self, prepared) -> float:
        if self.dense:
            idx, cnt, _ = prepared
            if idx.shape[0] == 0:
                return 0.0
            base = self.counts[idx]
            return float(np.dot(self.pq[idx], np.log((base + cnt + self.alpha) / (base + self.alpha))))
        gram_counts, _ = prepared
        alpha = self.alpha
        corr = 0.0
        for gram, count in gram_counts.items():
            pq = self.pq_map.get(gram, self.floor)
            if pq > 0:
                base = self.counts_map.get(gram, 0.0)
                corr += pq * math.log((base + count + alpha) / (base + alpha))
        return corr

    def score(self, prepared) -> float:
        n_windows = prepared[2] if self.dense else prepared[1]
        x = self.a_sum + self._correction(prepared) - math.log(self.total + n_windows + self.alpha_mass)
        return self.h_const - x

    def commit(self, prepared) -> None:
        self.a_sum += self._correction(prepared)
        if self.dense:
            idx, cnt, n_windows = prepared
            self.counts[idx] += cnt
            self.total += n_windows
        else:
            gram_counts, n_windows = prepared
            for gram, count in gram_counts.items():
                self.counts_map[gram] = self.counts_map.get(gram, 0.0) + count
            self.total += n_windows


def _pick_from_bucket(
    sequences: Sequence[LabelSequence],
    scorer: _IncrementalScorer | None,
    cand_stats: CandidateStats,
    target: Distribution,
) -> int:
    """Index (within ``sequences``) of the SCD-minimizing addition; first wins ties.

    The fast scorer's factorization can drift from the from-scratch value by
    a few ulp, enough to flip exact ties, so near-minimal candidates are
    re-scored through the exact path before the winner is fixed.
    """
    if scorer is None:
        best_index = 0
        best_score = math.inf
        for position, seq in enumerate(sequences):
            value = scd_incremental(cand_stats, seq, target).nats
            if value < best_score:
                best_score = value
                best_index = position
        return best_index

    scores = [scorer.score(scorer.prepare(seq.labels)) for seq in sequences]
    cutoff = min(scores)
    cutoff += 1e-9 * (1.0 + abs(cutoff))
    best_index = 0
    best_score = math.inf
    for position, seq in enumerate(sequences):
        if scores[position] > cutoff:
            continue
        value = scd_incremental(cand_stats, seq, target).nats
        if value < best_score:
            best_score = value
            best_index = position
    return best_index


def select_greedy_scd(
    universal: LabelCorpus, query: LabelCorpus, config: SelectionConfig
) -> SelectionResult:
    """Bucketed greedy divergence search over the length-sorted pool."""
    target = build_target_distribution(universal, query, config)
    ordered = sort_by_length(universal).sequences

    if config.budget_c is not None:
        if config.budget_c > len(ordered):
            raise ValueError(
                f"budget {config.budget_c} exceeds corpus size {len(ordered)}"
            )
        buckets = [
            ordered[start:end]
            for start, end in partition_buckets(len(ordered), config.budget_c)
        ]
        stop_when = None
    else:
        _require_durations(ordered)
        total_duration = sum(seq.duration_s for seq in ordered)
        if config.duration_budget_s > total_duration:
            raise ValueError(
                f"duration budget {config.duration_budget_s} s exceeds corpus total "
                f"{total_duration} s"
            )
        buckets = None  # formed per pass below
        stop_when = config.duration_budget_s

    scorer = _IncrementalScorer(target, config.alpha) if config.alpha > 0 else None
    cand_stats = CandidateStats(config.order, universal.alphabet_size, config.alpha)
    selected: list[LabelSequence] = []
    trace: list[float] = []
    final: ScdValue | None = None

    def commit(seq: LabelSequence, prepared=None) -> None:
        nonlocal final
        if scorer is not None:
            scorer.commit(prepared if prepared is not None else scorer.prepare(seq.labels))
        cand_stats.add(seq.labels)
        selected.append(seq)
        value = scd(target, cand_stats.distribution())
        trace.append(value.nats)
        final = value

    if stop_when is None:
        for bucket in buckets:
            chosen = _pick_from_bucket(bucket, scorer, cand_stats, target)
            commit(bucket[chosen])
    else:
        # Experimental duration mode: bucket by cumulative seconds, pick one
        # utterance per bucket, repeat on the remainder until the budget is met.
        remaining = list(ordered)
        picked_duration = 0.0
        mean_duration = total_duration / len(ordered)
        while picked_duration < stop_when and remaining:
            want = max(1, round((stop_when - picked_duration) / mean_duration))
            want = min(want, len(remaining))
            next_remaining: list[LabelSequence] = []
            for start, end in _duration_buckets(remaining, want):
                if picked_duration >= stop_when:
                    next_remaining.extend(remaining[start:end])
                    continue
                bucket = remaining[start:end]
                chosen = _pick_from_bucket(bucket, scorer, cand_stats, target)
                commit(bucket[chosen])
                picked_duration += bucket[chosen].duration_s
                next_remaining.extend(bucket[:chosen] + bucket[chosen + 1 :])
            remaining = next_remaining

    return SelectionResult(
        selected_ids=tuple(seq.id for seq in selected),
        scd_trace=tuple(trace),
        final_scd=final,
        strategy=STRATEGY_GREEDY,
        config_echo=config,
    )


def _require_durations(sequences: Iterable[LabelSequence]) -> None:
    missing = [seq.id for seq in sequences if seq.duration_s <= 0]
    if missing:
        raise ValueError(
            f"duration budget requires positive durations; missing for "
            f"{missing[:5]}{'...' if len(missing) > 5 else ''}"
        )


def _duration_buckets(
    sequences: Sequence[LabelSequence], n_buckets: int
) -> list[tuple[int, int]]:
    """Contiguous buckets spanning roughly equal cumulative duration."""
    total = sum(seq.duration_s for seq in sequences)
    span = total / n_buckets
    bounds: list[tuple[int, int]] = []
    start = 0
    cum = 0.0
    threshold = span
    for index, seq in enumerate(sequences):
        cum += seq.duration_s
        is_last = index == len(sequences) - 1
        if (cum >= threshold and len(bounds) < n_buckets - 1) or is_last:
            bounds.append((start, index + 1))
            start = index + 1
            threshold += span
    return bounds


def _trace_against_target(
    picked: Sequence[LabelSequence], target: Distribution, config: SelectionConfig
) -> tuple[tuple[float, ...], ScdValue | None]:
    cand_stats = CandidateStats(config.order, target.alphabet_size, config.alpha)
    trace: list[float] = []
    final: ScdValue | None = None
    for seq in picked:
        cand_stats.add(seq.labels)
        final = scd(target, cand_stats.distribution())
        trace.append(final.nats)
    return tuple(trace), final


def select_random(
    universal: LabelCorpus,
    config: SelectionConfig,
    query: LabelCorpus | None = None,
) -> SelectionResult:
    """Seeded shuffle of the pool, then take from the front until the budget is met.

    ``query`` is only used to report the divergence trace; the picks never
    depend on it. Without a query the trace fields are None/empty.
    """
    if len(universal) == 0:
        raise ValueError("universal corpus is empty")
    rng = random.Random(config.seed)
    shuffled = list(universal.sequences)
    rng.shuffle(shuffled)

    if config.budget_c is not None:
        if config.budget_c > len(shuffled):
            raise ValueError(
                f"budget {config.budget_c} exceeds corpus size {len(shuffled)}"
            )
        picked = shuffled[: config.budget_c]
    else:
        _require_durations(universal.sequences)
        total_duration = universal.total_duration_s
        if config.duration_budget_s > total_duration:
            raise ValueError(
                f"duration budget {config.duration_budget_s} s exceeds corpus total "
                f"{total_duration} s"
            )
        picked = []
        acc = 0.0
        for seq in shuffled:
            if acc >= config.duration_budget_s:
                break
            picked.append(seq)
            acc += seq.duration_s

    if query is not None:
        target = build_target_distribution(universal, query, config)
        trace, final = _trace_against_target(picked, target, config)
    else:
        trace, final = (), None

    return SelectionResult(
        selected_ids=tuple(seq.id for seq in picked),
        scd_trace=trace,
        final_scd=final,
        strategy=STRATEGY_RANDOM,
        config_echo=config,
    )


def contrastive_scores(
    universal: LabelCorpus, query: LabelCorpus, config: SelectionConfig
) -> dict[str, float]:
    """Per-utterance mean log-likelihood gap between query and pool models.

    score(u) = mean over u's gram occurrences of log P_query(g) - log P_pool(g).
    Utterances with no grams at this order score -inf.
    """
    if universal.alphabet_size != query.alphabet_size:
        raise ValueError("alphabet mismatch between universal and query")
    stats_u = prune(count_ngrams(universal, config.order, config.alpha), config.prune_min_count)
    stats_q = prune(count_ngrams(query, config.order, config.alpha), config.prune_min_count)
    dist_u = stats_u.distribution()
    dist_q = stats_q.distribution()

    scores: dict[str, float] = {}
    for seq in universal:
        gram_counts = sequence_gram_counts(seq.labels, config.order, universal.alphabet_size)
        n_windows = sum(gram_counts.values())
        if n_windows == 0:
            scores[seq.id] = -math.inf
            continue
        gap = 0.0
        for gram, count in gram_counts.items():
            pq = dist_q.explicit.get(gram, dist_q.floor)
            pu = dist_u.explicit.get(gram, dist_u.floor)
            if pu <= 0.0:
                raise ValueError(
                    f"pool probability is zero at gram {gram}; contrastive score "
                    "undefined (use alpha > 0)"
                )
            if pq <= 0.0:
                gap = -math.inf
                break
            gap += count * (math.log(pq) - math.log(pu))
        scores[seq.id] = gap / n_windows if math.isfinite(gap) else -math.inf
    return scores


def select_contrastive(
    universal: LabelCorpus, query: LabelCorpus, config: SelectionConfig
) -> SelectionResult:
    """Top-scoring utterances by query-vs-pool log-likelihood gap; no bucketing."""
    ordered = sort_by_length(universal).sequences
    scores = contrastive_scores(universal, query, config)

    skipped = [seq.id for seq in ordered if scores[seq.id] == -math.inf]
    if skipped:
        logger.warning(
            "contrastive: %d utterances have no grams at order %d and are excluded",
            len(skipped),
            config.order,
        )
    ranked = [seq for seq in ordered if scores[seq.id] != -math.inf]
    # Stable sort on the negated score keeps sorted-corpus position as tie-break.
    ranked.sort(key=lambda seq: -scores[seq.id])

    if config.budget_c is not None:
        if config.budget_c > len(ordered):
            raise ValueError(
                f"budget {config.budget_c} exceeds corpus size {len(ordered)}"
            )
        if config.budget_c > len(ranked):
            raise ValueError(
                f"budget {config.budget_c} exceeds the {len(ranked)} utterances with "
                f"grams at order {config.order}"
            )
        picked = ranked[: config.budget_c]
    else:
        _require_durations(universal.sequences)
        if config.duration_budget_s > universal.total_duration_s:
            raise ValueError("duration budget exceeds corpus total")
        picked = []
        acc = 0.0
        for seq in ranked:
            if acc >= config.duration_budget_s:
                break
            picked.append(seq)
            acc += seq.duration_s

    target = build_target_distribution(universal, query, config)
    trace, final = _trace_against_target(picked, target, config)
    return SelectionResult(
        selected_ids=tuple(seq.id for seq in picked),
        scd_trace=trace,
        final_scd=final,
        strategy=STRATEGY_CONTRASTIVE,
        config_echo=config,
    )


def select_oracle(
    universal: LabelCorpus,
    query: LabelCorpus,
    config: SelectionConfig,
    max_universe: int = 20,
    max_budget: int = 6,
) -> SelectionResult:
    """Exhaustive search over all C-subsets; the exact reference minimizer.

    Guarded against combinatorial blowup; count budgets only. Ties go to the
    lexicographically smallest id list.
    """
    if config.budget_c is None:
        raise ValueError("oracle supports count budgets only")
    if len(universal) > max_universe or config.budget_c > max_budget:
        raise ValueError(
            f"oracle limited to |U| <= {max_universe} and C <= {max_budget}; "
            f"got |U|={len(universal)}, C={config.budget_c}"
        )
    if config.budget_c > len(universal):
        raise ValueError(
            f"budget {config.budget_c} exceeds corpus size {len(universal)}"
        )
    target = build_target_distribution(universal, query, config)
    ordered = sort_by_length(universal).sequences

    best_ids: tuple[str, ...] | None = None
    best_value: ScdValue | None = None
    for combo in itertools.combinations(ordered, config.budget_c):
        stats = CandidateStats(config.order, universal.alphabet_size, config.alpha)
        for seq in combo:
            stats.add(seq.labels)
        value = scd(target, stats.distribution())
        ids = tuple(sorted(seq.id for seq in combo))
        if (
            best_value is None
            or value.nats < best_value.nats
            or (value.nats == best_value.nats and ids < best_ids)
        ):
            best_value = value
            best_ids = ids

    by_id = {seq.id: seq for seq in ordered}
    trace, final = _trace_against_target([by_id[i] for i in best_ids], target, config)
    return SelectionResult(
        selected_ids=best_ids,
        scd_trace=trace,
        final_scd=final,
        strategy=STRATEGY_ORACLE,
        config_echo=config,
    )


def generate_synthetic(
    source_a: MarkovSource,
    source_b: MarkovSource,
    n_utts: int,
    mix_b: float,
    len_range: tuple[int, int],
    seed: int,
) -> tuple[LabelCorpus, dict[str, str]]:
    """Mixture corpus: each utterance drawn from B with probability ``mix_b``, else A.

    Returns the corpus and a separate id -> origin ("A" | "B") map; the
    origin never appears inside the corpus itself, so selection cannot see it.
    """
    if source_a.alphabet_size != source_b.alphabet_size:
        raise ValueError("sources must share an alphabet")
    if not 0.0 <= mix_b <= 1.0:
        raise ValueError(f"mix_b must be in [0, 1], got {mix_b}")
    lo, hi = len_range
    if not 1 <= lo <= hi:
        raise ValueError(f"need 1 <= min <= max in len_range, got {len_range}")

    rng = np.random.default_rng(seed)
    sequences: list[LabelSequence] = []
    origins: dict[str, str] = {}
    width = max(5, len(str(max(n_utts - 1, 0))))
    for i in range(n_utts):
        from_b = rng.random() < mix_b
        source = source_b if from_b else source_a
        length = int(rng.integers(lo, hi + 1))
        labels = source.sample_sequence(length, rng)
        utt_id = f"u{i:0{width}d}"
        sequences.append(LabelSequence(id=utt_id, duration_s=0.0, labels=labels))
        origins[utt_id] = "B" if from_b else "A"

    corpus = LabelCorpus(
        alphabet_size=source_a.alphabet_size,
        sequences=tuple(sequences),
        source_tag=f"synthetic:mix_b={mix_b}:seed={seed}",
    )
    return corpus, origins


def format_report(result: SelectionResult, extra_header: dict[str, str] | None = None) -> str:
    """Selection report: ``#`` header lines, then one ``rank\\tid\\tscd`` row per pick."""
    lines = [
        f"#strategy={result.strategy}",
        f"#config={result.config_echo.to_json()}",
        f"#final_scd_nats={result.final_scd.nats!r}" if result.final_scd is not None else "#final_scd_nats=",
        f"#num_selected={len(result.selected_ids)}",
    ]
    if extra_header:
        for key, value in extra_header.items():
            lines.append(f"#{key}={value}")
    for rank, utt_id in enumerate(result.selected_ids, start=1):
        scd_text = repr(result.scd_trace[rank - 1]) if result.scd_trace else ""
        lines.append(f"{rank}\t{utt_id}\t{scd_text}")
    return "\n".join(lines) + "\n"


def save_report(
    result: SelectionResult,
    path: str | Path,
    extra_header: dict[str, str] | None = None,
) -> None:
    Path(path).write_text(format_report(result, extra_header), encoding="utf-8", newline="\n")
