"""Self-contained scoring kernels: WER, CER, corpus BLEU, chrF++, METEOR-exact.

No external scorer dependency; every metric is implemented here so that the
exact tokenization and aggregation rules are documented and reproducible:

- WER tokenizes on whitespace only (ASR convention); CER operates on code
  points with whitespace counting as a character. Corpus WER/CER are
  micro-averages: total edit distance over total reference length.
- BLEU, chrF++ word n-grams, and METEOR share one script-agnostic word
  tokenizer: split on whitespace, then split every punctuation/symbol code
  point off as a standalone token.
- Corpus BLEU uses no smoothing (any zero precision gives 0); the
  sentence-level variant adds 1 to numerator and denominator for orders >= 2
  so sentence scores stay finite.
- chrF++ char n-grams are taken over the text with all whitespace removed
  (n-grams cross word boundaries); the corpus score sums match/total counts
  per order and averages per-order F-scores. Orders with no n-grams on
  either side anywhere in the corpus carry no information and are excluded
  from the mean.
- METEOR here is exact surface matching only (no stemming or synonyms);
  reports label it "meteor-exact" to flag non-comparability with
  resource-based METEOR implementations.

Corpus aggregation merges per-item count structures with plain addition, so
items may be scored in any order or in parallel and reduced afterwards.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import CascadekitError
from .textcore import is_punct_or_symbol, normalize


class EmptyReference(CascadekitError):
    """Reference is empty after normalization/tokenization."""


class LengthMismatch(CascadekitError):
    """Hypothesis and reference corpora have different lengths."""


class EmptyInput(CascadekitError):
    """An operation requiring non-empty input received an empty one."""


@dataclass(frozen=True)
class MetricConfig:
    bleu_max_order: int = 4
    chrf_char_order: int = 6
    chrf_word_order: int = 2
    chrf_beta: float = 2.0
    meteor_recall_weight: float = 9.0
    meteor_precision_weight: float = 1.0
    meteor_penalty_gamma: float = 0.5
    meteor_penalty_exponent: float = 3.0

    def __post_init__(self):
        if min(self.bleu_max_order, self.chrf_char_order, self.chrf_word_order) < 1:
            raise ValueError("all n-gram orders must be >= 1")
        if self.chrf_beta <= 0:
            raise ValueError("chrf_beta must be > 0")


DEFAULT_CONFIG = MetricConfig()


@dataclass(frozen=True)
class CorpusScore:
    """A corpus-level score plus the counts it was computed from."""

    metric: str
    value: float
    n_items: int
    details: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------


def whitespace_tokens(text: str) -> list[str]:
    return normalize(text).split()


def word_tokens(text: str) -> list[str]:
    """Whitespace split with punctuation/symbol code points as own tokens."""
    tokens: list[str] = []
    for chunk in normalize(text).split(" "):
        buf = []
        for ch in chunk:
            if is_punct_or_symbol(ch):
                if buf:
                    tokens.append("".join(buf))
                    buf = []
                tokens.append(ch)
            else:
                buf.append(ch)
        if buf:
            tokens.append("".join(buf))
    return [t for t in tokens if t]


# ---------------------------------------------------------------------------
# Edit distance (WER / CER)
# ---------------------------------------------------------------------------


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Plain unit-cost edit distance, two-row DP."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[-1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def wer(hyp: str, ref: str) -> float:
    """Word-level edit distance over reference word count, as a percentage."""
    ref_tokens = whitespace_tokens(ref)
    if not ref_tokens:
        raise EmptyReference("reference has no tokens after normalization")
    return 100.0 * levenshtein(whitespace_tokens(hyp), ref_tokens) / len(ref_tokens)


def cer(hyp: str, ref: str) -> float:
    """Code-point edit distance over reference length, as a percentage.

    Whitespace counts as a character.
    """
    ref_norm = normalize(ref)
    if not ref_norm:
        raise EmptyReference("reference is empty after normalization")
    return 100.0 * levenshtein(normalize(hyp), ref_norm) / len(ref_norm)


def _corpus_rate(
    metric: str, hyps: Sequence[str], refs: Sequence[str], jobs: int = 1
) -> CorpusScore:
    if len(hyps) != len(refs):
        raise LengthMismatch(f"{len(hyps)} hypotheses vs {len(refs)} references")
    if not hyps:
        raise EmptyInput("empty corpus")

    def tokenize(text: str):
        return whitespace_tokens(text) if metric == "wer" else list(normalize(text))

    def item_stats(pair):
        i, (hyp, ref) = pair
        ref_seq = tokenize(ref)
        if not ref_seq:
            raise EmptyReference(f"reference {i} is empty")
        return levenshtein(tokenize(hyp), ref_seq), len(ref_seq)

    pairs = list(enumerate(zip(hyps, refs)))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            stats = list(pool.map(item_stats, pairs))
    else:
        stats = [item_stats(p) for p in pairs]
    dist = sum(d for d, _ in stats)
    total = sum(n for _, n in stats)
    return CorpusScore(
        metric=metric,
        value=100.0 * dist / total,
        n_items=len(hyps),
        details={"edit_distance": dist, "ref_length": total},
    )


def corpus_wer(hyps: Sequence[str], refs: Sequence[str], jobs: int = 1) -> CorpusScore:
    """Micro-averaged WER: total word edits over total reference words."""
    return _corpus_rate("wer", hyps, refs, jobs)


def corpus_cer(hyps: Sequence[str], refs: Sequence[str], jobs: int = 1) -> CorpusScore:
    """Micro-averaged CER: total character edits over total reference length."""
    return _corpus_rate("cer", hyps, refs, jobs)


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------


def _ngram_counts(tokens: Sequence[str], order: int) -> Counter:
    return Counter(
        tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1)
    )


@dataclass
class BleuStats:
    """Sufficient statistics for corpus BLEU; merge with ``+``."""

    correct: list[int]
    total: list[int]
    hyp_len: int = 0
    ref_len: int = 0

    @classmethod
    def zero(cls, max_order: int) -> "BleuStats":
        return cls([0] * max_order, [0] * max_order)

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(
            [a + b for a, b in zip(self.correct, other.correct)],
            [a + b for a, b in zip(self.total, other.total)],
            self.hyp_len + other.hyp_len,
            self.ref_len + other.ref_len,
        )


def _bleu_item_stats(
    hyp: str, refs: Sequence[str], max_order: int
) -> BleuStats:
    hyp_tokens = word_tokens(hyp)
    ref_token_lists = [word_tokens(r) for r in refs]
    stats = BleuStats.zero(max_order)
    stats.hyp_len = len(hyp_tokens)
    # Closest reference length; ties favor the shorter reference.
    stats.ref_len = min(
        (len(r) for r in ref_token_lists),
        key=lambda n: (abs(n - len(hyp_tokens)), n),
    )
    for n in range(1, max_order + 1):
        hyp_counts = _ngram_counts(hyp_tokens, n)
        if not hyp_counts:
            continue
        max_ref_counts: Counter = Counter()
        for ref_tokens in ref_token_lists:
            for gram, count in _ngram_counts(ref_tokens, n).items():
                if count > max_ref_counts[gram]:
                    max_ref_counts[gram] = count
        stats.total[n - 1] = sum(hyp_counts.values())
        stats.correct[n - 1] = sum(
            min(count, max_ref_counts[gram]) for gram, count in hyp_counts.items()
        )
    return stats


def _bleu_from_stats(stats: BleuStats, max_order: int) -> tuple[float, dict]:
    precisions = [
        (c / t if t > 0 else 0.0) for c, t in zip(stats.correct, stats.total)
    ]
    if stats.hyp_len == 0:
        bp = 0.0
    elif stats.hyp_len < stats.ref_len:
        bp = math.exp(1.0 - stats.ref_len / stats.hyp_len)
    else:
        bp = 1.0
    details = {
        "precisions": [100.0 * p for p in precisions],
        "brevity_penalty": bp,
        "hyp_len": stats.hyp_len,
        "ref_len": stats.ref_len,
        "correct": list(stats.correct),
        "total": list(stats.total),
    }
    if any(p == 0.0 for p in precisions) or bp == 0.0:
        return 0.0, details
    score = bp * math.exp(sum(math.log(p) for p in precisions) / max_order)
    return 100.0 * score, details


def _check_corpus(hyps: Sequence[str], refs: Sequence[Sequence[str]]):
    if len(hyps) != len(refs):
        raise LengthMismatch(f"{len(hyps)} hypotheses vs {len(refs)} reference sets")
    if not hyps:
        raise EmptyInput("empty corpus")
    for i, refset in enumerate(refs):
        if not refset:
            raise EmptyReference(f"reference set {i} is empty")


def bleu(
    hyps: Sequence[str],
    refs: Sequence[Sequence[str]],
    config: MetricConfig = DEFAULT_CONFIG,
    jobs: int = 1,
) -> CorpusScore:
    """Corpus BLEU: clipped n-gram precisions, brevity penalty, no smoothing."""
    _check_corpus(hyps, refs)
    order = config.bleu_max_order

    def stats_for(pair):
        return _bleu_item_stats(pair[0], pair[1], order)

    pairs = list(zip(hyps, refs))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_item = list(pool.map(stats_for, pairs))
    else:
        per_item = [stats_for(p) for p in pairs]
    total = BleuStats.zero(order)
    for s in per_item:
        total = total + s
    value, details = _bleu_from_stats(total, order)
    return CorpusScore("bleu", value, len(hyps), details)


def sentence_bleu(
    hyp: str, refs: Sequence[str], config: MetricConfig = DEFAULT_CONFIG
) -> float:
    """Sentence BLEU with +1 smoothing on numerator/denominator for n >= 2."""
    if not refs:
        raise EmptyReference("no references")
    order = config.bleu_max_order
    stats = _bleu_item_stats(hyp, refs, order)
    precisions = []
    for n in range(1, order + 1):
        c, t = stats.correct[n - 1], stats.total[n - 1]
        if n >= 2:
            c, t = c + 1, t + 1
        precisions.append(c / t if t > 0 else 0.0)
    if stats.hyp_len == 0:
        return 0.0
    bp = 1.0 if stats.hyp_len >= stats.ref_len else math.exp(
        1.0 - stats.ref_len / stats.hyp_len
    )
    if any(p == 0.0 for p in precisions):
        return 0.0
    return 100.0 * bp * math.exp(sum(math.log(p) for p in precisions) / order)


# ---------------------------------------------------------------------------
# chrF++
# ---------------------------------------------------------------------------


@dataclass
class ChrfStats:
    """Per-order (match, hyp_total, ref_total) triples; merge with ``+``.

    Index layout: char orders first, then word orders.
    """

    matches: list[int]
    hyp_totals: list[int]
    ref_totals: list[int]

    @classmethod
    def zero(cls, n_orders: int) -> "ChrfStats":
        return cls([0] * n_orders, [0] * n_orders, [0] * n_orders)

    def __add__(self, other: "ChrfStats") -> "ChrfStats":
        return ChrfStats(
            [a + b for a, b in zip(self.matches, other.matches)],
            [a + b for a, b in zip(self.hyp_totals, other.hyp_totals)],
            [a + b for a, b in zip(self.ref_totals, other.ref_totals)],
        )


def _chrf_pair_stats(hyp: str, ref: str, config: MetricConfig) -> ChrfStats:
    hyp_chars = normalize(hyp).replace(" ", "")
    ref_chars = normalize(ref).replace(" ", "")
    hyp_words = word_tokens(hyp)
    ref_words = word_tokens(ref)
    n_orders = config.chrf_char_order + config.chrf_word_order
    stats = ChrfStats.zero(n_orders)
    for i in range(n_orders):
        if i < config.chrf_char_order:
            n = i + 1
            hyp_counts = _ngram_counts(hyp_chars, n)
            ref_counts = _ngram_counts(ref_chars, n)
        else:
            n = i - config.chrf_char_order + 1
            hyp_counts = _ngram_counts(hyp_words, n)
            ref_counts = _ngram_counts(ref_words, n)
        stats.hyp_totals[i] = sum(hyp_counts.values())
        stats.ref_totals[i] = sum(ref_counts.values())
        stats.matches[i] = sum((hyp_counts & ref_counts).values())
    return stats


def _chrf_score(stats: ChrfStats, beta: float) -> tuple[float, dict]:
    """Mean per-order F_beta over orders that carry information.

    Orders with zero n-grams on both sides are excluded; if one side alone
    is empty at an order, that order scores 0.
    """
    beta_sq = beta * beta
    f_scores = []
    for match, hyp_total, ref_total in zip(
        stats.matches, stats.hyp_totals, stats.ref_totals
    ):
        if hyp_total == 0 and ref_total == 0:
            continue
        precision = match / hyp_total if hyp_total > 0 else 0.0
        recall = match / ref_total if ref_total > 0 else 0.0
        denom = beta_sq * precision + recall
        f_scores.append(
            (1 + beta_sq) * precision * recall / denom if denom > 0 else 0.0
        )
    value = 100.0 * sum(f_scores) / len(f_scores) if f_scores else 0.0
    return value, {
        "matches": list(stats.matches),
        "hyp_totals": list(stats.hyp_totals),
        "ref_totals": list(stats.ref_totals),
        "orders_used": len(f_scores),
    }


def _chrf_item_stats(hyp: str, refs: Sequence[str], config: MetricConfig) -> ChrfStats:
    # Multi-reference rule: keep the reference scoring highest at item level
    # (first wins ties) and contribute its counts to the corpus totals.
    best = None
    best_f = -1.0
    for ref in refs:
        stats = _chrf_pair_stats(hyp, ref, config)
        f, _ = _chrf_score(stats, config.chrf_beta)
        if f > best_f:
            best, best_f = stats, f
    return best


def chrf_pp(
    hyps: Sequence[str],
    refs: Sequence[Sequence[str]],
    config: MetricConfig = DEFAULT_CONFIG,
    jobs: int = 1,
) -> CorpusScore:
    """Corpus chrF++: char orders 1..6 plus word orders 1..2, F with beta=2."""
    _check_corpus(hyps, refs)

    def stats_for(pair):
        return _chrf_item_stats(pair[0], pair[1], config)

    pairs = list(zip(hyps, refs))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_item = list(pool.map(stats_for, pairs))
    else:
        per_item = [stats_for(p) for p in pairs]
    total = ChrfStats.zero(config.chrf_char_order + config.chrf_word_order)
    for s in per_item:
        total = total + s
    value, details = _chrf_score(total, config.chrf_beta)
    return CorpusScore("chrf_pp", value, len(hyps), details)


# ---------------------------------------------------------------------------
# METEOR (exact matching)
# ---------------------------------------------------------------------------


def _greedy_align(hyp_tokens: Sequence[str], ref_tokens: Sequence[str]):
    """Greedy left-to-right exact alignment; returns (hyp_idx, ref_idx) pairs."""
    used = [False] * len(ref_tokens)
    pairs = []
    for i, tok in enumerate(hyp_tokens):
        for j, ref_tok in enumerate(ref_tokens):
            if not used[j] and ref_tok == tok:
                used[j] = True
                pairs.append((i, j))
                break
    return pairs


def _count_chunks(pairs: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for i, j in pairs:
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor_exact(
    hyp: str, ref: str, config: MetricConfig = DEFAULT_CONFIG
) -> float:
    """Exact-match METEOR: recall-weighted F times a fragmentation penalty.

    Tokens are lowercased before matching (a no-op for unicameral scripts).
    """
    hyp_tokens = [t.lower() for t in word_tokens(hyp)]
    ref_tokens = [t.lower() for t in word_tokens(ref)]
    if not hyp_tokens or not ref_tokens:
        raise EmptyInput("meteor requires non-empty hypothesis and reference")
    pairs = _greedy_align(hyp_tokens, ref_tokens)
    matches = len(pairs)
    if matches == 0:
        return 0.0
    precision = matches / len(hyp_tokens)
    recall = matches / len(ref_tokens)
    w_r, w_p = config.meteor_recall_weight, config.meteor_precision_weight
    f_mean = (w_r + w_p) * precision * recall / (w_r * precision + w_p * recall)
    chunks = _count_chunks(pairs)
    penalty = config.meteor_penalty_gamma * (
        (chunks / matches) ** config.meteor_penalty_exponent
    )
    return 100.0 * f_mean * (1.0 - penalty)


def corpus_meteor(
    hyps: Sequence[str],
    refs: Sequence[Sequence[str]],
    config: MetricConfig = DEFAULT_CONFIG,
    jobs: int = 1,
) -> CorpusScore:
    """Mean per-item meteor-exact, best reference per item.

    Empty hypotheses score 0 for their item instead of raising, so a
    pipeline that produced nothing for an item can still be scored.
    """
    _check_corpus(hyps, refs)

    def item_score(pair):
        hyp, refset = pair
        scores = []
        for ref in refset:
            if not word_tokens(hyp):
                scores.append(0.0)
            else:
                scores.append(meteor_exact(hyp, ref, config))
        return max(scores)

    pairs = list(zip(hyps, refs))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(item_score, pairs))
    else:
        scores = [item_score(p) for p in pairs]
    return CorpusScore(
        "meteor-exact", sum(scores) / len(scores), len(hyps), {"per_item": scores}
    )


METRIC_NAMES = ("wer", "cer", "bleu", "chrf", "meteor")


def score_corpus(
    metric: str,
    hyps: Sequence[str],
    refs: Sequence[Sequence[str]],
    config: MetricConfig = DEFAULT_CONFIG,
    jobs: int = 1,
) -> CorpusScore:
    """Dispatch a corpus scoring run by metric name.

    WER/CER use the first reference of each set.
    """
    if metric == "wer":
        return corpus_wer(hyps, [r[0] for r in refs], jobs)
    if metric == "cer":
        return corpus_cer(hyps, [r[0] for r in refs], jobs)
    if metric == "bleu":
        return bleu(hyps, refs, config, jobs)
    if metric in ("chrf", "chrf_pp", "chrf++"):
        return chrf_pp(hyps, refs, config, jobs)
    if metric in ("meteor", "meteor-exact"):
        return corpus_meteor(hyps, refs, config, jobs)
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRIC_NAMES}")
