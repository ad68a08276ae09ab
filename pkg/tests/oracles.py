"""Independent brute-force reference implementations.

Everything here is written from the metric definitions directly — full
matrix edit distance, n-gram enumeration by list scanning, exact rational
arithmetic via Fraction — sharing no counting or aggregation code with the
package, so the two sides can be pinned against each other.
"""

from __future__ import annotations

import math
import unicodedata
from fractions import Fraction


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def edit_distance(a, b) -> int:
    """Full-matrix DP."""
    m, n = len(a), len(b)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        table[i][0] = i
    for j in range(n + 1):
        table[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            table[i][j] = min(
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
                table[i - 1][j - 1] + (0 if a[i - 1] == b[j - 1] else 1),
            )
    return table[m][n]


def wer(hyp: str, ref: str) -> float:
    ref_tokens = nfc(ref).split()
    assert ref_tokens
    return float(
        100 * Fraction(edit_distance(nfc(hyp).split(), ref_tokens), len(ref_tokens))
    )


def cer(hyp: str, ref: str) -> float:
    collapse = lambda s: " ".join(nfc(s).split())
    ref_chars = list(collapse(ref))
    assert ref_chars
    return float(
        100 * Fraction(edit_distance(list(collapse(hyp)), ref_chars), len(ref_chars))
    )


def corpus_rate(hyps, refs, unit: str) -> float:
    """Micro-average: summed edits over summed reference lengths."""
    dist = 0
    total = 0
    for hyp, ref in zip(hyps, refs):
        if unit == "word":
            h, r = nfc(hyp).split(), nfc(ref).split()
        else:
            h, r = list(" ".join(nfc(hyp).split())), list(" ".join(nfc(ref).split()))
        dist += edit_distance(h, r)
        total += len(r)
    return float(100 * Fraction(dist, total))


def word_tokens(text: str) -> list[str]:
    tokens: list[str] = []
    current = ""
    for ch in nfc(text):
        if ch.isspace():
            if current:
                tokens.append(current)
                current = ""
        elif unicodedata.category(ch)[0] in ("P", "S"):
            if current:
                tokens.append(current)
                current = ""
            tokens.append(ch)
        else:
            current += ch
    if current:
        tokens.append(current)
    return tokens


def ngram_list(seq, n: int) -> list[tuple]:
    return [tuple(seq[i : i + n]) for i in range(len(seq) - n + 1)]


def clipped_matches(hyp_ngrams: list[tuple], ref_ngram_lists: list[list[tuple]]) -> int:
    matched = 0
    for gram in set(hyp_ngrams):
        best = max(ref_list.count(gram) for ref_list in ref_ngram_lists)
        matched += min(hyp_ngrams.count(gram), best)
    return matched


def bleu(hyps, refs, max_order: int = 4) -> float:
    correct = [0] * max_order
    total = [0] * max_order
    hyp_len = 0
    ref_len = 0
    for hyp, refset in zip(hyps, refs):
        hyp_toks = word_tokens(hyp)
        ref_tok_lists = [word_tokens(r) for r in refset]
        hyp_len += len(hyp_toks)
        ref_len += sorted(
            (len(r) for r in ref_tok_lists),
            key=lambda n: (abs(n - len(hyp_toks)), n),
        )[0]
        for n in range(1, max_order + 1):
            hyp_ngrams = ngram_list(hyp_toks, n)
            total[n - 1] += len(hyp_ngrams)
            correct[n - 1] += clipped_matches(
                hyp_ngrams, [ngram_list(r, n) for r in ref_tok_lists]
            )
    if hyp_len == 0 or any(t == 0 or c == 0 for c, t in zip(correct, total)):
        return 0.0
    precisions = [Fraction(c, t) for c, t in zip(correct, total)]
    bp = 1.0 if hyp_len >= ref_len else math.exp(1 - Fraction(ref_len, hyp_len))
    log_sum = sum(math.log(p) for p in precisions)
    return 100.0 * bp * math.exp(log_sum / max_order)


def _chrf_f_scores(matches, hyp_totals, ref_totals, beta_sq: Fraction):
    f_scores = []
    for match, ht, rt in zip(matches, hyp_totals, ref_totals):
        if ht == 0 and rt == 0:
            continue
        p = Fraction(match, ht) if ht else Fraction(0)
        r = Fraction(match, rt) if rt else Fraction(0)
        denom = beta_sq * p + r
        f_scores.append((1 + beta_sq) * p * r / denom if denom else Fraction(0))
    return f_scores


def chrf_pp(hyps, refs, char_order: int = 6, word_order: int = 2, beta: int = 2) -> float:
    beta_sq = Fraction(beta * beta)
    n_orders = char_order + word_order
    matches = [0] * n_orders
    hyp_totals = [0] * n_orders
    ref_totals = [0] * n_orders
    for hyp, refset in zip(hyps, refs):
        best = None
        best_f = None
        for ref in refset:
            hyp_chars = "".join(nfc(hyp).split())
            ref_chars = "".join(nfc(ref).split())
            hyp_words = word_tokens(hyp)
            ref_words = word_tokens(ref)
            m = [0] * n_orders
            ht = [0] * n_orders
            rt = [0] * n_orders
            for i in range(n_orders):
                if i < char_order:
                    hyp_ngrams = ngram_list(list(hyp_chars), i + 1)
                    ref_ngrams = ngram_list(list(ref_chars), i + 1)
                else:
                    hyp_ngrams = ngram_list(hyp_words, i - char_order + 1)
                    ref_ngrams = ngram_list(ref_words, i - char_order + 1)
                ht[i] = len(hyp_ngrams)
                rt[i] = len(ref_ngrams)
                m[i] = clipped_matches(hyp_ngrams, [ref_ngrams])
            f_scores = _chrf_f_scores(m, ht, rt, beta_sq)
            item_f = (
                sum(f_scores) / len(f_scores) if f_scores else Fraction(0)
            )
            if best_f is None or item_f > best_f:
                best, best_f = (m, ht, rt), item_f
        for i in range(n_orders):
            matches[i] += best[0][i]
            hyp_totals[i] += best[1][i]
            ref_totals[i] += best[2][i]
    f_scores = _chrf_f_scores(matches, hyp_totals, ref_totals, beta_sq)
    if not f_scores:
        return 0.0
    return float(100 * sum(f_scores) / len(f_scores))


def meteor_exact(hyp: str, ref: str) -> float:
    hyp_toks = [t.lower() for t in word_tokens(hyp)]
    ref_toks = [t.lower() for t in word_tokens(ref)]
    assert hyp_toks and ref_toks
    taken = set()
    pairs = []
    for i, tok in enumerate(hyp_toks):
        for j, ref_tok in enumerate(ref_toks):
            if j not in taken and ref_tok == tok:
                taken.add(j)
                pairs.append((i, j))
                break
    matches = len(pairs)
    if matches == 0:
        return 0.0
    precision = Fraction(matches, len(hyp_toks))
    recall = Fraction(matches, len(ref_toks))
    f_mean = 10 * precision * recall / (recall + 9 * precision)
    chunks = 1
    for (i1, j1), (i2, j2) in zip(pairs, pairs[1:]):
        if i2 != i1 + 1 or j2 != j1 + 1:
            chunks += 1
    penalty = Fraction(1, 2) * Fraction(chunks, matches) ** 3
    return float(100 * f_mean * (1 - penalty))


def krippendorff_alpha(item_values: list[list[int]], metric: str = "ordinal") -> float:
    """Direct pairwise D_o/D_e summation in exact arithmetic.

    ``item_values`` holds the ratings each unit received; units with fewer
    than two values are unpairable and ignored.
    """
    units = [values for values in item_values if len(values) >= 2]
    assert units, "no pairable unit"
    pooled: list[int] = [v for values in units for v in values]
    n = len(pooled)
    freq: dict[int, int] = {}
    for v in pooled:
        freq[v] = freq.get(v, 0) + 1

    def delta_sq(c: int, k: int) -> Fraction:
        if c == k:
            return Fraction(0)
        if metric == "nominal":
            return Fraction(1)
        lo, hi = min(c, k), max(c, k)
        span = sum(freq.get(g, 0) for g in range(lo, hi + 1))
        return (Fraction(span) - Fraction(freq[c] + freq[k], 2)) ** 2

    d_obs = Fraction(0)
    for values in units:
        m = len(values)
        for i in range(m):
            for j in range(m):
                if i != j:
                    d_obs += delta_sq(values[i], values[j]) / (m - 1)
    d_obs /= n

    d_exp = Fraction(0)
    for i in range(n):
        for j in range(n):
            if i != j:
                d_exp += delta_sq(pooled[i], pooled[j])
    d_exp /= n * (n - 1)
    assert d_exp != 0, "degenerate: no expected disagreement"
    return float(1 - d_obs / d_exp)
