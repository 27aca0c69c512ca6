"""Independent reference implementations used to cross-check the library.

Everything here is written for clarity over speed: plain loops, no shared
code with the package under test.
"""

import math


def logodds_oracle(counts, alpha0):
    """One-vs-rest weighted log-odds, scalar loops only.

    counts: {group: {term: int}}.  Returns {group: {term: (delta, var, z)}}.
    """
    pooled = {}
    for group in counts:
        for term, c in counts[group].items():
            pooled[term] = pooled.get(term, 0) + c
    pooled_total = sum(pooled.values())
    totals = {g: sum(counts[g].values()) for g in counts}
    out = {}
    for group in counts:
        n_i = totals[group]
        n_j = pooled_total - n_i
        rows = {}
        for term in pooled:
            a_w = alpha0 * pooled[term] / pooled_total
            y_i = counts[group].get(term, 0)
            y_j = pooled[term] - y_i
            left = (y_i + a_w) / (n_i + alpha0 - y_i - a_w)
            right = (y_j + a_w) / (n_j + alpha0 - y_j - a_w)
            delta = math.log(left) - math.log(right)
            var = 1.0 / (y_i + a_w) + 1.0 / (y_j + a_w)
            rows[term] = (delta, var, delta / math.sqrt(var))
        out[group] = rows
    return out


def trim_oracle(text, span):
    start, end = span
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return (start, end) if start < end else None


def span_match_oracle(items, mode):
    """Reference span matcher.

    items: iterable of (text, gold_spans, pred_spans).  Exact mode pairs
    identical trimmed spans, each gold used once.  Overlap mode greedily
    pairs by best Jaccard >= 0.5, ties broken by gold order then pred
    order.  Returns (tp, n_pred, n_gold) summed over items.
    """
    tp = n_pred = n_gold = 0
    for text, gold, pred in items:
        gold_t = [s for s in (trim_oracle(text, g) for g in gold) if s]
        pred_t = [s for s in (trim_oracle(text, p) for p in pred) if s]
        n_gold += len(gold_t)
        n_pred += len(pred_t)
        if mode == "exact":
            used = [False] * len(gold_t)
            for p in pred_t:
                for k, g in enumerate(gold_t):
                    if not used[k] and p == g:
                        used[k] = True
                        tp += 1
                        break
        else:
            pairs = []
            for gi, g in enumerate(gold_t):
                for pi, p in enumerate(pred_t):
                    inter = max(0, min(g[1], p[1]) - max(g[0], p[0]))
                    union = (g[1] - g[0]) + (p[1] - p[0]) - inter
                    j = inter / union if union else 0.0
                    if j >= 0.5:
                        pairs.append((-j, gi, pi))
            pairs.sort()
            used_g, used_p = set(), set()
            for _negj, gi, pi in pairs:
                if gi not in used_g and pi not in used_p:
                    used_g.add(gi)
                    used_p.add(pi)
                    tp += 1
    return tp, n_pred, n_gold


def prf_oracle(tp, n_pred, n_gold):
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def kde_two_kernel_oracle(x, a, b, h, n):
    """Closed-form unnormalized Gaussian KDE value for a two-point sample."""
    za = (x - a) / h
    zb = (x - b) / h
    return (math.exp(-0.5 * za * za) + math.exp(-0.5 * zb * zb)) / (
        n * h * math.sqrt(2 * math.pi))


def kappa_oracle(pairs):
    """Cohen's kappa over (label_a, label_b) booleans, float arithmetic."""
    n = len(pairs)
    agree = sum(1 for a, b in pairs if a == b) / n
    pa = sum(1 for a, _ in pairs if a) / n
    pb = sum(1 for _, b in pairs if b) / n
    pe = pa * pb + (1 - pa) * (1 - pb)
    if pe == 1.0:
        return 1.0 if agree == 1.0 else 0.0
    return (agree - pe) / (1 - pe)


def welch_oracle_terms(a, b):
    """Welch t and df from first principles (no scipy)."""
    na, nb = len(a), len(b)
    ma = sum(a) / na
    mb = sum(b) / nb
    va = sum((x - ma) ** 2 for x in a) / (na - 1)
    vb = sum((x - mb) ** 2 for x in b) / (nb - 1)
    se2 = va / na + vb / nb
    t = (ma - mb) / math.sqrt(se2)
    df = se2 ** 2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return t, df
