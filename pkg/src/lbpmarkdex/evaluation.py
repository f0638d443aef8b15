"""Precision/recall scoring of retrieval runs, with per-class mean curves.

Given a set R of images relevant to a query and an answer list A, the two
classic ratios are

    recall    = |A intersect R| / |R|
    precision = |A intersect R| / |A|

Both are computed as exact rationals and only converted to floats at the
edge. Curves evaluate the top-k prefixes of a ranking for a list of
cutoffs; class means average per-query values at each fixed cutoff.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .descriptor import descriptor_distance
from .errors import BadCutoff, EmptyAnswerSet, EmptyRelevantSet


def _answer_id(item) -> str:
    # Accept plain ids or ranked-result objects carrying an image_id.
    return getattr(item, "image_id", item)


@dataclass(frozen=True)
class EvalSets:
    """Relevant set R and ordered answer list A for one query."""

    relevant: frozenset[str]
    answers: tuple[str, ...]

    def __init__(self, relevant, answers) -> None:
        object.__setattr__(self, "relevant", frozenset(relevant))
        object.__setattr__(
            self, "answers", tuple(_answer_id(item) for item in answers)
        )

    @property
    def relevant_answers(self) -> frozenset[str]:
        return self.relevant & frozenset(self.answers)


def precision_recall(sets: EvalSets) -> tuple[float, float]:
    """(precision, recall) of one answer list against one relevant set."""
    if not sets.relevant:
        raise EmptyRelevantSet("relevant set R is empty; recall is undefined")
    if not sets.answers:
        raise EmptyAnswerSet("answer list A is empty; precision is undefined")
    hits = len(sets.relevant_answers)
    precision = Fraction(hits, len(set(sets.answers)))
    recall = Fraction(hits, len(sets.relevant))
    return float(precision), float(recall)


def pr_curve(
    ranked: Sequence, relevant: Iterable[str], cutoffs: Sequence[int]
) -> list[tuple[int, float, float]]:
    """Evaluate (precision, recall) at each top-k prefix of a ranking.

    Cutoffs must be ascending and within [1, len(ranked)]; recall is
    non-decreasing along the returned list.
    """
    ids = [_answer_id(item) for item in ranked]
    rel = frozenset(relevant)
    previous = 0
    for k in cutoffs:
        if k < 1 or k > len(ids):
            raise BadCutoff(f"cutoff {k} outside [1, {len(ids)}]")
        if k <= previous:
            raise BadCutoff(f"cutoffs must be strictly ascending, got {k} after {previous}")
        previous = k
    return [
        (k, *precision_recall(EvalSets(rel, ids[:k])))
        for k in cutoffs
    ]


def class_mean_pr(
    descriptors: Mapping[str, Sequence[int]],
    labels: Mapping[str, str],
    cutoffs: Sequence[int],
) -> list[tuple[str, int, float, float]]:
    """Leave-one-out retrieval over a labeled corpus, averaged per class.

    Every labeled image queries all the other labeled images (itself
    excluded from both candidates and relevant set); relevant means same
    class label. Returns (class, k, mean_precision, mean_recall) rows,
    classes and cutoffs in ascending order. Queries whose class has no
    other member are skipped; a class with no evaluable queries is omitted.
    """
    ids = sorted(set(descriptors) & set(labels))
    vectors = {i: np.asarray(descriptors[i], dtype=np.int64) for i in ids}
    per_class: dict[str, list[list[tuple[Fraction, Fraction]]]] = {}
    max_k = max(cutoffs, default=0)
    for k in cutoffs:
        if k < 1 or k > len(ids) - 1:
            raise BadCutoff(f"cutoff {k} outside [1, {len(ids) - 1}]")
    for query_id in ids:
        relevant = {i for i in ids if i != query_id and labels[i] == labels[query_id]}
        if not relevant:
            continue
        others = [i for i in ids if i != query_id]
        ranked = sorted(
            others, key=lambda i: (descriptor_distance(vectors[query_id], vectors[i]), i)
        )[:max_k]
        curve = []
        for k in cutoffs:
            hits = sum(1 for i in ranked[:k] if i in relevant)
            curve.append((Fraction(hits, k), Fraction(hits, len(relevant))))
        per_class.setdefault(labels[query_id], []).append(curve)
    rows: list[tuple[str, int, float, float]] = []
    for label in sorted(per_class):
        curves = per_class[label]
        n = len(curves)
        for pos, k in enumerate(cutoffs):
            mean_p = sum(c[pos][0] for c in curves) / n
            mean_r = sum(c[pos][1] for c in curves) / n
            rows.append((label, k, float(mean_p), float(mean_r)))
    return rows


def render_pr_csv(rows: Iterable[tuple[str, int, float, float]]) -> str:
    """CSV text of mean curve rows: class,k,mean_precision,mean_recall."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["class", "k", "mean_precision", "mean_recall"])
    for label, k, precision, recall in rows:
        writer.writerow([label, k, f"{precision:.6f}", f"{recall:.6f}"])
    return buf.getvalue()


def write_pr_csv(path: str | os.PathLike, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_pr_csv(rows))
