"""Accuracy metrics for answer selection.

Three rates over a dataset: overall accuracy (exact answer index, all
examples), positive accuracy (same, restricted to examples that have an
answer) and trigger accuracy (answer-vs-no-answer decision only, where
index 0 means no answer). sign(0) = 0 and sign(i > 0) = 1, so the
trigger test reduces to (argmax = 0) iff (k = 0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass
class EvalReport:
    n_total: int
    n_positive: int
    overall_acc: float | None  # None when the relevant subset is empty
    positive_acc: float | None
    trigger_acc: float | None
    records: list[tuple[int, int]]  # (gold k, predicted k_hat)


def _argmax(probs: np.ndarray) -> int:
    return int(np.argmax(probs))  # first max: ties resolve to lowest index


def example_accuracy(probs: np.ndarray, k: int) -> int:
    """1 iff the argmax of the distribution is exactly the gold index."""
    n = probs.shape[0]
    if not 0 <= k < n:
        raise ValueError(f"label {k} out of range for {n} slots")
    return int(_argmax(probs) == k)


def trigger_accuracy(probs: np.ndarray, k: int) -> int:
    """1 iff the model and label agree on whether an answer exists."""
    n = probs.shape[0]
    if not 0 <= k < n:
        raise ValueError(f"label {k} out of range for {n} slots")
    return int((_argmax(probs) == 0) == (k == 0))


def report_from_records(records: list[tuple[int, int]]) -> EvalReport:
    n_total = len(records)
    positives = [(k, kh) for k, kh in records if k > 0]
    overall = sum(1 for k, kh in records if k == kh)
    positive = sum(1 for k, kh in positives if k == kh)
    trigger = sum(1 for k, kh in records if (kh == 0) == (k == 0))
    return EvalReport(
        n_total=n_total,
        n_positive=len(positives),
        overall_acc=overall / n_total if n_total else None,
        positive_acc=positive / len(positives) if positives else None,
        trigger_acc=trigger / n_total if n_total else None,
        records=list(records),
    )


def evaluate_prepared(model, prepared) -> EvalReport:
    """Score already-featurized examples; order of records is input order."""
    records = []
    for prep in prepared:
        result = model.score_prepared(prep)
        records.append((prep.label, result.argmax))
    return report_from_records(records)


def evaluate(model, examples) -> EvalReport:
    prepared = [model.prepare_example(ex.context, ex.question, ex.candidates, ex.label)
                for ex in examples]
    return evaluate_prepared(model, prepared)


def format_report(report: EvalReport) -> str:
    """Human-readable table for standard output."""
    def fmt(x):
        return "  n/a" if x is None else f"{x:.3f}"

    lines = [
        "metric             value",
        "-----------------  -----",
        f"overall accuracy   {fmt(report.overall_acc)}",
        f"positive accuracy  {fmt(report.positive_acc)}",
        f"trigger accuracy   {fmt(report.trigger_acc)}",
        f"examples           {report.n_total:5d}",
        f"with answer        {report.n_positive:5d}",
    ]
    return "\n".join(lines)


def write_report(path, report: EvalReport, include_records: bool = True) -> None:
    """Line-delimited report: one summary line, then one line per example."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({
            "n_total": report.n_total,
            "n_positive": report.n_positive,
            "overall_acc": report.overall_acc,
            "positive_acc": report.positive_acc,
            "trigger_acc": report.trigger_acc,
        }) + "\n")
        if include_records:
            for k, kh in report.records:
                fh.write(json.dumps({"k": k, "k_hat": kh}) + "\n")


def read_report(path) -> EvalReport:
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty report")
    head = lines[0]
    records = [(r["k"], r["k_hat"]) for r in lines[1:]]
    return EvalReport(head["n_total"], head["n_positive"], head["overall_acc"],
                      head["positive_acc"], head["trigger_acc"], records)
