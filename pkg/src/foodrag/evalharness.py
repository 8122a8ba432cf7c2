"""Benchmark harness: tiered question sets, F1 scoring, Table-style reports.

Ground truth per question is either a filter document resolved against the
corpus at load time or an explicit item-id list (for questions whose
conditions the filter language cannot express). Scoring is pure set
arithmetic over ids; ranking is ignored.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

import numpy as np

from .corpus import FoodItem
from .filters import FieldSchema, evaluate, parse_filter
from .filtergen import CascadeRetriever, EmbeddingBackend, LlmBackend, PromptSpec
from .store import VectorStore
from .transport import BackendUnavailable


class Difficulty(Enum):
    EASY = "Easy"
    MEDIUM = "Medium"
    HARD = "Hard"


@dataclass(frozen=True)
class QuestionCase:
    id: str
    question: str
    difficulty: Difficulty
    ground_truth: frozenset[str]
    notes: str = ""


def load_questions(
    path: Union[str, Path], items: Sequence[FoodItem], schema: FieldSchema
) -> list[QuestionCase]:
    """Load a question file, resolving every ground truth against the corpus.

    File format: {"questions": [{"id", "question", "difficulty",
    "ground_truth": {"filter": {...}} | {"ids": [...]}, "notes"?}, ...]}.
    An unknown id or an invalid ground-truth filter fails the load.
    """
    with open(path, encoding="utf-8") as handle:
        data = json.load(handle)
    known_ids = {item.id for item in items}
    cases = []
    for entry in data["questions"]:
        truth = entry["ground_truth"]
        if "filter" in truth:
            expr = parse_filter(truth["filter"], schema)
            resolved = frozenset(
                item.id for item in items if evaluate(expr, item.metadata())
            )
        elif "ids" in truth:
            resolved = frozenset(truth["ids"])
            unknown = resolved - known_ids
            if unknown:
                raise ValueError(
                    f"question {entry['id']!r}: ground-truth ids not in corpus: {sorted(unknown)}"
                )
        else:
            raise ValueError(
                f"question {entry['id']!r}: ground_truth needs 'filter' or 'ids'"
            )
        cases.append(
            QuestionCase(
                id=entry["id"],
                question=entry["question"],
                difficulty=Difficulty(entry["difficulty"]),
                ground_truth=resolved,
                notes=entry.get("notes", ""),
            )
        )
    return cases


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


def score(ground_truth: Iterable[str], retrieved: Iterable[str]) -> Metrics:
    """Precision/recall/F1 from exact set arithmetic.

    Conventions for empty sets: both empty scores 1.0 everywhere (the
    system correctly returned nothing); exactly one empty scores 0.0.
    """
    truth = frozenset(ground_truth)
    got = frozenset(retrieved)
    tp = len(truth & got)
    fp = len(got - truth)
    fn = len(truth - got)
    if not truth and not got:
        return Metrics(0, 0, 0, 1.0, 1.0, 1.0)
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return Metrics(tp, fp, fn, precision, recall, f1)


@dataclass(frozen=True)
class ReportRow:
    model: str
    threshold: float
    difficulty: Difficulty
    mean_f1: float
    std_f1: float
    runs: int


@dataclass(frozen=True)
class QuestionRun:
    model: str
    threshold: float
    run_index: int
    question_id: str
    difficulty: Difficulty
    tier: str
    f1: float
    backend_error: bool = False


@dataclass
class EvalReport:
    rows: list[ReportRow]
    breakdown: list[QuestionRun]
    runs: int
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "seed": self.seed,
            "rows": [
                {
                    "model": r.model,
                    "threshold": r.threshold,
                    "difficulty": r.difficulty.value,
                    "mean_f1": r.mean_f1,
                    "std_f1": r.std_f1,
                    "runs": r.runs,
                }
                for r in self.rows
            ],
            "breakdown": [
                {
                    "model": q.model,
                    "threshold": q.threshold,
                    "run_index": q.run_index,
                    "question_id": q.question_id,
                    "difficulty": q.difficulty.value,
                    "tier": q.tier,
                    "f1": q.f1,
                    "backend_error": q.backend_error,
                }
                for q in self.breakdown
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(
            rows=[
                ReportRow(
                    model=r["model"],
                    threshold=r["threshold"],
                    difficulty=Difficulty(r["difficulty"]),
                    mean_f1=r["mean_f1"],
                    std_f1=r["std_f1"],
                    runs=r["runs"],
                )
                for r in data["rows"]
            ],
            breakdown=[
                QuestionRun(
                    model=q["model"],
                    threshold=q["threshold"],
                    run_index=q["run_index"],
                    question_id=q["question_id"],
                    difficulty=Difficulty(q["difficulty"]),
                    tier=q["tier"],
                    f1=q["f1"],
                    backend_error=q["backend_error"],
                )
                for q in data["breakdown"]
            ],
            runs=data["runs"],
            seed=data.get("seed", 0),
        )


def run_suite(
    questions: Sequence[QuestionCase],
    store: VectorStore,
    schema: FieldSchema,
    llm: LlmBackend,
    embedder: EmbeddingBackend,
    thresholds: Sequence[float],
    runs: int,
    *,
    seed: int = 0,
    model: str = "scripted",
    prompts: PromptSpec | None = None,
    limit: int | None = None,
    audit_sink: IO | None = None,
) -> EvalReport:
    """Full grid: every threshold x run x question through the cascade.

    Per difficulty, each run's F1 is the mean over that run's questions;
    the reported mean/std (population) are over the `runs` repetitions. A
    BackendUnavailable on a question scores zero for that question and is
    flagged, and the run continues.
    """
    prompts = prompts or PromptSpec.default()
    breakdown: list[QuestionRun] = []
    rows: list[ReportRow] = []
    for threshold in thresholds:
        retriever = CascadeRetriever(
            schema=schema,
            store=store,
            llm=llm,
            embedder=embedder,
            threshold=threshold,
            prompts=prompts,
            limit=limit,
        )
        per_run_f1: dict[Difficulty, list[float]] = {d: [] for d in Difficulty}
        for run_index in range(runs):
            collected: dict[Difficulty, list[float]] = {d: [] for d in Difficulty}
            for case in questions:
                try:
                    outcome = retriever.retrieve(case.question)
                except BackendUnavailable:
                    entry = QuestionRun(
                        model, threshold, run_index, case.id, case.difficulty,
                        tier="", f1=0.0, backend_error=True,
                    )
                else:
                    metrics = score(case.ground_truth, outcome.result.id_set())
                    entry = QuestionRun(
                        model, threshold, run_index, case.id, case.difficulty,
                        tier=outcome.result.tier.value, f1=metrics.f1,
                    )
                    if audit_sink is not None:
                        _write_audit(audit_sink, entry, outcome)
                breakdown.append(entry)
                collected[case.difficulty].append(entry.f1)
            for difficulty, values in collected.items():
                if values:
                    per_run_f1[difficulty].append(float(np.mean(values)))
        for difficulty in Difficulty:
            values = per_run_f1[difficulty]
            if not values:
                continue
            rows.append(
                ReportRow(
                    model=model,
                    threshold=float(threshold),
                    difficulty=difficulty,
                    mean_f1=float(np.mean(values)),
                    std_f1=float(np.std(values)),
                    runs=runs,
                )
            )
    return EvalReport(rows=rows, breakdown=breakdown, runs=runs, seed=seed)


def _write_audit(sink: IO, entry: QuestionRun, outcome) -> None:
    sink.write(
        json.dumps(
            {
                "model": entry.model,
                "threshold": entry.threshold,
                "run_index": entry.run_index,
                "question_id": entry.question_id,
                "tier": entry.tier,
                "f1": entry.f1,
                "attempts": [
                    {
                        "tier": a.tier.value,
                        "raw_response": a.raw_response,
                        "error": str(a.error) if a.error else None,
                        "duration_s": a.duration_s,
                    }
                    for a in outcome.attempts
                ],
            },
            ensure_ascii=False,
        )
        + "\n"
    )


def _check_grid(report: EvalReport) -> None:
    seen = {(r.model, r.threshold, r.difficulty) for r in report.rows}
    for model, threshold in {(r.model, r.threshold) for r in report.rows}:
        for difficulty in Difficulty:
            if (model, threshold, difficulty) not in seen:
                raise ValueError(
                    f"incomplete grid: missing {model}/{threshold}/{difficulty.value}"
                )


def render_report(report: EvalReport, fmt: str = "table-text") -> str:
    """Render the report grid as 'table-text', 'csv' or 'json'.

    table-text mirrors the familiar results-table layout, one row per
    model x threshold with Easy/Medium/Hard columns as mean(+/-std) to
    three decimals. csv holds the grid rows at full float precision; json
    holds the whole report, breakdown included. csv and json round-trip
    losslessly through rows_from_csv / EvalReport.from_dict.
    """
    _check_grid(report)
    if fmt == "json":
        return json.dumps(report.to_dict(), ensure_ascii=False, indent=2)
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["model", "threshold", "difficulty", "mean_f1", "std_f1", "runs"])
        for r in report.rows:
            writer.writerow(
                [r.model, repr(r.threshold), r.difficulty.value,
                 repr(r.mean_f1), repr(r.std_f1), r.runs]
            )
        return buffer.getvalue()
    if fmt != "table-text":
        raise ValueError(f"unknown report format: {fmt!r}")

    by_cell = {(r.model, r.threshold, r.difficulty): r for r in report.rows}
    pairs = sorted({(r.model, r.threshold) for r in report.rows}, key=lambda p: (p[1], p[0]))
    header = ["Model", "Threshold", "Easy", "Medium", "Hard"]
    lines = []
    for model, threshold in pairs:
        cells = [model, f"{threshold:.3f}"]
        for difficulty in Difficulty:
            row = by_cell[(model, threshold, difficulty)]
            cells.append(f"{row.mean_f1:.3f}(±{row.std_f1:.3f})")
        lines.append(cells)
    widths = [max(len(header[i]), *(len(line[i]) for line in lines)) for i in range(5)]
    out = ["  ".join(header[i].ljust(widths[i]) for i in range(5)).rstrip()]
    for line in lines:
        out.append("  ".join(line[i].ljust(widths[i]) for i in range(5)).rstrip())
    return "\n".join(out) + "\n"


def rows_from_csv(text: str) -> list[ReportRow]:
    reader = csv.DictReader(io.StringIO(text))
    return [
        ReportRow(
            model=row["model"],
            threshold=float(row["threshold"]),
            difficulty=Difficulty(row["difficulty"]),
            mean_f1=float(row["mean_f1"]),
            std_f1=float(row["std_f1"]),
            runs=int(row["runs"]),
        )
        for row in reader
    ]
