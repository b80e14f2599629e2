"""Effectiveness metrics for ranked runs: AP, MAP, P@k, recall and fallout.

Judgments are binarized at grade > 0 and unjudged documents count as
non-relevant. Queries judged with no relevant document are reported but
left out of the means; judged queries missing from the run score zero.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus_io import Qrels, RunEntry

DEFAULT_CUTOFFS = (5, 10, 100)


class EvaluationError(ValueError):
    pass


def average_precision(ranked: Sequence[str], relevant: set[str]) -> float:
    m = len(relevant)
    if m == 0:
        raise EvaluationError("query has no relevant documents")
    hits = 0
    total = 0.0
    for rank, docid in enumerate(ranked, 1):
        if docid in relevant:
            hits += 1
            total += hits / rank
    return total / m


def precision_at_k(ranked: Sequence[str], relevant: set[str], k: int) -> float:
    # a run shorter than k is padded with non-relevant documents
    if k < 1:
        raise EvaluationError(f"k must be >= 1, got {k}")
    return sum(1 for d in ranked[:k] if d in relevant) / k


def recall(ranked: Sequence[str], relevant: set[str]) -> float:
    if not relevant:
        raise EvaluationError("query has no relevant documents")
    return len(relevant.intersection(ranked)) / len(relevant)


def fallout(ranked: Sequence[str], relevant: set[str], collection_size: int) -> float:
    non_relevant = collection_size - len(relevant)
    if non_relevant <= 0:
        raise EvaluationError("fallout undefined: every document in the collection is relevant")
    return len(set(ranked) - relevant) / non_relevant


def ranked_lists(run: Iterable[RunEntry]) -> dict[str, list[str]]:
    """Docids per query in rank order."""
    by_q: dict[str, list[RunEntry]] = {}
    for e in run:
        by_q.setdefault(e.qid, []).append(e)
    out = {}
    for qid, rows in by_q.items():
        rows.sort(key=lambda e: e.rank)
        docids = [e.docid for e in rows]
        if len(set(docids)) != len(docids):
            raise EvaluationError(f"query {qid}: run lists a document twice")
        out[qid] = docids
    return out


def mean_average_precision(run: Iterable[RunEntry], qrels: Qrels) -> float:
    lists = ranked_lists(run)
    aps = [average_precision(lists.get(q, []), rel)
           for q, rel in sorted(qrels.relevant_by_query().items()) if rel]
    if not aps:
        raise EvaluationError("zero evaluable queries")
    return math.fsum(aps) / len(aps)


@dataclass
class QueryMetrics:
    qid: str
    num_relevant: int
    num_retrieved: int
    ap: float | None
    precision: dict[int, float]
    recall: float | None
    fallout: float | None


@dataclass
class MetricsReport:
    queries: list[QueryMetrics]
    cutoffs: tuple[int, ...]
    map: float
    mean_precision: dict[int, float]
    mean_recall: float
    mean_fallout: float | None
    queries_evaluated: int
    skipped: list[str] = field(default_factory=list)

    def by_qid(self) -> dict[str, QueryMetrics]:
        return {q.qid: q for q in self.queries}

    def render(self, fmt: str = "text") -> str:
        if fmt == "text":
            return render_text(self)
        if fmt == "delim":
            return render_delimited(self)
        raise ValueError(f"unknown report format {fmt!r}")


def evaluate(run: Iterable[RunEntry], qrels: Qrels, cutoffs: Sequence[int] = DEFAULT_CUTOFFS,
             collection_size: int | None = None) -> MetricsReport:
    """Per-query and aggregate metrics; fallout only when ``collection_size`` is known."""
    cutoffs = tuple(sorted(set(cutoffs)))
    if any(k < 1 for k in cutoffs):
        raise EvaluationError("precision cutoffs must be >= 1")
    lists = ranked_lists(run)
    rows: list[QueryMetrics] = []
    skipped = []
    for qid, rel in sorted(qrels.relevant_by_query().items()):
        ranked = lists.get(qid, [])
        if not rel:
            skipped.append(qid)
            rows.append(QueryMetrics(qid, 0, len(ranked), None, {}, None, None))
            continue
        fo = fallout(ranked, rel, collection_size) if collection_size is not None else None
        rows.append(QueryMetrics(
            qid, len(rel), len(ranked), average_precision(ranked, rel),
            {k: precision_at_k(ranked, rel, k) for k in cutoffs}, recall(ranked, rel), fo))
    scored = [r for r in rows if r.ap is not None]
    if not scored:
        raise EvaluationError("zero evaluable queries")
    n = len(scored)
    return MetricsReport(
        queries=rows,
        cutoffs=cutoffs,
        map=math.fsum(r.ap for r in scored) / n,
        mean_precision={k: math.fsum(r.precision[k] for r in scored) / n for k in cutoffs},
        mean_recall=math.fsum(r.recall for r in scored) / n,
        mean_fallout=(math.fsum(r.fallout for r in scored) / n
                      if collection_size is not None else None),
        queries_evaluated=n,
        skipped=skipped,
    )


# --------------------------------------------------------------------------
# rendering


def _columns(report: MetricsReport) -> list[str]:
    return (["qid", "num_rel", "num_ret", "AP"] + [f"P@{k}" for k in report.cutoffs]
            + ["recall", "fallout"])


def _cells(report: MetricsReport, exact: bool) -> list[list[str]]:
    def num(x):
        if x is None:
            return "-"
        return repr(x) if exact else f"{x:.4f}"

    rows = []
    for q in report.queries:
        rows.append([q.qid, str(q.num_relevant), str(q.num_retrieved), num(q.ap)]
                    + [num(q.precision.get(k)) for k in report.cutoffs]
                    + [num(q.recall), num(q.fallout)])
    evaluated = [q for q in report.queries if q.ap is not None]
    rows.append(["ALL", str(sum(q.num_relevant for q in evaluated)),
                 str(sum(q.num_retrieved for q in evaluated)), num(report.map)]
                + [num(report.mean_precision[k]) for k in report.cutoffs]
                + [num(report.mean_recall), num(report.mean_fallout)])
    return rows


def render_text(report: MetricsReport) -> str:
    header = _columns(report)
    rows = [header] + _cells(report, exact=False)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    out = io.StringIO()
    for r in rows:
        out.write("  ".join(c.rjust(w) if i else c.ljust(w)
                            for i, (c, w) in enumerate(zip(r, widths))).rstrip() + "\n")
    out.write(f"queries evaluated: {report.queries_evaluated}\n")
    if report.skipped:
        out.write(f"queries without relevant documents: {' '.join(report.skipped)}\n")
    return out.getvalue()


def render_delimited(report: MetricsReport, sep: str = "\t") -> str:
    """Machine-readable form; floats are written exactly (``repr``)."""
    rows = [_columns(report)] + _cells(report, exact=True)
    return "".join(sep.join(r) + "\n" for r in rows)


def parse_delimited(text: str, sep: str = "\t") -> dict[str, dict[str, float | int | None]]:
    """Read a delimited report back into ``{qid: {column: value}}``."""
    lines = [ln for ln in text.splitlines() if ln]
    header = lines[0].split(sep)
    out = {}
    for line in lines[1:]:
        cells = line.split(sep)
        row: dict[str, float | int | None] = {}
        for col, cell in zip(header[1:], cells[1:]):
            if cell == "-":
                row[col] = None
            elif col in ("num_rel", "num_ret"):
                row[col] = int(cell)
            else:
                row[col] = float(cell)
        out[cells[0]] = row
    return out
