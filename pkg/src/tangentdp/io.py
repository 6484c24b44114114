"""CSV readers/writers for risk tables, data distributions and graphs, and the
deterministic JSON writer used for reports."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError, TangentDPError
from .mechanism import RiskTable
from .spaces import Distribution, FiniteSpace, MetricGraph, make_distribution


def _rows(path):
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [(i, row) for i, row in enumerate(csv.reader(fh), start=1)]
    except OSError as exc:
        raise ParseError(path, None, f"cannot read file: {exc.strerror or exc}") from exc
    rows = [(i, [c.strip() for c in row]) for i, row in rows if any(c.strip() for c in row)]
    if not rows:
        raise ParseError(path, None, "file is empty")
    return path, rows


def _number(path, lineno: int, text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(path, lineno, f"{what} {text!r} is not a number") from None
    if not math.isfinite(value):
        raise ParseError(path, lineno, f"{what} must be finite")
    return value


def read_risk_csv(path) -> RiskTable:
    """Header ``w_label, x1, x2, ...``; then one row ``w_label, r(w,x1), ...`` per output."""
    path, rows = _rows(path)
    header_no, header = rows[0]
    if len(header) < 2:
        raise ParseError(path, header_no, "header needs a w column and at least one x label")
    x_labels = header[1:]
    w_labels, table = [], []
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
        values = [_number(path, lineno, c, "risk value") for c in row[1:]]
        if any(v < 0 for v in values):
            raise ParseError(path, lineno, "risk values must be nonnegative")
        w_labels.append(row[0])
        table.append(values)
    if not table:
        raise ParseError(path, None, "no risk rows")
    try:
        return RiskTable(FiniteSpace(tuple(w_labels)), FiniteSpace(tuple(x_labels)), np.array(table))
    except TangentDPError as exc:
        raise ParseError(path, None, str(exc)) from exc


def write_risk_csv(path, risk: RiskTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["w", *risk.X.labels])
        for label, row in zip(risk.W.labels, risk.r):
            out.writerow([label, *(repr(float(v)) for v in row)])


def read_distribution_csv(path, space: FiniteSpace) -> Distribution:
    """Header ``label,weight``, or a bare ``label`` column where each line is a unit atom.

    Labels must belong to ``space``; labels not listed get weight 0. A label
    repeated in the bare form accumulates weight.
    """
    path, rows = _rows(path)
    header_no, header = rows[0]
    if header == ["label", "weight"]:
        weighted = True
    elif header == ["label"]:
        weighted = False
    else:
        raise ParseError(path, header_no, "header must be 'label,weight' or 'label'")
    raw = np.zeros(space.size)
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
        try:
            i = space.index(row[0])
        except TangentDPError:
            raise ParseError(path, lineno, f"label {row[0]!r} is not a column of the risk table") from None
        w = _number(path, lineno, row[1], "weight") if weighted else 1.0
        if w < 0:
            raise ParseError(path, lineno, "weights must be nonnegative")
        raw[i] += w
    try:
        return make_distribution(space, raw)
    except TangentDPError as exc:
        raise ParseError(path, None, str(exc)) from exc


def write_distribution_csv(path, p: Distribution) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["label", "weight"])
        for label, w in zip(p.space.labels, p.weights):
            out.writerow([label, repr(float(w))])


def read_graph_csv(path, space: FiniteSpace) -> MetricGraph:
    path, rows = _rows(path)
    header_no, header = rows[0]
    if header != ["u", "v", "length"]:
        raise ParseError(path, header_no, "header must be 'u,v,length'")
    edges = []
    for lineno, row in rows[1:]:
        if len(row) != 3:
            raise ParseError(path, lineno, f"expected 3 fields, got {len(row)}")
        try:
            u, v = space.index(row[0]), space.index(row[1])
        except TangentDPError as exc:
            raise ParseError(path, lineno, str(exc)) from None
        edges.append((u, v, _number(path, lineno, row[2], "length")))
    try:
        return MetricGraph(space, tuple(edges))
    except TangentDPError as exc:
        raise ParseError(path, None, str(exc)) from exc


def write_graph_csv(path, graph: MetricGraph) -> None:
    labels = graph.space.labels
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["u", "v", "length"])
        for u, v, length in graph.edges:
            out.writerow([labels[u], labels[v], repr(float(length))])


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# --- JSON -----------------------------------------------------------------

def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return "null" if obj is None else ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        text = format(x, ".17g")
        if "." not in text and "e" not in text and "n" not in text:
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(k), indent, level + 1)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(report: dict, indent: int = 2) -> str:
    """Serialize a report; floats use 17 significant digits, non-finite floats become null."""
    return _encode(report, indent, 0) + "\n"
