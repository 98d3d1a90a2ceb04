"""Reading and writing prediction files, reports and reliability diagrams.

Prediction files are JSON Lines, one example per line::

    {"id": "ex-1", "logits": [2.1, -0.3, 0.4], "label": 0}

``id`` and ``language`` are optional. Floats are written with Python's
shortest round-trip ``repr`` so loading a saved file gives back identical
logits.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Mapping

import numpy as np

from . import __version__
from .core import AggregateReport, BinningSpec, BinStats, CalibrationReport, PredictionSet
from .langfeatures import LanguageProfile, build_vocab
from .smoothing import FeatureDataset


class PredictionFileError(ValueError):
    pass


def language_from_path(path) -> str:
    return Path(path).name.split(".")[0]


def load_predictions(path, language: str | None = None) -> PredictionSet:
    """Read a JSONL prediction file into a :class:`PredictionSet`.

    The number of classes is taken from the first record and enforced on the
    rest. The language tag is ``language`` if given, else the first record's
    ``"language"`` field, else the file name up to its first dot.
    """
    logits, labels, ids = [], [], []
    k = None
    record_language = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec["logits"], list):
                    raise TypeError("logits must be a list")
                row = [float(v) for v in rec["logits"]]
                label = rec["label"]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise PredictionFileError(f"line {lineno}: malformed record ({exc})") from None
            if not isinstance(rec, dict) or isinstance(label, bool) or not isinstance(label, int):
                raise PredictionFileError(f"line {lineno}: label must be an integer")
            if k is None:
                k = len(row)
                if k < 2:
                    raise PredictionFileError(f"line {lineno}: need at least 2 logits, found {k}")
                record_language = rec.get("language")
            elif len(row) != k:
                raise PredictionFileError(f"line {lineno}: expected {k} logits, found {len(row)}")
            if not all(math.isfinite(v) for v in row):
                raise PredictionFileError(f"line {lineno}: non-finite logit")
            if not 0 <= label < k:
                raise PredictionFileError(f"line {lineno}: label {label} outside [0, {k})")
            logits.append(row)
            labels.append(label)
            ids.append(rec.get("id"))
    if not logits:
        raise PredictionFileError("empty prediction file")
    lang = language or record_language or language_from_path(path)
    has_ids = any(i is not None for i in ids)
    return PredictionSet(np.array(logits), np.array(labels), lang, tuple(ids) if has_ids else None)


def save_predictions(pset: PredictionSet, path) -> None:
    ids = pset.ids if pset.ids is not None else [None] * len(pset)
    with open(path, "w", encoding="utf-8") as fh:
        for ident, row, label in zip(ids, pset.logits, pset.labels):
            rec = {}
            if ident is not None:
                rec["id"] = ident
            rec["logits"] = [float(v) for v in row]
            rec["label"] = int(label)
            if pset.language:
                rec["language"] = pset.language
            fh.write(json.dumps(rec) + "\n")


# -- report documents ---------------------------------------------------------

def _report_body(r: CalibrationReport) -> dict:
    return {
        "language": r.language,
        "n": r.n,
        "ece": r.ece,
        "accuracy": r.accuracy,
        "nll": r.nll,
        "temperature": r.temperature,
        "binning": {"num_bins": r.binning.num_bins, "scheme": r.binning.scheme.value},
        "bins": [
            {"bin_lo": b.bin_lo, "bin_hi": b.bin_hi, "count": b.count, "accuracy": b.accuracy,
             "confidence": b.avg_confidence, "gap": b.gap}
            for b in r.bins
        ],
    }


def _parse_body(d: dict) -> CalibrationReport:
    return CalibrationReport(
        language=d["language"],
        n=int(d["n"]),
        ece=float(d["ece"]),
        accuracy=float(d["accuracy"]),
        nll=float(d["nll"]),
        bins=[BinStats(float(b["bin_lo"]), float(b["bin_hi"]), int(b["count"]), float(b["accuracy"]),
                       float(b["confidence"]), float(b["gap"])) for b in d["bins"]],
        binning=BinningSpec(d["binning"]["num_bins"], d["binning"]["scheme"]),
        temperature=float(d.get("temperature", 1.0)),
    )


def render_report(report: CalibrationReport | AggregateReport, config: Mapping | None = None) -> str:
    """Serialise a report to a JSON document with tool version and config echo."""
    doc = {"tool": "xlcalib", "version": __version__, "config": dict(config or {})}
    if isinstance(report, CalibrationReport):
        doc["kind"] = "calibration"
        doc["report"] = _report_body(report)
    elif isinstance(report, AggregateReport):
        doc["kind"] = "aggregate"
        doc["report"] = {
            "pivot": report.pivot,
            "pivot_ece": report.pivot_ece,
            "mean_ece": report.mean_ece,
            "max_ece": report.max_ece,
            "max_language": report.max_language,
            "languages": {
                lang: _report_body(r) if isinstance(r, CalibrationReport) else float(r)
                for lang, r in sorted(report.reports.items())
            },
        }
    else:
        raise TypeError(f"cannot render {type(report).__name__}")
    return json.dumps(doc, indent=2) + "\n"


def parse_report(text: str) -> CalibrationReport | AggregateReport:
    doc = json.loads(text)
    kind = doc.get("kind")
    body = doc["report"]
    if kind == "calibration":
        return _parse_body(body)
    if kind == "aggregate":
        reports = {lang: _parse_body(v) if isinstance(v, dict) else float(v)
                   for lang, v in body["languages"].items()}
        return AggregateReport(body["pivot"], float(body["pivot_ece"]), float(body["mean_ece"]),
                               float(body["max_ece"]), body["max_language"], reports)
    raise ValueError(f"unknown report kind {kind!r}")


def save_report(report, path, config: Mapping | None = None) -> None:
    Path(path).write_text(render_report(report, config), encoding="utf-8")


def load_report(path):
    return parse_report(Path(path).read_text(encoding="utf-8"))


def load_report_dir(directory) -> dict[str, CalibrationReport]:
    """All calibration reports (``*.json``) in ``directory``, keyed by language."""
    reports = {}
    for path in sorted(Path(directory).glob("*.json")):
        try:
            r = load_report(path)
        except (ValueError, KeyError):
            continue
        if not isinstance(r, CalibrationReport):
            continue
        if r.language in reports:
            raise ValueError(f"duplicate report for language {r.language!r} ({path.name})")
        reports[r.language] = r
    if not reports:
        raise ValueError(f"no calibration reports found in {directory}")
    return reports


# -- reliability diagrams -----------------------------------------------------

RELIABILITY_HEADER = ("bin_lo", "bin_hi", "count", "accuracy", "confidence", "gap")


def reliability_csv(report: CalibrationReport) -> str:
    lines = [",".join(RELIABILITY_HEADER)]
    for b in report.bins:
        lines.append(",".join([repr(b.bin_lo), repr(b.bin_hi), str(b.count),
                               repr(b.accuracy), repr(b.avg_confidence), repr(b.gap)]))
    return "\n".join(lines) + "\n"


def reliability_svg(report: CalibrationReport, size: int = 320) -> str:
    """Reliability diagram as a standalone SVG.

    Blue bars show per-bin accuracy, red translucent bars span the gap up to
    the mean confidence, and a dotted red line marks ``y = x``.
    """
    pad = 40
    w = size
    x0, y0 = pad, pad + w

    def X(v):
        return x0 + v * w

    def Y(v):
        return y0 - v * w

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w + 2 * pad}" height="{w + 2 * pad}" '
        f'viewBox="0 0 {w + 2 * pad} {w + 2 * pad}">',
        f'<title>Reliability diagram ({report.language or "unlabelled"}, '
        f'ECE={report.ece:.4f}, n={report.n})</title>',
        f'<rect x="{x0}" y="{pad}" width="{w}" height="{w}" fill="white" stroke="black"/>',
    ]
    for b in report.bins:
        if b.count == 0:
            continue
        left, width = X(b.bin_lo), (b.bin_hi - b.bin_lo) * w
        out.append(f'<rect class="accuracy" x="{left:.3f}" y="{Y(b.accuracy):.3f}" width="{width:.3f}" '
                   f'height="{b.accuracy * w:.3f}" fill="#1f77b4" stroke="#0b3c5d"/>')
        top, bottom = max(b.accuracy, b.avg_confidence), min(b.accuracy, b.avg_confidence)
        out.append(f'<rect class="gap" x="{left:.3f}" y="{Y(top):.3f}" width="{width:.3f}" '
                   f'height="{(top - bottom) * w:.3f}" fill="#d62728" fill-opacity="0.4" stroke="#d62728"/>')
    out.append(f'<line x1="{X(0):.3f}" y1="{Y(0):.3f}" x2="{X(1):.3f}" y2="{Y(1):.3f}" '
               f'stroke="#d62728" stroke-width="2" stroke-dasharray="2,4"/>')
    for t in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        out.append(f'<text x="{X(t):.3f}" y="{y0 + 15}" font-size="10" text-anchor="middle">{t:.1f}</text>')
        out.append(f'<text x="{x0 - 5}" y="{Y(t) + 3:.3f}" font-size="10" text-anchor="end">{t:.1f}</text>')
    out.append(f'<text x="{X(0.5):.3f}" y="{y0 + 32}" font-size="12" text-anchor="middle">Confidence</text>')
    out.append(f'<text x="12" y="{Y(0.5):.3f}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 12 {Y(0.5):.3f})">Accuracy</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_reliability(report: CalibrationReport, csv_path, svg_path=None) -> None:
    Path(csv_path).write_text(reliability_csv(report), encoding="utf-8")
    if svg_path is not None:
        Path(svg_path).write_text(reliability_svg(report), encoding="utf-8")


# -- feature datasets and language profiles -----------------------------------

def load_features(path, num_classes: int | None = None, language: str | None = None) -> FeatureDataset:
    """Read a ``label,f0,f1,...`` CSV into a :class:`FeatureDataset`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "label":
            raise ValueError(f"{path}: header must start with 'label'")
        dim = len(header) - 1
        X, y = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 1:
                raise ValueError(f"{path}: line {lineno}: expected {dim + 1} fields, found {len(row)}")
            try:
                y.append(int(row[0]))
                X.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    if not X:
        raise ValueError(f"{path}: no examples")
    return FeatureDataset(np.array(X), np.array(y), num_classes, language or language_from_path(path))


def save_features(data: FeatureDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label"] + [f"f{i}" for i in range(data.dim)])
        for label, row in zip(data.labels, data.features):
            writer.writerow([int(label)] + [repr(float(v)) for v in row])


def load_sizes(path) -> dict[str, float]:
    """``language,size_tokens`` CSV."""
    sizes = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            value = (rec.get("size_tokens") or "").strip()
            if value:
                sizes[rec["language"].strip()] = float(value)
    return sizes


def load_syntax(path) -> dict[str, list[float | None]]:
    """``language,f0,f1,...`` CSV; empty cells are missing features."""
    table = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: row for {row[0]!r} has {len(row)} fields, expected {len(header)}")
            table[row[0].strip()] = [float(v) if v.strip() else None for v in row[1:]]
    return table


def load_profiles(sizes_path=None, syntax_path=None, corpora_dir=None, min_count: int = 10) -> dict[str, LanguageProfile]:
    """Assemble :class:`LanguageProfile` objects from the optional inputs.

    Corpora are ``<language>.txt`` files of whitespace-separated tokens.
    """
    profiles: dict[str, LanguageProfile] = {}

    def get(lang):
        return profiles.setdefault(lang, LanguageProfile(lang))

    if sizes_path is not None:
        for lang, size in load_sizes(sizes_path).items():
            get(lang).size_tokens = size
    if syntax_path is not None:
        for lang, feats in load_syntax(syntax_path).items():
            get(lang).syn_features = feats
    if corpora_dir is not None:
        for path in sorted(Path(corpora_dir).glob("*.txt")):
            with open(path, encoding="utf-8") as fh:
                get(path.stem).vocabulary = build_vocab(fh, min_count, source=path.name)
    return profiles
