# asd_pipeline/reports.py
"""
Mise en forme d'un EvaluationReport:
- texte: tableaux alignés + matrices de confusion
- json: clés triées, indentation 2
- csv: accuracy.csv, precision.csv, recall.csv, f1.csv, confusion_<modèle>.csv
- docx: document Word (python-docx)

Mêmes entrées -> mêmes octets (sauf docx, dont le conteneur est horodaté).
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence

import pandas as pd
from docx import Document
from docx.shared import Pt, RGBColor

from .errors import ConfigError
from .evaluation import ConfusionMatrix, EvaluationReport
from .rule_labeling import METHOD_NAMES

logger = logging.getLogger(__name__)

METRIC_COLUMNS = (("accuracy", "Accuracy"), ("precision", "Precision"), ("recall", "Recall"), ("f1", "F1"))
REPORT_FILES = {"text": "report.txt", "json": "report.json", "docx": "report.docx"}

_ACCENT = RGBColor(0, 102, 204)


def _percent(value: float) -> str:
    return f"{value * 100:.2f}%"


def metrics_frame(report: EvaluationReport, alternate: bool = False) -> pd.DataFrame:
    rows = []
    for entry in report.entries:
        metrics = entry.alternate if alternate else entry.metrics
        rows.append({"Model": entry.name, **{title: getattr(metrics, key) for key, title in METRIC_COLUMNS}})
    return pd.DataFrame(rows, columns=["Model"] + [title for _, title in METRIC_COLUMNS])


def confusion_frame(cm: ConfusionMatrix) -> pd.DataFrame:
    labels = [str(c) for c in cm.classes]
    frame = pd.DataFrame(cm.counts.astype(int), index=labels, columns=labels)
    frame.index.name = "true\\pred"
    return frame


# =============================================================================
# TEXTE
# =============================================================================

def format_text(report: EvaluationReport) -> str:
    lines: List[str] = ["ASD screening pipeline - evaluation report", ""]
    for key in sorted(report.config):
        value = report.config[key]
        if isinstance(value, (list, tuple)):
            value = ", ".join(str(v) for v in value)
        lines.append(f"{key}: {value}")
    lines.append("")

    averaging = report.entries[0].metrics.averaging
    lines.append(f"Metrics ({averaging} averaging)")
    lines.append(metrics_frame(report).to_string(index=False, formatters=_percent_formatters()))
    lines.append("")

    alternate = report.entries[0].alternate
    if alternate is not None:
        lines.append(f"Metrics ({alternate.averaging} averaging)")
        lines.append(metrics_frame(report, alternate=True).to_string(index=False, formatters=_percent_formatters()))
        lines.append("")

    for entry in report.entries:
        lines.append(f"Confusion matrix: {entry.name}")
        lines.append(confusion_frame(entry.confusion).to_string())
        for warning in entry.metrics.warnings:
            lines.append(f"  warning: {warning}")
        lines.append("")

    lines.append("Ranking")
    for position, name in enumerate(report.ranking, start=1):
        lines.append(f"{position}. {name}")
    lines.append(f"Winner: {report.winner}")
    lines.append("")
    lines.append("Labels")
    for code, name in enumerate(METHOD_NAMES):
        lines.append(f"{code} = {name}")
    return "\n".join(lines) + "\n"


def _percent_formatters():
    return {title: _percent for _, title in METRIC_COLUMNS}


# =============================================================================
# JSON / CSV
# =============================================================================

def format_json(report: EvaluationReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def format_csv(report: EvaluationReport) -> Dict[str, str]:
    """Nom de fichier -> contenu CSV."""
    files = {}
    for key, _ in METRIC_COLUMNS:
        rows = []
        for entry in report.entries:
            row = {"model": entry.name, entry.metrics.averaging: getattr(entry.metrics, key)}
            if entry.alternate is not None and key != "accuracy":
                row[entry.alternate.averaging] = getattr(entry.alternate, key)
            rows.append(row)
        files[f"{key}.csv"] = pd.DataFrame(rows).to_csv(index=False, lineterminator="\n")
    for entry in report.entries:
        files[f"confusion_{entry.model_type}.csv"] = confusion_frame(entry.confusion).to_csv(lineterminator="\n")
    return files


# =============================================================================
# WORD
# =============================================================================

def write_docx(report: EvaluationReport, path) -> Path:
    doc = Document()
    title = doc.add_paragraph()
    run = title.add_run("ASD screening pipeline - evaluation report")
    run.bold = True
    run.font.size = Pt(16)
    run.font.color.rgb = _ACCENT

    for key in sorted(report.config):
        doc.add_paragraph(f"{key}: {report.config[key]}")

    frame = metrics_frame(report)
    doc.add_heading(f"Metrics ({report.entries[0].metrics.averaging})", level=2)
    table = doc.add_table(rows=1, cols=len(frame.columns))
    table.style = "Table Grid"
    for cell, name in zip(table.rows[0].cells, frame.columns):
        cell.text = name
    for record in frame.itertuples(index=False):
        cells = table.add_row().cells
        cells[0].text = record[0]
        for cell, value in zip(cells[1:], record[1:]):
            cell.text = _percent(value)

    for entry in report.entries:
        doc.add_heading(f"Confusion matrix: {entry.name}", level=3)
        cm = confusion_frame(entry.confusion)
        grid = doc.add_table(rows=1, cols=len(cm.columns) + 1)
        grid.style = "Table Grid"
        grid.rows[0].cells[0].text = "true\\pred"
        for cell, label in zip(grid.rows[0].cells[1:], cm.columns):
            cell.text = label
        for label, counts in cm.iterrows():
            cells = grid.add_row().cells
            cells[0].text = label
            for cell, count in zip(cells[1:], counts):
                cell.text = str(int(count))

    winner = doc.add_paragraph()
    winner_run = winner.add_run(f"Winner: {report.winner}")
    winner_run.bold = True

    path = Path(path)
    doc.save(str(path))
    return path


# =============================================================================
# ÉCRITURE
# =============================================================================

def write_reports(report: EvaluationReport, directory, formats: Sequence[str]) -> List[Path]:
    """Écrit les formats demandés dans `directory`; retourne les chemins créés."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "text":
            path = directory / REPORT_FILES["text"]
            path.write_text(format_text(report), encoding="utf-8")
            written.append(path)
        elif fmt == "json":
            path = directory / REPORT_FILES["json"]
            path.write_text(format_json(report), encoding="utf-8")
            written.append(path)
        elif fmt == "csv":
            for name, content in format_csv(report).items():
                path = directory / name
                path.write_text(content, encoding="utf-8")
                written.append(path)
        elif fmt == "docx":
            written.append(write_docx(report, directory / REPORT_FILES["docx"]))
        else:
            raise ConfigError(f"Format de rapport inconnu: {fmt}")
    logger.info(f"📝 {len(written)} fichier(s) de rapport écrits dans {directory}")
    return written
