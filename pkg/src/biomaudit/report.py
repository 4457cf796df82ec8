"""Report writers and readers: CSV tables, JSON bundle and the SVG bar chart."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

from .errors import MissingFile, ParseError
from .explain import RankedFeature
from .subjfeat import FEATURES, POSE_CODE, FeatureRow

FEATURE_HEADER = ("sample_id", "dataset", "split", "gender_gt", *FEATURES[:-1], "pose", "pose_code")
RANKING_HEADER = ("rank", "feature", "mean_abs_phi", "direction")


def fmt(value) -> str:
    """CSV float format: 6 significant digits."""
    if value is None:
        return ""
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    return f"{float(value):.6g}"


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def read_csv(path, header: Sequence[str] = ()) -> list[dict[str, str]]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [h for h in header if h not in (reader.fieldnames or [])]
        if missing:
            raise ParseError(f"{path}: header lacks {missing}", row=0)
        return list(reader)


def write_features(path, rows: Sequence[FeatureRow]) -> None:
    write_csv(
        path,
        FEATURE_HEADER,
        (
            (r.sample_id, r.dataset, r.split, r.gender_gt, *r.values[:-1], r.pose, int(r.values[-1]))
            for r in sorted(rows, key=lambda r: r.sample_id)
        ),
    )


def read_features(path) -> list[FeatureRow]:
    rows = []
    for i, rec in enumerate(read_csv(path, FEATURE_HEADER), start=1):
        pose = rec["pose"]
        if pose not in POSE_CODE:
            raise ParseError(f"unknown pose {pose!r}", row=i)
        try:
            values = tuple(float(rec[f]) for f in FEATURES[:-1]) + (float(POSE_CODE[pose]),)
            gt = int(rec["gender_gt"])
        except ValueError as exc:
            raise ParseError(str(exc), row=i) from exc
        rows.append(FeatureRow(rec["sample_id"], values, pose, None, rec["dataset"], rec["split"], gt))
    return rows


def write_rankings(path, ranking: Sequence[RankedFeature]) -> None:
    write_csv(path, RANKING_HEADER, ((i + 1, r.feature, r.mean_abs_phi, r.direction) for i, r in enumerate(ranking)))


def read_rankings(path) -> list[RankedFeature]:
    return [
        RankedFeature(r["feature"], float(r["mean_abs_phi"]), r["direction"])
        for r in read_csv(path, RANKING_HEADER)
    ]


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


DIRECTION_COLORS = {"positive": "#1f77b4", "negative": "#d62728", "neutral": "#7f7f7f"}


def bar_chart_svg(ranking: Sequence[RankedFeature], title: str = "mean |SHAP value|") -> str:
    """Horizontal bars of mean |phi|, colored by direction, largest on top."""
    bar_h, gap = 24, 8
    left, right, top, bottom = 130, 90, 50, 40
    width = 640
    plot_w = width - left - right
    height = top + bottom + max(1, len(ranking)) * (bar_h + gap)
    vmax = max((r.mean_abs_phi for r in ranking), default=0.0) or 1.0

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
        f'<text x="{width / 2:.1f}" y="28" text-anchor="middle" font-size="16" font-family="Arial">{_escape(title)}</text>',
    ]
    for i, r in enumerate(ranking):
        y = top + i * (bar_h + gap)
        w = plot_w * r.mean_abs_phi / vmax
        color = DIRECTION_COLORS.get(r.direction, DIRECTION_COLORS["neutral"])
        lines.append(
            f'<text x="{left - 8}" y="{y + bar_h * 0.7:.1f}" text-anchor="end" font-size="12" '
            f'font-family="Arial">{_escape(r.feature)}</text>'
        )
        lines.append(
            f'<rect class="bar" data-direction="{_escape(r.direction)}" x="{left}" y="{y}" '
            f'width="{w:.3f}" height="{bar_h}" fill="{color}"/>'
        )
        lines.append(
            f'<text x="{left + w + 6:.3f}" y="{y + bar_h * 0.7:.1f}" font-size="11" '
            f'font-family="Arial">{r.mean_abs_phi:.4g}</text>'
        )
    axis_y = height - bottom + 4
    lines.append(f'<line x1="{left}" y1="{axis_y}" x2="{left + plot_w}" y2="{axis_y}" stroke="#333333"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
