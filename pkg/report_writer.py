"""
Report writer for chronon.
Emits CSV tables, JSON summaries and minimal SVG line charts for a run.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

# (key, unit, provenance); provenance is one of param, measured, analytic-bound, derived
Column = Tuple[str, str, str]


@dataclass
class Table:
    name: str
    columns: List[Column]
    rows: List[Dict[str, Any]] = field(default_factory=list)


@dataclass
class Figure:
    name: str
    title: str
    xlabel: str
    ylabel: str
    series: Dict[str, Tuple[Sequence[float], Sequence[float]]] = field(default_factory=dict)
    log_y: bool = False


def _format(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _json_default(obj: Any):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


class ReportWriter:
    """Writes run artifacts into one output directory."""

    SVG_TEMPLATE = """<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">
<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>
<text x="{title_x}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{title}</text>
<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>
<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>
<text x="{title_x}" y="{xlabel_y}" font-family="sans-serif" font-size="12" text-anchor="middle">{xlabel}</text>
<text x="14" y="{mid_y}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {mid_y})">{ylabel}</text>
<text x="{left}" y="{tick_y}" font-family="sans-serif" font-size="10" text-anchor="middle">{x_min}</text>
<text x="{right}" y="{tick_y}" font-family="sans-serif" font-size="10" text-anchor="middle">{x_max}</text>
<text x="{ytick_x}" y="{bottom}" font-family="sans-serif" font-size="10" text-anchor="end">{y_min}</text>
<text x="{ytick_x}" y="{top}" font-family="sans-serif" font-size="10" text-anchor="end">{y_max}</text>
{body}
</svg>
"""

    POLYLINE_TEMPLATE = '<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>'
    LEGEND_TEMPLATE = ('<text x="{x}" y="{y}" font-family="sans-serif" font-size="11" '
                       'fill="{color}">{label}</text>')

    COLORS = ("#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e", "#8c564b")
    WIDTH = 640
    HEIGHT = 400
    MARGIN = 60

    def __init__(self, out_dir: Path, dry_run: bool = False):
        """Initialize report writer.

        Args:
            out_dir: Directory receiving the artifacts
            dry_run: If True, only print what would be written
        """
        self.out_dir = Path(out_dir)
        self.dry_run = dry_run
        self.written: List[Path] = []

    def _write_file(self, path: Path, content: str) -> bool:
        """Write content to file.

        Returns:
            True if successful, False otherwise
        """
        if self.dry_run:
            print(f"[DRY RUN] Would write {path} ({len(content)} bytes)")
            return True

        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, 'w', newline='') as f:
                f.write(content)
            self.written.append(path)
            return True
        except IOError as e:
            print(f"Error writing {path}: {e}")
            return False

    def csv_text(self, table: Table) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow([f"{key} [{unit}] ({provenance})" for key, unit, provenance in table.columns])
        for row in table.rows:
            writer.writerow([_format(row.get(key, "")) for key, _, _ in table.columns])
        return buffer.getvalue()

    def write_csv(self, table: Table) -> bool:
        return self._write_file(self.out_dir / f"{table.name}.csv", self.csv_text(table))

    def write_json(self, name: str, payload: Dict[str, Any]) -> bool:
        content = json.dumps(payload, indent=2, sort_keys=True, default=_json_default)
        return self._write_file(self.out_dir / f"{name}.json", content + "\n")

    def svg_text(self, figure: Figure) -> str:
        left, top = self.MARGIN, 40
        right, bottom = self.WIDTH - 20, self.HEIGHT - self.MARGIN

        def transform(ys):
            ys = np.asarray(ys, dtype=float)
            if figure.log_y:
                return np.log10(np.clip(ys, 1e-300, None))
            return ys

        series = list(figure.series.values()) or [([0.0, 1.0], [0.0, 1.0])]
        xs_all = np.concatenate([np.asarray(x, dtype=float) for x, _ in series])
        ys_all = np.concatenate([transform(y) for _, y in series])
        ys_all = ys_all[np.isfinite(ys_all)]
        x_min, x_max = float(xs_all.min()), float(xs_all.max())
        y_min, y_max = (float(ys_all.min()), float(ys_all.max())) if ys_all.size else (0.0, 1.0)
        if x_max == x_min:
            x_max = x_min + 1
        if y_max == y_min:
            y_max = y_min + 1

        body = []
        for i, (label, (xs, ys)) in enumerate(figure.series.items()):
            color = self.COLORS[i % len(self.COLORS)]
            px = left + (np.asarray(xs, dtype=float) - x_min) / (x_max - x_min) * (right - left)
            py = bottom - (transform(ys) - y_min) / (y_max - y_min) * (bottom - top)
            points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py) if math.isfinite(b))
            body.append(self.POLYLINE_TEMPLATE.format(color=color, points=points))
            body.append(self.LEGEND_TEMPLATE.format(x=right - 150, y=top + 14 * (i + 1),
                                                    color=color, label=label))

        ylabel = f"log10 {figure.ylabel}" if figure.log_y else figure.ylabel
        return self.SVG_TEMPLATE.format(
            width=self.WIDTH, height=self.HEIGHT, title=figure.title,
            title_x=self.WIDTH // 2, left=left, right=right, top=top, bottom=bottom,
            xlabel=figure.xlabel, ylabel=ylabel, xlabel_y=self.HEIGHT - 15,
            mid_y=(top + bottom) // 2, tick_y=bottom + 15, ytick_x=left - 5,
            x_min=f"{x_min:.3g}", x_max=f"{x_max:.3g}",
            y_min=f"{y_min:.3g}", y_max=f"{y_max:.3g}", body="\n".join(body),
        )

    def write_svg(self, figure: Figure) -> bool:
        return self._write_file(self.out_dir / f"{figure.name}.svg", self.svg_text(figure))

    def write_all(self, tables: List[Table], figures: List[Figure], summary: Dict[str, Any],
                  svg: bool = True) -> bool:
        ok = all([self.write_csv(t) for t in tables])
        if svg:
            ok = all([self.write_svg(f) for f in figures]) and ok
        return self.write_json("summary", summary) and ok
