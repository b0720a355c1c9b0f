"""
Minimal SVG line charts for sweep artifacts (axes, polylines, legend)
"""
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

Series = Dict[str, Sequence[Tuple[float, float]]]

PALETTE = ('#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b')


class SVGExporter:
    """Render named (x, y) series into a standalone SVG 1.1 document"""

    def __init__(self, width: int = 640, height: int = 420, margin: int = 60):
        self.width = width
        self.height = height
        self.margin = margin
        self.svg_template = '''<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">
<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>
<text x="{title_x}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>
{content}
<text x="{title_x}" y="{xlabel_y}" font-family="sans-serif" font-size="12" text-anchor="middle">{x_label}</text>
<text x="16" y="{ylabel_y}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {ylabel_y})">{y_label}</text>
</svg>
'''

    def _scale(self, lo: float, hi: float, pixel_lo: float, pixel_hi: float):
        span = hi - lo if hi > lo else 1.0
        return lambda value: pixel_lo + (value - lo) / span * (pixel_hi - pixel_lo)

    def _axes(self, parts: List[str], x_range, y_range, to_x, to_y, log_y: bool) -> None:
        left, right = self.margin, self.width - self.margin
        top, bottom = self.margin, self.height - self.margin
        parts.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>')
        parts.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>')

        for i in range(6):
            x = x_range[0] + (x_range[1] - x_range[0]) * i / 5
            px = to_x(x)
            parts.append(f'<line x1="{px:.2f}" y1="{bottom}" x2="{px:.2f}" y2="{bottom + 5}" stroke="black"/>')
            parts.append(f'<text x="{px:.2f}" y="{bottom + 18}" font-family="sans-serif" font-size="10" '
                         f'text-anchor="middle">{x:.3g}</text>')

        if log_y:
            ticks = [float(k) for k in range(math.floor(y_range[0]), math.ceil(y_range[1]) + 1)]
            labels = [f'1e{int(k)}' for k in ticks]
        else:
            ticks = [y_range[0] + (y_range[1] - y_range[0]) * i / 5 for i in range(6)]
            labels = [f'{y:.3g}' for y in ticks]
        for y, label in zip(ticks, labels):
            py = to_y(y)
            parts.append(f'<line x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>')
            parts.append(f'<text x="{left - 8}" y="{py + 3:.2f}" font-family="sans-serif" font-size="10" '
                         f'text-anchor="end">{label}</text>')

    def render_line_chart(self, series: Series, title: str = '', x_label: str = '',
                          y_label: str = '', log_y: bool = False) -> str:
        """Return the SVG text; series are drawn in insertion order"""
        points = {name: [(float(x), float(y)) for x, y in data] for name, data in series.items() if data}
        if log_y:
            points = {name: [(x, math.log10(y)) for x, y in data if y > 0] for name, data in points.items()}
        xs = [x for data in points.values() for x, _ in data]
        ys = [y for data in points.values() for _, y in data]

        parts: List[str] = []
        if xs:
            x_range = (min(xs), max(xs))
            y_range = (min(ys), max(ys))
            if log_y:
                y_range = (math.floor(y_range[0]), math.ceil(y_range[1]))
            to_x = self._scale(*x_range, self.margin, self.width - self.margin)
            to_y = self._scale(*y_range, self.height - self.margin, self.margin)
            self._axes(parts, x_range, y_range, to_x, to_y, log_y)

            for index, (name, data) in enumerate(points.items()):
                color = PALETTE[index % len(PALETTE)]
                coords = ' '.join(f'{to_x(x):.2f},{to_y(y):.2f}' for x, y in data)
                parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
                legend_y = self.margin + 16 * index
                legend_x = self.width - self.margin - 150
                parts.append(f'<line x1="{legend_x}" y1="{legend_y}" x2="{legend_x + 20}" y2="{legend_y}" '
                             f'stroke="{color}" stroke-width="2"/>')
                parts.append(f'<text x="{legend_x + 26}" y="{legend_y + 4}" font-family="sans-serif" '
                             f'font-size="11">{_escape(name)}</text>')
        else:
            logger.warning("No data points for SVG chart")

        return self.svg_template.format(
            width=self.width, height=self.height, title_x=self.width // 2,
            title=_escape(title), content='\n'.join(parts),
            xlabel_y=self.height - 16, x_label=_escape(x_label),
            ylabel_y=self.height // 2, y_label=_escape(y_label),
        )

    def generate_line_chart(self, series: Series, output_file: Union[str, Path],
                            title: str = '', x_label: str = '', y_label: str = '',
                            log_y: bool = False) -> str:
        svg = self.render_line_chart(series, title, x_label, y_label, log_y)
        Path(output_file).parent.mkdir(parents=True, exist_ok=True)
        with open(output_file, 'w', encoding='utf-8') as f:
            f.write(svg)
        logger.info(f"SVG chart written: {output_file} ({len(series)} series)")
        return svg


def _escape(text: Optional[str]) -> str:
    return (text or '').replace('&', '&amp;').replace('<', '&lt;').replace('>', '&gt;')
