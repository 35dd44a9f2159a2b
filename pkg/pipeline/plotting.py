"""
Self-contained SVG bar chart of mean accuracy per variant, with one dot per
run and the mean printed above each bar.
"""

import math
from xml.sax.saxutils import escape

WIDTH = 640
HEIGHT = 420
MARGIN_LEFT = 70
MARGIN_RIGHT = 30
MARGIN_TOP = 50
MARGIN_BOTTOM = 60

BAR_COLORS = ('#4c72b0', '#dd8452', '#55a868')


class SvgBuilder:
    def __init__(self):
        self.svg = ""

    def header(self, width, height):
        self.svg += (
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
            f'<svg version="1.1" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" xmlns="http://www.w3.org/2000/svg">\n'
        )

    def group_start(self, attr):
        g_attr = [f'{key}="{escape(str(value))}"' for key, value in attr.items()]
        self.svg += f'<g {" ".join(g_attr)}>\n'

    def group_end(self):
        self.svg += '</g>\n'

    def filled_rectangle(self, x1, y1, x2, y2, fill, extra=""):
        width = x2 - x1
        height = y2 - y1
        self.svg += (f'<rect x="{x1:.3f}" y="{y1:.3f}" width="{width:.3f}" '
                     f'height="{height:.3f}" fill="{fill}" {extra}/>\n')

    def circle(self, cx, cy, r, fill, extra=""):
        self.svg += f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{r}" fill="{fill}" {extra}/>\n'

    def line(self, x1, y1, x2, y2, stroke='#333333'):
        self.svg += (f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" '
                     f'stroke="{stroke}" stroke-width="1"/>\n')

    def string_ttf(self, x, y, string, extra=""):
        self.svg += f'<text x="{x:.3f}" y="{y:.3f}" {extra}>{escape(string)}</text>\n'

    def get_svg(self):
        return f"{self.svg}</svg>\n"


def axis_floor(reports):
    """Lower end of the accuracy axis: a step of 0.05 below every plotted value."""
    lowest = min(min(m.accuracy for m in report.runs) for report in reports)
    return max(0.0, math.floor((lowest - 0.01) * 20) / 20)


def bar_height(value, low, plot_height):
    return (value - low) / (1.0 - low) * plot_height if low < 1.0 else 0.0


def accuracy_chart(reports):
    """SVG text comparing the mean accuracy of the given reports."""
    reports = list(reports)
    low = axis_floor(reports)
    plot_height = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    plot_width = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    baseline_y = MARGIN_TOP + plot_height
    slot = plot_width / len(reports)
    bar_width = slot * 0.5

    svg = SvgBuilder()
    svg.header(WIDTH, HEIGHT)
    svg.string_ttf(WIDTH / 2, 28, "Mean test accuracy per variant",
                   'text-anchor="middle" font-family="sans-serif" font-size="16"')
    svg.line(MARGIN_LEFT, MARGIN_TOP, MARGIN_LEFT, baseline_y)
    svg.line(MARGIN_LEFT, baseline_y, WIDTH - MARGIN_RIGHT, baseline_y)
    for step in range(5):
        tick = low + (1.0 - low) * step / 4
        y = baseline_y - bar_height(tick, low, plot_height)
        svg.line(MARGIN_LEFT - 4, y, MARGIN_LEFT, y)
        svg.string_ttf(MARGIN_LEFT - 8, y + 4, f"{tick:.3f}",
                       'text-anchor="end" font-family="sans-serif" font-size="11"')

    for index, report in enumerate(reports):
        color = BAR_COLORS[index % len(BAR_COLORS)]
        left = MARGIN_LEFT + slot * index + (slot - bar_width) / 2
        center = left + bar_width / 2
        height = bar_height(report.mean_accuracy, low, plot_height)

        svg.group_start({'class': 'variant', 'data-variant': report.variant})
        svg.filled_rectangle(left, baseline_y - height, left + bar_width, baseline_y, color,
                             f'class="bar" data-mean="{report.mean_accuracy!r}"')
        for run_index, (seed, metrics) in enumerate(zip(report.seeds, report.runs)):
            offset = (run_index - (len(report.runs) - 1) / 2) * min(6.0, bar_width / max(len(report.runs), 1))
            svg.circle(center + offset, baseline_y - bar_height(metrics.accuracy, low, plot_height),
                       3, '#222222',
                       f'class="run" data-seed="{seed}" data-accuracy="{metrics.accuracy!r}"')
        svg.string_ttf(center, baseline_y - height - 8, f"{report.mean_accuracy:.4f}",
                       'text-anchor="middle" font-family="sans-serif" font-size="12"')
        svg.string_ttf(center, baseline_y + 20, report.variant,
                       'text-anchor="middle" font-family="sans-serif" font-size="12"')
        svg.group_end()

    return svg.get_svg()
