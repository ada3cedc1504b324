"""
render.py

Deterministic SVG drawings built with xml.etree.ElementTree:

- construction rectangles level by level, darker with depth, inside the outline of Q,
  with optional overlays for ending lines, the horizontal projection, its certified gaps
  and vertical slices;
- rescaled tangent clouds with their fitted product form.

Coordinates are written with six decimals, so identical inputs give identical bytes.
"""

import logging
import xml.etree.ElementTree as ET
import numpy as np
from carpet_lab.conditions import horizontal_projection
from carpet_lab.ifs_core import CarpetSpec
from carpet_lab.ifs_core import level_rects
from carpet_lab.intervals import IntervalUnion1D
from carpet_lab.tangents import ProductForm
from carpet_lab.tangents import TangentCloud

logger = logging.getLogger('root')

SVG_NAMESPACE = 'http://www.w3.org/2000/svg'
CANVAS = 800.0
PADDING = 40.0
BAR_OFFSET = 16.0


def _fmt(value: float) -> str:
    return f'{float(value):.6f}'


class _Frame:
    """Maps plane coordinates to canvas coordinates with the y axis pointing up."""

    def __init__(self, xmin: float, xmax: float, ymin: float, ymax: float) -> None:
        span = max(xmax - xmin, ymax - ymin) or 1.0
        self.scale = CANVAS / span
        self.xmin = xmin
        self.ymax = ymax
        self.width = (xmax - xmin) * self.scale + 2 * PADDING
        self.height = (ymax - ymin) * self.scale + 2 * PADDING + 2 * BAR_OFFSET

    def x(self, value: float) -> float:
        return (value - self.xmin) * self.scale + PADDING

    def y(self, value: float) -> float:
        return (self.ymax - value) * self.scale + PADDING

    def root(self) -> ET.Element:
        return ET.Element('svg', {
            'xmlns': SVG_NAMESPACE,
            'width': _fmt(self.width),
            'height': _fmt(self.height),
            'viewBox': f'0 0 {_fmt(self.width)} {_fmt(self.height)}'
        })


def _rect(parent: ET.Element, frame: _Frame, row, css_class: str, **attributes) -> ET.Element:
    xmin, xmax, ymin, ymax = (float(v) for v in row)
    return ET.SubElement(parent, 'rect', {
        'class': css_class,
        'x': _fmt(frame.x(xmin)),
        'y': _fmt(frame.y(ymax)),
        'width': _fmt((xmax - xmin) * frame.scale),
        'height': _fmt((ymax - ymin) * frame.scale),
        **attributes
    })


def _line(parent: ET.Element, frame: _Frame, start, end, css_class: str, **attributes) -> ET.Element:
    return ET.SubElement(parent, 'line', {
        'class': css_class,
        'x1': _fmt(frame.x(start[0])),
        'y1': _fmt(frame.y(start[1])),
        'x2': _fmt(frame.x(end[0])),
        'y2': _fmt(frame.y(end[1])),
        **attributes
    })


def render_construction(spec: CarpetSpec,
                        depth: int,
                        endings: bool = False,
                        projection: bool = False,
                        slices: list[tuple[float, IntervalUnion1D]] | None = None) -> str:
    """SVG of the construction rectangles of levels 1..depth inside Q."""

    q = spec.q
    frame = _Frame(*q.as_floats())
    root = frame.root()
    _rect(root, frame, q.as_floats(), 'hull', fill='none', stroke='black')

    rows = None
    for level in range(1, depth + 1):
        group = ET.SubElement(root, 'g', {
            'class': 'level',
            'data-level': str(level),
            'fill': 'black',
            'fill-opacity': _fmt(0.15 + 0.6 * level / depth)
        })
        rows = level_rects(spec, level)
        for row in rows:
            _rect(group, frame, row, 'construction')

    if endings and rows is not None:
        abscissae = np.unique(np.round(rows[:, 0:2].ravel(), 12))
        for x in abscissae:
            _line(root, frame, (x, float(q.ymin)), (x, float(q.ymax)), 'ending',
                  stroke='gray', **{'stroke-dasharray': '4 4'})

    if projection:
        outer, gaps = horizontal_projection(spec, max(depth, 1))
        bar = float(q.ymin) - BAR_OFFSET / frame.scale
        for lo, hi in outer.to_rows():
            _line(root, frame, (lo, bar), (hi, bar), 'projection', stroke='black', **{'stroke-width': '4'})
        for lo, hi in gaps.to_rows():
            _line(root, frame, (lo, bar), (hi, bar), 'gap', stroke='red', **{'stroke-width': '2'})

    for x, shape in slices or ():
        for lo, hi in shape.to_rows():
            _line(root, frame, (x, lo), (x, hi), 'slice', stroke='blue', **{'stroke-width': '2'})

    logger.debug('rendered %s levels of construction rectangles', depth)
    return ET.tostring(root, encoding='unicode')


def render_cloud(cloud: TangentCloud, form: ProductForm | None = None) -> str:
    """SVG of a rescaled window B(0, R) with its points and fitted product form."""

    radius = cloud.radius
    frame = _Frame(-radius, radius, -radius, radius)
    root = frame.root()
    ET.SubElement(root, 'circle', {
        'class': 'window',
        'cx': _fmt(frame.x(0.0)),
        'cy': _fmt(frame.y(0.0)),
        'r': _fmt(radius * frame.scale),
        'fill': 'none',
        'stroke': 'black'
    })
    group = ET.SubElement(root, 'g', {'class': 'cloud', 'fill': 'black'})
    for x, y in cloud.points:
        ET.SubElement(group, 'circle', {'cx': _fmt(frame.x(x)), 'cy': _fmt(frame.y(y)), 'r': '1.000000'})

    if form is not None:
        _line(root, frame, (form.w, -radius), (form.w, radius), 'split',
              stroke='red', **{'stroke-dasharray': '4 4'})
        split = min(max(form.w, -radius), radius)
        for union, lo_x, hi_x in ((form.c_left, -radius, split), (form.c_right, split, radius)):
            for lo, hi in union.clip(-radius, radius).to_rows():
                _rect(root, frame, (lo_x, hi_x, lo, hi), 'model',
                      fill='blue', **{'fill-opacity': '0.25'})
    return ET.tostring(root, encoding='unicode')
