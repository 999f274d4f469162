"""Minimal deterministic SVG 1.1 writer for spectral-region figures."""
from __future__ import annotations

import html
from dataclasses import dataclass, field

import numpy as np

from .spectral_region import (SpectralRegion, boundary_branches, classify, format_p,
                              upper_envelope)

PANEL_W = 320
PANEL_H = 260
MARGIN = 28
LANDMARK_NAMES = {"L": "x_L", "M": "x_M", "R": "x_R"}


def _num(v: float) -> str:
    # fixed precision keeps files byte-stable across platforms
    return f"{v:.3f}".rstrip("0").rstrip(".") if v == v else "0"


@dataclass
class Frame:
    """Affine map from data coordinates to panel pixels."""
    xmax: float
    ymax: float
    width: int = PANEL_W
    height: int = PANEL_H

    def px(self, x) -> np.ndarray:
        inner = self.width - 2 * MARGIN
        return MARGIN + (np.asarray(x) + self.xmax) / (2 * self.xmax) * inner

    def py(self, y) -> np.ndarray:
        inner = self.height - 2 * MARGIN
        return MARGIN + (self.ymax - np.asarray(y)) / (2 * self.ymax) * inner

    def path(self, xs, ys, close: bool = False) -> str:
        X, Y = self.px(xs), self.py(ys)
        parts = [f"{'M' if i == 0 else 'L'}{_num(a)},{_num(b)}" for i, (a, b) in enumerate(zip(X, Y))]
        return " ".join(parts) + (" Z" if close else "")


@dataclass
class Document:
    width: int
    height: int
    title: str
    config_text: str
    body: list = field(default_factory=list)

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">\n'
            f"<title>{html.escape(self.title)}</title>\n"
            f"<desc>{html.escape(self.config_text)}</desc>\n"
            "<style>.region{fill:#6a8fd0;fill-opacity:0.35;stroke:none}"
            ".boundary{fill:none;stroke:#1f3b73;stroke-width:1.5}"
            ".axis{stroke:#444;stroke-width:0.8}"
            ".landmark{fill:#b22222}"
            "text{font-family:sans-serif;font-size:11px}</style>\n"
        )
        return head + "".join(self.body) + "</svg>\n"


def _frame_for(region: SpectralRegion) -> Frame:
    t = region.threshold
    scale = max(region.lambda0, t, 1.0)
    return Frame(xmax=1.6 * scale + 1.0, ymax=max(1.0, 1.6 * t + 0.4))


def _axes(frame: Frame) -> str:
    x0, x1 = frame.px([-frame.xmax, frame.xmax])
    y0, y1 = frame.py([frame.ymax, -frame.ymax])
    cx, cy = float(frame.px(0.0)), float(frame.py(0.0))
    return (
        f'<line class="axis" x1="{_num(x0)}" y1="{_num(cy)}" x2="{_num(x1)}" y2="{_num(cy)}"/>\n'
        f'<line class="axis" x1="{_num(cx)}" y1="{_num(y0)}" x2="{_num(cx)}" y2="{_num(y1)}"/>\n'
        f'<text x="{_num(x1 - 16)}" y="{_num(cy - 4)}">Re</text>\n'
        f'<text x="{_num(cx + 4)}" y="{_num(y0 + 10)}">Im</text>\n'
    )


def _segments(mask: np.ndarray):
    """Index ranges of consecutive True runs."""
    edges = np.flatnonzero(np.diff(np.concatenate([[0], mask.astype(int), [0]])))
    return list(zip(edges[::2], edges[1::2]))


def region_panel(region: SpectralRegion, index: int, samples: int = 401) -> str:
    frame = _frame_for(region)
    case = classify(region)
    t = region.threshold
    out = [f'<g class="panel" id="panel-{index}" transform="translate({index * PANEL_W},0)">\n',
           f'<clipPath id="clip-{index}"><rect x="{MARGIN}" y="{MARGIN}" '
           f'width="{PANEL_W - 2 * MARGIN}" height="{PANEL_H - 2 * MARGIN}"/></clipPath>\n',
           _axes(frame)]
    caption = (f"c={_num(region.c)} k={region.k} lambda0={_num(region.lambda0)} "
               f"p={format_p(region.p)} case {case.tag}")
    out.append(f'<text x="{MARGIN}" y="16">{html.escape(caption)}</text>\n')
    out.append(f'<g clip-path="url(#clip-{index})">\n')
    if t > 0:
        xs = np.linspace(-frame.xmax, frame.xmax, samples)
        ys = upper_envelope(region, xs)
        for a, b in _segments(np.isfinite(ys)):
            sx, sy = xs[a:b], ys[a:b]
            d = frame.path(np.concatenate([sx, sx[::-1]]), np.concatenate([sy, -sy[::-1]]), close=True)
            out.append(f'<path class="region" d="{d}"/>\n')
        s_max = 2.0 * frame.xmax
        _, branches = boundary_branches(region, -s_max, s_max, samples)
        for branch in branches:
            out.append(f'<path class="boundary" d="{frame.path(branch.real, branch.imag)}"/>\n')
    else:
        # p = 2: the region degenerates to the two real rays |x| >= lambda0
        lam = region.lambda0
        for a, b in ((lam, frame.xmax), (-frame.xmax, -lam)):
            out.append(f'<path class="boundary ray" d="{frame.path([a, b], [0.0, 0.0])}"/>\n')
    out.append("</g>\n")
    if case.tag == "R" or case.landmark > 0:
        lx = case.landmark
        label = f"{LANDMARK_NAMES[case.tag]} = {case.landmark:.6g}"
        px, py = float(frame.px(lx)), float(frame.py(0.0))
        out.append(f'<circle class="landmark" cx="{_num(px)}" cy="{_num(py)}" r="2.5"/>\n')
        out.append(f'<text class="landmark-label" x="{_num(px + 3)}" y="{_num(py + 14)}">'
                   f"{html.escape(label)}</text>\n")
    out.append("</g>\n")
    return "".join(out)


def regions_svg(regions, config_text: str) -> str:
    doc = Document(width=PANEL_W * len(regions), height=PANEL_H,
                   title="L^p spectral regions", config_text=config_text)
    doc.body = [region_panel(r, i) for i, r in enumerate(regions)]
    return doc.render()


def parabolas_svg(s, d_squared, laplacian, shift: float, config_text: str) -> str:
    """Both parabolas in one panel with the real shift annotated."""
    pts = np.concatenate([d_squared, laplacian])
    xmax = float(np.max(np.abs(pts.real))) * 1.05 + 0.5
    ymax = float(np.max(np.abs(pts.imag))) * 1.05 + 0.5
    frame = Frame(xmax=xmax, ymax=ymax, width=2 * PANEL_W, height=2 * PANEL_H)
    body = [f'<g class="panel" id="panel-0">\n', _axes(frame),
            f'<path class="boundary d-squared" d="{frame.path(d_squared.real, d_squared.imag)}"/>\n',
            f'<path class="boundary laplacian" style="stroke-dasharray:5,3" '
            f'd="{frame.path(laplacian.real, laplacian.imag)}"/>\n']
    vx, lx = float(np.min(d_squared.real)), float(np.min(laplacian.real))
    y = float(frame.py(0.0)) - 6
    body.append(f'<line class="shift" x1="{_num(float(frame.px(vx)))}" y1="{_num(y)}" '
                f'x2="{_num(float(frame.px(lx)))}" y2="{_num(y)}" stroke="#b22222"/>\n')
    body.append(f'<text x="{MARGIN}" y="16">shift k^2/4 = {shift:.6g} '
                f'(solid: D^2, dashed: Laplacian)</text>\n')
    body.append("</g>\n")
    doc = Document(width=frame.width, height=frame.height,
                   title="D^2 and Laplacian L^p spectra", config_text=config_text, body=body)
    return doc.render()

