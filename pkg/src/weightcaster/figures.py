"""Standalone SVG for 1-D results: data scatter, prediction curve, 2-sigma band."""

from xml.sax.saxutils import escape

import numpy as np

from .errors import DimensionError

WIDTH, HEIGHT = 720, 420
MARGIN = dict(left=60, right=20, top=30, bottom=50)


def _f(v):
    return f"{v:.2f}"


def _nice_ticks(lo, hi, n=6):
    span = hi - lo
    raw = span / max(n - 1, 1)
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    ticks = np.arange(start, hi + step * 1e-9, step)
    return [float(round(t, 10)) for t in ticks]


def band_halfwidth(variance):
    return 2.0 * np.sqrt(np.maximum(np.asarray(variance, dtype=np.float64), 0.0))


def render_svg(train_xy, test_xy, pred_x, pred_y, pred_var=None, title=""):
    """Return the SVG document as a string.

    ``train_xy``/``test_xy`` are (N, 2) arrays; predictions are sorted by x
    before the curve and band are drawn.
    """
    train_xy = np.asarray(train_xy, dtype=np.float64)
    test_xy = np.asarray(test_xy, dtype=np.float64)
    pred_x = np.asarray(pred_x, dtype=np.float64)
    if pred_x.ndim == 2:
        if pred_x.shape[1] != 1:
            raise DimensionError("plots support 1-D inputs only")
        pred_x = pred_x[:, 0]
    pred_y = np.asarray(pred_y, dtype=np.float64).reshape(len(pred_x), -1)
    if pred_y.shape[1] != 1 or train_xy.shape[1] != 2 or test_xy.shape[1] != 2:
        raise DimensionError("plots support 1-D inputs and outputs only")
    pred_y = pred_y[:, 0]
    order = np.argsort(pred_x, kind="stable")
    px, py = pred_x[order], pred_y[order]
    hw = None
    if pred_var is not None:
        hw = band_halfwidth(np.asarray(pred_var, dtype=np.float64).reshape(len(pred_x), -1)[:, 0])[order]

    xs = np.concatenate([train_xy[:, 0], test_xy[:, 0], px])
    ys = np.concatenate([train_xy[:, 1], test_xy[:, 1], py]
                        + ([py - hw, py + hw] if hw is not None else []))
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    L, R, T, B = MARGIN["left"], WIDTH - MARGIN["right"], MARGIN["top"], HEIGHT - MARGIN["bottom"]

    def sx(v):
        return L + (v - x0) / (x1 - x0) * (R - L)

    def sy(v):
        return B - (v - y0) / (y1 - y0) * (B - T)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>')
    # axes
    out.append(f'<line x1="{L}" y1="{B}" x2="{R}" y2="{B}" stroke="black"/>')
    out.append(f'<line x1="{L}" y1="{T}" x2="{L}" y2="{B}" stroke="black"/>')
    for t in _nice_ticks(x0, x1):
        out.append(f'<line x1="{_f(sx(t))}" y1="{B}" x2="{_f(sx(t))}" y2="{B + 5}" stroke="black"/>')
        out.append(f'<text x="{_f(sx(t))}" y="{B + 18}" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(y0, y1):
        out.append(f'<line x1="{L - 5}" y1="{_f(sy(t))}" x2="{L}" y2="{_f(sy(t))}" stroke="black"/>')
        out.append(f'<text x="{L - 8}" y="{_f(sy(t) + 4)}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{(L + R) / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">x</text>')
    out.append(f'<text x="16" y="{(T + B) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {(T + B) / 2:.1f})">y</text>')

    if hw is not None:
        upper = " ".join(f"{_f(sx(a))},{_f(sy(b))}" for a, b in zip(px, py + hw))
        lower = " ".join(f"{_f(sx(a))},{_f(sy(b))}" for a, b in zip(px[::-1], (py - hw)[::-1]))
        out.append(f'<polygon class="band" points="{upper} {lower}" fill="#4878d0" fill-opacity="0.25" stroke="none"/>')

    out.append('<g class="train" fill="#333333" fill-opacity="0.5">')
    out.extend(f'<circle cx="{_f(sx(a))}" cy="{_f(sy(b))}" r="1.6"/>' for a, b in train_xy)
    out.append("</g>")
    out.append('<g class="test" fill="none" stroke="#d65f5f" stroke-width="0.8">')
    out.extend(
        f'<path d="M{_f(sx(a) - 2)},{_f(sy(b) - 2)} L{_f(sx(a) + 2)},{_f(sy(b) + 2)} '
        f'M{_f(sx(a) - 2)},{_f(sy(b) + 2)} L{_f(sx(a) + 2)},{_f(sy(b) - 2)}"/>'
        for a, b in test_xy
    )
    out.append("</g>")
    line = " ".join(f"{_f(sx(a))},{_f(sy(b))}" for a, b in zip(px, py))
    out.append(f'<polyline class="prediction" points="{line}" fill="none" stroke="#4878d0" stroke-width="1.5"/>')

    # legend
    lx, ly = R - 150, T + 10
    out.append(f'<circle cx="{lx}" cy="{ly}" r="3" fill="#333333"/>'
               f'<text x="{lx + 10}" y="{ly + 4}">train</text>')
    out.append(f'<path d="M{lx - 3},{ly + 15} L{lx + 3},{ly + 21} M{lx - 3},{ly + 21} L{lx + 3},{ly + 15}" '
               f'stroke="#d65f5f"/><text x="{lx + 10}" y="{ly + 22}">test</text>')
    out.append(f'<line x1="{lx - 5}" y1="{ly + 36}" x2="{lx + 5}" y2="{ly + 36}" stroke="#4878d0" stroke-width="2"/>'
               f'<text x="{lx + 10}" y="{ly + 40}">prediction{" ± 2σ" if hw is not None else ""}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
