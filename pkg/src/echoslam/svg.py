"""Minimal SVG rendering of a reconstruction: room, points, mirror ghost."""

from __future__ import annotations

import numpy as np

_SCALE = 120.0  # pixels per meter
_PAD = 40.0


def _path(points, scale, ox, oy) -> str:
    cmds = []
    for i, (x, y) in enumerate(points):
        cmds.append(f"{'M' if i == 0 else 'L'} {ox + x * scale:.1f} {oy - y * scale:.1f}")
    return " ".join(cmds) + " Z"


def render_solution_svg(solution: dict, ghost: bool = False) -> str:
    """SVG picture of a solution dict (as produced by the reconstruction).

    Draws the room polygon and the three measurement points; with ``ghost``
    the mirror-image room and O3 (the reflection-ambiguous twin) are drawn
    dashed.
    """
    verts = np.asarray(solution["vertices"], dtype=float)
    o2 = np.asarray(solution["o2"], dtype=float)
    o3 = np.asarray(solution["o3"], dtype=float)
    pts = np.vstack([verts, [[0.0, 0.0]], [o2], [o3]])
    if ghost:
        pts = np.vstack([pts, verts * [1, -1], [o3 * [1, -1]]])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    width = (hi[0] - lo[0]) * _SCALE + 2 * _PAD
    height = (hi[1] - lo[1]) * _SCALE + 2 * _PAD
    ox = _PAD - lo[0] * _SCALE
    oy = height - _PAD + lo[1] * _SCALE

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<path d="{_path(verts, _SCALE, ox, oy)}" fill="none" stroke="black" stroke-width="2"/>',
    ]
    if ghost:
        parts.append(
            f'<path d="{_path(verts * [1, -1], _SCALE, ox, oy)}" fill="none" '
            'stroke="gray" stroke-width="1.5" stroke-dasharray="6,4"/>'
        )
        gx, gy = o3 * [1, -1]
        parts.append(
            f'<circle cx="{ox + gx * _SCALE:.1f}" cy="{oy - gy * _SCALE:.1f}" r="4" '
            'fill="none" stroke="gray" stroke-dasharray="2,2"/>'
        )
    for (x, y), name, color in (
        ((0.0, 0.0), "O1", "crimson"),
        (tuple(o2), "O2", "crimson"),
        (tuple(o3), "O3", "crimson"),
    ):
        cx, cy = ox + x * _SCALE, oy - y * _SCALE
        parts.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="4" fill="{color}"/>')
        parts.append(f'<text x="{cx + 6:.1f}" y="{cy - 6:.1f}" font-size="12">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
