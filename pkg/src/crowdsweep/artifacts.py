"""Run artifacts: trajectory and diagnostics CSV, manifest JSON, SVG frames.

CSV floats carry 17 significant digits so dumps round-trip losslessly and
identical runs produce bitwise-identical files.  Frames are plain SVG text:
deterministic output, no raster dependencies, testable by string inspection.
"""

import json
import math

import numpy as np


def fmt(x):
    return format(float(x), ".17g")


def trajectory_csv(traj):
    """Rows (t, particle_id, x.., v..); the final row repeats the last interval's v."""
    d = traj.dim
    header = ["t", "particle_id"] + [f"x{j + 1}" for j in range(d)] \
        + [f"v{j + 1}" for j in range(d)]
    lines = [",".join(header)]
    n_times = len(traj.times)
    for i in range(n_times):
        vel_idx = min(i, n_times - 2)
        for p in range(traj.n_particles):
            row = [fmt(traj.times[i]), str(p)]
            row += [fmt(v) for v in traj.positions[i, p]]
            row += [fmt(v) for v in traj.velocities[vel_idx, p]]
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def diagnostics_csv(rows):
    """Rows (t, invariant_name, value, bound, pass)."""
    lines = ["t,invariant_name,value,bound,pass"]
    for r in rows:
        bound = "" if (isinstance(r.bound, float) and math.isnan(r.bound)) else fmt(r.bound)
        lines.append(f"{fmt(r.t)},{r.name},{fmt(r.value)},{bound},{str(bool(r.ok)).lower()}")
    return "\n".join(lines) + "\n"


def write_manifest(path, data):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_cloud_csv(path):
    """Read particle positions from a cloud or trajectory CSV.

    Trajectory dumps contribute their final time; bare coordinate files (with
    or without a header) are taken as one cloud.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path} is empty")
    header = lines[0].split(",")
    if header[0] == "t":
        xcols = [i for i, name in enumerate(header) if name.startswith("x")]
        rows = [ln.split(",") for ln in lines[1:]]
        t_last = max(float(r[0]) for r in rows)
        pts = [[float(r[i]) for i in xcols] for r in rows if float(r[0]) == t_last]
        return np.asarray(pts)
    start = 0
    try:
        [float(v) for v in lines[0].split(",")]
    except ValueError:
        start = 1
    return np.asarray([[float(v) for v in ln.split(",")] for ln in lines[start:]])


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------

def _f(x):
    return format(float(x), ".6f")


def _shape_elements(descriptor):
    kind = descriptor[0]
    if kind == "intersection":
        parts = []
        for sub in descriptor[1]:
            parts.extend(_shape_elements(sub))
        return parts
    if kind == "ellipse_complement":
        (cx, cy), (a1, a2), angle = descriptor[1], descriptor[2], descriptor[3]
        deg = math.degrees(angle)
        return [f'<ellipse cx="{_f(cx)}" cy="{_f(-cy)}" rx="{_f(a1)}" ry="{_f(a2)}" '
                f'transform="rotate({_f(-deg)} {_f(cx)} {_f(-cy)})" class="obstacle"/>']
    if kind in ("ball", "ball_complement"):
        (cx, cy), r = descriptor[1], descriptor[2]
        return [f'<circle cx="{_f(cx)}" cy="{_f(-cy)}" r="{_f(r)}" class="obstacle"/>']
    if kind == "halfspace":
        (nx, ny), c = descriptor[1], descriptor[2]
        ax, ay = nx * c, ny * c
        tx, ty = -ny, nx
        span = 64.0
        return [f'<line x1="{_f(ax - span * tx)}" y1="{_f(-(ay - span * ty))}" '
                f'x2="{_f(ax + span * tx)}" y2="{_f(-(ay + span * ty))}" class="boundary"/>']
    if kind == "wall_with_exit":
        wx, half, thick, ec = descriptor[1], descriptor[2], descriptor[3], descriptor[4]
        span = 64.0
        top = (f'<line x1="{_f(wx)}" y1="{_f(-(ec + half))}" x2="{_f(wx)}" '
               f'y2="{_f(-(ec + half + span))}" class="wall" '
               f'stroke-width="{_f(2 * thick)}"/>')
        bot = (f'<line x1="{_f(wx)}" y1="{_f(-(ec - half))}" x2="{_f(wx)}" '
               f'y2="{_f(-(ec - half - span))}" class="wall" '
               f'stroke-width="{_f(2 * thick)}"/>')
        return [top, bot]
    if kind == "box":
        (x0, y0), (x1, y1) = descriptor[1], descriptor[2]
        return [f'<rect x="{_f(x0)}" y="{_f(-y1)}" width="{_f(x1 - x0)}" '
                f'height="{_f(y1 - y0)}" class="boundary"/>']
    return []


def frame_svg(shape, positions, workspace, time_label=""):
    """One SVG frame: obstacle outline, wall, particles.

    World y points up; SVG coordinates are emitted with y negated so the frame
    reads like the published figures.
    """
    (x0, y0), (x1, y1) = workspace.lo, workspace.hi
    width, height = x1 - x0, y1 - y0
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="{_f(x0)} {_f(-y1)} {_f(width)} {_f(height)}" '
            f'width="640" height="{int(640 * height / width)}">')
    style = ('<style>.obstacle{fill:#bbbbbb;stroke:#555555;stroke-width:0.02}'
             '.wall{stroke:#333333;stroke-linecap:round}'
             '.boundary{stroke:#555555;stroke-width:0.02;fill:none}'
             '.p{fill:#1f6fb2}</style>')
    body = list(_shape_elements(shape.descriptor()))
    for x, y in positions:
        body.append(f'<circle cx="{_f(x)}" cy="{_f(-y)}" r="0.05" class="p"/>')
    label = (f'<text x="{_f(x0 + 0.2)}" y="{_f(-y1 + 0.6)}" font-size="0.5">'
             f'{time_label}</text>') if time_label else ""
    return "\n".join([head, style, *body, label, "</svg>"]) + "\n"
