"""Flat 2-D geometry helpers: polylines, offsets, corner smoothing, projections.

World frame is x-east, y-north; headings are radians counterclockwise from +x.
All road geometry in the grid towns is axis-aligned except the smoothed corner
arcs, which are sampled quadratic beziers.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_angle(a: float) -> float:
    """Normalize to (-pi, pi]."""
    a = (a + np.pi) % TWO_PI - np.pi
    return np.pi if a == -np.pi else a


def unit(v: np.ndarray) -> np.ndarray:
    n = float(np.hypot(v[0], v[1]))
    if n == 0.0:
        raise ValueError("zero-length direction")
    return v / n


def right_normal(d: np.ndarray) -> np.ndarray:
    """Right-hand normal of a direction (x-east/y-north frame)."""
    return np.array([d[1], -d[0]])


def quad_bezier(p0, p1, p2, samples: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, samples)[:, None]
    return (1 - t) ** 2 * np.asarray(p0) + 2 * t * (1 - t) * np.asarray(p1) + t ** 2 * np.asarray(p2)


def line_intersection(p1, d1, p2, d2) -> np.ndarray:
    """Intersection of two lines given by point+direction; midpoint if parallel."""
    cross = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(cross) < 1e-9:
        return (np.asarray(p1) + np.asarray(p2)) / 2.0
    dp = np.asarray(p2) - np.asarray(p1)
    t = (dp[0] * d2[1] - dp[1] * d2[0]) / cross
    return np.asarray(p1) + t * np.asarray(d1)


def corner_join(p_in, d_in, p_out, d_out, samples: int = 12) -> np.ndarray:
    """Smooth connector from (p_in heading d_in) to (p_out heading d_out).

    Near-parallel directions give a straight segment; otherwise a quadratic
    bezier with its control point at the intersection of the two lane lines.
    """
    d_in, d_out = unit(np.asarray(d_in, float)), unit(np.asarray(d_out, float))
    if abs(d_in[0] * d_out[1] - d_in[1] * d_out[0]) < 1e-6:
        return np.stack([np.asarray(p_in, float), np.asarray(p_out, float)])
    ctrl = line_intersection(p_in, d_in, p_out, d_out)
    return quad_bezier(p_in, ctrl, p_out, samples)


def offset_polyline(points: np.ndarray, offset: float, setback: float,
                    samples: int = 12) -> np.ndarray:
    """Offset a polyline to the right of travel, smoothing interior corners.

    Each leg shifts by `offset` along its right normal; at every interior
    vertex the legs are pulled back `setback` meters and joined with a bezier
    arc so the result is drivable at speed.
    """
    pts = np.asarray(points, float)
    legs = []
    for i in range(len(pts) - 1):
        d = unit(pts[i + 1] - pts[i])
        r = right_normal(d)
        legs.append((pts[i] + r * offset, pts[i + 1] + r * offset, d))
    out = [legs[0][0][None, :]]
    for i in range(len(legs) - 1):
        a_start, a_end, a_dir = legs[i]
        b_start, b_end, b_dir = legs[i + 1]
        cut_a = a_end - a_dir * setback
        cut_b = b_start + b_dir * setback
        out.append(corner_join(cut_a, a_dir, cut_b, b_dir, samples)[:-1])
    out.append(legs[-1][1][None, :])
    merged = np.vstack(out)
    keep = np.ones(len(merged), bool)
    keep[1:] = np.linalg.norm(np.diff(merged, axis=0), axis=1) > 1e-9
    return merged[keep]


def polyline_lengths(pts: np.ndarray) -> np.ndarray:
    """Cumulative arc length per vertex, starting at 0."""
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def trim_polyline(pts: np.ndarray, s0: float, s1: float) -> np.ndarray:
    """Sub-polyline between arc lengths s0 and s1."""
    cum = polyline_lengths(pts)
    total = cum[-1]
    s0 = max(0.0, min(s0, total))
    s1 = max(s0, min(s1, total))
    a = point_on_polyline(pts, cum, s0)
    b = point_on_polyline(pts, cum, s1)
    inner = pts[(cum > s0 + 1e-9) & (cum < s1 - 1e-9)]
    return np.vstack([a[None, :], inner, b[None, :]])


def point_on_polyline(pts: np.ndarray, cum: np.ndarray, s: float) -> np.ndarray:
    s = min(max(s, 0.0), cum[-1])
    i = int(np.searchsorted(cum, s, side="right")) - 1
    i = min(max(i, 0), len(pts) - 2)
    span = cum[i + 1] - cum[i]
    f = 0.0 if span <= 0 else (s - cum[i]) / span
    return pts[i] + f * (pts[i + 1] - pts[i])


def project_to_polyline(pts: np.ndarray, cum: np.ndarray, p: np.ndarray,
                        s_lo: float = -np.inf, s_hi: float = np.inf):
    """Nearest point on the polyline to p, searching segments inside [s_lo, s_hi].

    Returns (s, signed_offset, seg_index); offset is positive left of travel.
    """
    a = pts[:-1]
    b = pts[1:]
    mask = (cum[1:] >= s_lo) & (cum[:-1] <= s_hi)
    if not mask.any():
        mask[:] = True
    idx = np.nonzero(mask)[0]
    av = a[idx]
    ab = b[idx] - av
    ln2 = np.maximum((ab * ab).sum(axis=1), 1e-12)
    t = np.clip(((p - av) * ab).sum(axis=1) / ln2, 0.0, 1.0)
    proj = av + t[:, None] * ab
    d2 = ((p - proj) ** 2).sum(axis=1)
    k = int(np.argmin(d2))
    seg = int(idx[k])
    direction = (b[seg] - a[seg]) / np.sqrt(ln2[k])
    rel = p - proj[k]
    signed = direction[0] * rel[1] - direction[1] * rel[0]
    s = float(cum[seg] + t[k] * np.sqrt(ln2[k]))
    return s, float(signed), seg
