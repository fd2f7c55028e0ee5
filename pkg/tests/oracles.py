"""Independent reference implementations used only by the tests."""
import math

import mpmath
import numpy as np

mpmath.mp.dps = 50

SQUARE10 = [(0, 0), (10, 0), (10, 10), (0, 10)]
HEPTAGON = [(0.5, 3), (2, 1), (5, 2), (8, 4), (7, 7), (4, 8), (1, 5)]


def lens_closed_form(d, r):
    """Textbook intersection area of two radius-r discs at distance d,
    evaluated in 50-digit arithmetic to sidestep cancellation near tangency."""
    if d >= 2 * r:
        return 0.0
    d, r = mpmath.mpf(d), mpmath.mpf(r)
    return float(2 * r * r * mpmath.acos(d / (2 * r)) - d / 2 * mpmath.sqrt(4 * r * r - d * d))


def segment_closed_form(h, r):
    """Area of a disc of radius r beyond a line at distance h >= 0 from its centre."""
    if h >= r:
        return 0.0
    h, r = mpmath.mpf(h), mpmath.mpf(r)
    return float(r * r * mpmath.acos(h / r) - h * mpmath.sqrt(r * r - h * h))


def ray_cast_inside(p, verts):
    """Even-odd rule point in polygon."""
    x, y = p
    inside = False
    n = len(verts)
    for i in range(n):
        (x1, y1), (x2, y2) = verts[i], verts[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if xc > x:
                inside = not inside
    return inside


def segment_distance(p, a, b):
    p, a, b = (np.asarray(v, float) for v in (p, a, b))
    ab = b - a
    t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
    return float(np.hypot(*(p - a - t * ab)))


def boundary_distance(p, verts):
    n = len(verts)
    return min(segment_distance(p, verts[i], verts[(i + 1) % n]) for i in range(n))


def shoelace_abs(verts):
    v = np.asarray(verts, float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def mbr_sweep(verts, steps=3600):
    """Smallest bounding-box area over a fine sweep of orientations in [0, pi/2)."""
    v = np.asarray(verts, float)
    best = math.inf
    for th in np.linspace(0, math.pi / 2, steps, endpoint=False):
        c, s = math.cos(th), math.sin(th)
        u = v @ np.array([c, s])
        w = v @ np.array([-s, c])
        best = min(best, (u.max() - u.min()) * (w.max() - w.min()))
    return best


def mc_lens(d, r, samples, rng):
    """Monte Carlo lens area with its standard error; samples from the first disc's box."""
    pts = rng.uniform(-r, r, size=(samples, 2))
    in_a = pts[:, 0] ** 2 + pts[:, 1] ** 2 <= r * r
    in_b = (pts[:, 0] - d) ** 2 + pts[:, 1] ** 2 <= r * r
    p = np.mean(in_a & in_b)
    box = 4 * r * r
    return p * box, box * math.sqrt(p * (1 - p) / samples)


def mc_halfplane(h, r, samples, rng):
    pts = rng.uniform(-r, r, size=(samples, 2))
    hit = (pts[:, 0] ** 2 + pts[:, 1] ** 2 <= r * r) & (pts[:, 0] >= h)
    p = np.mean(hit)
    box = 4 * r * r
    return p * box, box * math.sqrt(p * (1 - p) / samples)


def mc_chunked(oracle, x, r, samples, rng, chunk=1_000_000):
    """Run ``oracle`` over ``samples`` points in chunks; combined mean and standard error."""
    box = 4 * r * r
    hits = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        value, _ = oracle(x, r, m, rng)
        hits += value / box * m
        done += m
    p = hits / samples
    return p * box, box * math.sqrt(p * (1 - p) / samples)
