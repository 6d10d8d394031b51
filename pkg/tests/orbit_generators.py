"""Seeded synthetic orbit point sets; the generator's label is the ground truth."""

import numpy as np


def jittered_circle(rng, n=None, radius=None, jitter=0.1):
    n = n or int(rng.integers(80, 200))
    radius = radius or float(rng.uniform(0.5, 5.0))
    theta = np.linspace(0, 2 * np.pi, n, endpoint=False) + rng.uniform(0, 2 * np.pi)
    spacing = 2 * np.pi * radius / n
    theta = theta + rng.normal(0, jitter * spacing / radius, n)
    r = radius + rng.normal(0, jitter * spacing, n)
    pts = np.c_[r * np.cos(theta), r * np.sin(theta)] + rng.uniform(-5, 5, 2)
    return pts


def jittered_arc(rng, n=None, jitter=0.1):
    n = n or int(rng.integers(60, 160))
    radius = float(rng.uniform(0.5, 5.0))
    span = float(rng.uniform(np.pi / 3, 1.5 * np.pi))
    start = float(rng.uniform(0, 2 * np.pi))
    theta = start + np.linspace(0, span, n)
    spacing = span * radius / (n - 1)
    r = radius + rng.normal(0, jitter * spacing, n)
    theta = theta + rng.normal(0, jitter * spacing / radius, n)
    return np.c_[r * np.cos(theta), r * np.sin(theta)] + rng.uniform(-5, 5, 2)


def jittered_line(rng, n=None, jitter=0.1):
    n = n or int(rng.integers(40, 150))
    a = rng.uniform(-5, 5, 2)
    b = a + rng.normal(size=2) * 4
    t = np.linspace(0, 1, n)
    spacing = np.linalg.norm(b - a) / (n - 1)
    return a + np.outer(t, b - a) + rng.normal(0, jitter * spacing, (n, 2))


def blobs(rng, k=None, per_blob=None, sigma=0.05):
    k = k or int(rng.integers(2, 5))
    centers = []
    while len(centers) < k:
        c = rng.uniform(-3, 3, 2)
        if all(np.linalg.norm(c - d) > 40 * sigma for d in centers):
            centers.append(c)
    parts = [c + rng.normal(0, sigma, (per_blob or int(rng.integers(30, 60)), 2)) for c in centers]
    return np.vstack(parts), k


def tight_dot(rng, n=None, spread=1e-10):
    n = n or int(rng.integers(1, 20))
    return rng.uniform(-5, 5, 2) + rng.normal(0, spread, (n, 2))


def rigid_motion(rng, pts):
    angle = rng.uniform(0, 2 * np.pi)
    rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    scale = float(np.exp(rng.uniform(np.log(0.1), np.log(10))))
    return scale * (pts @ rot.T) + rng.uniform(-10, 10, 2)


def suite(seed=2024, per_kind=25):
    """(points, expected label, expected cluster count or None) triples."""
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(per_kind):
        cases.append((jittered_circle(rng), "closed-curve", 1))
    for i in range(per_kind):
        pts = jittered_arc(rng) if i % 2 == 0 else jittered_line(rng)
        cases.append((pts, "open-curve", 1))
    for _ in range(per_kind):
        pts, k = blobs(rng)
        cases.append((pts, "island-chain", k))
    for _ in range(per_kind):
        cases.append((tight_dot(rng), "fixed-point", 1))
    return cases
