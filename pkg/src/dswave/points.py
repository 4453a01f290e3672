"""Point sets on the unit 2-torus and baseline generators.

All generators are deterministic under a fixed seed; randomness comes from
``numpy.random.Generator(PCG64)`` so independent streams can be derived
with ``SeedSequence.spawn``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PointSet",
    "toroidal_delta",
    "toroidal_distance",
    "MAX_TOROIDAL_DISTANCE",
    "generate_random",
    "generate_poisson",
    "generate_dart_throwing",
    "generate_regular",
    "save_points",
    "load_points",
]

# Per-axis wrap caps any coordinate difference at 1/2.
MAX_TOROIDAL_DISTANCE = np.sqrt(2.0) / 2.0


@dataclass
class PointSet:
    """N points in [0,1)^2; intensity lambda = N on the unit-volume torus."""

    points: np.ndarray
    seed: int = 0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 2 or len(self.points) < 1:
            raise ValueError("points must be an (N, 2) array with N >= 1")
        if np.any(self.points < 0) or np.any(self.points >= 1):
            raise ValueError("coordinates must lie in [0, 1)")

    @property
    def n(self) -> int:
        return len(self.points)


def toroidal_delta(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Shortest displacement vector(s) from b to a under per-axis wrap."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return d - np.round(d)


def toroidal_distance(a, b) -> np.ndarray:
    """Toroidal Euclidean distance; maximum possible value is sqrt(2)/2."""
    d = toroidal_delta(a, b)
    return np.sqrt(np.sum(d * d, axis=-1))


def generate_random(n: int, seed: int) -> PointSet:
    """n i.i.d. uniform points."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    return PointSet(points=rng.random((n, 2)), seed=seed)


def generate_poisson(mean_n: float, seed: int) -> PointSet:
    """Homogeneous Poisson realization: Poisson-distributed count, uniform points.

    Unlike generate_random the point count varies between realizations,
    which is the idealization under which the count term of the error
    theory carries its full weight at zero frequency.
    """
    if mean_n <= 0:
        raise ValueError("mean_n must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    n = max(1, int(rng.poisson(mean_n)))
    return PointSet(points=rng.random((n, 2)), seed=seed)


def generate_regular(n: int) -> PointSet:
    """sqrt(n) x sqrt(n) lattice with half-cell offset."""
    side = int(round(np.sqrt(n)))
    if side * side != n:
        raise ValueError(f"n must be a perfect square, got {n}")
    c = (np.arange(side) + 0.5) / side
    xx, yy = np.meshgrid(c, c, indexing="ij")
    return PointSet(points=np.column_stack([xx.ravel(), yy.ravel()]), seed=0)


def generate_dart_throwing(n: int, min_dist_abs: float, seed: int,
                           max_attempts: int = 10_000) -> PointSet:
    """Uniform candidates accepted only when at least min_dist_abs from all
    accepted points (toroidal); errors out after max_attempts consecutive
    rejections.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if min_dist_abs < 0:
        raise ValueError("min_dist_abs must be >= 0")
    if min_dist_abs > MAX_TOROIDAL_DISTANCE:
        raise ValueError(
            f"min_dist_abs {min_dist_abs} exceeds the maximum toroidal "
            f"distance {MAX_TOROIDAL_DISTANCE:.6f}")
    rng = np.random.Generator(np.random.PCG64(seed))
    if min_dist_abs == 0.0:
        return PointSet(points=rng.random((n, 2)), seed=seed)

    # Background grid with cell size ~ min_dist/sqrt(2) for O(1) conflict
    # checks; ring radius chosen so every cell within min_dist is visited.
    cells = max(1, min(int(np.ceil(np.sqrt(2.0) / min_dist_abs)), 2048))
    ring = int(np.ceil(min_dist_abs * cells))
    occupants: dict = {}
    pts = np.empty((n, 2))
    d2_min = min_dist_abs * min_dist_abs
    count = 0
    rejects = 0
    while count < n:
        cand = rng.random(2)
        ci = int(cand[0] * cells)
        cj = int(cand[1] * cells)
        ok = True
        for di in range(-ring, ring + 1):
            for dj in range(-ring, ring + 1):
                for idx in occupants.get(((ci + di) % cells, (cj + dj) % cells), ()):
                    d = toroidal_delta(cand, pts[idx])
                    if d[0] * d[0] + d[1] * d[1] < d2_min:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            pts[count] = cand
            occupants.setdefault((ci, cj), []).append(count)
            count += 1
            rejects = 0
        else:
            rejects += 1
            if rejects >= max_attempts:
                raise RuntimeError(
                    f"dart throwing saturated: {rejects} consecutive rejections "
                    f"after {count}/{n} points at min_dist {min_dist_abs}")
    return PointSet(points=pts, seed=seed)


def save_points(point_set: PointSet, path) -> None:
    """Write `N 2` header then one `x y` line per point (>= 9 significant digits)."""
    with open(path, "w") as fh:
        fh.write(f"{point_set.n} 2\n")
        for x, y in point_set.points:
            fh.write(f"{x:.12g} {y:.12g}\n")


def load_points(path) -> PointSet:
    """Read a point-set file written by save_points, validating ranges."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[1] != "2":
            raise ValueError(f"{path}: malformed point-set header")
        n = int(header[0])
        pts = np.loadtxt(fh, ndmin=2)
    if pts.shape != (n, 2):
        raise ValueError(f"{path}: expected {n} rows, got {pts.shape[0]}")
    if np.any(pts < 0) or np.any(pts >= 1):
        raise ValueError(f"{path}: coordinates outside [0, 1)")
    return PointSet(points=pts, seed=0)
