"""Periodic domain with absorbing pockets.

The domain is the flat torus ``[0, 1)^d`` for ``d`` in ``{1, 2}``.  A finite
family of disjoint closed regions (2D disks, 1D intervals), called pockets,
is carved out of it; the open complement is the free region.  An optional
extra region of the same shape family serves as a hitting target and is kept
strictly away from every pocket.

All metric queries use the minimum-image convention per coordinate, so
distances are true torus distances as long as every region is small compared
with the period (enforced at construction).  Around each pocket a shell of
half-width ``delta`` is meaningful only when ``delta`` is below half the
smallest gap between regions and half the smallest pocket inradius; that
bound is exposed as ``Geometry.delta_max``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousProjection,
    DeltaTooLarge,
    InvalidGeometry,
    NotOnBoundary,
)

__all__ = [
    "Disk",
    "Interval",
    "Pocket",
    "Geometry",
    "RegionKind",
    "RegionTag",
    "minimage",
    "wrap_point",
    "torus_distance",
]

# Tolerances: membership of a surface and tie detection for projections.
BOUNDARY_TOL = 1e-9
TIE_TOL = 1e-12


def wrap_point(x) -> np.ndarray:
    """Map a point into the fundamental cell [0, 1)^d."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.mod(x, 1.0)


def minimage(dx) -> np.ndarray:
    """Shortest periodic representative of a displacement, in [-0.5, 0.5)."""
    dx = np.asarray(dx, dtype=float)
    return dx - np.round(dx)


def torus_distance(p, q) -> float:
    """Geodesic distance between two points of the torus."""
    d = minimage(np.atleast_1d(np.asarray(p, float)) - np.atleast_1d(np.asarray(q, float)))
    return float(np.sqrt(np.sum(d * d)))


@dataclass(frozen=True)
class Disk:
    """Closed disk on the 2-torus, radius strictly between 0 and 0.25."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not (0.0 < self.radius < 0.25):
            raise InvalidGeometry(
                f"disk radius must lie in (0, 0.25), got {self.radius}"
            )
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.center) != 2:
            raise InvalidGeometry("disk center must have two coordinates")

    @property
    def dimension(self) -> int:
        return 2

    @property
    def volume(self) -> float:
        return math.pi * self.radius**2

    @property
    def boundary_measure(self) -> float:
        return 2.0 * math.pi * self.radius

    @property
    def inradius(self) -> float:
        return self.radius

    def signed_distance(self, x) -> float:
        """Distance to the boundary, negative inside the region."""
        rho = torus_distance(x, np.asarray(self.center))
        return rho - self.radius


@dataclass(frozen=True)
class Interval:
    """Closed arc on the circle, length strictly between 0 and 0.5."""

    left: float
    length: float

    def __post_init__(self):
        if not (0.0 < self.length < 0.5):
            raise InvalidGeometry(
                f"interval length must lie in (0, 0.5), got {self.length}"
            )
        object.__setattr__(self, "left", float(self.left) % 1.0)
        object.__setattr__(self, "length", float(self.length))

    @property
    def dimension(self) -> int:
        return 1

    @property
    def right(self) -> float:
        return (self.left + self.length) % 1.0

    @property
    def volume(self) -> float:
        return self.length

    @property
    def boundary_measure(self) -> float:
        # Counting measure on the two endpoints.
        return 2.0

    @property
    def inradius(self) -> float:
        return self.length / 2.0

    def offset(self, x) -> float:
        """Arc coordinate of ``x`` measured from the left endpoint, in [0, 1)."""
        x = float(np.atleast_1d(np.asarray(x, float))[0])
        return (x - self.left) % 1.0

    def signed_distance(self, x) -> float:
        u = self.offset(x)
        if u <= self.length:
            # Inside (or on the boundary): depth below the nearer endpoint.
            return -min(u, self.length - u)
        return min(1.0 - u, u - self.length)


Shape = Disk | Interval


@dataclass(frozen=True)
class Pocket:
    """One pocket: an indexed shape carved out of the free region."""

    index: int
    shape: Shape

    @property
    def volume(self) -> float:
        return self.shape.volume

    @property
    def boundary_measure(self) -> float:
        return self.shape.boundary_measure

    @property
    def inradius(self) -> float:
        return self.shape.inradius

    def signed_distance(self, x) -> float:
        return self.shape.signed_distance(x)


class RegionKind(enum.Enum):
    DEEP_FREE = "deep_free"  # free region, farther than delta from every pocket
    SHELL = "shell"          # outside a pocket, within delta of its boundary
    BOUNDARY = "boundary"    # on a pocket boundary
    POCKET = "pocket"        # inside a pocket, within delta of its boundary
    INNER = "inner"          # inside a pocket, deeper than delta
    TARGET = "target"        # inside the closed hitting target


@dataclass(frozen=True)
class RegionTag:
    kind: RegionKind
    pocket: int | None = None

    def __str__(self) -> str:
        if self.pocket is None:
            return self.kind.value
        return f"{self.kind.value}({self.pocket})"


def _pair_gap(a: Shape, b: Shape) -> float:
    """Distance between the closures of two regions (negative on overlap)."""
    if isinstance(a, Disk) and isinstance(b, Disk):
        return torus_distance(a.center, b.center) - a.radius - b.radius
    assert isinstance(a, Interval) and isinstance(b, Interval)
    # Containment or straddling means overlap; otherwise the distance is
    # attained at a pair of endpoints.
    ua = a.offset(b.left)
    ub = b.offset(a.left)
    if ua <= a.length or ub <= b.length:
        return -min(ua, ub)  # any nonpositive value signals overlap
    ends_a = (a.left, a.right)
    ends_b = (b.left, b.right)
    return min(torus_distance(np.array([p]), np.array([q])) for p in ends_a for q in ends_b)


@dataclass(frozen=True)
class Geometry:
    """Torus of side 1 with disjoint pockets and an optional hitting target.

    Construction validates that all shapes share the requested dimension,
    that closures are pairwise disjoint with strictly positive gaps, that the
    target (when present) is disjoint from every pocket, and that the free
    region is nonempty.
    """

    dimension: int
    pockets: tuple[Pocket, ...]
    target: Shape | None = None
    side: float = 1.0
    min_gap: float = field(init=False)

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise InvalidGeometry(f"dimension must be 1 or 2, got {self.dimension}")
        if self.side != 1.0:
            raise InvalidGeometry("only the unit torus is supported")
        if not self.pockets:
            raise InvalidGeometry("at least one pocket is required")
        for k, p in enumerate(self.pockets):
            if p.index != k:
                raise InvalidGeometry(f"pocket {k} carries index {p.index}")
            if p.shape.dimension != self.dimension:
                raise InvalidGeometry(f"pocket {k} has wrong dimension")
        if self.target is not None and self.target.dimension != self.dimension:
            raise InvalidGeometry("target has wrong dimension")

        shapes = [p.shape for p in self.pockets]
        if self.target is not None:
            shapes.append(self.target)
        gaps = []
        for i in range(len(shapes)):
            for j in range(i + 1, len(shapes)):
                g = _pair_gap(shapes[i], shapes[j])
                if g <= 0.0:
                    raise InvalidGeometry(
                        f"regions {i} and {j} have intersecting closures (gap {g:.3g})"
                    )
                gaps.append(g)
        total = sum(s.volume for s in shapes)
        if total >= 1.0:
            raise InvalidGeometry("regions exhaust the torus; free region is empty")
        object.__setattr__(self, "min_gap", min(gaps) if gaps else math.inf)

    @property
    def n_pockets(self) -> int:
        return len(self.pockets)

    @property
    def delta_max(self) -> float:
        """Largest admissible shell half-width (exclusive bound)."""
        inr = min(p.inradius for p in self.pockets)
        return min(self.min_gap / 2.0, inr / 2.0)

    def validate_delta(self, delta: float) -> None:
        if not (0.0 < delta < self.delta_max):
            raise DeltaTooLarge(
                f"shell half-width {delta} outside (0, {self.delta_max:.6g})"
            )

    # -- point queries ----------------------------------------------------

    def _as_point(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dimension,):
            raise ValueError(f"expected a point of dimension {self.dimension}")
        return x

    def nearest_pocket(self, x) -> tuple[int, float, bool]:
        """Pocket index, distance to its boundary, and inside flag.

        A point interior to a pocket always reports that pocket with its
        depth, even if some other pocket's boundary happens to be closer.
        Outside every pocket the nearest boundary wins, ties broken by the
        lowest index.
        """
        x = self._as_point(x)
        best_k, best_h = 0, math.inf
        for p in self.pockets:
            s = p.signed_distance(x)
            if s < 0.0:
                return p.index, -s, True
            if s < best_h:
                best_k, best_h = p.index, s
        return best_k, best_h, False

    def project(self, x) -> np.ndarray:
        """Nearest point of the nearest pocket boundary.

        Raises :class:`AmbiguousProjection` where the nearest boundary point
        is not unique: the center of a disk, or (1D) a point equidistant from
        the two endpoints of the nearest pocket.
        """
        x = self._as_point(x)
        k, _, _ = self.nearest_pocket(x)
        shape = self.pockets[k].shape
        if isinstance(shape, Disk):
            c = np.asarray(shape.center)
            v = minimage(x - c)
            rho = float(np.sqrt(np.sum(v * v)))
            if rho <= TIE_TOL:
                raise AmbiguousProjection(
                    f"point coincides with the center of pocket {k}"
                )
            return wrap_point(c + (shape.radius / rho) * v)
        d_left = torus_distance(x, np.array([shape.left]))
        d_right = torus_distance(x, np.array([shape.right]))
        if abs(d_left - d_right) <= TIE_TOL:
            raise AmbiguousProjection(
                f"point equidistant from both endpoints of pocket {k}"
            )
        endpoint = shape.left if d_left < d_right else shape.right
        return np.array([endpoint % 1.0])

    def unit_normal(self, k: int, p) -> np.ndarray:
        """Unit normal of pocket ``k`` at boundary point ``p``.

        The normal points from the free region into the pocket.  ``p`` must
        lie on the boundary within ``BOUNDARY_TOL``.
        """
        p = self._as_point(p)
        shape = self.pockets[k].shape
        s = shape.signed_distance(p)
        if abs(s) > BOUNDARY_TOL:
            raise NotOnBoundary(
                f"point is {abs(s):.3g} away from the boundary of pocket {k}"
            )
        if isinstance(shape, Disk):
            v = minimage(np.asarray(shape.center) - p)
            norm = float(np.sqrt(np.sum(v * v)))
            return v / norm
        d_left = torus_distance(p, np.array([shape.left]))
        d_right = torus_distance(p, np.array([shape.right]))
        # Into the pocket: rightward at the left endpoint, leftward at the right.
        return np.array([1.0]) if d_left <= d_right else np.array([-1.0])

    def boundary_sample(self, k: int, u) -> np.ndarray:
        """Boundary point of pocket ``k`` drawn by uniform parameter ``u``.

        2D: ``u`` in [0, 1) is the angle fraction, so uniform ``u`` samples
        the normalized arc-length measure.  1D: ``u`` is a fair endpoint
        choice (left for ``u < 0.5``), matching the normalized counting
        measure.
        """
        u = float(u)
        if not (0.0 <= u < 1.0):
            raise ValueError(f"boundary parameter must lie in [0, 1), got {u}")
        shape = self.pockets[k].shape
        if isinstance(shape, Disk):
            ang = 2.0 * math.pi * u
            c = np.asarray(shape.center)
            return wrap_point(c + shape.radius * np.array([math.cos(ang), math.sin(ang)]))
        return np.array([shape.left if u < 0.5 else shape.right])

    def boundary_angle(self, k: int, p) -> float:
        """Inverse of ``boundary_sample`` for disks: parameter in [0, 1)."""
        p = self._as_point(p)
        shape = self.pockets[k].shape
        if not isinstance(shape, Disk):
            raise ValueError("boundary_angle is defined for disks only")
        v = minimage(p - np.asarray(shape.center))
        return float(math.atan2(v[1], v[0]) / (2.0 * math.pi) % 1.0)

    def classify(self, x, delta: float) -> RegionTag:
        """Region tag of a point for shell half-width ``delta``.

        The tags partition the torus up to the measure-zero boundary cases,
        which are resolved toward BOUNDARY / TARGET.
        """
        self.validate_delta(delta)
        x = self._as_point(x)
        if self.target is not None and self.target.signed_distance(x) <= TIE_TOL:
            return RegionTag(RegionKind.TARGET)
        k, h, inside = self.nearest_pocket(x)
        if h <= TIE_TOL:
            return RegionTag(RegionKind.BOUNDARY, k)
        if inside:
            kind = RegionKind.INNER if h > delta else RegionKind.POCKET
            return RegionTag(kind, k)
        if h < delta:
            return RegionTag(RegionKind.SHELL, k)
        return RegionTag(RegionKind.DEEP_FREE)

    # -- vectorized region codes (shared with the path engine) ------------

    @property
    def n_region_codes(self) -> int:
        return 2 + 4 * self.n_pockets

    def region_code(self, tag: RegionTag) -> int:
        if tag.kind is RegionKind.DEEP_FREE:
            return 0
        if tag.kind is RegionKind.TARGET:
            return 1
        offset = {
            RegionKind.SHELL: 0,
            RegionKind.BOUNDARY: 1,
            RegionKind.POCKET: 2,
            RegionKind.INNER: 3,
        }[tag.kind]
        return 2 + 4 * tag.pocket + offset

    def region_labels(self) -> list[str]:
        labels = ["deep_free", "target"]
        for k in range(self.n_pockets):
            labels += [f"shell_{k}", f"boundary_{k}", f"pocket_{k}", f"inner_{k}"]
        return labels

    def region_codes(self, xs: np.ndarray, delta: float) -> np.ndarray:
        """Vectorized ``classify`` returning integer codes.

        Codes: 0 deep free, 1 target, then per pocket ``k`` the block
        ``2 + 4k`` + (0 shell, 1 boundary, 2 pocket, 3 inner).
        """
        self.validate_delta(delta)
        xs = np.asarray(xs, dtype=float)
        if xs.ndim == 1:
            xs = xs[:, None]
        n = xs.shape[0]
        sdist = np.empty((self.n_pockets, n))
        for p in self.pockets:
            sh = p.shape
            if isinstance(sh, Disk):
                v = minimage(xs - np.asarray(sh.center))
                sdist[p.index] = np.sqrt(np.sum(v * v, axis=1)) - sh.radius
            else:
                u = np.mod(xs[:, 0] - sh.left, 1.0)
                inner = np.minimum(u, sh.length - u)
                outer = np.minimum(1.0 - u, u - sh.length)
                sdist[p.index] = np.where(u <= sh.length, -inner, outer)
        # Interior points belong to the (unique) pocket with negative signed
        # distance; elsewhere the nearest boundary wins.
        k_in = np.argmin(sdist, axis=0)
        k_out = np.argmin(np.abs(sdist), axis=0)
        inside_any = sdist.min(axis=0) < 0.0
        k_near = np.where(inside_any, k_in, k_out)
        s = sdist[k_near, np.arange(n)]
        h = np.abs(s)
        codes = np.empty(n, dtype=np.int64)
        base = 2 + 4 * k_near
        codes[:] = np.where(
            h <= TIE_TOL,
            base + 1,
            np.where(
                s < 0.0,
                np.where(h > delta, base + 3, base + 2),
                np.where(h < delta, base, 0),
            ),
        )
        if self.target is not None:
            sh = self.target
            if isinstance(sh, Disk):
                v = minimage(xs - np.asarray(sh.center))
                st = np.sqrt(np.sum(v * v, axis=1)) - sh.radius
            else:
                u = np.mod(xs[:, 0] - sh.left, 1.0)
                inner = np.minimum(u, sh.length - u)
                outer = np.minimum(1.0 - u, u - sh.length)
                st = np.where(u <= sh.length, -inner, outer)
            codes[st <= TIE_TOL] = 1
        return codes
