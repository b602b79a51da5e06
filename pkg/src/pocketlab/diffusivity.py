"""Pocket diffusivity coefficient and exit-time barrier diagnostics.

The coefficient ``a`` vanishes identically on the free region and is
strictly positive inside each pocket, with a quartic bump profile:

* disk of radius ``r0``:   ``a = A (1 - rho^2/r0^2)^2``,
* interval of length ``l``: ``a = A (1 - (2u/l - 1)^2)^2``,

where ``rho`` is the distance to the center and ``u`` the arc offset from
the left endpoint.  Near the boundary the profile opens quadratically in
the depth ``h``: ``a = q h^2 (1 + O(h))`` with ``q = 4 A / inradius^2``,
and globally ``c1 h^2 <= a <= c2 h^2`` holds inside every pocket with
``c1 = min_k A_k / inradius_k^2`` and ``c2 = max_k q_k``.  The profile is
continuously differentiable across the boundary (both ``a`` and its
gradient vanish there).

The barrier half of the module packages the scalar comparison function

    ``w(h) = (2 hi / lo) * Integral_0^h (delta - t) / (eps + hi t^2) dt``

used to bound exit times from a pocket: ``u = 2 eps w(h(x))`` applied to
the generator ``(1/2) Lap + (1/(2 eps)) div(a grad .)`` gives, with
``|grad h| = 1``,

    ``(eps + a) w'' + (<grad a, grad h> + (eps + a) Lap h) w'``,

and the quadratic envelope makes the leading part of this at most ``-2``
while corrections stay small, so the whole expression is negative on a
thin shell inside the pocket.  ``verify_supersolution`` evaluates both the
exact expression and its leading part on random shell samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import Disk, Geometry, Interval, minimage

__all__ = [
    "DiffusivityField",
    "BarrierParams",
    "pocket_barrier",
    "barrier_w",
    "barrier_w_prime",
    "barrier_w_second",
    "barrier_sup",
    "barrier_main_term",
    "SupersolutionReport",
    "verify_supersolution",
]

# Multiplicative guard so the closed envelope inequalities survive roundoff
# at the extreme points (pocket center, boundary limit).
_ENV_GUARD = 1e-12


@dataclass(frozen=True)
class DiffusivityField:
    """Coefficient field over a geometry, one amplitude per pocket."""

    geometry: Geometry
    amplitudes: tuple[float, ...]

    def __post_init__(self):
        amps = tuple(float(a) for a in self.amplitudes)
        object.__setattr__(self, "amplitudes", amps)
        if len(amps) != self.geometry.n_pockets:
            raise ValueError(
                f"need {self.geometry.n_pockets} amplitudes, got {len(amps)}"
            )
        if any(a <= 0.0 for a in amps):
            raise ValueError("amplitudes must be strictly positive")

    @property
    def boundary_quad(self) -> tuple[float, ...]:
        """Per pocket: coefficient of ``h^2`` in the boundary expansion."""
        return tuple(
            4.0 * a / p.inradius**2
            for a, p in zip(self.amplitudes, self.geometry.pockets)
        )

    @property
    def env_lo(self) -> float:
        return (1.0 - _ENV_GUARD) * min(
            a / p.inradius**2 for a, p in zip(self.amplitudes, self.geometry.pockets)
        )

    @property
    def env_hi(self) -> float:
        return (1.0 + _ENV_GUARD) * max(self.boundary_quad)

    # -- evaluation -------------------------------------------------------

    def _batch(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=float)
        d = self.geometry.dimension
        if x.ndim == 0:
            x, single = x.reshape(1, 1), True
        elif x.ndim == 1:
            if d == 1:
                single = x.shape[0] == 1
                x = x[:, None]
            else:
                if x.shape[0] != d:
                    raise ValueError(f"expected a point of dimension {d}")
                x, single = x[None, :], True
        else:
            if x.shape[1] != d:
                raise ValueError(f"expected points of dimension {d}")
            single = False
        return x, single

    def value(self, x):
        """Coefficient at one point (or an ``(n, d)`` batch).

        Exactly zero everywhere outside the pockets.
        """
        x, single = self._batch(x)
        out = np.zeros(x.shape[0])
        for p, amp in zip(self.geometry.pockets, self.amplitudes):
            sh = p.shape
            if isinstance(sh, Disk):
                v = minimage(x - np.asarray(sh.center))
                rho2 = np.sum(v * v, axis=1)
                mask = rho2 < sh.radius**2
                q = 1.0 - rho2[mask] / sh.radius**2
                out[mask] = amp * q * q
            else:
                u = np.mod(x[:, 0] - sh.left, 1.0)
                mask = (u > 0.0) & (u < sh.length)
                t = 2.0 * u[mask] / sh.length - 1.0
                q = 1.0 - t * t
                out[mask] = amp * q * q
        return float(out[0]) if single else out

    def gradient(self, x):
        """Gradient of the coefficient at one point (or an ``(n, d)`` batch)."""
        x, single = self._batch(x)
        out = np.zeros_like(x)
        for p, amp in zip(self.geometry.pockets, self.amplitudes):
            sh = p.shape
            if isinstance(sh, Disk):
                v = minimage(x - np.asarray(sh.center))
                rho2 = np.sum(v * v, axis=1)
                mask = rho2 < sh.radius**2
                q = 1.0 - rho2[mask] / sh.radius**2
                out[mask] = (-4.0 * amp / sh.radius**2) * q[:, None] * v[mask]
            else:
                u = np.mod(x[:, 0] - sh.left, 1.0)
                mask = (u > 0.0) & (u < sh.length)
                t = 2.0 * u[mask] / sh.length - 1.0
                out[mask, 0] = -8.0 * amp * t * (1.0 - t * t) / sh.length
        return out[0] if single else out

    def depth_value(self, k: int, h) -> np.ndarray:
        """Coefficient at depth ``h`` inside pocket ``k`` (radial profile)."""
        sh = self.geometry.pockets[k].shape
        amp = self.amplitudes[k]
        h = np.asarray(h, dtype=float)
        if isinstance(sh, Disk):
            rho = sh.radius - h
            q = 1.0 - (rho / sh.radius) ** 2
        else:
            t = 2.0 * h / sh.length - 1.0
            q = 1.0 - t * t
        return amp * q * q


@dataclass(frozen=True)
class BarrierParams:
    """Scalar data of the exit-time barrier on one pocket shell.

    ``lo`` and ``hi`` bound the boundary quadratic coefficient over the
    pocket boundary (equal for the radially symmetric profiles used here).
    """

    delta: float
    eps: float
    lo: float
    hi: float

    def __post_init__(self):
        if self.delta <= 0.0 or self.eps <= 0.0:
            raise ValueError("delta and eps must be positive")
        if not (0.0 < self.lo <= self.hi):
            raise ValueError("need 0 < lo <= hi")


def pocket_barrier(
    field: DiffusivityField, k: int, delta: float, eps: float
) -> BarrierParams:
    field.geometry.validate_delta(delta)
    q = field.boundary_quad[k]
    return BarrierParams(delta=delta, eps=eps, lo=q, hi=q)


def _check_domain(h, delta: float) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if np.any(h < 0.0) or np.any(h > delta):
        raise DomainError(f"barrier argument outside [0, {delta}]")
    return h


def barrier_w(h, p: BarrierParams):
    """Closed form of the barrier integral; increasing, flat at ``delta``."""
    h = _check_domain(h, p.delta)
    hi, lo, eps, delta = p.hi, p.lo, p.eps, p.delta
    val = (2.0 * hi / lo) * (
        delta * np.arctan(h * math.sqrt(hi / eps)) / math.sqrt(eps * hi)
        - np.log1p(hi * h * h / eps) / (2.0 * hi)
    )
    return float(val) if h.ndim == 0 else val


def barrier_w_prime(h, p: BarrierParams):
    h = _check_domain(h, p.delta)
    val = (2.0 * p.hi / p.lo) * (p.delta - h) / (p.eps + p.hi * h * h)
    return float(val) if np.asarray(h).ndim == 0 else val


def barrier_w_second(h, p: BarrierParams):
    h = _check_domain(h, p.delta)
    den = p.eps + p.hi * h * h
    val = (2.0 * p.hi / p.lo) * (-den - 2.0 * p.hi * h * (p.delta - h)) / (den * den)
    return float(val) if np.asarray(h).ndim == 0 else val


def barrier_sup(p: BarrierParams) -> float:
    """Largest value of the barrier supersolution, ``2 eps w(delta)``."""
    return 2.0 * p.eps * barrier_w(p.delta, p)


def barrier_main_term(h, p: BarrierParams, quad: float | None = None):
    """Leading part of the generator applied to the barrier.

    With the boundary coefficient ``q`` at the sample's foot point this is
    ``(eps + q h^2) w'' + 2 q h w'`` and is at most ``-2`` on the open
    shell.
    """
    q = p.hi if quad is None else quad
    h = np.asarray(h, dtype=float)
    val = (p.eps + q * h * h) * barrier_w_second(h, p) + 2.0 * q * h * barrier_w_prime(
        h, p
    )
    return float(val) if h.ndim == 0 else val


@dataclass(frozen=True)
class SupersolutionReport:
    delta: float
    eps: float
    n_samples: int
    max_operator: float
    max_main_term: float
    per_pocket: tuple[tuple[int, float, float], ...]


def verify_supersolution(
    field: DiffusivityField,
    delta: float,
    eps: float,
    n_samples: int = 1000,
    seed: int = 0,
) -> SupersolutionReport:
    """Evaluate the generator on the barrier over random shell samples.

    For each pocket, depths are drawn uniformly from the open shell
    ``(0, delta)`` and the exact expression

        ``(eps + a) w'' + (<grad a, grad h> + (eps + a) Lap h) w'``

    is computed from the closed-form profile derivatives (``Lap h`` is
    ``-1/rho`` for disks at radius ``rho`` and ``0`` for intervals).  The
    report carries the maxima of this and of the leading part.
    """
    geom = field.geometry
    geom.validate_delta(delta)
    rng = np.random.default_rng(seed)
    per_pocket = []
    for p, amp in zip(geom.pockets, field.amplitudes):
        params = pocket_barrier(field, p.index, delta, eps)
        h = delta * (1e-9 + (1.0 - 2e-9) * rng.random(n_samples))
        wp = barrier_w_prime(h, params)
        ws = barrier_w_second(h, params)
        sh = p.shape
        if isinstance(sh, Disk):
            rho = sh.radius - h
            q = 1.0 - (rho / sh.radius) ** 2
            a = amp * q * q
            dot = (4.0 * amp / sh.radius**2) * q * rho
            lap_h = -1.0 / rho
        else:
            t = 2.0 * h / sh.length - 1.0
            q = 1.0 - t * t
            a = amp * q * q
            dot = -8.0 * amp * t * q / sh.length  # t < 0 near the boundary
            lap_h = np.zeros_like(h)
        op = (eps + a) * ws + (dot + (eps + a) * lap_h) * wp
        main = barrier_main_term(h, params)
        per_pocket.append((p.index, float(op.max()), float(main.max())))
    return SupersolutionReport(
        delta=delta,
        eps=eps,
        n_samples=n_samples,
        max_operator=max(m for _, m, _ in per_pocket),
        max_main_term=max(m for _, _, m in per_pocket),
        per_pocket=tuple(per_pocket),
    )
