"""Compiled path-integration core shared by the diffusion and limit-walk samplers.

Geometry, coefficient data and stopping surfaces are flattened into plain
arrays before entering the numba kernels (one kernel per dimension).  The
kernels are resumable: they consume pre-drawn blocks of Gaussians and hand
control back when a block runs dry, so a single counter-based stream per path
fixes the whole trajectory no matter how work is scheduled across threads.

Stepping rules, applied identically in both kernels:

* step size ``min(dt0, 2 eps eta_drift / |grad a|, eta_diff^2 / (1 + a/eps))``,
  shrunk once by a factor of 10 whenever a one-sigma move would cover more
  than half the distance to the nearest tracked surface (every pocket
  boundary, every boundary pushed out by ``delta``, every stopping surface);
* exactly one Gaussian vector is consumed per attempted step, whichever
  branch resolves it;
* stopping surfaces are tested exactly against the straight segment of each
  step, the first crossing wins, and the endpoint is snapped onto that
  surface;
* occupancy time is charged to the region of the step's start point.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .diffusivity import DiffusivityField
from .geometry import Disk, Geometry, Interval

BLOCK = 8192
_FIRST_BLOCK = 1024

STATUS_HIT = 0
STATUS_TIMEOUT = 1
STATUS_HORIZON = 2
_NEED_NORMALS = 3

_U64 = (1 << 64) - 1


def make_rng(seed: int, path_id: int) -> np.random.Generator:
    """Counter-based generator for one path, independent of all others."""
    return np.random.Generator(np.random.Philox(key=(seed ^ path_id) & _U64))


@dataclass(frozen=True)
class EncodedField:
    """Plain-array form of a geometry plus pocket amplitudes.

    ``centers`` is ``(n, 2)`` in two dimensions and holds left endpoints with
    shape ``(n,)`` in one; ``sizes`` holds radii, respectively lengths.  All
    amplitudes zero turns the dynamics into plain Brownian motion while the
    pockets keep contributing to region codes and visit counting.
    """

    dimension: int
    centers: np.ndarray
    sizes: np.ndarray
    amps: np.ndarray

    @property
    def n_pockets(self) -> int:
        return self.sizes.shape[0]

    @property
    def n_region_codes(self) -> int:
        return 2 + 4 * self.n_pockets


def encode_geometry(geometry: Geometry, amplitudes=None) -> EncodedField:
    amps = np.zeros(geometry.n_pockets) if amplitudes is None else np.asarray(
        amplitudes, dtype=float
    )
    if geometry.dimension == 2:
        centers = np.array([p.shape.center for p in geometry.pockets], dtype=float)
        centers = centers.reshape(-1, 2)
        sizes = np.array([p.shape.radius for p in geometry.pockets], dtype=float)
    else:
        centers = np.array([p.shape.left for p in geometry.pockets], dtype=float)
        sizes = np.array([p.shape.length for p in geometry.pockets], dtype=float)
    return EncodedField(geometry.dimension, centers, sizes, amps)


def encode_field(field: DiffusivityField) -> EncodedField:
    return encode_geometry(field.geometry, field.amplitudes)


@dataclass(frozen=True)
class SurfaceTable:
    """Stopping surfaces: circles in two dimensions, points in one.

    ``ids`` lets the caller tag rows (an interval contributes one row per
    endpoint, both carrying its id) and recover which surface a path hit.
    """

    dimension: int
    points: np.ndarray
    radii: np.ndarray
    ids: np.ndarray

    @property
    def n_rows(self) -> int:
        return self.ids.shape[0]


def surfaces(dimension: int, entries) -> SurfaceTable:
    """Build a table from ``(shape, id)`` pairs of disks or intervals."""
    pts: list = []
    radii: list[float] = []
    ids: list[int] = []
    for shape, sid in entries:
        if dimension == 2:
            if not isinstance(shape, Disk):
                raise TypeError("two-dimensional stopping surfaces must be disks")
            pts.append(shape.center)
            radii.append(shape.radius)
            ids.append(sid)
        else:
            if not isinstance(shape, Interval):
                raise TypeError("one-dimensional stopping surfaces must be intervals")
            for endpoint in (shape.left, shape.right):
                pts.append(endpoint)
                radii.append(0.0)
                ids.append(sid)
    if dimension == 2:
        points = np.asarray(pts, dtype=float).reshape(-1, 2)
    else:
        points = np.asarray(pts, dtype=float)
    return SurfaceTable(
        dimension, points, np.asarray(radii, dtype=float), np.asarray(ids, dtype=np.int64)
    )


def empty_surfaces(dimension: int) -> SurfaceTable:
    return surfaces(dimension, [])


@dataclass(frozen=True)
class StepParams:
    """Step-size controls for one batch of paths."""

    eps: float
    dt0: float
    eta_drift: float
    eta_diff: float
    delta: float


@njit(cache=True, nogil=True, inline="always")
def _mi(u):
    return u - math.floor(u + 0.5)


@njit(cache=True, nogil=True)
def _kernel_2d(
    fs, iv, occ, z, pc, pr, amps, tc, tr, fc, fr, has_f,
    eps, dt0, eta_drift, eta_diff, delta, t_end, horizon,
):
    x0 = fs[0]
    x1 = fs[1]
    t = fs[2]
    phase = iv[0]
    touches = iv[1]
    zi = iv[2]
    steps = iv[4]
    n = pr.shape[0]
    m = tr.shape[0]
    zn = z.shape[0]
    status = -1
    while status < 0:
        a = 0.0
        g0 = 0.0
        g1 = 0.0
        k_in = -1
        depth = 0.0
        k_near = 0
        h_near = 1.0e30
        s_min = 1.0e30
        d_surf = 1.0e30
        for k in range(n):
            u0 = _mi(x0 - pc[k, 0])
            u1 = _mi(x1 - pc[k, 1])
            rho2 = u0 * u0 + u1 * u1
            s = math.sqrt(rho2) - pr[k]
            if s < s_min:
                s_min = s
            ab = abs(s)
            if ab < h_near:
                h_near = ab
                k_near = k
            if ab < d_surf:
                d_surf = ab
            od = abs(s - delta)
            if od < d_surf:
                d_surf = od
            if s < 0.0:
                k_in = k
                depth = -s
                r2 = pr[k] * pr[k]
                q = 1.0 - rho2 / r2
                a = amps[k] * q * q
                cg = -4.0 * amps[k] * q / r2
                g0 = cg * u0
                g1 = cg * u1
        if k_in >= 0:
            k_near = k_in
            h_near = depth
        for j in range(m):
            u0 = _mi(x0 - tc[j, 0])
            u1 = _mi(x1 - tc[j, 1])
            sd = abs(math.sqrt(u0 * u0 + u1 * u1) - tr[j])
            if sd < d_surf:
                d_surf = sd
        # a boundary visit opens on contact and closes only once the path
        # has receded to distance delta
        if s_min <= 1e-12:
            if phase == 0:
                touches += 1
                phase = 1
        elif s_min >= delta:
            phase = 0
        if t >= t_end:
            status = STATUS_HORIZON if horizon else STATUS_TIMEOUT
            continue
        if zi >= zn:
            status = _NEED_NORMALS
            continue
        code = 0
        if has_f:
            u0 = _mi(x0 - fc[0])
            u1 = _mi(x1 - fc[1])
            if math.sqrt(u0 * u0 + u1 * u1) - fr <= 1e-12:
                code = 1
        if code == 0 and n > 0:
            if k_in >= 0:
                code = 2 + 4 * k_in + (3 if depth > delta else 2)
            elif h_near <= 1e-12:
                code = 2 + 4 * k_near + 1
            elif h_near < delta:
                code = 2 + 4 * k_near
        sig2 = 1.0 + a / eps
        sig = math.sqrt(sig2)
        gn = math.sqrt(g0 * g0 + g1 * g1)
        dt = dt0
        if gn > 0.0:
            cap = 2.0 * eps * eta_drift / gn
            if cap < dt:
                dt = cap
        cap = eta_diff * eta_diff / sig2
        if cap < dt:
            dt = cap
        if (gn / (2.0 * eps)) * dt + sig * math.sqrt(dt) > 0.5 * d_surf:
            dt *= 0.1
        last = False
        if horizon and t + dt >= t_end:
            dt = t_end - t
            last = True
        z0 = z[zi, 0]
        z1 = z[zi, 1]
        zi += 1
        rt = math.sqrt(dt)
        w0 = (g0 / (2.0 * eps)) * dt + sig * rt * z0
        w1 = (g1 / (2.0 * eps)) * dt + sig * rt * z1
        s_hit = 2.0
        j_hit = -1
        ww = w0 * w0 + w1 * w1
        for j in range(m):
            u0 = _mi(x0 - tc[j, 0])
            u1 = _mi(x1 - tc[j, 1])
            b = 2.0 * (u0 * w0 + u1 * w1)
            c = u0 * u0 + u1 * u1 - tr[j] * tr[j]
            if ww <= 0.0:
                continue
            disc = b * b - 4.0 * ww * c
            if disc < 0.0:
                continue
            sq = math.sqrt(disc)
            if c > 0.0:
                den = -b + sq
                if den <= 0.0:
                    continue
                s = 2.0 * c / den
            else:
                s = (-b + sq) / (2.0 * ww)
            if 0.0 <= s <= 1.0 and s < s_hit:
                s_hit = s
                j_hit = j
        steps += 1
        if j_hit >= 0:
            occ[code] += s_hit * dt
            t += s_hit * dt
            u0 = _mi(x0 - tc[j_hit, 0])
            u1 = _mi(x1 - tc[j_hit, 1])
            p0 = u0 + s_hit * w0
            p1 = u1 + s_hit * w1
            pn = math.sqrt(p0 * p0 + p1 * p1)
            x0 = (tc[j_hit, 0] + tr[j_hit] * p0 / pn) % 1.0
            x1 = (tc[j_hit, 1] + tr[j_hit] * p1 / pn) % 1.0
            iv[3] = j_hit
            status = STATUS_HIT
            continue
        occ[code] += dt
        x0 = (x0 + w0) % 1.0
        x1 = (x1 + w1) % 1.0
        t = t_end if last else t + dt
    fs[0] = x0
    fs[1] = x1
    fs[2] = t
    iv[0] = phase
    iv[1] = touches
    iv[2] = zi
    iv[4] = steps
    return status


@njit(cache=True, nogil=True)
def _kernel_1d(
    fs, iv, occ, z, pl, pln, amps, tp, tr, fl, fln, has_f,
    eps, dt0, eta_drift, eta_diff, delta, t_end, horizon,
):
    x0 = fs[0]
    t = fs[1]
    phase = iv[0]
    touches = iv[1]
    zi = iv[2]
    steps = iv[4]
    n = pln.shape[0]
    m = tp.shape[0]
    zn = z.shape[0]
    status = -1
    while status < 0:
        a = 0.0
        g = 0.0
        k_in = -1
        depth = 0.0
        k_near = 0
        h_near = 1.0e30
        s_min = 1.0e30
        d_surf = 1.0e30
        for k in range(n):
            length = pln[k]
            off = (x0 - pl[k]) % 1.0
            if 0.0 < off < length:
                s = -(off if off <= length - off else length - off)
                k_in = k
                depth = -s
                tloc = 2.0 * off / length - 1.0
                q = 1.0 - tloc * tloc
                a = amps[k] * q * q
                g = -8.0 * amps[k] * tloc * q / length
            else:
                d1 = abs(_mi(x0 - pl[k]))
                d2 = abs(_mi(x0 - (pl[k] + length)))
                s = d1 if d1 <= d2 else d2
            if s < s_min:
                s_min = s
            ab = abs(s)
            if ab < h_near:
                h_near = ab
                k_near = k
            if ab < d_surf:
                d_surf = ab
            od = abs(s - delta)
            if od < d_surf:
                d_surf = od
        if k_in >= 0:
            k_near = k_in
            h_near = depth
        for j in range(m):
            sd = abs(_mi(x0 - tp[j]))
            if sd < d_surf:
                d_surf = sd
        if s_min <= 1e-12:
            if phase == 0:
                touches += 1
                phase = 1
        elif s_min >= delta:
            phase = 0
        if t >= t_end:
            status = STATUS_HORIZON if horizon else STATUS_TIMEOUT
            continue
        if zi >= zn:
            status = _NEED_NORMALS
            continue
        code = 0
        if has_f:
            off = (x0 - fl) % 1.0
            if 0.0 < off < fln:
                code = 1
            else:
                d1 = abs(_mi(x0 - fl))
                d2 = abs(_mi(x0 - (fl + fln)))
                if (d1 if d1 <= d2 else d2) <= 1e-12:
                    code = 1
        if code == 0 and n > 0:
            if k_in >= 0:
                code = 2 + 4 * k_in + (3 if depth > delta else 2)
            elif h_near <= 1e-12:
                code = 2 + 4 * k_near + 1
            elif h_near < delta:
                code = 2 + 4 * k_near
        sig2 = 1.0 + a / eps
        sig = math.sqrt(sig2)
        gn = abs(g)
        dt = dt0
        if gn > 0.0:
            cap = 2.0 * eps * eta_drift / gn
            if cap < dt:
                dt = cap
        cap = eta_diff * eta_diff / sig2
        if cap < dt:
            dt = cap
        if (gn / (2.0 * eps)) * dt + sig * math.sqrt(dt) > 0.5 * d_surf:
            dt *= 0.1
        last = False
        if horizon and t + dt >= t_end:
            dt = t_end - t
            last = True
        z0 = z[zi, 0]
        zi += 1
        w = (g / (2.0 * eps)) * dt + sig * math.sqrt(dt) * z0
        s_hit = 2.0
        j_hit = -1
        for j in range(m):
            u = _mi(x0 - tp[j])
            v = u + w
            if u == 0.0:
                s = 0.0
            elif (u > 0.0 and v <= 0.0) or (u < 0.0 and v >= 0.0):
                s = -u / w
            else:
                continue
            if s < s_hit:
                s_hit = s
                j_hit = j
        steps += 1
        if j_hit >= 0:
            occ[code] += s_hit * dt
            t += s_hit * dt
            x0 = tp[j_hit]
            iv[3] = j_hit
            status = STATUS_HIT
            continue
        occ[code] += dt
        x0 = (x0 + w) % 1.0
        t = t_end if last else t + dt
    fs[0] = x0
    fs[1] = t
    iv[0] = phase
    iv[1] = touches
    iv[2] = zi
    iv[4] = steps
    return status


@dataclass(frozen=True)
class LegResult:
    status: int
    t: float
    point: np.ndarray
    hit_id: int
    touches: int
    steps: int


def integrate(
    rng: np.random.Generator,
    enc: EncodedField,
    table: SurfaceTable,
    x,
    params: StepParams,
    t_end: float,
    *,
    t_start: float = 0.0,
    horizon: bool = False,
    occ: np.ndarray | None = None,
    final_target=None,
) -> LegResult:
    """Run one path segment until a surface hit, the time limit, or the horizon.

    ``occ`` accumulates occupancy time per region code in place, so several
    legs of one trajectory can share a single array.  ``final_target`` is the
    shape whose interior should be charged to the target region code; it is
    only used for occupancy, never for stopping.
    """
    d = enc.dimension
    if occ is None:
        occ = np.zeros(enc.n_region_codes)
    x = np.asarray(x, dtype=float).reshape(d)
    if d == 2:
        fs = np.array([x[0], x[1], t_start])
    else:
        fs = np.array([x[0], t_start])
    iv = np.zeros(5, dtype=np.int64)
    iv[3] = -1
    has_f = final_target is not None
    if d == 2:
        fc = np.asarray(final_target.center, dtype=float) if has_f else np.zeros(2)
        fr = final_target.radius if has_f else 0.0
    else:
        fc = final_target.left if has_f else 0.0
        fr = final_target.length if has_f else 0.0
    kernel = _kernel_2d if d == 2 else _kernel_1d
    # blocks grow toward BLOCK so short legs do not pay for a full one
    size = _FIRST_BLOCK
    z = rng.standard_normal((size, d))
    while True:
        status = kernel(
            fs, iv, occ, z,
            enc.centers, enc.sizes, enc.amps,
            table.points, table.radii, fc, fr, has_f,
            params.eps, params.dt0, params.eta_drift, params.eta_diff,
            params.delta, t_end, horizon,
        )
        if status != _NEED_NORMALS:
            break
        size = min(8 * size, BLOCK)
        z = rng.standard_normal((size, d))
        iv[2] = 0
    hit_id = int(table.ids[iv[3]]) if status == STATUS_HIT else -1
    point = fs[:d].copy()
    return LegResult(
        status=int(status),
        t=float(fs[d]),
        point=point,
        hit_id=hit_id,
        touches=int(iv[1]),
        steps=int(iv[4]),
    )


@dataclass(frozen=True)
class PathBatch:
    """Columnar results for a batch of paths, indexed by path id."""

    tau: np.ndarray
    status: np.ndarray
    point: np.ndarray
    hit_id: np.ndarray
    touches: np.ndarray
    steps: np.ndarray
    occupation: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.tau.shape[0]


def run_paths(
    enc: EncodedField,
    table: SurfaceTable,
    x0,
    params: StepParams,
    t_end: float,
    n_paths: int,
    seed: int,
    *,
    workers: int = 1,
    horizon: bool = False,
    final_target=None,
) -> PathBatch:
    """Integrate ``n_paths`` independent paths, reproducibly for any worker count.

    ``x0`` is one start point shared by all paths or an array with one row per
    path.  Results land in preallocated arrays slotted by path id, so the
    thread schedule cannot affect the output.
    """
    d = enc.dimension
    starts = np.asarray(x0, dtype=float)
    if starts.ndim <= 1 and starts.size == d:
        starts = np.broadcast_to(starts.reshape(d), (n_paths, d))
    else:
        starts = starts.reshape(n_paths, d)
    tau = np.empty(n_paths)
    status = np.empty(n_paths, dtype=np.int64)
    point = np.empty((n_paths, d))
    hit_id = np.empty(n_paths, dtype=np.int64)
    touches = np.empty(n_paths, dtype=np.int64)
    steps = np.empty(n_paths, dtype=np.int64)
    occupation = np.zeros((n_paths, enc.n_region_codes))

    def run_range(lo: int, hi: int) -> None:
        for pid in range(lo, hi):
            rng = make_rng(seed, pid)
            leg = integrate(
                rng, enc, table, starts[pid], params, t_end,
                horizon=horizon, occ=occupation[pid], final_target=final_target,
            )
            tau[pid] = leg.t
            status[pid] = leg.status
            point[pid] = leg.point
            hit_id[pid] = leg.hit_id
            touches[pid] = leg.touches
            steps[pid] = leg.steps

    workers = max(1, min(workers, n_paths))
    if workers == 1:
        run_range(0, n_paths)
    else:
        bounds = [n_paths * w // workers for w in range(workers + 1)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_range, bounds[w], bounds[w + 1])
                for w in range(workers)
            ]
            for fut in futures:
                fut.result()
    return PathBatch(tau, status, point, hit_id, touches, steps, occupation)
