"""Oscillatory bilinear integrals and their L2-in-xi norms.

Each construction case has a bilinear expression F(xi): an inner integral
over xi1 in A intersect (xi - B) of a Sobolev weight times a time integral
of the oscillating phase.  This module evaluates

* the pointwise single-phase integrals I+-(xi) (analytic time integral
  sin(sigma t)/sigma),
* ``lhs_norm``: the L2 norm of the full per-case expression,
* ``rhs_norm``: the measure combination it is tested against,
* ``upper_bound_minus_term``: the norm of the non-resonant term alone.

Quadrature is tensor Gauss-Legendre.  For boxes the outer xi integral is
split at the breakpoints of the support A + B, where the inner domain's
endpoints switch between the two sets' faces: between breakpoints the
integrand is smooth, so fixed-order panels converge spectrally.  Ball
pairs in d >= 2 use an axisymmetric polar outer mesh over the sum ball
and exact topology-aware slicing of the inner lens (see ``_lens_nodes``).
The time integral is analytic where the phase is a single cosine or
complex exponential (box cases) and Gauss-Legendre in s for the
product-form phases (ball cases), which are certified non-oscillatory on
[0, t_N].  Node-doubling refinement repeats until successive values agree
to the requested relative tolerance.

Weight variants (bracket(x) = sqrt(1 + |x|^2)):

    SCHRO    bracket(xi)^k / (bracket(xi1)^k bracket(xi2)^l)
    WAVE_N   bracket(xi)^l |xi| / (bracket(xi1)^k bracket(xi2)^k)
    WAVE_NT  bracket(xi)^(l-1) |xi|^2 / (bracket(xi1)^k bracket(xi2)^k)
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError, UnsupportedShapeError
from .geometry import (
    Ball,
    Box,
    CaseId,
    ConstructionCase,
    FreqSet,
    build_sets,
    measure,
)


@dataclass(frozen=True)
class RegularityTriple:
    """Sobolev indices (k, l) and the ambient dimension d."""

    k: float
    l: float
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension d must be >= 1")


class WeightVariant(Enum):
    SCHRO = "schro"
    WAVE_N = "wave-n"
    WAVE_NT = "wave-nt"


@dataclass(frozen=True)
class QuadratureSpec:
    """Node budget and refinement policy for the norm evaluations."""

    inner_nodes: int = 8
    outer_nodes: int = 16
    time_nodes: int = 16
    rel_tol: float = 1e-6
    max_refinements: int = 6

    def __post_init__(self):
        if self.inner_nodes < 2 or self.outer_nodes < 2 or self.time_nodes < 2:
            raise ValueError("node counts must be >= 2")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.max_refinements < 0:
            raise ValueError("max_refinements must be >= 0")

    def doubled(self) -> "QuadratureSpec":
        return replace(
            self,
            inner_nodes=2 * self.inner_nodes,
            outer_nodes=2 * self.outer_nodes,
            time_nodes=2 * self.time_nodes,
        )


@functools.lru_cache(maxsize=64)
def _gl(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _gl_on(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _gl(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _gl_on_arc(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """GL nodes under x = mid + half sin(theta): spectral through sqrt edges.

    Slices of a ball have length ~ sqrt(edge distance) at their rim; the
    sine substitution turns that square root into an analytic factor, so
    iterated slicing of curved domains keeps spectral convergence.
    """
    t, w = _gl(n)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (lo + hi)
    theta = 0.5 * math.pi * t
    return mid + half * np.sin(theta), 0.5 * math.pi * half * np.cos(theta) * w


def _bracket(sqnorm: np.ndarray) -> np.ndarray:
    return np.sqrt(1.0 + sqnorm)


def weight(
    xi1: Sequence[float], xi2: Sequence[float], r: RegularityTriple, v: WeightVariant
) -> float:
    """The selected Sobolev weight at (xi1, xi2), xi = xi1 + xi2."""
    a = np.asarray(xi1, dtype=float)
    b = np.asarray(xi2, dtype=float)
    if a.shape != b.shape:
        raise ValueError("xi1 and xi2 dimensions differ")
    return float(
        _weight_nd(a[None, :], b[None, :], r, v)[0]
    )


def _weight_nd(
    x1: np.ndarray, x2: np.ndarray, r: RegularityTriple, v: WeightVariant
) -> np.ndarray:
    """Vectorized weight over rows of x1, x2 with shape (n, d)."""
    s1 = np.sum(x1 * x1, axis=-1)
    s2 = np.sum(x2 * x2, axis=-1)
    xs = x1 + x2
    ss = np.sum(xs * xs, axis=-1)
    if v is WeightVariant.SCHRO:
        return _bracket(ss) ** r.k / (_bracket(s1) ** r.k * _bracket(s2) ** r.l)
    if v is WeightVariant.WAVE_N:
        return (
            _bracket(ss) ** r.l
            * np.sqrt(ss)
            / (_bracket(s1) ** r.k * _bracket(s2) ** r.k)
        )
    return (
        _bracket(ss) ** (r.l - 1.0)
        * ss
        / (_bracket(s1) ** r.k * _bracket(s2) ** r.k)
    )


_SMALL_PHASE = 1e-8


def time_integral_cos(sigma, t: float):
    """integral_0^t cos(sigma s) ds = sin(sigma t)/sigma, series-stable near 0."""
    sig = np.asarray(sigma, dtype=float)
    st = sig * t
    small = np.abs(st) <= _SMALL_PHASE
    safe = np.where(small, 1.0, sig)
    closed = np.sin(st) / safe
    series = t * (1.0 - st * st / 6.0 + st**4 / 120.0)
    out = np.where(small, series, closed)
    return float(out) if np.isscalar(sigma) else out


def time_integral_exp(zeta, t: float):
    """integral_0^t exp(-i zeta s) ds = (1 - exp(-i zeta t)) / (i zeta)."""
    z = np.asarray(zeta, dtype=float)
    zt = z * t
    small = np.abs(zt) <= _SMALL_PHASE
    safe = np.where(small, 1.0, z)
    closed = (1.0 - np.exp(-1j * t * z)) / (1j * safe)
    series = t * (1.0 - 0.5j * zt - zt * zt / 6.0 + 1j * zt**3 / 24.0)
    out = np.where(small, series, closed)
    return complex(out) if np.isscalar(zeta) else out


# ---------------------------------------------------------------------------
# Domain bookkeeping


def _axis_bounds(c, j: int) -> tuple[float, float]:
    if isinstance(c, Box):
        return c.lo[j], c.hi[j]
    return c.center[j] - c.radius, c.center[j] + c.radius


def _axis_segments(lo_a, hi_a, lo_b, hi_b) -> list[tuple[float, float]]:
    pts = sorted({lo_a + lo_b, lo_a + hi_b, hi_a + lo_b, hi_a + hi_b})
    return [(p, q) for p, q in zip(pts, pts[1:]) if q > p]


def _outer_ball_polar(ca: Ball, cb: Ball, d: int, n: int):
    """Polar mesh over the support ball of a pair with centers on the first axis.

    The integrand is invariant under rotations fixing that axis, so d = 3
    reduces to a (radius, colatitude) half-plane with weight 2 pi rho^2
    sin(theta), and d = 2 to the upper half-disk with weight 2 rho.  The
    radial axis is panel-split at |r_A - r_B|, where the inner domain
    switches between full-ball and lens shapes.
    """
    c = np.asarray(ca.center) + np.asarray(cb.center)
    R = ca.radius + cb.radius
    r_switch = abs(ca.radius - cb.radius)
    panels = [(0.0, r_switch), (r_switch, R)] if 0.0 < r_switch < R else [(0.0, R)]
    theta, wt = _gl_on(0.0, math.pi, n)
    pts, wts = [], []
    for p, q in panels:
        rho, wr = _gl_on_arc(p, q, n)
        for x, w in zip(rho, wr):
            if d == 2:
                pt = np.stack(
                    [c[0] + x * np.cos(theta), c[1] + x * np.sin(theta)], axis=-1
                )
                pts.append(pt)
                wts.append(2.0 * x * w * wt)
            else:
                pt = np.stack(
                    [
                        c[0] + x * np.cos(theta),
                        c[1] + x * np.sin(theta),
                        np.full_like(theta, c[2]),
                    ],
                    axis=-1,
                )
                pts.append(pt)
                wts.append(2.0 * math.pi * x * x * w * np.sin(theta) * wt)
    return np.concatenate(pts), np.concatenate(wts)


def _outer_mesh(ca, cb, d: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """GL mesh over the support of chi_A * chi_B.

    Boxes (and all 1-D sets) use per-axis panels split at the support
    breakpoints, where the inner domain's faces switch; higher-dimensional
    ball pairs use an axisymmetric polar mesh over the sum ball.
    """
    if d > 1 and isinstance(ca, Ball):
        on_axis = all(
            abs(x) == 0.0 for x in (ca.center[1:] + cb.center[1:])
        )
        if not on_axis:
            raise UnsupportedShapeError(
                "ball norm evaluation expects centers on the first axis"
            )
        return _outer_ball_polar(ca, cb, d, n)
    axes_nodes = []
    axes_wts = []
    for j in range(d):
        la, ha = _axis_bounds(ca, j)
        lb, hb = _axis_bounds(cb, j)
        segs = _axis_segments(la, ha, lb, hb)
        ns, ws = [], []
        for p, q in segs:
            x, w = _gl_on(p, q, n)
            ns.append(x)
            ws.append(w)
        axes_nodes.append(np.concatenate(ns))
        axes_wts.append(np.concatenate(ws))
    if d == 1:
        return axes_nodes[0][:, None], axes_wts[0]
    grids = np.meshgrid(*axes_nodes, indexing="ij")
    wgrids = np.meshgrid(*axes_wts, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wts = np.ones(pts.shape[0])
    for wg in wgrids:
        wts *= wg.ravel()
    return pts, wts


def _disk_nodes(c0: float, c1: float, r: float, n: int):
    """Arc-sliced nodes over one disk; returns (x (m,), y (m,), w (m,))."""
    x0, w0 = _gl_on_arc(c0 - r, c0 + r, n)
    xs, ys, ws = [], [], []
    for x, w in zip(x0, w0):
        res = r * r - (x - c0) ** 2
        if res <= 0:
            continue
        q = math.sqrt(res)
        y, wy = _gl_on_arc(c1 - q, c1 + q, n)
        xs.append(np.full_like(y, x))
        ys.append(y)
        ws.append(w * wy)
    if not xs:
        return None
    return np.concatenate(xs), np.concatenate(ys), np.concatenate(ws)


def _disk_lens_nodes(a0, a1, ra, b0, b1, rb, n):
    """Nodes over the intersection of two disks, exact per-slice bounds.

    Handles containment (one disk inside the other) and genuine lenses;
    the first axis is panel-split at the circle-intersection abscissas so
    each panel's slice bounds come from a single analytic arc.
    """
    dx, dy = b0 - a0, b1 - a1
    dist = math.hypot(dx, dy)
    if dist >= ra + rb:
        return None
    if dist <= ra - rb:
        return _disk_nodes(b0, b1, rb, n)
    if dist <= rb - ra:
        return _disk_nodes(a0, a1, ra, n)
    lo = max(a0 - ra, b0 - rb)
    hi = min(a0 + ra, b0 + rb)
    if hi <= lo:
        return None
    # corner abscissas: x-coordinates of the two circle intersection points
    alpha = (dist * dist + ra * ra - rb * rb) / (2.0 * dist * dist)
    h_sq = ra * ra - alpha * alpha * dist * dist
    breaks = [lo, hi]
    if h_sq > 0:
        h = math.sqrt(h_sq)
        mx = a0 + alpha * dx
        tx = -dy / dist  # x-component of the unit perpendicular
        for corner in (mx + h * tx, mx - h * tx):
            if lo < corner < hi:
                breaks.append(corner)
    breaks = sorted(set(breaks))
    xs, ys, ws = [], [], []
    for p, q in zip(breaks, breaks[1:]):
        x0, w0 = _gl_on_arc(p, q, n)
        for x, w in zip(x0, w0):
            res_a = ra * ra - (x - a0) ** 2
            res_b = rb * rb - (x - b0) ** 2
            if res_a <= 0 or res_b <= 0:
                continue
            qa, qb = math.sqrt(res_a), math.sqrt(res_b)
            seg_lo = max(a1 - qa, b1 - qb)
            seg_hi = min(a1 + qa, b1 + qb)
            if seg_hi <= seg_lo:
                continue
            y, wy = _gl_on_arc(seg_lo, seg_hi, n)
            xs.append(np.full_like(y, x))
            ys.append(y)
            ws.append(w * wy)
    if not xs:
        return None
    return np.concatenate(xs), np.concatenate(ys), np.concatenate(ws)


def _slice_topology_breaks(a, ra, b, rb, lo, hi):
    """x-values in (lo, hi) where the 2-D slices of two 3-D balls change topology.

    Writing qa(x)^2 = ra^2 - (x - a0)^2 and qb(x)^2 likewise, the slice
    disks are tangent (externally or internally) exactly when
    (qa^2 + qb^2 - s)^2 = 4 qa^2 qb^2 with s the squared planar center
    distance: a quartic in x whose real roots give every panel boundary.
    """
    s = (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2
    pa = np.polynomial.polynomial.Polynomial(
        [ra * ra - a[0] * a[0], 2.0 * a[0], -1.0]
    )
    pb = np.polynomial.polynomial.Polynomial(
        [rb * rb - b[0] * b[0], 2.0 * b[0], -1.0]
    )
    quartic = (pa + pb - s) ** 2 - 4.0 * pa * pb
    roots = quartic.roots()
    out = []
    for rt in roots:
        if abs(rt.imag) < 1e-10 and lo < rt.real < hi:
            out.append(float(rt.real))
    return sorted(out)


def _ball_lens_nodes_3d(a, ra, b, rb, n):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = max(a[0] - ra, b[0] - rb)
    hi = min(a[0] + ra, b[0] + rb)
    if hi <= lo:
        return None
    breaks = sorted(set([lo, hi] + _slice_topology_breaks(a, ra, b, rb, lo, hi)))
    pts, wts = [], []
    for p, q in zip(breaks, breaks[1:]):
        x0, w0 = _gl_on_arc(p, q, n)
        for x, w in zip(x0, w0):
            res_a = ra * ra - (x - a[0]) ** 2
            res_b = rb * rb - (x - b[0]) ** 2
            if res_a <= 0 or res_b <= 0:
                continue
            disk = _disk_lens_nodes(
                a[1], a[2], math.sqrt(res_a), b[1], b[2], math.sqrt(res_b), n
            )
            if disk is None:
                continue
            y, z, wyz = disk
            pts.append(np.stack([np.full_like(y, x), y, z], axis=-1))
            wts.append(w * wyz)
    if not pts:
        return None
    return np.concatenate(pts), np.concatenate(wts)


def _lens_nodes(xi: np.ndarray, ca: Ball, cb: Ball, n: int):
    """GL nodes over the lens {|x - c_A| < r_A} cap {|x - (xi - c_B)| < r_B}.

    Exact slicing with arc-substituted nodes and topology-aware panel
    splits: the slice bounds are analytic within each panel, so the lens
    integral converges spectrally instead of at the O(1/n) rate of masked
    tensor quadrature.
    """
    a = np.asarray(ca.center, dtype=float)
    ra = ca.radius
    b = xi - np.asarray(cb.center, dtype=float)
    rb = cb.radius
    d = a.shape[0]
    dist = math.dist(a, b)
    if dist >= ra + rb:
        return None
    if d == 2:
        disk = _disk_lens_nodes(a[0], a[1], ra, b[0], b[1], rb, n)
        if disk is None:
            return None
        x, y, w = disk
        return np.stack([x, y], axis=-1), w, None
    if dist <= ra - rb:
        res = _ball_nodes(b, rb, n)
    elif dist <= rb - ra:
        res = _ball_nodes(a, ra, n)
    else:
        res = _ball_lens_nodes_3d(a, ra, b, rb, n)
    if res is None:
        return None
    return res[0], res[1], None


def _ball_nodes(c: np.ndarray, r: float, n: int):
    """Arc-sliced tensor nodes over one ball in dimension 2 or 3."""
    if c.shape[0] == 2:
        disk = _disk_nodes(c[0], c[1], r, n)
        if disk is None:
            return None
        x, y, w = disk
        return np.stack([x, y], axis=-1), w
    x0, w0 = _gl_on_arc(c[0] - r, c[0] + r, n)
    pts, wts = [], []
    for x, w in zip(x0, w0):
        res = r * r - (x - c[0]) ** 2
        if res <= 0:
            continue
        disk = _disk_nodes(c[1], c[2], math.sqrt(res), n)
        if disk is None:
            continue
        y, z, wyz = disk
        pts.append(np.stack([np.full_like(y, x), y, z], axis=-1))
        wts.append(w * wyz)
    if not pts:
        return None
    return np.concatenate(pts), np.concatenate(wts)


def _inner_nodes_at(xi: np.ndarray, ca, cb, n: int):
    """GL nodes/weights over A intersect (xi - B).

    Returns (x1 (m, d), w (m,), mask or None); None when the domain is
    empty.  Boxes and 1-D balls give an exact box; higher-dimensional ball
    pairs use exact iterated slicing of the lens.
    """
    d = xi.shape[0]
    if d > 1 and isinstance(ca, Ball):
        return _lens_nodes(xi, ca, cb, n)
    los, his = [], []
    for j in range(d):
        la, ha = _axis_bounds(ca, j)
        lb, hb = _axis_bounds(cb, j)
        lo = max(la, xi[j] - hb)
        hi = min(ha, xi[j] - lb)
        if hi <= lo:
            return None
        los.append(lo)
        his.append(hi)
    axes = [_gl_on(lo, hi, n) for lo, hi in zip(los, his)]
    if d == 1:
        x1 = axes[0][0][:, None]
        w = axes[0][1]
    else:
        grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
        x1 = np.stack([g.ravel() for g in grids], axis=-1)
        w = np.ones(x1.shape[0])
        for wg in wgrids:
            w *= wg.ravel()
    return x1, w, None


FiberFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _inner_value(xi: np.ndarray, ca, cb, fiber: FiberFn, n: int) -> complex:
    dom = _inner_nodes_at(xi, ca, cb, n)
    if dom is None:
        return 0.0
    x1, w, mask = dom
    vals = fiber(x1, xi)
    if mask is not None:
        vals = vals * mask
    return complex(np.sum(w * vals))


# ---------------------------------------------------------------------------
# Per-case fiber integrands


def _sq(x: np.ndarray) -> np.ndarray:
    return np.sum(x * x, axis=-1)


def _fiber_schro_sum(r: RegularityTriple, t: float) -> FiberFn:
    """Weight times the analytic s-integral of cos-sum form: both phases."""

    def fiber(x1, xi):
        x2 = xi[None, :] - x1
        w = _weight_nd(x1, x2, r, WeightVariant.SCHRO)
        core = _sq(xi[None, :]) - _sq(x1)
        a2 = np.sqrt(_sq(x2))
        return w * 0.5 * (
            time_integral_cos(core + a2, t) + time_integral_cos(core - a2, t)
        )

    return fiber


def _fiber_schro_single(r: RegularityTriple, t: float, sign: int) -> FiberFn:
    def fiber(x1, xi):
        x2 = xi[None, :] - x1
        w = _weight_nd(x1, x2, r, WeightVariant.SCHRO)
        sig = _sq(xi[None, :]) - _sq(x1) + sign * np.sqrt(_sq(x2))
        return w * time_integral_cos(sig, t)

    return fiber


def _fiber_wave_n(r: RegularityTriple, t: float, sign: int | None) -> FiberFn:
    """Case-2 integrand; sign selects one phase term, None takes the full pair."""

    def fiber(x1, xi):
        x2 = xi[None, :] - x1
        w = _weight_nd(x1, x2, r, WeightVariant.WAVE_N)
        axi = math.hypot(*xi)
        base = _sq(x1) - _sq(x2)
        if sign is None:
            return w * (
                np.exp(1j * t * axi) * time_integral_exp(base + axi, t)
                - np.exp(-1j * t * axi) * time_integral_exp(base - axi, t)
            )
        return w * time_integral_exp(base + sign * axi, t)

    return fiber


def _fiber_sol_low(r: RegularityTriple, t: float, n_s: int) -> FiberFn:
    s, ws = _gl_on(0.0, t, n_s)

    def fiber(x1, xi):
        x2 = xi[None, :] - x1
        w = _weight_nd(x1, x2, r, WeightVariant.SCHRO)
        core = _sq(xi[None, :]) - _sq(x1)
        a2 = np.sqrt(_sq(x2))
        ti = np.einsum(
            "s,sn->n", ws, np.cos(np.outer(s, core)) * np.cos(np.outer(s, a2))
        )
        return w * ti

    return fiber


def _fiber_sol_high(r: RegularityTriple, t: float, n_s: int) -> FiberFn:
    s, ws = _gl_on(0.0, t, n_s)

    def fiber(x1, xi):
        x2 = xi[None, :] - x1
        w = _weight_nd(x1, x2, r, WeightVariant.WAVE_NT)
        axi = math.hypot(*xi)
        base = _sq(x1) - _sq(x2)
        wave = np.cos((t - s) * axi)  # (n_s,)
        ti = np.einsum("s,sn->n", ws * wave, np.cos(np.outer(s, base)))
        return w * ti

    return fiber


# ---------------------------------------------------------------------------
# Norm engine


@dataclass(frozen=True)
class _Problem:
    ca: object  # constituent carrying the inner A domain
    cb: object
    fiber: FiberFn
    scale: float  # final norm multiplier (sqrt(2) for mirror-symmetric pairs)
    d: int


def _norm_once(p: _Problem, spec: QuadratureSpec) -> float:
    pts, wts = _outer_mesh(p.ca, p.cb, p.d, spec.outer_nodes)
    total = 0.0
    for xi, w in zip(pts, wts):
        v = _inner_value(xi, p.ca, p.cb, p.fiber, spec.inner_nodes)
        total += w * (v.real * v.real + v.imag * v.imag)
    return p.scale * math.sqrt(total)


def _refine(value_at: Callable[[QuadratureSpec], float], spec: QuadratureSpec) -> float:
    prev = cur = value_at(spec)
    cur_spec = spec
    for _ in range(spec.max_refinements):
        cur_spec = cur_spec.doubled()
        cur = value_at(cur_spec)
        denom = max(abs(cur), 1e-300)
        if abs(cur - prev) <= spec.rel_tol * denom:
            return cur
        prev = cur
    raise QuadratureError(
        f"no convergence to rel_tol={spec.rel_tol} after "
        f"{spec.max_refinements} refinements",
        last_values=(prev, cur),
    )


def _single_constituents(a: FreqSet, b: FreqSet):
    if a.is_single_box() and b.is_single_box():
        return a.boxes[0], b.boxes[0]
    if a.is_single_ball() and b.is_single_ball():
        return a.balls[0], b.balls[0]
    raise UnsupportedShapeError("norm evaluation needs single-box or single-ball sets")


def _positive_component(a: FreqSet) -> Ball:
    # Symmetric two-ball union: keep the component on the positive first axis.
    for ball in a.balls:
        if ball.center[0] > 0:
            return ball
    raise UnsupportedShapeError("expected a component with positive first axis")


def _case_problem(
    case: ConstructionCase,
    r: RegularityTriple,
    spec: QuadratureSpec,
    term: str,
) -> _Problem:
    """Assemble the norm problem; term is 'full', 'plus' or 'minus'."""
    if case.d > 3:
        raise UnsupportedShapeError("norm evaluation supports d <= 3 only")
    built = build_sets(case)
    t = built.t_eval
    sign = {"plus": +1, "minus": -1}.get(term)
    if case.case is CaseId.SCHRO_LOW_L:
        ca, cb = _single_constituents(built.A, built.B)
        fiber = (
            _fiber_schro_sum(r, t) if term == "full" else _fiber_schro_single(r, t, sign)
        )
        return _Problem(ca, cb, fiber, 1.0, case.d)
    if case.case is CaseId.SCHRO_HIGH_L:
        ca, cb = _single_constituents(built.A, built.B)
        if ca.lo[0] + cb.lo[0] <= 0:
            raise ValueError(
                "support of A + B touches the origin; mirror supports not disjoint"
            )
        fiber = _fiber_wave_n(r, t, None if term == "full" else sign)
        scale = math.sqrt(2.0) if term == "full" else 1.0
        return _Problem(ca, cb, fiber, scale, case.d)
    if term != "full":
        raise ValueError("plus/minus term norms are defined for the box cases only")
    if case.case is CaseId.SOL_LOW_L:
        ca, cb = _single_constituents(built.A, built.B)
        return _Problem(ca, cb, _fiber_sol_low(r, t, spec.time_nodes), 1.0, case.d)
    ca = _positive_component(built.A)
    cb = built.B.balls[0]
    if 2.0 * abs(ca.center[0]) <= 2.0 * (ca.radius + cb.radius):
        raise ValueError("two-ball components too close; mirror supports overlap")
    return _Problem(ca, cb, _fiber_sol_high(r, t, spec.time_nodes), math.sqrt(2.0), case.d)


def lhs_norm(
    case: ConstructionCase, r: RegularityTriple, q: QuadratureSpec = QuadratureSpec()
) -> float:
    """L2-in-xi norm of the case's full bilinear expression at t_eval.

    The mirror-image term of the symmetric cases (2 and 4) lives on a
    disjoint support with equal norm, so it enters through a sqrt(2) factor
    after the disjointness is asserted analytically.
    """

    def value_at(spec: QuadratureSpec) -> float:
        return _norm_once(_case_problem(case, r, spec, "full"), spec)

    return _refine(value_at, q)


def phase_term_norm(
    case: ConstructionCase,
    r: RegularityTriple,
    sign: int,
    q: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Norm of a single phase term: ||I+-|| (case 1) or ||J+-|| (case 2)."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    term = "plus" if sign > 0 else "minus"

    def value_at(spec: QuadratureSpec) -> float:
        return _norm_once(_case_problem(case, r, spec, term), spec)

    return _refine(value_at, q)


def upper_bound_minus_term(
    case: ConstructionCase, r: RegularityTriple, q: QuadratureSpec = QuadratureSpec()
) -> float:
    """Norm of the non-resonant term alone (analytic time integral)."""
    if not case.case.is_schro:
        raise ValueError("the minus-term norm is defined for the box cases only")
    return phase_term_norm(case, r, -1, q)


def rhs_norm(case: ConstructionCase) -> float:
    """measure(A) + measure(B) for the u-component cases, sqrt product otherwise."""
    built = build_sets(case)
    ma, mb = measure(built.A), measure(built.B)
    if case.case in (CaseId.SCHRO_LOW_L, CaseId.SOL_LOW_L):
        return ma + mb
    return math.sqrt(ma * mb)


def I_pm(
    a: FreqSet,
    b: FreqSet,
    r: RegularityTriple,
    t: float,
    sign: int,
    xi: Sequence[float],
    q: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Pointwise single-phase integral over A intersect (xi - B).

    Refinement doubles the inner node count until two successive values
    agree to rel_tol; zero (empty intersection) returns immediately.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    ca, cb = _single_constituents(a, b)
    xiv = np.asarray(xi, dtype=float)
    fiber = _fiber_schro_single(r, t, sign)
    if _inner_nodes_at(xiv, ca, cb, 2) is None:
        return 0.0

    def value_at(spec: QuadratureSpec) -> float:
        return _inner_value(xiv, ca, cb, fiber, spec.inner_nodes).real

    prev = value_at(q)
    spec = q
    for _ in range(q.max_refinements):
        spec = replace(spec, inner_nodes=2 * spec.inner_nodes)
        cur = value_at(spec)
        if abs(cur - prev) <= q.rel_tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise QuadratureError(
        f"I_pm did not converge to rel_tol={q.rel_tol}", last_values=(prev, cur)
    )
