"""Frequency-space set families: thin boxes, balls, and their measures.

This module owns the four counterexample constructions.  Each construction
produces a triple of sets (A, B, R) in frequency space together with the
evaluation time:

* ``SCHRO_LOW_L``  -- thin boxes near -N and 2N-1; fixed time t.
* ``SCHRO_HIGH_L`` -- thin boxes near N and N+1; fixed time t.  The B box
  returned here is already reflected so that R - B is a subset of A and the
  convolution chi_A * chi_B is the one the estimates bound.
* ``SOL_LOW_L``    -- unit-scale balls at 0 and N*e1; time t_N ~ N^-2.
* ``SOL_HIGH_L``   -- symmetric two-ball union at +-N*e1 and a ball at 0;
  time t_N ~ N^-2.

Sets are finite unions of axis-aligned boxes and Euclidean balls.  Measures
and Minkowski-difference containment are computed in closed form.  Boundary
convention: boxes are closed, balls are open; the distinction is measure
zero and irrelevant to every integral downstream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

from .errors import DimensionMismatchError, UnsupportedShapeError

Vec = tuple[float, ...]


def as_vec(coords: Sequence[float]) -> Vec:
    v = tuple(float(c) for c in coords)
    if len(v) < 1:
        raise ValueError("frequency vector needs dimension >= 1")
    return v


def unit_first_axis(n: float, d: int) -> Vec:
    """The vector (n, 0, ..., 0) in dimension d."""
    return (float(n),) + (0.0,) * (d - 1)


@dataclass(frozen=True)
class Box:
    """Axis-aligned closed box given by per-axis bounds (lo[j] <= hi[j])."""

    lo: Vec
    hi: Vec

    def __post_init__(self):
        object.__setattr__(self, "lo", as_vec(self.lo))
        object.__setattr__(self, "hi", as_vec(self.hi))
        if len(self.lo) != len(self.hi):
            raise DimensionMismatchError("box lo/hi dimensions differ")
        for a, b in zip(self.lo, self.hi):
            if a > b:
                raise ValueError(f"box has lo > hi: {a} > {b}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def volume(self) -> float:
        v = 1.0
        for a, b in zip(self.lo, self.hi):
            v *= b - a
        return v

    def contains(self, xi: Vec) -> bool:
        return all(a <= x <= b for x, a, b in zip(xi, self.lo, self.hi))


@dataclass(frozen=True)
class Ball:
    """Open Euclidean ball {x : |x - center| < radius}."""

    center: Vec
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    def volume(self) -> float:
        d = self.dim
        return self.radius**d * math.pi ** (d / 2) / math.gamma(d / 2 + 1)

    def contains(self, xi: Vec) -> bool:
        return math.dist(xi, self.center) < self.radius

    def bounding_box(self) -> Box:
        return Box(
            tuple(c - self.radius for c in self.center),
            tuple(c + self.radius for c in self.center),
        )


def _overlap_box_box(p: Box, q: Box) -> bool:
    return all(a < d and c < b for a, b, c, d in zip(p.lo, p.hi, q.lo, q.hi))


def _overlap_ball_ball(p: Ball, q: Ball) -> bool:
    return math.dist(p.center, q.center) < p.radius + q.radius


@dataclass(frozen=True)
class FreqSet:
    """Finite disjoint union of boxes and balls in one ambient dimension."""

    boxes: tuple[Box, ...] = ()
    balls: tuple[Ball, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "balls", tuple(self.balls))
        if not self.boxes and not self.balls:
            raise ValueError("frequency set needs at least one constituent")
        dims = {b.dim for b in self.boxes} | {b.dim for b in self.balls}
        if len(dims) != 1:
            raise DimensionMismatchError(f"mixed constituent dimensions: {dims}")
        # Disjointness is only checked within each shape family; the structured
        # constructions below never mix shapes inside one set.
        for i, p in enumerate(self.boxes):
            for q in self.boxes[i + 1 :]:
                if _overlap_box_box(p, q):
                    raise ValueError("overlapping boxes in frequency set")
        for i, p in enumerate(self.balls):
            for q in self.balls[i + 1 :]:
                if _overlap_ball_ball(p, q):
                    raise ValueError("overlapping balls in frequency set")

    @property
    def dim(self) -> int:
        return (self.boxes + self.balls)[0].dim

    @property
    def constituents(self) -> tuple:
        return self.boxes + self.balls

    def is_single_box(self) -> bool:
        return len(self.boxes) == 1 and not self.balls

    def is_single_ball(self) -> bool:
        return len(self.balls) == 1 and not self.boxes


def box_set(lo: Sequence[float], hi: Sequence[float]) -> FreqSet:
    return FreqSet(boxes=(Box(tuple(lo), tuple(hi)),))


def ball_set(center: Sequence[float], radius: float) -> FreqSet:
    return FreqSet(balls=(Ball(tuple(center), radius),))


def measure(s: FreqSet) -> float:
    """Exact Lebesgue measure (constituents are disjoint by construction)."""
    return sum(b.volume() for b in s.boxes) + sum(b.volume() for b in s.balls)


def contains(s: FreqSet, xi: Sequence[float]) -> bool:
    """Membership test; boxes are closed, balls open."""
    v = as_vec(xi)
    if len(v) != s.dim:
        raise DimensionMismatchError(f"vector dim {len(v)} != set dim {s.dim}")
    return any(c.contains(v) for c in s.constituents)


# ---------------------------------------------------------------------------
# Minkowski-difference containment R - B subset-of A


@dataclass(frozen=True)
class ContainmentCertificate:
    """Outcome of a containment check with the witnessing margin.

    ``margin`` is the smallest slack over all constraints (negative when the
    containment fails); ``detail`` names the binding or violated constraint.
    """

    contained: bool
    margin: float
    detail: str

    def __bool__(self) -> bool:
        return self.contained


def _single(s: FreqSet, name: str):
    if s.is_single_box():
        return s.boxes[0]
    if s.is_single_ball():
        return s.balls[0]
    raise UnsupportedShapeError(
        f"{name} must be a single box or ball for Minkowski containment"
    )


def minkowski_diff_subset(
    r: FreqSet, b: FreqSet, a: FreqSet, tol: float = 1e-12
) -> ContainmentCertificate:
    """Decide R - B subset-of A analytically for the structured families.

    R and B must be single boxes or single balls.  A may additionally be a
    union of balls, in which case containment in any one member is accepted
    (sound for the disjoint symmetric family; not a complete union test).
    Box comparisons use a scale-relative tolerance because bound arithmetic
    at magnitude ~N rounds in the last few ulps; ball comparisons keep the
    absolute tolerance, which admits the exactly-touching configuration.
    """
    if not (r.dim == b.dim == a.dim):
        raise DimensionMismatchError("R, B, A dimensions differ")
    rr = _single(r, "R")
    bb = _single(b, "B")

    if isinstance(rr, Box) and isinstance(bb, Box):
        if not a.is_single_box():
            raise UnsupportedShapeError("box R - B needs a box A")
        aa = a.boxes[0]
        lo = tuple(rl - bh for rl, bh in zip(rr.lo, bb.hi))
        hi = tuple(rh - bl for rh, bl in zip(rr.hi, bb.lo))
        margin = math.inf
        detail = "all axes satisfied"
        ok = True
        for j in range(len(lo)):
            scale = max(1.0, abs(aa.lo[j]), abs(aa.hi[j]))
            for slack, corner in ((lo[j] - aa.lo[j], lo[j]), (aa.hi[j] - hi[j], hi[j])):
                if slack < margin:
                    margin = slack
                    detail = f"axis {j}: bound {corner!r} vs A [{aa.lo[j]!r}, {aa.hi[j]!r}]"
                if slack < -tol * scale:
                    ok = False
        if not ok:
            detail = "violating corner at " + detail
        return ContainmentCertificate(ok, margin, detail)

    if isinstance(rr, Ball) and isinstance(bb, Ball):
        # R - B is the ball of radius r_R + r_B centered at c_R - c_B.
        c = tuple(x - y for x, y in zip(rr.center, bb.center))
        rad = rr.radius + bb.radius
        if a.boxes:
            raise UnsupportedShapeError("ball R - B needs ball-shaped A")
        best = None
        for comp in a.balls:
            slack = comp.radius - (math.dist(c, comp.center) + rad)
            if best is None or slack > best:
                best = slack
        ok = best >= -tol
        detail = f"difference ball center {c}, radius {rad!r}; best slack {best!r}"
        return ContainmentCertificate(ok, best, detail)

    raise UnsupportedShapeError("R and B must both be boxes or both be balls")


# ---------------------------------------------------------------------------
# Construction cases


class CaseId(str, Enum):
    SCHRO_LOW_L = "schro-low-l"
    SCHRO_HIGH_L = "schro-high-l"
    SOL_LOW_L = "sol-low-l"
    SOL_HIGH_L = "sol-high-l"

    @property
    def is_schro(self) -> bool:
        return self in (CaseId.SCHRO_LOW_L, CaseId.SCHRO_HIGH_L)

    @property
    def is_sol(self) -> bool:
        return not self.is_schro


@dataclass(frozen=True)
class ConstructionCase:
    """Parameters selecting one construction at one frequency scale N.

    Cases 1-2 (``SCHRO_*``) take a box thickness delta and a fixed time t,
    constrained by 0 < delta < min(1/(7 t), 1) so the resonant phase stays
    inside the cosine's positivity window.  Cases 3-4 (``SOL_*``) take a
    horizon T > 0 and evaluate at t_N = T / (4 N^2 (1 + T)).
    """

    case: CaseId
    N: int
    d: int
    delta: float | None = None
    t: float | None = None
    T: float | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be a positive integer")
        if self.d < 1:
            raise ValueError("dimension d must be >= 1")
        if self.case.is_schro:
            delta = 0.1 if self.delta is None else float(self.delta)
            t = 0.5 if self.t is None else float(self.t)
            if t <= 0:
                raise ValueError("t must be positive")
            if not 0 < delta < min(1.0 / (7.0 * t), 1.0):
                raise ValueError(
                    f"delta={delta} violates 0 < delta < min(1/(7t), 1) = "
                    f"{min(1.0 / (7.0 * t), 1.0)}"
                )
            object.__setattr__(self, "delta", delta)
            object.__setattr__(self, "t", t)
            object.__setattr__(self, "T", None)
        else:
            T = 1.0 if self.T is None else float(self.T)
            if T <= 0:
                raise ValueError("T must be positive")
            object.__setattr__(self, "T", T)
            object.__setattr__(self, "delta", None)
            object.__setattr__(self, "t", None)

    @property
    def t_eval(self) -> float:
        """Evaluation time: t for box cases, t_N = T/(4N^2(1+T)) for ball cases."""
        if self.case.is_schro:
            return self.t
        return (1.0 / (4.0 * self.N * self.N)) * self.T / (1.0 + self.T)


class BuiltSets(NamedTuple):
    A: FreqSet
    B: FreqSet
    R: FreqSet
    t_eval: float


def _box(first: tuple[float, float], transverse: tuple[float, float], d: int) -> Box:
    # d = 1 drops the transverse factors entirely.
    lo = (first[0],) + (transverse[0],) * (d - 1)
    hi = (first[1],) + (transverse[1],) * (d - 1)
    return Box(lo, hi)


def build_sets(c: ConstructionCase) -> BuiltSets:
    """The (A, B, R) triple and evaluation time for a construction case.

    All four triples satisfy R - B subset-of A.  For ``SCHRO_HIGH_L`` the
    B returned is the reflection through the origin of the raw second box,
    which is exactly the set whose indicator enters the bilinear estimate;
    with that convention the containment and the convolution lower bound
    read identically across all four cases.
    """
    N, d = float(c.N), c.d
    if c.case is CaseId.SCHRO_LOW_L:
        delta = c.delta
        a = delta / N
        b = delta / (2.0 * N)
        tr = delta / (d - 1) if d > 1 else 0.0
        A = FreqSet(boxes=(_box((-N, -N + a), (0.0, tr), d),))
        B = FreqSet(boxes=(_box((2 * N - 1, 2 * N - 1 + b), (0.0, tr / 2), d),))
        R = FreqSet(boxes=(_box((N - 1 + b, N - 1 + a), (tr / 2, tr), d),))
        return BuiltSets(A, B, R, c.t_eval)
    if c.case is CaseId.SCHRO_HIGH_L:
        delta = c.delta
        a = delta / N
        b = delta / (2.0 * N)
        tr = delta / (d - 1) if d > 1 else 0.0
        A = FreqSet(boxes=(_box((N, N + a), (0.0, tr), d),))
        B = FreqSet(boxes=(_box((N + 1 - b, N + 1), (0.0, tr / 2), d),))
        R = FreqSet(boxes=(_box((2 * N + 1, 2 * N + 1 + b), (tr / 2, tr), d),))
        return BuiltSets(A, B, R, c.t_eval)
    if c.case is CaseId.SOL_LOW_L:
        A = ball_set((0.0,) * d, 0.5)
        B = ball_set(unit_first_axis(N, d), 0.25)
        R = ball_set(unit_first_axis(N, d), 0.25)
        return BuiltSets(A, B, R, c.t_eval)
    if c.case is CaseId.SOL_HIGH_L:
        A = FreqSet(
            balls=(
                Ball(unit_first_axis(N, d), 0.5),
                Ball(unit_first_axis(-N, d), 0.5),
            )
        )
        B = ball_set((0.0,) * d, 0.25)
        R = ball_set(unit_first_axis(N, d), 0.25)
        return BuiltSets(A, B, R, c.t_eval)
    raise ValueError(f"unknown case {c.case}")


# ---------------------------------------------------------------------------
# JSON serialization (numbers with 17 significant digits)


def _f17(x: float) -> str:
    return format(float(x), ".17g")


def _vec17(v: Iterable[float]) -> str:
    return "[" + ",".join(_f17(x) for x in v) + "]"


def freq_set_to_json(s: FreqSet) -> str:
    boxes = ",".join(
        '{"lo":' + _vec17(b.lo) + ',"hi":' + _vec17(b.hi) + "}" for b in s.boxes
    )
    balls = ",".join(
        '{"center":' + _vec17(b.center) + ',"radius":' + _f17(b.radius) + "}"
        for b in s.balls
    )
    return '{"boxes":[' + boxes + '],"balls":[' + balls + "]}"


def freq_set_from_json(text: str) -> FreqSet:
    obj = json.loads(text)
    boxes = tuple(Box(tuple(b["lo"]), tuple(b["hi"])) for b in obj.get("boxes", []))
    balls = tuple(
        Ball(tuple(b["center"]), b["radius"]) for b in obj.get("balls", [])
    )
    return FreqSet(boxes=boxes, balls=balls)
