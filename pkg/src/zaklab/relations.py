"""Resonance functions sigma/zeta and certified range enclosures.

The two phase families attached to the bilinear terms are

    sigma(xi1, xi2) = |xi1 + xi2|^2 - |xi1|^2 +- |xi2|
    zeta(xi1, xi2)  = |xi1|^2 - |xi2|^2 +- |xi1 + xi2|

Range certification over a product of structured sets uses a small interval
arithmetic with outward rounding: every elementary operation widens its
result by one ulp on each side, so no directed-rounding modes are needed
and every enclosure is a superset of the true range.  For box domains the
enclosure follows the monotone coordinate decomposition

    sigma_+- = xi2_1 (2 xi1_1 + xi2_1 +- 1) +- (|xi2| - xi2_1)
               + sum_{j>=2} xi2_j (2 xi1_j + xi2_j)

(and its zeta analogue with Xi = xi1 + xi2), whose middle term is clamped
at zero from below since |v| >= v_1 pointwise; naive term-wise evaluation
of the defining formula would lose exactly that sign information.  Ball
domains use per-factor enclosures |xi_i| in [max(0,|c_i|-r_i), |c_i|+r_i].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DimensionMismatchError, UnsupportedShapeError
from .geometry import (
    Ball,
    Box,
    CaseId,
    ConstructionCase,
    FreqSet,
    Vec,
    as_vec,
    build_sets,
)

_INF = math.inf
_SPLITTER = 134217729.0  # 2^27 + 1, Dekker mantissa splitting


def _down(x: float) -> float:
    return x if not math.isfinite(x) else math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return x if not math.isfinite(x) else math.nextafter(x, _INF)


def _two_sum(a: float, b: float) -> tuple[float, float]:
    """fl(a + b) and its exact rounding error (Knuth TwoSum)."""
    s = a + b
    bp = s - a
    return s, (a - (s - bp)) + (b - bp)


def _two_prod(a: float, b: float) -> tuple[float, float]:
    """fl(a * b) and its exact rounding error (Dekker splitting, no FMA)."""
    p = a * b
    ca = _SPLITTER * a
    ah = ca - (ca - a)
    al = a - ah
    cb = _SPLITTER * b
    bh = cb - (cb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _sum_lo(a: float, b: float) -> float:
    s, e = _two_sum(a, b)
    return s if e >= 0.0 else _down(s)


def _sum_hi(a: float, b: float) -> float:
    s, e = _two_sum(a, b)
    return s if e <= 0.0 else _up(s)


def _prod_lo(a: float, b: float) -> float:
    p, e = _two_prod(a, b)
    return p if e >= 0.0 else _down(p)


def _prod_hi(a: float, b: float) -> float:
    p, e = _two_prod(a, b)
    return p if e <= 0.0 else _up(p)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with outward-rounded arithmetic.

    Elementary operations compute their exact rounding error by error-free
    transformations and widen the affected endpoint by one ulp only when
    the float result actually rounded inward; exact operations (integer
    sums, powers of two, products with a zero factor) stay exact, which is
    what lets range claims with an extremum exactly on a closed endpoint
    certify without fuzz.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"interval lo > hi: {self.lo} > {self.hi}")

    @staticmethod
    def point(x: float) -> "Interval":
        return Interval(x, x)

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(_sum_lo(self.lo, other.lo), _sum_hi(self.hi, other.hi))

    def __sub__(self, other: "Interval") -> "Interval":
        return Interval(_sum_lo(self.lo, -other.hi), _sum_hi(self.hi, -other.lo))

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other: "Interval") -> "Interval":
        pairs = (
            (self.lo, other.lo),
            (self.lo, other.hi),
            (self.hi, other.lo),
            (self.hi, other.hi),
        )
        return Interval(
            min(_prod_lo(a, b) for a, b in pairs),
            max(_prod_hi(a, b) for a, b in pairs),
        )

    def shift(self, c: float) -> "Interval":
        return Interval(_sum_lo(self.lo, c), _sum_hi(self.hi, c))

    def scale(self, c: float) -> "Interval":
        if c >= 0:
            return Interval(_prod_lo(self.lo, c), _prod_hi(self.hi, c))
        return Interval(_prod_lo(self.hi, c), _prod_hi(self.lo, c))

    def square(self) -> "Interval":
        if self.lo >= 0:
            return Interval(_prod_lo(self.lo, self.lo), _prod_hi(self.hi, self.hi))
        if self.hi <= 0:
            return Interval(_prod_lo(self.hi, self.hi), _prod_hi(self.lo, self.lo))
        m = max(-self.lo, self.hi)
        return Interval(0.0, _prod_hi(m, m))

    def sqrt(self) -> "Interval":
        if self.lo < 0:
            raise ValueError("sqrt of an interval containing negatives")

        def root_lo(x: float) -> float:
            s = math.sqrt(x)
            p, e = _two_prod(s, s)
            return s if (p < x or (p == x and e <= 0.0)) else _down(s)

        def root_hi(x: float) -> float:
            s = math.sqrt(x)
            p, e = _two_prod(s, s)
            return s if (p > x or (p == x and e >= 0.0)) else _up(s)

        return Interval(root_lo(self.lo), root_hi(self.hi))

    def abs(self) -> "Interval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def clamp_lo(self, floor: float) -> "Interval":
        """Tighten the lower bound using outside knowledge (e.g. positivity)."""
        return Interval(max(self.lo, floor), max(self.hi, floor))

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _norm_enclosure(axes: list[Interval]) -> Interval:
    """Enclosure of |v| for v ranging over a box of per-axis intervals."""
    s = Interval(0.0, 0.0)
    for iv in axes:
        s = s + iv.square()
    return s.sqrt()


def _ball_abs_enclosure(b: Ball) -> Interval:
    c = math.hypot(*b.center)
    return Interval(max(0.0, _down(c - b.radius)), _up(c + b.radius))


class RelationFamily(Enum):
    SIGMA = "sigma"
    ZETA = "zeta"


class Sign(Enum):
    PLUS = 1
    MINUS = -1


@dataclass(frozen=True)
class RelationKind:
    family: RelationFamily
    sign: Sign

    @property
    def label(self) -> str:
        return f"{self.family.value}{'+' if self.sign is Sign.PLUS else '-'}"


def _check_dims(xi1: Vec, xi2: Vec):
    if len(xi1) != len(xi2):
        raise DimensionMismatchError("xi1 and xi2 dimensions differ")


def sigma(xi1, xi2, sign: Sign | int) -> float:
    """|xi|^2 - |xi1|^2 +- |xi2| at xi = xi1 + xi2."""
    v1, v2 = as_vec(xi1), as_vec(xi2)
    _check_dims(v1, v2)
    s = 1 if (sign is Sign.PLUS or sign == 1) else -1
    xi = [a + b for a, b in zip(v1, v2)]
    return (
        sum(x * x for x in xi)
        - sum(x * x for x in v1)
        + s * math.hypot(*v2)
    )


def zeta(xi1, xi2, sign: Sign | int) -> float:
    """|xi1|^2 - |xi2|^2 +- |xi1 + xi2|."""
    v1, v2 = as_vec(xi1), as_vec(xi2)
    _check_dims(v1, v2)
    s = 1 if (sign is Sign.PLUS or sign == 1) else -1
    xi = [a + b for a, b in zip(v1, v2)]
    return (
        sum(x * x for x in v1)
        - sum(x * x for x in v2)
        + s * math.hypot(*xi)
    )


def _range_over_boxes(kind: RelationKind, a: Box, b: Box) -> Interval:
    s = 1.0 if kind.sign is Sign.PLUS else -1.0
    a1 = Interval(a.lo[0], a.hi[0])
    b1 = Interval(b.lo[0], b.hi[0])
    b_axes = [Interval(lo, hi) for lo, hi in zip(b.lo, b.hi)]
    xi_axes = [
        Interval(al, ah) + Interval(bl, bh)
        for al, ah, bl, bh in zip(a.lo, a.hi, b.lo, b.hi)
    ]
    if kind.family is RelationFamily.SIGMA:
        lead = b1 * (a1.scale(2.0) + b1).shift(s)
        rest = (_norm_enclosure(b_axes) - b1).clamp_lo(0.0)  # |v| >= v_1 pointwise
        tail = Interval(0.0, 0.0)
        for j in range(1, a.dim):
            aj = Interval(a.lo[j], a.hi[j])
            bj = Interval(b.lo[j], b.hi[j])
            tail = tail + bj * (aj.scale(2.0) + bj)
    else:
        x1 = xi_axes[0]
        lead = x1 * (a1 - b1).shift(s)
        rest = (_norm_enclosure(xi_axes) - x1).clamp_lo(0.0)
        tail = Interval(0.0, 0.0)
        for j in range(1, a.dim):
            aj = Interval(a.lo[j], a.hi[j])
            bj = Interval(b.lo[j], b.hi[j])
            tail = tail + xi_axes[j] * (aj - bj)
    return lead + rest.scale(s) + tail


def _range_over_balls(kind: RelationKind, a: Ball, b: Ball) -> Interval:
    abs1 = _ball_abs_enclosure(a)
    abs2 = _ball_abs_enclosure(b)
    csum = tuple(x + y for x, y in zip(a.center, b.center))
    abs_sum = _ball_abs_enclosure(Ball(csum, a.radius + b.radius))
    if kind.family is RelationFamily.SIGMA:
        core = abs_sum.square() - abs1.square()
        lin = abs2
    else:
        core = abs1.square() - abs2.square()
        lin = abs_sum
    return core + lin.scale(1.0 if kind.sign is Sign.PLUS else -1.0)


def relation_range(kind: RelationKind, a: FreqSet, b: FreqSet) -> Interval:
    """Rigorous outer enclosure of the relation's range over A x B."""
    if a.dim != b.dim:
        raise DimensionMismatchError("A and B dimensions differ")
    if a.is_single_box() and b.is_single_box():
        return _range_over_boxes(kind, a.boxes[0], b.boxes[0])
    if a.is_single_ball() and b.is_single_ball():
        return _range_over_balls(kind, a.balls[0], b.balls[0])
    raise UnsupportedShapeError("relation_range needs single-box or single-ball sets")


# ---------------------------------------------------------------------------
# Claim certification


@dataclass(frozen=True)
class ClaimedRange:
    """A claimed range window with per-endpoint open/closed flags.

    Open endpoints are compared strictly with no allowance: those are the
    load-bearing bounds and the enclosures clear them by O(delta) margins.
    Closed endpoints allow an ulp-fuzz band (1e-9 relative to the window
    scale), because a claim whose true extremum sits exactly on a closed
    endpoint can never be certified by outward-rounded arithmetic, which
    necessarily overshoots the exact value by a few ulps.
    """

    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    _FUZZ = 1e-9

    def _fuzz(self) -> float:
        return self._FUZZ * max(1.0, abs(self.lo), abs(self.hi))

    def admits(self, enc: Interval) -> bool:
        lo_ok = enc.lo > self.lo if self.lo_open else enc.lo >= self.lo - self._fuzz()
        hi_ok = enc.hi < self.hi if self.hi_open else enc.hi <= self.hi + self._fuzz()
        return lo_ok and hi_ok

    def as_pair(self) -> tuple[float, float]:
        return (self.lo, self.hi)


def claimed_ranges(c: ConstructionCase) -> dict[str, ClaimedRange]:
    """The certified range windows attached to the box constructions."""
    N = float(c.N)
    delta = c.delta
    if c.case is CaseId.SCHRO_LOW_L:
        return {
            "sigma+": ClaimedRange(0.0, 7 * delta, hi_open=True),
            "sigma-": ClaimedRange(-5 * N, -0.5 * N, lo_open=True, hi_open=True),
        }
    if c.case is CaseId.SCHRO_HIGH_L:
        return {
            "zeta+": ClaimedRange(-delta, 7 * delta, lo_open=True, hi_open=True),
            "zeta-": ClaimedRange(-7 * N, -N, lo_open=True, hi_open=True),
        }
    raise ValueError("range claims apply to the box cases only")


_KIND_BY_LABEL = {
    "sigma+": RelationKind(RelationFamily.SIGMA, Sign.PLUS),
    "sigma-": RelationKind(RelationFamily.SIGMA, Sign.MINUS),
    "zeta+": RelationKind(RelationFamily.ZETA, Sign.PLUS),
    "zeta-": RelationKind(RelationFamily.ZETA, Sign.MINUS),
}


def kind_from_label(label: str) -> RelationKind:
    return _KIND_BY_LABEL[label]


@dataclass(frozen=True)
class RangeCertificate:
    kind: str
    claimed: tuple[float, float]
    enclosure: tuple[float, float]
    verified: bool
    refinements: int

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "claimed": list(self.claimed),
            "enclosure": list(self.enclosure),
            "verified": self.verified,
            "refinements": self.refinements,
        }


def _split_box(b: Box) -> list[Box]:
    out = [b]
    for j in range(b.dim):
        nxt = []
        for piece in out:
            mid = 0.5 * (piece.lo[j] + piece.hi[j])
            lo1 = list(piece.lo)
            hi1 = list(piece.hi)
            hi1[j] = mid
            lo2 = list(piece.lo)
            lo2[j] = mid
            nxt.append(Box(tuple(lo1), tuple(hi1)))
            nxt.append(Box(tuple(lo2), tuple(piece.hi)))
        out = nxt
    return out


def certify_range(
    kind: RelationKind,
    a: FreqSet,
    b: FreqSet,
    claimed: ClaimedRange,
    max_bisections: int = 8,
) -> RangeCertificate:
    """Check enclosure(range over A x B) inside the claimed window.

    If the one-shot enclosure overshoots, both domains are bisected along
    every axis (up to ``max_bisections`` rounds) and offending sub-pairs are
    re-enclosed; interval overestimation therefore cannot produce a false
    negative at any finite refinement depth short of the cap.
    """
    enc = relation_range(kind, a, b)
    if claimed.admits(enc) or not (a.is_single_box() and b.is_single_box()):
        return RangeCertificate(
            kind.label, claimed.as_pair(), (enc.lo, enc.hi), claimed.admits(enc), 0
        )
    pairs = [(a.boxes[0], b.boxes[0])]
    done_hull: Interval | None = None  # union of sub-pairs already verified
    last_hull = enc
    for depth in range(1, max_bisections + 1):
        bad: list[tuple[Box, Box]] = []
        bad_hull: Interval | None = None
        for pa, pb in pairs:
            for sa in _split_box(pa):
                for sb in _split_box(pb):
                    e = _range_over_boxes(kind, sa, sb)
                    if claimed.admits(e):
                        done_hull = e if done_hull is None else done_hull.hull(e)
                    else:
                        bad.append((sa, sb))
                        bad_hull = e if bad_hull is None else bad_hull.hull(e)
        last_hull = done_hull if bad_hull is None else (
            bad_hull if done_hull is None else done_hull.hull(bad_hull)
        )
        if not bad:
            return RangeCertificate(
                kind.label, claimed.as_pair(), (last_hull.lo, last_hull.hi), True, depth
            )
        pairs = bad
    return RangeCertificate(
        kind.label, claimed.as_pair(), (last_hull.lo, last_hull.hi), False, max_bisections
    )


def certify_case_ranges(c: ConstructionCase) -> list[RangeCertificate]:
    """Certify every claimed relation window of a box construction."""
    built = build_sets(c)
    return [
        certify_range(kind_from_label(label), built.A, built.B, window)
        for label, window in claimed_ranges(c).items()
    ]


# ---------------------------------------------------------------------------
# Phase-argument bounds for the ball constructions


@dataclass(frozen=True)
class PhaseBoundReport:
    """Worst-case cosine arguments over [0, t_eval] x A x B (and R).

    ``verified`` means every argument magnitude is provably below 1, hence
    each cosine exceeds cos(1) > 1/2 and the relevant product exceeds 1/4.
    ``cos_product_floor`` is the certified lower bound for that product.
    """

    verified: bool
    arg_bounds: dict[str, float]
    threshold: float
    cos_product_floor: float

    def to_json_dict(self) -> dict:
        return {
            "verified": self.verified,
            "arg_bounds": dict(self.arg_bounds),
            "threshold": self.threshold,
            "cos_product_floor": self.cos_product_floor,
        }


def _union_abs_enclosure(s: FreqSet) -> Interval:
    encs = [_ball_abs_enclosure(b) for b in s.balls]
    out = encs[0]
    for e in encs[1:]:
        out = out.hull(e)
    return out


def phase_product_bound(c: ConstructionCase) -> PhaseBoundReport:
    """Certify the cosine arguments of the ball constructions stay inside (-1, 1)."""
    if not c.case.is_sol:
        raise ValueError("phase_product_bound applies to the ball cases only")
    built = build_sets(c)
    t = Interval(0.0, built.t_eval)
    abs_a = _union_abs_enclosure(built.A)
    abs_b = _union_abs_enclosure(built.B)
    abs_r = _union_abs_enclosure(built.R)
    sum_ball_abs = abs_a + abs_b  # coarse |xi1 + xi2| <= |xi1| + |xi2| bound

    if c.case is CaseId.SOL_LOW_L:
        core = (sum_ball_abs.square() - abs_a.square()).abs()
        bounds = {
            "schrodinger_argument": (t * core).abs().hi,
            "wave_argument": (t * abs_b).abs().hi,
        }
    else:
        core = (abs_a.square() - abs_b.square()).abs()
        bounds = {
            "schrodinger_argument": (t * core).abs().hi,
            "propagated_wave_argument": (t * abs_r).abs().hi,
        }
    ok = all(v < 1.0 for v in bounds.values())
    floor = math.cos(max(bounds.values())) ** 2 if ok else 0.0
    return PhaseBoundReport(ok, bounds, 1.0, floor)
