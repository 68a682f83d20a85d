"""N-sweeps, log-log slope fits, and the regularity-region classifier.

A sweep evaluates lhs_norm / rhs_norm for one construction case over a
geometric grid of frequency scales N and fits the growth exponent of the
ratio by ordinary least squares in log-log coordinates.  The predicted
exponents come from dividing each case's lower bound by its right-hand
side:

    case 1 (schro-low-l):  -l - 1/2
    case 2 (schro-high-l):  l - 2k + 1/2
    case 3 (sol-low-l):     k - l - 2      (t_N ~ N^-2 included)
    case 4 (sol-high-l):    l - k - 1

The classifier evaluates the three statement regions verbatim:
local well-posedness (d-dependent inequality rows), flow-map failure
(l < -1/2 or l > 2k - 1/2), and solution-map failure (l < k - 2 or
l > k + 1).  Only slopes and monotonicity are ever compared in sweeps;
the implicit constants of the estimates are unspecified.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import QuadratureError
from .geometry import CaseId, ConstructionCase
from .oscillatory import QuadratureSpec, RegularityTriple, lhs_norm, rhs_norm


@dataclass(frozen=True)
class SweepRecord:
    N: int
    lhs: float
    rhs: float
    ratio: float

    def __post_init__(self):
        if self.lhs <= 0 or self.rhs <= 0:
            raise ValueError("sweep records need positive lhs and rhs")
        if not math.isclose(self.ratio, self.lhs / self.rhs, rel_tol=1e-15):
            raise ValueError("ratio field disagrees with lhs/rhs")


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    n_points: int

    def __post_init__(self):
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValueError("r_squared outside [0, 1]")

    def to_json_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
        }


@dataclass(frozen=True)
class RegionLabel:
    lwp: bool
    ill_flow: bool
    ill_solution: bool
    notes: str

    def to_json_dict(self) -> dict:
        return {
            "lwp": self.lwp,
            "ill_flow": self.ill_flow,
            "ill_solution": self.ill_solution,
            "notes": self.notes,
        }


def predicted_exponent(case: CaseId, r: RegularityTriple) -> float:
    """Growth exponent of ratio(N) implied by the case's estimate chain."""
    if case is CaseId.SCHRO_LOW_L:
        return -r.l - 0.5
    if case is CaseId.SCHRO_HIGH_L:
        return r.l - 2.0 * r.k + 0.5
    if case is CaseId.SOL_LOW_L:
        return r.k - r.l - 2.0
    return r.l - r.k - 1.0


def sweep(
    case: CaseId,
    r: RegularityTriple,
    Ns: Sequence[int],
    *,
    delta: float | None = None,
    t: float | None = None,
    T: float | None = None,
    q: QuadratureSpec = QuadratureSpec(),
) -> list[SweepRecord]:
    """Evaluate the LHS/RHS ratio for each N, strictly increasing Ns >= 2."""
    ns = list(Ns)
    if any(n < 2 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("Ns must be strictly increasing integers >= 2")
    records = []
    for n in ns:
        cc = ConstructionCase(case, N=n, d=r.d, delta=delta, t=t, T=T)
        try:
            lhs = lhs_norm(cc, r, q)
        except QuadratureError as exc:
            raise QuadratureError(f"sweep failed at N={n}: {exc}", exc.last_values)
        rhs = rhs_norm(cc)
        records.append(SweepRecord(n, lhs, rhs, lhs / rhs))
    return records


def fit_slope(records: Sequence[SweepRecord]) -> FitResult:
    """OLS fit of log(ratio) against log(N)."""
    if len(records) < 2:
        raise ValueError("slope fit needs at least 2 records")
    if any(rec.ratio <= 0 for rec in records):
        raise ValueError("slope fit needs positive ratios")
    recs = sorted(records, key=lambda rec: rec.N)
    xs = [math.log(rec.N) for rec in recs]
    ys = [math.log(rec.ratio) for rec in recs]
    n = len(xs)
    xbar = sum(xs) / n
    ybar = sum(ys) / n
    sxx = sum((x - xbar) ** 2 for x in xs)
    sxy = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    ss_res = sum((y - slope * x - intercept) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - ybar) ** 2 for y in ys)
    if ss_tot <= 0:
        r2 = 1.0  # constant data is fit perfectly by the constant line
    else:
        r2 = max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return FitResult(slope, intercept, r2, n)


def records_to_csv(records: Sequence[SweepRecord]) -> str:
    lines = ["N,lhs,rhs,ratio"]
    for rec in records:
        lines.append(
            f"{rec.N},{rec.lhs:.16e},{rec.rhs:.16e},{rec.ratio:.16e}"
        )
    return "\n".join(lines) + "\n"


def fit_to_json(fit: FitResult) -> str:
    return json.dumps(fit.to_json_dict(), indent=2)


# ---------------------------------------------------------------------------
# Region classifier


def classify(r: RegularityTriple) -> RegionLabel:
    """Label (k, l, d) against the well-posed and failure regions.

    The inequalities are evaluated exactly as stated, strict where strict:

    * lwp, d = 1:   -1/2 < k - l <= 1,  2k >= l + 1/2 >= 0
    * lwp, d >= 2:  l <= k <= l + 1, plus (d = 2, 3)  l >= 0 and
      2k - (l + 1) >= 0, or (d >= 4)  l > d/2 - 2 and 2k - (l + 1) > d/2 - 2
    * flow-map failure:      l < -1/2  or  l > 2k - 1/2
    * solution-map failure:  l < k - 2  or  l > k + 1
    """
    k, l, d = r.k, r.l, r.d
    if d == 1:
        # 2k >= l + 1/2 >= 0 written as l <= 2k - 1/2 and l >= -1/2, the exact
        # float complements of the failure-region comparisons: rounding in
        # l + 0.5 could otherwise claim both regions on their shared boundary
        lwp = (-0.5 < k - l <= 1.0) and (l <= 2.0 * k - 0.5) and (l >= -0.5)
    elif d in (2, 3):
        lwp = (l <= k <= l + 1.0) and (l >= 0.0) and (2.0 * k - (l + 1.0) >= 0.0)
    else:
        lwp = (
            (l <= k <= l + 1.0)
            and (l > d / 2.0 - 2.0)
            and (2.0 * k - (l + 1.0) > d / 2.0 - 2.0)
        )
    ill_flow = (l < -0.5) or (l > 2.0 * k - 0.5)
    ill_solution = (l < k - 2.0) or (l > k + 1.0)

    notes = []
    if lwp:
        notes.append("inside the contraction well-posedness region")
    if l < -0.5:
        notes.append("flow map not C2: l < -1/2")
    if l > 2.0 * k - 0.5:
        notes.append("flow map not C2: l > 2k - 1/2")
    if l < k - 2.0:
        notes.append("solution map not C2: l < k - 2")
    if l > k + 1.0:
        notes.append("solution map not C2: l > k + 1")
    if not notes:
        notes.append("outside all classified regions")
    return RegionLabel(lwp, ill_flow, ill_solution, "; ".join(notes))
