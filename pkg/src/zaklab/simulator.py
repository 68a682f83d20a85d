"""Lattice pseudospectral integrator for the coupled Schrodinger-wave system.

Fields live on a symmetric frequency lattice xi_j = j * dxi, j in [-M, M]^d,
equivalently a periodic spatial box of period 2 pi / dxi.  Evolution marches
the integral-equation form

    u(t)  = U(t) u0        - i int_0^t U(t-s) (n u)(s) ds
    n(t)  = W(t)(n0, nt0)  +   int_0^t W1(t-s) Lap |u|^2 (s) ds
    nt(t) = W(t)(nt0, Lap n0) + int_0^t W0(t-s) Lap |u|^2 (s) ds

with multipliers U(t) = exp(-i t |xi|^2), W0(t) = cos(t |xi|),
W1(t) = sin(t |xi|)/|xi| (value t at xi = 0), in substeps with trapezoidal
quadrature closed by fixed-point iteration.  Pointwise products are formed
in physical space via FFT round trips; data confined to |j| <= M/2 makes
the first product exact on the lattice, and the running guard is exactly
that confinement check.

The quadratic term of the flow map is also available in closed form
(``picard_second``), and ``second_gateaux_fd`` recovers it from the full
evolution by a symmetric second difference, which is the cross-validation
the test-suite leans on.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AliasingError,
    DimensionMismatchError,
    LatticeCoverageError,
    StabilityError,
)
from .geometry import CaseId, ConstructionCase, FreqSet, build_sets, contains
from .oscillatory import RegularityTriple

_REALITY_TOL = 1e-12


@functools.lru_cache(maxsize=16)
def _grids(d: int, M: int, dxi: float):
    axis = (np.arange(2 * M + 1) - M) * dxi
    mesh = np.meshgrid(*([axis] * d), indexing="ij") if d > 1 else [axis]
    sq = sum(g * g for g in mesh)
    return axis, mesh, sq, np.sqrt(sq)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex amplitudes on the lattice; shape must be (2M+1,)^d."""

    dxi: float
    coeffs: np.ndarray

    def __post_init__(self):
        if self.dxi <= 0:
            raise ValueError("dxi must be positive")
        arr = np.asarray(self.coeffs, dtype=complex)
        shape = arr.shape
        if not shape or any(s != shape[0] for s in shape) or shape[0] % 2 == 0:
            raise ValueError("coefficients must be a (2M+1)^d hypercube")
        object.__setattr__(self, "coeffs", arr)

    @property
    def d(self) -> int:
        return self.coeffs.ndim

    @property
    def M(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        return SpectralField(self.dxi, coeffs)

    def zeros_like(self) -> "SpectralField":
        return SpectralField(self.dxi, np.zeros_like(self.coeffs))

    def reality_defect(self) -> float:
        """Max |conj(coeff(-xi)) - coeff(xi)|, normalized by the peak amplitude."""
        flipped = np.conj(self.coeffs[(slice(None, None, -1),) * self.d])
        peak = float(np.max(np.abs(self.coeffs)))
        if peak == 0.0:
            return 0.0
        return float(np.max(np.abs(flipped - self.coeffs))) / peak

    def support_halfwidth(self) -> int:
        """Largest |j| over any axis carrying a nonzero coefficient."""
        idx = np.nonzero(self.coeffs)
        if len(idx[0]) == 0:
            return 0
        return max(int(np.max(np.abs(ax - self.M))) for ax in idx)

    def hs_norm(self, s: float) -> float:
        _, _, sq, _ = _grids(self.d, self.M, self.dxi)
        w = (1.0 + sq) ** s
        return float(
            math.sqrt(np.sum(w * np.abs(self.coeffs) ** 2) * self.dxi**self.d)
        )


def _same_lattice(*fields: SpectralField):
    f0 = fields[0]
    for f in fields[1:]:
        if f.dxi != f0.dxi or f.coeffs.shape != f0.coeffs.shape:
            raise DimensionMismatchError("fields live on different lattices")


@dataclass(frozen=True)
class DataTriple:
    """Initial data (u0, n0, n1) = (u, n, dt n) at time zero.

    n0 and n1 must satisfy the reality condition coeff(-xi) = conj(coeff(xi))
    so that the wave component stays real-valued.
    """

    u0: SpectralField
    n0: SpectralField
    n1: SpectralField

    def __post_init__(self):
        _same_lattice(self.u0, self.n0, self.n1)
        for name, f in (("n0", self.n0), ("n1", self.n1)):
            defect = f.reality_defect()
            if defect > _REALITY_TOL:
                raise ValueError(f"{name} violates the reality condition: {defect:g}")

    def scaled(self, factor: float) -> "DataTriple":
        return DataTriple(
            self.u0.with_coeffs(factor * self.u0.coeffs),
            self.n0.with_coeffs(factor * self.n0.coeffs),
            self.n1.with_coeffs(factor * self.n1.coeffs),
        )


@dataclass(frozen=True)
class HklNorm:
    u_part: float
    n_part: float
    nt_part: float
    total: float


def hkl_norm(
    u: SpectralField, n: SpectralField, nt: SpectralField, r: RegularityTriple
) -> HklNorm:
    """Weighted lattice norms (H^k, H^l, H^(l-1)) and their Pythagorean total."""
    _same_lattice(u, n, nt)
    a = u.hs_norm(r.k)
    b = n.hs_norm(r.l)
    c = nt.hs_norm(r.l - 1.0)
    return HklNorm(a, b, c, math.sqrt(a * a + b * b + c * c))


# ---------------------------------------------------------------------------
# Linear propagators


def linear_schrodinger(f: SpectralField, t: float) -> SpectralField:
    """Multiply each coefficient by exp(-i t |xi|^2)."""
    _, _, sq, _ = _grids(f.d, f.M, f.dxi)
    return f.with_coeffs(np.exp(-1j * t * sq) * f.coeffs)


def _wave_multipliers(d: int, M: int, dxi: float, t: float):
    _, _, _, ax = _grids(d, M, dxi)
    c = np.cos(t * ax)
    s = np.where(ax > 0, np.sin(t * ax) / np.where(ax == 0, 1.0, ax), t)
    return c, s, ax


def linear_wave(
    psi: SpectralField, phi: SpectralField, t: float
) -> tuple[SpectralField, SpectralField]:
    """Free wave evolution of (n, dt n) = (psi, phi) in multiplier form.

    n_hat  = cos(t|xi|) psi_hat + sin(t|xi|)/|xi| phi_hat   (t at xi = 0)
    nt_hat = cos(t|xi|) phi_hat - |xi| sin(t|xi|) psi_hat
    """
    _same_lattice(psi, phi)
    c, s, ax = _wave_multipliers(psi.d, psi.M, psi.dxi, t)
    n = psi.with_coeffs(c * psi.coeffs + s * phi.coeffs)
    nt = phi.with_coeffs(c * phi.coeffs - ax * np.sin(t * ax) * psi.coeffs)
    return n, nt


# ---------------------------------------------------------------------------
# Lattice products


class _Kernel:
    """Precomputed multipliers and FFT helpers bound to one lattice."""

    def __init__(self, d: int, M: int, dxi: float):
        self.d = d
        self.M = M
        self.dxi = dxi
        self.Ng = 2 * M + 1
        _, _, self.sq, self.ax = _grids(d, M, dxi)
        self.lap = -self.sq
        self.prod_scale = (self.Ng * dxi / (2.0 * math.pi)) ** d

    def to_phys(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(np.fft.ifftshift(coeffs))

    def to_freq(self, phys: np.ndarray) -> np.ndarray:
        return np.fft.fftshift(np.fft.fftn(phys)) * self.prod_scale


def lattice_product(
    fa: SpectralField, fb: SpectralField, conjugate_b: bool = False
) -> SpectralField:
    """Coefficients of the pointwise product (a * b) or (a * conj(b))."""
    _same_lattice(fa, fb)
    ker = _Kernel(fa.d, fa.M, fa.dxi)
    pb = ker.to_phys(fb.coeffs)
    if conjugate_b:
        pb = np.conj(pb)
    return fa.with_coeffs(ker.to_freq(ker.to_phys(fa.coeffs) * pb))


def _guard_half_support(*fields: SpectralField):
    M = fields[0].M
    for f in fields:
        hw = f.support_halfwidth()
        if hw > M // 2:
            raise AliasingError(
                f"data support |j| <= {hw} exceeds the product-safe band M/2 = {M // 2}"
            )


# ---------------------------------------------------------------------------
# Second derivative of the flow, closed form


def picard_second(
    phi0: DataTriple,
    phi1: DataTriple,
    r: RegularityTriple | None,
    t: float,
    s_nodes: int = 24,
) -> tuple[SpectralField, SpectralField, SpectralField]:
    """Quadratic term of the flow along the pair of directions (phi0, phi1).

        u2(t)  = -i int_0^t U(t-s) { U(s)u0 . W(s)(n1, m1) + U(s)u1 . W(s)(n0, m0) } ds
        n2(t)  =    int_0^t W1(t-s) Lap { U(s)u0 . conj(U(s)u1) + conj . } ds
        nt2(t) =    int_0^t W0(t-s) Lap { same } ds

    The s-integral is Gauss-Legendre with ``s_nodes`` nodes; products are
    exact on the lattice provided both data supports fit in |j| <= M/2.
    """
    _same_lattice(phi0.u0, phi1.u0)
    if r is not None and r.d != phi0.u0.d:
        raise DimensionMismatchError("regularity triple dimension differs from data")
    _guard_half_support(
        phi0.u0, phi0.n0, phi0.n1, phi1.u0, phi1.n0, phi1.n1
    )
    f = phi0.u0
    ker = _Kernel(f.d, f.M, f.dxi)
    nodes, wts = np.polynomial.legendre.leggauss(s_nodes)
    ss = 0.5 * t * (nodes + 1.0)
    ww = 0.5 * t * wts
    U2 = np.zeros_like(f.coeffs)
    N2 = np.zeros_like(f.coeffs)
    NT2 = np.zeros_like(f.coeffs)
    for s, w in zip(ss, ww):
        es = np.exp(-1j * s * ker.sq)
        cs = np.cos(s * ker.ax)
        sn = np.where(ker.ax > 0, np.sin(s * ker.ax) / np.where(ker.ax == 0, 1.0, ker.ax), s)
        pa0 = ker.to_phys(es * phi0.u0.coeffs)
        pa1 = ker.to_phys(es * phi1.u0.coeffs)
        pw0 = ker.to_phys(cs * phi0.n0.coeffs + sn * phi0.n1.coeffs)
        pw1 = ker.to_phys(cs * phi1.n0.coeffs + sn * phi1.n1.coeffs)
        g = ker.to_freq(pa0 * pw1 + pa1 * pw0)
        p = ker.to_freq(pa0 * np.conj(pa1) + pa1 * np.conj(pa0))
        ets = np.exp(-1j * (t - s) * ker.sq)
        ct = np.cos((t - s) * ker.ax)
        st = np.where(
            ker.ax > 0,
            np.sin((t - s) * ker.ax) / np.where(ker.ax == 0, 1.0, ker.ax),
            t - s,
        )
        U2 += w * ets * g
        N2 += w * st * (ker.lap * p)
        NT2 += w * ct * (ker.lap * p)
    return (
        f.with_coeffs(-1j * U2),
        f.with_coeffs(N2),
        f.with_coeffs(NT2),
    )


# ---------------------------------------------------------------------------
# Full nonlinear evolution


def _march(
    ker: _Kernel,
    u: np.ndarray,
    n: np.ndarray,
    nt: np.ndarray,
    h: float,
    steps: int,
    picard_iters: int,
    nonlinear: bool,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Advance ``steps`` substeps of size h; arrays are consumed, not mutated."""
    eh = np.exp(-1j * h * ker.sq)
    ch = np.cos(h * ker.ax)
    sh = np.where(ker.ax > 0, np.sin(h * ker.ax) / np.where(ker.ax == 0, 1.0, ker.ax), h)
    swv = ker.ax * np.sin(h * ker.ax)

    def size(a, b, c) -> float:
        return float(
            np.sqrt(np.sum(np.abs(a) ** 2) + np.sum(np.abs(b) ** 2) + np.sum(np.abs(c) ** 2))
        )

    for _ in range(steps):
        before = size(u, n, nt)
        u_lin = eh * u
        n_lin = ch * n + sh * nt
        nt_lin = ch * nt - swv * n
        if nonlinear:
            pu = ker.to_phys(u)
            pn = ker.to_phys(n)
            g0 = ker.to_freq(pn * pu)
            p0 = ker.to_freq(pu * np.conj(pu))
            lap_p0 = ker.lap * p0
            u1, n1, nt1 = u_lin, n_lin, nt_lin
            for _ in range(picard_iters):
                pu1 = ker.to_phys(u1)
                pn1 = ker.to_phys(n1)
                g1 = ker.to_freq(pn1 * pu1)
                p1 = ker.to_freq(pu1 * np.conj(pu1))
                u1 = u_lin - 1j * (h / 2.0) * (eh * g0 + g1)
                n1 = n_lin + (h / 2.0) * (sh * lap_p0)  # W1(0) = 0 kills the s=h term
                nt1 = nt_lin + (h / 2.0) * (ch * lap_p0 + ker.lap * p1)
            u, n, nt = u1, n1, nt1
        else:
            u, n, nt = u_lin, n_lin, nt_lin
        after = size(u, n, nt)
        if before > 0 and after > 10.0 * before:
            raise StabilityError(
                f"norm grew {after / before:.2f}x within one substep of size {h:g}"
            )
    return u, n, nt


def evolve(
    phi: DataTriple,
    t: float,
    steps: int,
    picard_iters: int = 3,
    nonlinear: bool = True,
) -> tuple[SpectralField, SpectralField, SpectralField]:
    """March the integral equations on substeps of size t / steps.

    Each substep applies the linear propagators exactly and closes the
    trapezoidal Duhamel quadrature by ``picard_iters`` fixed-point sweeps.
    A substep that grows the combined L2 size more than tenfold aborts with
    a stability error.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    _guard_half_support(phi.u0, phi.n0, phi.n1)
    f = phi.u0
    ker = _Kernel(f.d, f.M, f.dxi)
    u, n, nt = _march(
        ker,
        phi.u0.coeffs.copy(),
        phi.n0.coeffs.copy(),
        phi.n1.coeffs.copy(),
        t / steps,
        steps,
        picard_iters,
        nonlinear,
    )
    return f.with_coeffs(u), f.with_coeffs(n), f.with_coeffs(nt)


def evolve_series(
    phi: DataTriple,
    t: float,
    steps: int,
    samples: int = 10,
    picard_iters: int = 3,
    nonlinear: bool = True,
) -> list[tuple[float, SpectralField, SpectralField, SpectralField]]:
    """Evolution with intermediate states recorded at ~``samples`` times.

    Returns [(t_i, u, n, nt), ...] including the initial state; sampling is
    on substep boundaries, so ``samples`` is rounded to divide ``steps``.
    The half-support guard applies to the initial data only.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    _guard_half_support(phi.u0, phi.n0, phi.n1)
    f = phi.u0
    ker = _Kernel(f.d, f.M, f.dxi)
    samples = max(1, min(samples, steps))
    seg = max(1, round(steps / samples))
    h = t / steps
    u, n, nt = phi.u0.coeffs.copy(), phi.n0.coeffs.copy(), phi.n1.coeffs.copy()
    out = [(0.0, phi.u0, phi.n0, phi.n1)]
    done = 0
    while done < steps:
        k = min(seg, steps - done)
        u, n, nt = _march(ker, u, n, nt, h, k, picard_iters, nonlinear)
        done += k
        out.append((done * h, f.with_coeffs(u), f.with_coeffs(n), f.with_coeffs(nt)))
    return out


def second_gateaux_fd(
    phi: DataTriple,
    r: RegularityTriple | None,
    t: float,
    eps: float,
    steps: int,
    picard_iters: int = 3,
    nonlinear: bool = True,
) -> tuple[SpectralField, SpectralField, SpectralField]:
    """Symmetric second difference [S(eps phi) + S(-eps phi)] / eps^2.

    The flow fixes the origin, so the zeroth-order term vanishes and this
    estimates the same quadratic term ``picard_second(phi, phi, t)`` up to
    O(eps^2) plus the integrator's O(step^2).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    plus = evolve(phi.scaled(eps), t, steps, picard_iters, nonlinear)
    minus = evolve(phi.scaled(-eps), t, steps, picard_iters, nonlinear)
    inv = 1.0 / (eps * eps)
    return tuple(
        p.with_coeffs(inv * (p.coeffs + m.coeffs)) for p, m in zip(plus, minus)
    )


def triple_l2_distance(
    a: Sequence[SpectralField], b: Sequence[SpectralField]
) -> float:
    """Flat L2 distance combining the three components."""
    return math.sqrt(
        sum(x.with_coeffs(x.coeffs - y.coeffs).hs_norm(0.0) ** 2 for x, y in zip(a, b))
    )


def triple_l2_norm(a: Sequence[SpectralField]) -> float:
    return math.sqrt(sum(x.hs_norm(0.0) ** 2 for x in a))


# ---------------------------------------------------------------------------
# Data construction


def _indicator(s: FreqSet, d: int, M: int, dxi: float) -> np.ndarray:
    axis, mesh, _, _ = _grids(d, M, dxi)
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    vals = np.fromiter(
        (contains(s, tuple(p)) for p in pts), dtype=float, count=pts.shape[0]
    )
    return vals.reshape(mesh[0].shape)


def make_counterexample_data(
    c: ConstructionCase, r: RegularityTriple, dxi: float, M: int
) -> DataTriple:
    """Lattice data whose weighted transform is the indicator of the case sets.

    u-and-n cases (1, 3): u0_hat = chi_A / bracket^k and n0_hat is the
    symmetrization (chi_B(xi) + chi_B(-xi)) / bracket^l with n1 = 0.
    u-only cases (2, 4): both interaction components are built into u0_hat
    (the A family plus the reflected-B or origin-ball family) and n0 = n1 = 0.
    """
    if r.d != c.d:
        raise DimensionMismatchError("regularity and case dimensions differ")
    d = c.d
    built = build_sets(c)
    _, _, sq, _ = _grids(d, M, dxi)
    bracket = np.sqrt(1.0 + sq)
    chi_a = _indicator(built.A, d, M, dxi)
    chi_b = _indicator(built.B, d, M, dxi)
    if chi_a.sum() == 0:
        raise LatticeCoverageError("no lattice point falls inside A; refine dxi")
    if chi_b.sum() == 0:
        raise LatticeCoverageError("no lattice point falls inside B; refine dxi")
    flip = (slice(None, None, -1),) * d
    zero = np.zeros_like(chi_a, dtype=complex)
    if c.case in (CaseId.SCHRO_LOW_L, CaseId.SOL_LOW_L):
        u0 = chi_a / bracket**r.k
        n0 = (chi_b + chi_b[flip]) / bracket**r.l
        n1 = zero
    elif c.case is CaseId.SCHRO_HIGH_L:
        u0 = (chi_a + chi_b[flip]) / bracket**r.k
        n0 = zero
        n1 = zero.copy()
    else:  # SOL_HIGH_L: the A union is already symmetric, B sits at the origin
        u0 = (chi_a + chi_b) / bracket**r.k
        n0 = zero
        n1 = zero.copy()
    return DataTriple(
        SpectralField(dxi, u0.astype(complex)),
        SpectralField(dxi, np.asarray(n0, dtype=complex)),
        SpectralField(dxi, np.asarray(n1, dtype=complex)),
    )


def gaussian_data(
    dxi: float, M: int, d: int = 1, amplitude: float = 1.0, width: float = 1.0
) -> DataTriple:
    """Smooth real-symmetric profile, truncated to the product-safe band."""
    _, _, sq, _ = _grids(d, M, dxi)
    prof = amplitude * np.exp(-sq / (2.0 * width * width))
    axis_idx = np.meshgrid(*([np.abs(np.arange(2 * M + 1) - M)] * d), indexing="ij")
    outside = sum((ix > M // 2).astype(int) for ix in axis_idx) > 0
    prof = np.where(outside, 0.0, prof)
    return DataTriple(
        SpectralField(dxi, prof.astype(complex)),
        SpectralField(dxi, prof.astype(complex)),
        SpectralField(dxi, np.zeros_like(prof, dtype=complex)),
    )


# ---------------------------------------------------------------------------
# Snapshots


def write_snapshot(path: str, field: SpectralField, meta: dict) -> None:
    """One file: a JSON header line {d, dxi, M, t, k, l}, then CSV rows.

    Rows are "j1,...,jd,re,im" over the full lattice in row-major order.
    """
    header = {
        "d": field.d,
        "dxi": field.dxi,
        "M": field.M,
        "t": meta.get("t"),
        "k": meta.get("k"),
        "l": meta.get("l"),
    }
    M = field.M
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        it = np.ndindex(field.coeffs.shape)
        for idx in it:
            js = ",".join(str(i - M) for i in idx)
            v = field.coeffs[idx]
            fh.write(f"{js},{v.real:.17g},{v.imag:.17g}\n")
