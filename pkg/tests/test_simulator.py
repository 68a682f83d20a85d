"""Lattice integrator: linear propagators, quadratic term, cross-validation."""

import math

import numpy as np
import pytest

from zaklab.errors import (
    AliasingError,
    LatticeCoverageError,
    StabilityError,
)
from zaklab.geometry import CaseId, ConstructionCase
from zaklab.oscillatory import RegularityTriple
from zaklab.simulator import (
    DataTriple,
    SpectralField,
    evolve,
    evolve_series,
    gaussian_data,
    hkl_norm,
    lattice_product,
    linear_schrodinger,
    linear_wave,
    make_counterexample_data,
    picard_second,
    second_gateaux_fd,
    triple_l2_distance,
    triple_l2_norm,
    write_snapshot,
)


def field(M, dxi, arr=None):
    data = np.zeros(2 * M + 1, dtype=complex) if arr is None else np.asarray(arr)
    return SpectralField(dxi, data)


def single_mode(M, dxi, j, amp=1.0):
    a = np.zeros(2 * M + 1, dtype=complex)
    a[M + j] = amp
    return SpectralField(dxi, a)


def zero_triple(M, dxi):
    z = field(M, dxi)
    return DataTriple(z, z.zeros_like(), z.zeros_like())


# ---------------------------------------------------------------------------
# fields and norms


def test_field_shape_validation():
    with pytest.raises(ValueError):
        SpectralField(0.1, np.zeros(4, dtype=complex))  # even length
    with pytest.raises(ValueError):
        SpectralField(-1.0, np.zeros(5, dtype=complex))


def test_hs_norm_single_zero_mode():
    f = single_mode(8, 0.25, 0)
    assert f.hs_norm(3.7) == pytest.approx(math.sqrt(0.25), rel=1e-14)


def test_hkl_norm_total_is_pythagorean():
    rng = np.random.default_rng(0)
    M, dxi = 16, 0.5
    mk = lambda: SpectralField(dxi, rng.normal(size=33) + 1j * rng.normal(size=33))
    u, n, nt = mk(), mk(), mk()
    r = RegularityTriple(0.3, -0.7, 1)
    h = hkl_norm(u, n, nt, r)
    assert h.total == pytest.approx(
        math.sqrt(h.u_part**2 + h.n_part**2 + h.nt_part**2), rel=1e-12
    )


def test_hkl_norm_indicator_data_converges_to_measure():
    case = ConstructionCase(CaseId.SCHRO_LOW_L, N=8, d=1)
    r = RegularityTriple(0, -1, 1)
    vals = []
    for dxi, M in ((0.00125, 16000), (0.000625, 32000)):
        data = make_counterexample_data(case, r, dxi, M)
        vals.append(data.u0.hs_norm(r.k) ** 2)
    measure_a = 0.1 / 8
    assert abs(vals[1] - measure_a) < abs(vals[0] - measure_a) + 1e-12
    assert vals[1] == pytest.approx(measure_a, rel=0.05)


# ---------------------------------------------------------------------------
# linear propagators


def test_schrodinger_identity_and_half_period():
    f = single_mode(8, 0.5, 3)  # xi0 = 1.5
    assert np.allclose(linear_schrodinger(f, 0.0).coeffs, f.coeffs)
    half = linear_schrodinger(f, math.pi / 1.5**2)
    assert half.coeffs[8 + 3] == pytest.approx(-1.0 + 0j, rel=1e-12)


def test_schrodinger_isometry():
    rng = np.random.default_rng(1)
    f = SpectralField(0.25, rng.normal(size=65) + 1j * rng.normal(size=65))
    ev = linear_schrodinger(f, 0.371)
    for s in (-1.0, 0.0, 1.3):
        assert ev.hs_norm(s) == pytest.approx(f.hs_norm(s), rel=1e-12)


def test_wave_identity_at_zero_time():
    rng = np.random.default_rng(2)
    raw = rng.normal(size=33)
    psi = SpectralField(0.5, (raw + raw[::-1]).astype(complex))
    phi = psi.zeros_like()
    n, nt = linear_wave(psi, phi, 0.0)
    assert np.array_equal(n.coeffs, psi.coeffs)
    assert np.array_equal(nt.coeffs, phi.coeffs)


def test_wave_zero_mode_limit():
    psi = single_mode(8, 0.5, 0, amp=2.0)
    phi = single_mode(8, 0.5, 0, amp=3.0)
    t = 0.7
    n, nt = linear_wave(psi, phi, t)
    assert n.coeffs[8] == pytest.approx(2.0 + t * 3.0, rel=1e-15)
    assert nt.coeffs[8] == pytest.approx(3.0, rel=1e-15)


def test_wave_per_mode_energy_invariant():
    rng = np.random.default_rng(3)
    raw = rng.normal(size=33) + 1j * rng.normal(size=33)
    sym = 0.5 * (raw + np.conj(raw[::-1]))
    psi = SpectralField(0.5, sym)
    phi = SpectralField(0.5, 0.5 * (raw * 1j + np.conj((raw * 1j)[::-1])))
    ax = (np.arange(33) - 16) * 0.5
    e0 = np.abs(psi.coeffs) ** 2 * ax**2 + np.abs(phi.coeffs) ** 2
    for t in (0.3, 1.7):
        n, nt = linear_wave(psi, phi, t)
        e1 = np.abs(n.coeffs) ** 2 * ax**2 + np.abs(nt.coeffs) ** 2
        mask = ax != 0
        assert np.allclose(e1[mask], e0[mask], rtol=1e-12)


# ---------------------------------------------------------------------------
# data construction


def test_counterexample_data_case1_lattice_indicator():
    case = ConstructionCase(CaseId.SCHRO_LOW_L, N=8, d=1)
    r = RegularityTriple(0, -1, 1)
    dxi, M = 0.00625, 2600
    data = make_counterexample_data(case, r, dxi, M)
    ax = (np.arange(2 * M + 1) - M) * dxi
    inside = (ax >= -8.0) & (ax <= -8.0 + 0.0125)
    assert np.array_equal(np.abs(data.u0.coeffs) > 0, inside)
    assert np.all(data.u0.coeffs[inside] == 1.0)  # k = 0: no bracket weight
    assert data.n0.reality_defect() <= 1e-12
    assert np.all(data.n1.coeffs == 0)


def test_counterexample_data_coverage_guard():
    case = ConstructionCase(CaseId.SCHRO_LOW_L, N=8, d=1)
    r = RegularityTriple(0, -1, 1)
    with pytest.raises(LatticeCoverageError):
        make_counterexample_data(case, r, 0.3, 100)


def test_data_triple_reality_validation():
    M, dxi = 8, 0.5
    bad = single_mode(M, dxi, 3)  # no mirror mode: not a real field
    with pytest.raises(ValueError):
        DataTriple(bad, bad, bad.zeros_like())


# ---------------------------------------------------------------------------
# picard_second


def test_picard_second_zero_data():
    M, dxi = 16, 0.25
    z = zero_triple(M, dxi)
    out = picard_second(z, z, None, 0.3)
    assert all(np.all(f.coeffs == 0) for f in out)


def test_picard_second_bilinearity():
    case = ConstructionCase(CaseId.SCHRO_LOW_L, N=8, d=1)
    r = RegularityTriple(0, -1, 1)
    data = make_counterexample_data(case, r, 0.0125, 2400)
    base = picard_second(data, data, r, 0.05, s_nodes=8)
    scaled = picard_second(data.scaled(2.0), data.scaled(3.0), r, 0.05, s_nodes=8)
    # relative to the combined output: the wave components sit 9 orders below
    # the u component and would otherwise compare at the FFT roundoff floor
    ref = triple_l2_norm(scaled)
    for b, s in zip(base, scaled):
        diff = b.with_coeffs(6.0 * b.coeffs - s.coeffs).hs_norm(0.0)
        assert diff <= 1e-12 * ref


def test_picard_second_single_mode_oracle():
    M, dxi = 64, 0.25
    a_mode, b_mode = 8, 12  # xi = 2.0 and 3.0
    phi0 = DataTriple(
        single_mode(M, dxi, a_mode),
        field(M, dxi),
        field(M, dxi),
    )
    psi = np.zeros(2 * M + 1, dtype=complex)
    psi[M + b_mode] = 1.0
    psi[M - b_mode] = 1.0
    phi1 = DataTriple(field(M, dxi), SpectralField(dxi, psi), field(M, dxi))
    t = 0.3
    u2, _, _ = picard_second(phi0, phi1, RegularityTriple(0, 0, 1), t, s_nodes=24)
    support = np.nonzero(np.abs(u2.coeffs) > 1e-18)[0] - M
    assert sorted(support) == [a_mode - b_mode, a_mode + b_mode]
    a, b = a_mode * dxi, b_mode * dxi
    n = 100_000
    s = (np.arange(n) + 0.5) * t / n
    brute = np.sum(np.exp(-1j * (t - s) * (a + b) ** 2) * np.exp(-1j * s * a * a) * np.cos(s * b)) * t / n
    expected = -1j * (dxi / (2 * math.pi)) * brute
    got = u2.coeffs[M + a_mode + b_mode]
    assert abs(got - expected) / abs(expected) < 1e-8


def test_picard_second_small_t_limit():
    # ||u2|| / t approaches the norm of the s = 0 integrand
    case = ConstructionCase(CaseId.SCHRO_LOW_L, N=8, d=1)
    r = RegularityTriple(0, -1, 1)
    data = make_counterexample_data(case, r, 0.0125, 2400)
    t = 1e-6
    u2, _, _ = picard_second(data, data, r, t, s_nodes=4)
    integrand = lattice_product(data.u0, data.n0)
    assert u2.hs_norm(0.0) / t == pytest.approx(
        2.0 * integrand.hs_norm(0.0), rel=1e-4
    )


def test_picard_second_aliasing_guard():
    M, dxi = 16, 0.25
    tr = DataTriple(single_mode(M, dxi, 12), field(M, dxi), field(M, dxi))
    with pytest.raises(AliasingError):
        picard_second(tr, tr, None, 0.1)


# ---------------------------------------------------------------------------
# evolve


def test_evolve_zero_data():
    z = zero_triple(16, 0.25)
    u, n, nt = evolve(z, 0.5, 10)
    assert all(np.all(f.coeffs == 0) for f in (u, n, nt))


def test_evolve_linear_limit_matches_schrodinger():
    M, dxi = 32, 0.25
    u0 = single_mode(M, dxi, 4, amp=0.3)
    tr = DataTriple(u0, u0.zeros_like(), u0.zeros_like())
    u, n, nt = evolve(tr, 0.4, 17, nonlinear=False)
    exact = linear_schrodinger(u0, 0.4)
    assert np.allclose(u.coeffs, exact.coeffs, rtol=1e-12)
    assert np.all(n.coeffs == 0) and np.all(nt.coeffs == 0)


def test_evolve_mass_conservation_small_data():
    data = gaussian_data(0.125, 256).scaled(0.01)
    u, _, _ = evolve(data, 0.1, 100)
    m0 = data.u0.hs_norm(0.0)
    assert abs(u.hs_norm(0.0) - m0) / m0 < 1e-6


def test_evolve_step_halving_self_convergence():
    data = gaussian_data(0.125, 256).scaled(0.01)
    r = RegularityTriple(0, -0.5, 1)
    out1 = evolve(data, 0.1, 100)
    out2 = evolve(data, 0.1, 200)
    h1 = hkl_norm(*out1, r)
    h2 = hkl_norm(*out2, r)
    for a, b in [(h1.u_part, h2.u_part), (h1.n_part, h2.n_part), (h1.nt_part, h2.nt_part)]:
        assert abs(a - b) / b < 1e-4


def test_evolve_reality_preservation():
    data = gaussian_data(0.125, 128).scaled(0.05)
    series = evolve_series(data, 0.1, 100, samples=5)
    for _, _, n, nt in series:
        assert n.reality_defect() <= 1e-10
        assert nt.reality_defect() <= 1e-10


def test_evolve_series_consistent_with_evolve():
    data = gaussian_data(0.125, 64).scaled(0.05)
    series = evolve_series(data, 0.1, 40, samples=4)
    direct = evolve(data, 0.1, 40)
    assert np.allclose(series[-1][1].coeffs, direct[0].coeffs, rtol=1e-12)
    assert series[-1][0] == pytest.approx(0.1)


def test_evolve_stability_guard():
    # enormous amplitude with one huge substep overflows the growth guard
    data = gaussian_data(0.25, 32).scaled(2000.0)
    with pytest.raises(StabilityError):
        evolve(data, 1.0, 1)


# ---------------------------------------------------------------------------
# second Gateaux derivative


def test_fd_linear_evolution_gives_zero():
    data = gaussian_data(0.125, 64)
    out = second_gateaux_fd(data, None, 0.1, 1e-2, 20, nonlinear=False)
    assert triple_l2_norm(out) < 1e-10


def test_fd_matches_picard_on_counterexample_direction():
    case = ConstructionCase(CaseId.SCHRO_LOW_L, N=8, d=1)
    r = RegularityTriple(0, -1, 1)
    data = make_counterexample_data(case, r, 0.0125, 2400)
    pic = picard_second(data, data, r, 0.1)
    fd = second_gateaux_fd(data, r, 0.1, 1e-2, 200)
    assert triple_l2_distance(fd, pic) / triple_l2_norm(pic) < 0.05


def test_fd_richardson_ratio_on_smooth_direction():
    data = gaussian_data(0.125, 128, amplitude=10.0)
    pic = picard_second(data, data, None, 0.1, s_nodes=32)
    gaps = {}
    for eps in (1e-2, 5e-3):
        fd = second_gateaux_fd(data, None, 0.1, eps, 400)
        gaps[eps] = triple_l2_distance(fd, pic)
    assert 3.0 <= gaps[1e-2] / gaps[5e-3] <= 5.0


# ---------------------------------------------------------------------------
# two-dimensional lattice (optional surface)


def test_d2_evolution_and_quadratic_term():
    rng = np.random.default_rng(9)
    M, dxi = 12, 0.5
    shape = (2 * M + 1,) * 2
    ax = np.abs(np.arange(2 * M + 1) - M)
    outside = (ax[:, None] > M // 2) | (ax[None, :] > M // 2)
    prof = np.exp(-sum(g * g for g in np.meshgrid(*([(np.arange(2 * M + 1) - M) * dxi] * 2), indexing="ij")) / 2)
    prof = np.where(outside, 0.0, prof)
    u0 = SpectralField(dxi, 0.05 * prof.astype(complex))
    data = DataTriple(u0, u0.with_coeffs(u0.coeffs.real.astype(complex)), u0.zeros_like())
    # mass conservation and reality survive in d = 2
    u, n, nt = evolve(data, 0.05, 20)
    m0 = data.u0.hs_norm(0.0)
    assert abs(u.hs_norm(0.0) - m0) / m0 < 1e-8
    assert n.reality_defect() < 1e-10
    # quadratic term stays bilinear
    base = picard_second(data, data, None, 0.05, s_nodes=8)
    scaled = picard_second(data.scaled(2.0), data.scaled(0.5), None, 0.05, s_nodes=8)
    ref = triple_l2_norm(scaled)
    for b, s in zip(base, scaled):
        assert b.with_coeffs(b.coeffs - s.coeffs).hs_norm(0.0) <= 1e-12 * ref


# ---------------------------------------------------------------------------
# snapshots


def test_snapshot_round_trip(tmp_path):
    f = single_mode(4, 0.5, 2, amp=1.5 + 0.5j)
    path = tmp_path / "snap.csv"
    write_snapshot(str(path), f, {"t": 0.1, "k": 0.0, "l": -1.0})
    lines = path.read_text().strip().split("\n")
    import json

    header = json.loads(lines[0])
    assert header == {"d": 1, "dxi": 0.5, "M": 4, "t": 0.1, "k": 0.0, "l": -1.0}
    assert len(lines) == 1 + 9
    row = dict(zip((int(l.split(",")[0]) for l in lines[1:]), lines[1:]))
    j, re, im = row[2].split(",")
    assert float(re) == 1.5 and float(im) == 0.5
