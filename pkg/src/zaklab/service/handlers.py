"""Request handlers shared by the HTTP endpoints and the CLI client.

Each handler is a pure function from a request model to a response model;
the FastAPI app wires them to routes and the CLI calls them in-process.
"""

from __future__ import annotations

import json

from .. import convolution, relations, scaling, simulator
from ..geometry import (
    ConstructionCase,
    build_sets,
    freq_set_from_json,
    minkowski_diff_subset,
)
from ..oscillatory import QuadratureSpec, RegularityTriple
from . import schemas as sc


def classify(req: sc.ClassifyRequest) -> sc.ClassifyResponse:
    label = scaling.classify(RegularityTriple(req.k, req.l, req.d))
    return sc.ClassifyResponse(**label.to_json_dict())


def _construction(p: sc.CaseParams) -> ConstructionCase:
    return ConstructionCase(p.case, N=p.N, d=p.d, delta=p.delta, t=p.t, T=p.T)


def lemma_grid_h(d: int, h: float | None) -> float:
    """Dimension-adapted lemma grid spacing; explicit h wins when given."""
    if h is not None:
        return h
    return {1: 1.0 / 128, 2: 1.0 / 64}.get(d, 1.0 / 16)


def verify(req: sc.VerifyRequest) -> sc.VerifyResponse:
    case = _construction(req)
    built = build_sets(case)
    checks: list[sc.CheckResult] = []

    cert = minkowski_diff_subset(built.R, built.B, built.A)
    checks.append(
        sc.CheckResult(
            name="minkowski_containment",
            passed=cert.contained,
            detail={"margin": cert.margin, "note": cert.detail},
        )
    )
    if case.case.is_schro:
        for rc in relations.certify_case_ranges(case):
            checks.append(
                sc.CheckResult(
                    name=f"range:{rc.kind}", passed=rc.verified, detail=rc.to_json_dict()
                )
            )
    else:
        pb = relations.phase_product_bound(case)
        checks.append(
            sc.CheckResult(
                name="phase_product_bound", passed=pb.verified, detail=pb.to_json_dict()
            )
        )
    lem = convolution.lemma_check(built.A, built.B, built.R, h=lemma_grid_h(case.d, req.h))
    checks.append(
        sc.CheckResult(name="lemma_lower_bound", passed=lem.holds, detail=lem.to_json_dict())
    )
    return sc.VerifyResponse(
        case=case.case,
        N=case.N,
        d=case.d,
        passed=all(c.passed for c in checks),
        checks=checks,
    )


def sweep(req: sc.SweepRequest) -> sc.SweepResponse:
    r = RegularityTriple(req.k, req.l, req.d)
    ns = []
    n = req.n_min
    while n <= req.n_max:
        ns.append(n)
        n *= 2
    q = QuadratureSpec(**req.quadrature.model_dump())
    records = scaling.sweep(
        req.case, r, ns, delta=req.delta, t=req.t, T=req.T, q=q
    )
    fit = scaling.fit_slope(records)
    return sc.SweepResponse(
        case=req.case,
        predicted_exponent=scaling.predicted_exponent(req.case, r),
        records=[
            sc.SweepRecordModel(N=x.N, lhs=x.lhs, rhs=x.rhs, ratio=x.ratio)
            for x in records
        ],
        fit=sc.FitModel(**fit.to_json_dict()),
    )


def lemma(req: sc.LemmaRequest) -> sc.LemmaResponse:
    if req.case_params is not None:
        built = build_sets(_construction(req.case_params))
        a, b, r = built.A, built.B, built.R
    else:
        a = freq_set_from_json(json.dumps(req.sets.A))
        b = freq_set_from_json(json.dumps(req.sets.B))
        r = freq_set_from_json(json.dumps(req.sets.R))
    rep = convolution.lemma_check(a, b, r, h=lemma_grid_h(a.dim, req.h))
    return sc.LemmaResponse(**rep.to_json_dict())


def build_simulation_data(req: sc.SimulateRequest) -> simulator.DataTriple:
    if req.data == "case":
        case = _construction(req.case_params)
        r = RegularityTriple(req.k, req.l, case.d)
        base = simulator.make_counterexample_data(case, r, req.dxi, req.M)
    else:
        base = simulator.gaussian_data(
            req.dxi, req.M, d=req.d, amplitude=req.amplitude, width=req.width
        )
    return base.scaled(req.eps)


def simulate(req: sc.SimulateRequest) -> sc.SimulateResponse:
    data = build_simulation_data(req)
    r = RegularityTriple(req.k, req.l, data.u0.d)
    series = simulator.evolve_series(
        data, req.t, req.steps, samples=req.samples, picard_iters=req.picard_iters
    )
    points = []
    for ti, u, n, nt in series:
        norms = simulator.hkl_norm(u, n, nt, r)
        points.append(
            sc.SeriesPoint(
                t=ti, u_Hk=norms.u_part, n_Hl=norms.n_part, nt_Hlm1=norms.nt_part
            )
        )
    mass0 = series[0][1].hs_norm(0.0)
    mass1 = series[-1][1].hs_norm(0.0)
    drift = abs(mass1 - mass0) / mass0 if mass0 > 0 else 0.0
    return sc.SimulateResponse(
        series=points, mass_initial=mass0, mass_final=mass1, mass_drift=drift
    )


def gateaux(req: sc.GateauxRequest) -> sc.GateauxResponse:
    if req.direction == "case":
        case = _construction(req.case_params)
        r = RegularityTriple(req.k, req.l, case.d)
        data = simulator.make_counterexample_data(case, r, req.dxi, req.M)
    else:
        r = RegularityTriple(req.k, req.l, 1)
        data = simulator.gaussian_data(req.dxi, req.M, d=1, amplitude=req.amplitude)
    pic = simulator.picard_second(data, data, r, req.t, s_nodes=req.s_nodes)
    pic_norm = simulator.triple_l2_norm(pic)
    fd = simulator.second_gateaux_fd(data, r, req.t, req.eps, req.steps)
    gap = simulator.triple_l2_distance(fd, pic) / pic_norm
    gap2 = None
    ratio = None
    if req.eps2 is not None:
        fd2 = simulator.second_gateaux_fd(data, r, req.t, req.eps2, req.steps)
        gap2 = simulator.triple_l2_distance(fd2, pic) / pic_norm
        ratio = gap / gap2 if gap2 > 0 else None
    return sc.GateauxResponse(
        rel_gap=gap,
        rel_gap_eps2=gap2,
        richardson_ratio=ratio,
        picard_norm=pic_norm,
        fd_norm=simulator.triple_l2_norm(fd),
    )


def report(req: sc.ReportRequest) -> sc.ReportResponse:
    from ..geometry import CaseId

    verifications = []
    for case_id in CaseId:
        for d in req.d_values:
            h = lemma_grid_h(d, req.h)
            for n in req.N_values:
                if case_id.is_schro:
                    verifications.append(
                        verify(
                            sc.VerifyRequest(
                                case=case_id, N=n, d=d, delta=req.delta, t=req.t, h=h
                            )
                        )
                    )
                else:
                    for T in req.T_values:
                        verifications.append(
                            verify(sc.VerifyRequest(case=case_id, N=n, d=d, T=T, h=h))
                        )
    passes = 0
    fails = 0
    for a, b, r in convolution.random_lemma_triples(req.random_triples, seed=req.seed):
        rep = convolution.lemma_check(a, b, r)
        if rep.holds:
            passes += 1
        else:
            fails += 1
    return sc.ReportResponse(
        verifications=verifications,
        random_lemma=sc.RandomLemmaSummary(
            count=req.random_triples, passes=passes, failures=fails
        ),
        all_passed=all(v.passed for v in verifications) and fails == 0,
    )
