"""Command-line front end: a thin client over the service handlers.

Commands mirror the HTTP endpoints one-to-one (classify, verify, sweep,
lemma, simulate, gateaux, report) plus ``serve`` to run the FastAPI app.
Exit codes: 0 success/verified, 1 claim failure, 2 numerical failure,
64 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

from pydantic import ValidationError

from .errors import (
    AliasingError,
    LatticeCoverageError,
    QuadratureError,
    ResolutionError,
    StabilityError,
)
from .geometry import CaseId
from .scaling import SweepRecord, records_to_csv
from .service import handlers
from .service import schemas as sc

EX_OK = 0
EX_CLAIM = 1
EX_NUMERIC = 2
EX_USAGE = 64

_NUMERIC_ERRORS = (
    QuadratureError,
    StabilityError,
    AliasingError,
    ResolutionError,
    LatticeCoverageError,
)


class _Parser(argparse.ArgumentParser):
    """argparse that exits with the usage code instead of 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _dump(model) -> str:
    return json.dumps(model.model_dump(), indent=2)


def _case_args(p: argparse.ArgumentParser, with_defaults: bool = True):
    p.add_argument("--case", required=True, choices=[c.value for c in CaseId])
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--T", type=float, default=None)


def _case_params(args) -> sc.CaseParams:
    return sc.CaseParams(
        case=CaseId(args.case), N=args.N, d=args.d, delta=args.delta, t=args.t, T=args.T
    )


def _sweep_svg(records: list[sc.SweepRecordModel]) -> str:
    """Fixed-size log-log polyline rendering of the ratio curve."""
    w, h, pad = 480, 320, 48
    xs = [math.log2(r.N) for r in records]
    ys = [math.log10(r.ratio) for r in records]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (w - 2 * pad)

    def py(y):
        return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad)

    pts = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(xs, ys))
    marks = "".join(
        f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3" fill="#b33"/>'
        for x, y in zip(xs, ys)
    )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">'
        f'<rect width="{w}" height="{h}" fill="white"/>'
        f'<line x1="{pad}" y1="{h - pad}" x2="{w - pad}" y2="{h - pad}" stroke="black"/>'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{h - pad}" stroke="black"/>'
        f'<text x="{w // 2}" y="{h - 12}" font-size="12" text-anchor="middle">log2 N'
        f" ({records[0].N} .. {records[-1].N})</text>"
        f'<text x="14" y="{h // 2}" font-size="12" transform="rotate(-90 14 {h // 2})"'
        f' text-anchor="middle">log10 ratio [{y0:.2f}, {y1:.2f}]</text>'
        f'<polyline points="{pts}" fill="none" stroke="#36c" stroke-width="1.5"/>'
        f"{marks}</svg>"
    )


def _build_parser() -> _Parser:
    p = _Parser(prog="zaklab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="label (k, l, d) against the known regions")
    c.add_argument("--k", type=float, required=True)
    c.add_argument("--l", type=float, required=True)
    c.add_argument("--d", type=int, default=1)

    v = sub.add_parser("verify", help="certify one construction case end to end")
    _case_args(v)
    v.add_argument("--h", type=float, default=None)

    s = sub.add_parser("sweep", help="ratio sweep over N with a log-log slope fit")
    s.add_argument("--case", required=True, choices=[c.value for c in CaseId])
    s.add_argument("--k", type=float, required=True)
    s.add_argument("--l", type=float, required=True)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--N-min", dest="n_min", type=int, default=16)
    s.add_argument("--N-max", dest="n_max", type=int, default=1024)
    s.add_argument("--delta", type=float, default=None)
    s.add_argument("--t", type=float, default=None)
    s.add_argument("--T", type=float, default=None)
    s.add_argument("--out", default=None, help="CSV output path")
    s.add_argument("--fit-json", default=None, help="fit summary JSON path")
    s.add_argument("--svg", default=None, help="optional ratio-curve SVG path")

    le = sub.add_parser("lemma", help="convolution lower-bound check")
    le.add_argument("--case", choices=[c.value for c in CaseId])
    le.add_argument("--N", type=int)
    le.add_argument("--d", type=int, default=1)
    le.add_argument("--delta", type=float, default=None)
    le.add_argument("--t", type=float, default=None)
    le.add_argument("--T", type=float, default=None)
    le.add_argument("--sets-json", default=None, help="path to {A, B, R} set JSON")
    le.add_argument("--h", type=float, default=None)

    si = sub.add_parser("simulate", help="nonlinear lattice evolution with norm series")
    si.add_argument("--d", type=int, default=1)
    si.add_argument("--dxi", type=float, default=0.125)
    si.add_argument("--M", type=int, default=256)
    si.add_argument("--t", type=float, default=0.1)
    si.add_argument("--steps", type=int, default=100)
    si.add_argument("--k", type=float, default=0.0)
    si.add_argument("--l", type=float, default=-0.5)
    si.add_argument("--eps", type=float, default=0.01)
    si.add_argument("--data", choices=["gaussian", "case"], default="gaussian")
    si.add_argument("--case", choices=[c.value for c in CaseId])
    si.add_argument("--N", type=int)
    si.add_argument("--delta", type=float, default=None)
    si.add_argument("--case-t", type=float, default=None)
    si.add_argument("--T", type=float, default=None)
    si.add_argument("--amplitude", type=float, default=1.0)
    si.add_argument("--width", type=float, default=1.0)
    si.add_argument("--samples", type=int, default=10)
    si.add_argument("--out", default=None, help="norm series CSV path")
    si.add_argument("--snapshot", default=None, help="snapshot path prefix")

    g = sub.add_parser("gateaux", help="finite-difference vs closed-form second derivative")
    g.add_argument("--direction", choices=["gaussian", "case"], default="case")
    g.add_argument("--case", choices=[c.value for c in CaseId])
    g.add_argument("--N", type=int)
    g.add_argument("--d", type=int, default=1)
    g.add_argument("--delta", type=float, default=None)
    g.add_argument("--case-t", type=float, default=None)
    g.add_argument("--T", type=float, default=None)
    g.add_argument("--k", type=float, default=0.0)
    g.add_argument("--l", type=float, default=-1.0)
    g.add_argument("--dxi", type=float, default=0.0125)
    g.add_argument("--M", type=int, default=2400)
    g.add_argument("--t", type=float, default=0.1)
    g.add_argument("--eps", type=float, default=1e-2)
    g.add_argument("--eps2", type=float, default=None)
    g.add_argument("--steps", type=int, default=200)
    g.add_argument("--s-nodes", type=int, default=24)
    g.add_argument("--amplitude", type=float, default=1.0)

    rp = sub.add_parser("report", help="full certification battery")
    rp.add_argument("--seed", type=int, default=42)
    rp.add_argument("--random-triples", type=int, default=50)
    rp.add_argument("--out", default=None, help="JSON report path")

    sv = sub.add_parser("serve", help="run the HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    return p


def _run(args) -> int:
    if args.command == "classify":
        resp = handlers.classify(sc.ClassifyRequest(k=args.k, l=args.l, d=args.d))
        print(_dump(resp))
        return EX_OK

    if args.command == "verify":
        resp = handlers.verify(
            sc.VerifyRequest(
                case=CaseId(args.case), N=args.N, d=args.d,
                delta=args.delta, t=args.t, T=args.T, h=args.h,
            )
        )
        print(_dump(resp))
        if not resp.passed:
            first = next(c.name for c in resp.checks if not c.passed)
            print(f"FAILED claim: {first}", file=sys.stderr)
            return EX_CLAIM
        return EX_OK

    if args.command == "sweep":
        resp = handlers.sweep(
            sc.SweepRequest(
                case=CaseId(args.case), k=args.k, l=args.l, d=args.d,
                n_min=args.n_min, n_max=args.n_max,
                delta=args.delta, t=args.t, T=args.T,
            )
        )
        csv_text = records_to_csv(
            [SweepRecord(r.N, r.lhs, r.rhs, r.ratio) for r in resp.records]
        )
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(csv_text)
        else:
            print(csv_text, end="")
        if args.fit_json:
            with open(args.fit_json, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(resp.fit.model_dump(), indent=2) + "\n")
        if args.svg:
            with open(args.svg, "w", encoding="utf-8") as fh:
                fh.write(_sweep_svg(resp.records))
        print(
            f"predicted exponent {resp.predicted_exponent:+.4f}, "
            f"fitted {resp.fit.slope:+.4f} (r^2 = {resp.fit.r_squared:.6f})"
        )
        return EX_OK

    if args.command == "lemma":
        if args.sets_json:
            with open(args.sets_json, encoding="utf-8") as fh:
                sets = json.load(fh)
            req = sc.LemmaRequest(sets=sc.SetsPayload(**sets), h=args.h)
        else:
            if args.case is None or args.N is None:
                raise ValueError("lemma needs --case and --N, or --sets-json")
            req = sc.LemmaRequest(
                case_params=sc.CaseParams(
                    case=CaseId(args.case), N=args.N, d=args.d,
                    delta=args.delta, t=args.t, T=args.T,
                ),
                h=args.h,
            )
        resp = handlers.lemma(req)
        print(_dump(resp))
        return EX_OK if resp.applicable and resp.margin >= 0 else EX_CLAIM

    if args.command == "simulate":
        cp = None
        if args.data == "case":
            if args.case is None or args.N is None:
                raise ValueError("simulate --data case needs --case and --N")
            cp = sc.CaseParams(
                case=CaseId(args.case), N=args.N, d=args.d,
                delta=args.delta, t=args.case_t, T=args.T,
            )
        req = sc.SimulateRequest(
            d=args.d, dxi=args.dxi, M=args.M, t=args.t, steps=args.steps,
            k=args.k, l=args.l, eps=args.eps, data=args.data, case_params=cp,
            amplitude=args.amplitude, width=args.width, samples=args.samples,
        )
        resp = handlers.simulate(req)
        lines = ["t,u_Hk,n_Hl,nt_Hlm1"]
        for pt in resp.series:
            lines.append(
                f"{pt.t:.16e},{pt.u_Hk:.16e},{pt.n_Hl:.16e},{pt.nt_Hlm1:.16e}"
            )
        csv_text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(csv_text)
        else:
            print(csv_text, end="")
        if args.snapshot:
            from .simulator import evolve, write_snapshot

            data = handlers.build_simulation_data(req)
            u, n, nt = evolve(data, req.t, req.steps)
            meta = {"t": req.t, "k": req.k, "l": req.l}
            for suffix, field in (("u", u), ("n", n), ("nt", nt)):
                write_snapshot(f"{args.snapshot}.{suffix}.csv", field, meta)
        print(f"mass drift: {resp.mass_drift:.3e}")
        return EX_OK

    if args.command == "gateaux":
        cp = None
        if args.direction == "case":
            if args.case is None or args.N is None:
                raise ValueError("gateaux --direction case needs --case and --N")
            cp = sc.CaseParams(
                case=CaseId(args.case), N=args.N, d=args.d,
                delta=args.delta, t=args.case_t, T=args.T,
            )
        resp = handlers.gateaux(
            sc.GateauxRequest(
                direction=args.direction, case_params=cp, k=args.k, l=args.l,
                dxi=args.dxi, M=args.M, t=args.t, eps=args.eps, eps2=args.eps2,
                steps=args.steps, s_nodes=args.s_nodes, amplitude=args.amplitude,
            )
        )
        print(_dump(resp))
        return EX_OK

    if args.command == "report":
        resp = handlers.report(
            sc.ReportRequest(seed=args.seed, random_triples=args.random_triples)
        )
        text = _dump(resp)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        return EX_OK if resp.all_passed else EX_CLAIM

    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EX_OK

    raise AssertionError(f"unhandled command {args.command}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except ValidationError as exc:
        print(f"zaklab: invalid parameters: {exc}", file=sys.stderr)
        return EX_USAGE
    except ValueError as exc:
        print(f"zaklab: invalid parameters: {exc}", file=sys.stderr)
        return EX_USAGE
    except _NUMERIC_ERRORS as exc:
        print(f"zaklab: numerical failure: {exc}", file=sys.stderr)
        return EX_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
