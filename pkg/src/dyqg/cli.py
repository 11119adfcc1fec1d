"""Command-line driver: ``dyqg <command> [options]``.

Every command writes a JSON report (``--report``, default stdout summary only)
and exits 0 iff all of its checks pass.
"""

from __future__ import annotations

import os

_threads = os.environ.get("DYQG_THREADS")
if _threads:
    # must happen before numpy loads its BLAS
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse  # noqa: E402
import json  # noqa: E402
import sys  # noqa: E402

import numpy as np  # noqa: E402

from .algebra import check_relations  # noqa: E402
from .checks import (CHECKS, RunConfig, check_felder, check_gauge_fit,  # noqa: E402
                     report_document, run_checks)
from .exchange import Report, default_samples  # noqa: E402
from .intertwine import fusion_matrix  # noqa: E402
from .params import ParameterError  # noqa: E402
from .reps import ExchangeFamily, functor_Fl, rll_residual, tensor_product, verify_representation  # noqa: E402
from .verma import GramConditioningError, build_verma  # noqa: E402

EXIT_FAIL = 1
EXIT_CONFIG = 2


def parse_complex(text: str) -> complex:
    parts = [float(x) for x in text.split(",")]
    if len(parts) == 1:
        return complex(parts[0])
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected re,im but got {text!r}")
    return complex(parts[0], parts[1])


def parse_weight(text: str) -> tuple:
    return tuple(parse_complex(x) for x in text.split(";") if x.strip())


def _cx(z) -> list:
    return [complex(z).real, complex(z).imag]


def _config(args) -> RunConfig:
    return RunConfig(seed=args.seed, n=args.n, N=args.N, depth=args.depth, tol=args.tol, q=args.q, k=args.k,
                     lam=args.lam, level=getattr(args, "level", None), nu=getattr(args, "nu", None),
                     samples=args.samples, digits=args.digits)


def _emit(doc: dict, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, default=str)


def _summary(reports: list[Report]) -> None:
    for r in reports:
        tag = "PASS" if r.passed else "FAIL"
        print(f"{tag}  {r.name:34s} residual {r.residual:.3e}  tol {r.tol:.0e}")


def _finish(command: str, cfg: RunConfig, reports: list[Report], report_path: str | None, **extra) -> int:
    doc = report_document(command, cfg, reports, **extra)
    _summary(reports)
    _emit(doc, report_path)
    return 0 if doc["passed"] else EXIT_FAIL


def cmd_verma(args) -> int:
    cfg = _config(args)
    p = cfg.params()
    depth = 0 if args.depth is None else args.depth
    M = build_verma(p, depth, args.margin, digits=args.digits or None)
    cfg.depth = depth
    rel = check_relations(M, 1e-10 if args.tol is None else args.tol)
    reports = [Report("relations", rel.max_residual, rel.tol, {"residuals": rel.residuals})]
    _emit({"module": M.summary(), "params": p.to_json()}, args.out)
    return _finish("verma", cfg, reports, args.report, blocks=len(M.blocks_))


def cmd_fusion(args) -> int:
    cfg = _config(args)
    p = cfg.params()
    J = fusion_matrix(p, args.N)
    c = J.series.coeffs
    out = {"params": p.to_json(), "order": args.N, "delta1": [_cx(x) for x in J.delta1],
           "delta2": [_cx(x) for x in J.delta2],
           "coefficients": {"re": c.real.tolist(), "im": c.imag.tolist(), "lo": J.series.lo}}
    _emit(out, args.out)
    scale = float(np.abs(c).max())
    reports = [Report("fusion-weight-zero", J.weight_defect() / scale, 1e-12 if args.tol is None else args.tol)]
    return _finish("fusion", cfg, reports, args.report)


def cmd_verify(args) -> int:
    cfg = _config(args)
    names = args.check or list(CHECKS)
    reports = run_checks(names, cfg)
    return _finish("verify", cfg, reports, args.report, checks_requested=names)


def cmd_felder(args) -> int:
    cfg = _config(args)
    return _finish("felder", cfg, check_felder(cfg), args.report)


def cmd_gauge_fit(args) -> int:
    cfg = _config(args)
    return _finish("gauge-fit", cfg, check_gauge_fit(cfg), args.report)


def _build_rep(cfg: RunConfig):
    depth = 2 if cfg.depth is None else cfg.depth
    p, level, X = cfg.central_charge(depth)
    return p, functor_Fl(p, X)


def cmd_functor(args) -> int:
    cfg = _config(args)
    p, rep = _build_rep(cfg)
    fam = ExchangeFamily(p, cfg.N)
    reports = verify_representation(rep, fam, default_samples(cfg.seed, 2), 1e-8 if args.tol is None else args.tol)
    doc = {"source": cfg.to_json(), "params": p.to_json(), **rep.to_json(),
           "verification": [r.to_json() for r in reports]}
    _emit(doc, args.out)
    return _finish("functor", cfg, reports, args.report)


def cmd_tensor(args) -> int:
    docs = []
    for path in (args.a, args.b):
        with open(path) as fh:
            docs.append(json.load(fh))
    cfgs = [RunConfig.from_json(d["source"]) for d in docs]
    (pa, A), (pb, B) = (_build_rep(c) for c in cfgs)
    if pa.to_json() != pb.to_json():
        raise ParameterError("tensor factors were built at different (q, k, lambda); pass the same --q --k --lambda")
    AB = tensor_product(A, B)
    fam = ExchangeFamily(pa, cfgs[0].N)
    S = default_samples(cfgs[0].seed, 2)
    tol = 1e-8 if args.tol is None else args.tol
    rll = [rll_residual(AB, fam, u, u2) for u, u2, *_ in S]
    reports = [Report("tensor-closure", max(rll), tol, {"property": "rll", "per_sample": rll}),
               Report("tensor-closure", abs(AB.level - (A.level + B.level)), 1e-15, {"property": "central charge"})]
    doc = {"sources": [d["source"] for d in docs], "params": pa.to_json(), **AB.to_json(),
           "verification": [r.to_json() for r in reports]}
    _emit(doc, args.out)
    return _finish("tensor", cfgs[0], reports, args.report)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=2, help="rank of sl_n")
    common.add_argument("--lambda", dest="lam", type=parse_weight, default=None,
                        help="weight in fundamental coordinates, re,im[;re,im...]")
    common.add_argument("--k", type=parse_complex, default=None, help="level, re,im")
    common.add_argument("--q", type=parse_complex, default=None, help="deformation parameter, re,im")
    common.add_argument("--N", type=int, default=3, help="series order")
    common.add_argument("--depth", type=int, default=None, help="Verma truncation depth")
    common.add_argument("--tol", type=float, default=None, help="override the check tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=3, help="spectral-parameter samples per check")
    common.add_argument("--digits", type=int, default=None,
                        help="decimal digits for Verma construction (0 forces double precision)")
    common.add_argument("--out", default=None, help="data output (JSON)")
    common.add_argument("--report", default=None, help="verification report (JSON)")

    parser = argparse.ArgumentParser(prog="dyqg", description="Dynamical quantum groups: checks and data.")
    parser.add_argument("--list-checks", action="store_true", help="list the identity suite and exit")
    sub = parser.add_subparsers(dest="command")
    p = sub.add_parser("verma", parents=[common], help="truncated Verma module")
    p.add_argument("--margin", type=int, default=0)
    sub.add_parser("fusion", parents=[common], help="fusion matrix of C^n (x) C^n")
    p = sub.add_parser("verify", parents=[common], help="run checks of the identity suite")
    p.add_argument("--check", action="append", choices=CHECKS)
    p.add_argument("--level", type=parse_complex, default=None)
    p.add_argument("--nu", type=parse_weight, default=None)
    sub.add_parser("felder", parents=[common], help="Felder R-matrix checks")
    sub.add_parser("gauge-fit", parents=[common], help="match the exchange matrix with the Felder R-matrix")
    p = sub.add_parser("functor", parents=[common], help="bounded representation from a truncated Verma")
    p.add_argument("--level", type=parse_complex, default=None)
    p.add_argument("--nu", type=parse_weight, default=None)
    p = sub.add_parser("tensor", parents=[common], help="tensor product of two functor outputs")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    return parser


COMMANDS = {"verma": cmd_verma, "fusion": cmd_fusion, "verify": cmd_verify, "felder": cmd_felder,
            "gauge-fit": cmd_gauge_fit, "functor": cmd_functor, "tensor": cmd_tensor}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_checks:
        print("\n".join(CHECKS))
        return 0
    if not args.command:
        parser.print_help()
        return EXIT_CONFIG
    try:
        if args.depth is not None and args.depth < 0:
            raise ParameterError("depth must be non-negative")
        return COMMANDS[args.command](args)
    except (ParameterError, GramConditioningError, OSError, KeyError) as exc:
        print(f"dyqg: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
