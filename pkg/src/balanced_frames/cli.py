"""Command-line front end.

Every subcommand writes one JSON document to stdout.  Domain errors exit
with status 1 and a ``{"error": {code, message, context}}`` document; usage
errors exit with status 2.  Frame arguments accept a path or ``-`` for stdin.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import channel, constructions as cons, core, duality, nearest
from .core import Frame, ToleranceConfig
from .errors import FrameError
from .io import dumps, frame_to_csv, frame_to_dict, loads_frame

DEFAULT_SEED = 0


class UsageError(Exception):
    pass


def _read_frame(path: str) -> Frame:
    if path == "-":
        return loads_frame(sys.stdin.read())
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise FrameError(f"cannot read {path}: {exc.strerror}", path=path) from None
    return loads_frame(text)


def _read_vector(path: str) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise FrameError(f"cannot read {path}: {exc.strerror}", path=path) from None
    except json.JSONDecodeError as exc:
        raise FrameError(f"invalid JSON in {path}: {exc.msg}") from None
    if isinstance(obj, dict):
        obj = obj.get("p", obj.get("weights", obj.get("vector")))
    arr = np.array([complex(*x) if isinstance(x, list) else x for x in obj])
    return arr.real if np.iscomplexobj(arr) and np.all(arr.imag == 0) else arr


def _frame_output(F: Frame, extra: Optional[dict] = None) -> dict:
    out = frame_to_dict(F)
    if extra:
        out.update(extra)
    return out


# ------------------------------------------------------------------- build


def _build(args, tol):
    fam = args.family
    hyps = None
    if fam == "roots-of-unity":
        F = cons.roots_of_unity_frame(args.K)
    elif fam == "harmonic":
        F = cons.harmonic_frame(args.K, args.rows)
    elif fam == "hadamard":
        F = cons.hadamard_subframe(cons.sylvester_hadamard(args.order), args.rows)
    elif fam == "cross":
        F = cons.cross_frame(d=args.d, tol=tol)
    elif fam == "eutactic-star":
        n = np.ones(args.d) / math.sqrt(args.d) if args.normal is None else np.asarray(args.normal, float)
        n = n / np.linalg.norm(n)
        P = np.eye(args.d) - np.outer(n, n)
        F = cons.eutactic_star(np.eye(args.d), P, intrinsic=args.intrinsic, tol=tol)
    elif fam == "partition":
        F = cons.partition_frame(args.eta)
    elif fam == "simplex":
        F = cons.simplex_frame(args.d)
    elif fam == "append-balancing":
        F = cons.append_balancing_vector(_read_frame(args.frame), tol)
    else:
        c = _build_combination(fam, args, tol)
        F, hyps = c.frame, {"hypotheses": c.hypotheses, "valid": c.valid}
    return _frame_output(F, hyps), F


def _build_combination(fam, args, tol):
    strict = not args.no_strict
    frames = [_read_frame(p) for p in args.frames]
    need = {
        "disjoint-union": 2,
        "inner-sum": 2,
        "sum": 2,
        "tensor": 2,
        "lift-antipodal-point": 1,
        "lift-two-antipodal": 1,
        "symmetric-lift": 2,
        "partial-lift": 2,
        "symmetric-partial-lift": 3,
    }
    if fam in need and len(frames) != need[fam]:
        raise UsageError(f"{fam} takes {need[fam]} frame file(s), got {len(frames)}")
    if fam == "disjoint-union":
        return cons.disjoint_union(*frames, tol=tol, strict=strict)
    if fam == "inner-sum":
        return cons.inner_direct_sum(*frames, alpha=args.alpha, beta=args.beta, tol=tol, strict=strict)
    if fam == "sum":
        return cons.sum_combine(*frames, alpha=args.alpha, beta=args.beta, tol=tol, strict=strict)
    if fam == "tensor":
        return cons.tensor_product(*frames, tol=tol, strict=strict)
    if fam == "lift-antipodal-point":
        return cons.lift_append_antipodal_point(frames[0], alpha=args.alpha, beta=args.beta, tol=tol, strict=strict)
    if fam == "lift-two-antipodal":
        return cons.lift_two_antipodal(frames[0], tol=tol, strict=strict)
    if fam == "symmetric-lift":
        return cons.symmetric_simple_lift(*frames, beta=args.beta, alpha=args.alpha, tol=tol, strict=strict)
    if fam == "partial-lift":
        return cons.partial_simple_lift(*frames, alpha=args.alpha, beta=args.beta, tol=tol, strict=strict)
    if fam == "symmetric-partial-lift":
        return cons.symmetric_partial_lift(*frames, alpha=args.alpha, beta=args.beta, tol=tol, strict=strict)
    if fam == "multi-lift":
        if len(frames) < 2:
            raise UsageError("multi-lift takes at least two frame files")
        if args.betas is None:
            raise UsageError("multi-lift needs --betas")
        return cons.multi_lift_union(frames, args.betas, tol=tol, strict=strict)
    raise UsageError(f"unknown family {fam}")


# ------------------------------------------------------------------- check


def check_report(F: Frame, tol: ToleranceConfig) -> dict:
    sd = core.spectral(F, tol)
    tight = core.is_tight(F, tol)
    return {
        "d": F.d,
        "K": F.K,
        "field": F.field,
        "frame": core.is_frame(F, tol),
        "balanced": core.is_balanced(F, tol),
        "balance_sum": core.balance_sum(F),
        "tight": tight,
        "tight_constant": sd.tight_constant if tight else None,
        "parseval": core.is_parseval(F, tol),
        "unit_norm": core.is_unit_norm(F, tol),
        "equal_norm": core.is_equal_norm(F, tol),
        "isogonal": core.is_isogonal(F, tol),
        "real_gram": core.is_real(F, tol),
        "simplex": core.is_simplex(F, tol),
        "buntf": core.is_buntf(F, tol),
        "equivalences": core.check_balanced_equivalences(F, tol).to_dict(),
    }


def _check(args, tol):
    return check_report(_read_frame(args.frame), tol), None


def _report(args, tol):
    F = _read_frame(args.frame)
    out = check_report(F, tol)
    sd = core.spectral(F, tol)
    out["spectral"] = {"eigenvalues": list(sd.eigenvalues), "lower_bound": sd.lower_bound, "upper_bound": sd.upper_bound}
    out["graph_components"] = core.frame_graph_components(F, tol)
    try:
        out["maximally_robust"] = core.is_maximally_robust(F, tol)
    except FrameError:
        out["maximally_robust"] = None
    if out["frame"]:
        l2 = nearest.nearest_balanced_l2(F, tol)
        out["nearest_l2_exists"] = l2.exists
        out["nearest_l2_distance"] = l2.distance if l2.exists else l2.infimum
    return out, None


# -------------------------------------------------------------------- dual


def _dual(args, tol):
    F = _read_frame(args.frame)
    op = args.operation
    if op == "canonical":
        G = duality.canonical_dual(F, tol)
        return _frame_output(G), G
    if op == "balanced-sample":
        G, pert = duality.sample_balanced_dual(F, seed=args.seed, tol=tol, return_perturbation=True)
        return _frame_output(G, {"seed": args.seed, "rank_R": pert.rank}), G
    if op == "tight":
        res = duality.balanced_tight_dual(F, rho=args.rho, seed=args.seed, tol=tol)
        return _frame_output(res.frame, {"seed": args.seed, "rho": res.rho, "unique": res.unique}), res.frame
    if op == "erasure":
        if args.index is None:
            raise UsageError("dual erasure needs --index")
        G = _read_frame(args.dual) if args.dual else duality.canonical_dual(F, tol)
        Fd, Gd = duality.erasure_dual(F, G, args.index, tol)
        return {"frame": frame_to_dict(Fd), "dual": frame_to_dict(Gd), "dual_pair": duality.is_dual_pair(Fd, Gd, tol)}, Gd
    if op == "complement":
        G = duality.complement(F, tol)
        return _frame_output(G), G
    if op == "b-complement":
        G = duality.b_complement(F, tol)
        return _frame_output(G), G
    raise UsageError(f"unknown dual operation {op}")


def _complement(args, tol):
    F = _read_frame(args.frame)
    G = duality.b_complement(F, tol) if args.balanced else duality.complement(F, tol)
    return _frame_output(G), G


# ----------------------------------------------------------------- nearest


def _nearest(args, tol):
    F = _read_frame(args.frame)
    if args.norm == "l2":
        res = nearest.nearest_balanced_l2(F, tol)
    else:
        p = _read_vector(args.weights) if args.weights else None
        res = nearest.nearest_balanced_l1(F, p, tol)
    if res.exists:
        out = {
            "exists": True,
            "distance": res.distance,
            "residual": res.residual,
            "reason": None,
            "weights": list(res.weights) if res.weights is not None else None,
            "frame": frame_to_dict(res.frame),
        }
        return out, res.frame
    return {"exists": False, "distance": res.infimum, "residual": res.residual, "reason": res.reason, "weights": None, "frame": None}, None


# ---------------------------------------------------------------- simulate


def _simulate(args, tol):
    F = _read_frame(args.frame)
    dual = None if args.dual == "auto" else _read_frame(args.dual)
    noise = channel.NoiseSpec.parse(args.noise, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    if args.signal:
        f = _read_vector(args.signal)
    else:
        f = rng.standard_normal(F.d)
        if F.is_complex:
            f = f + 1j * rng.standard_normal(F.d)
    rep = channel.transmit(F, f, noise, dual=dual, zero_fill=args.zero_fill, tol=tol)
    if noise.kind == "additive" and args.trials:
        est = channel.empirical_mse(
            F, noise.mu, noise.sigma, trials=args.trials, seed=args.seed, dual=dual, distribution=noise.distribution, workers=args.workers, tol=tol
        )
        rep.empirical_mse, rep.mse_stderr = est.mse, est.stderr
    if core.is_balanced(F, tol) and args.batches >= 3:
        rep.detector_verdict = channel.detect_anomaly(F, _batches(F, noise, args.batches, rng), tol=tol).verdict
    out = rep.to_dict()
    out["seed"] = args.seed
    out["signal"] = f
    return out, None


def _batches(F, noise, n, rng):
    rows = []
    for j in range(n):
        f = rng.standard_normal(F.d)
        c = F.matrix.conj().T @ f
        if noise.kind == "systematic":
            c = c + noise.c
        elif noise.kind == "additive":
            c = c + noise.draw(F.K, rng)
        else:
            c = c.copy()
            c[list(noise.indices)] = 0
        rows.append(c)
    return np.array(rows)


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="balframes", description="Construct, analyze and repair balanced frames.")
    p.add_argument("--tol", type=float, default=None, help="relative zero-test tolerance (default 1e-9)")
    p.add_argument("--rank-tol", type=float, default=None, help="singular value cutoff (default 1e-10)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized operations")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="csv is available for frame outputs only")
    p.add_argument("--indent", type=int, default=None)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a named frame")
    fam = b.add_subparsers(dest="family", required=True)
    x = fam.add_parser("roots-of-unity")
    x.add_argument("K", type=int)
    x = fam.add_parser("harmonic")
    x.add_argument("K", type=int)
    x.add_argument("rows", type=int, nargs="+", help="0-based Fourier rows")
    x = fam.add_parser("hadamard")
    x.add_argument("order", type=int)
    x.add_argument("rows", type=int, nargs="+", help="0-based Hadamard rows")
    x = fam.add_parser("cross")
    x.add_argument("d", type=int)
    x = fam.add_parser("eutactic-star")
    x.add_argument("d", type=int)
    x.add_argument("--normal", type=float, nargs="+", default=None, help="normal of the hyperplane (default: all ones)")
    x.add_argument("--intrinsic", action="store_true")
    x = fam.add_parser("partition")
    x.add_argument("eta", type=int, nargs="+")
    x = fam.add_parser("simplex")
    x.add_argument("d", type=int)
    x = fam.add_parser("append-balancing")
    x.add_argument("frame")
    for name in ("disjoint-union", "inner-sum", "sum", "tensor", "lift-antipodal-point", "lift-two-antipodal",
                 "symmetric-lift", "partial-lift", "symmetric-partial-lift", "multi-lift"):
        x = fam.add_parser(name)
        x.add_argument("frames", nargs="+")
        x.add_argument("--alpha", type=float, default=None)
        x.add_argument("--beta", type=float, default=None)
        x.add_argument("--no-strict", action="store_true", help="build even when a hypothesis fails")
        if name == "multi-lift":
            x.add_argument("--betas", type=float, nargs="+", default=None)

    c = sub.add_parser("check", help="predicate report")
    c.add_argument("frame")

    r = sub.add_parser("report", help="predicate report plus spectral, graph and nearest data")
    r.add_argument("frame")

    d = sub.add_parser("dual", help="dual frames and complements")
    d.add_argument("operation", choices=("canonical", "balanced-sample", "tight", "erasure", "complement", "b-complement"))
    d.add_argument("frame")
    d.add_argument("--dual", default=None, help="dual frame for erasure (default canonical)")
    d.add_argument("--index", type=int, default=None, help="0-based erased index")
    d.add_argument("--rho", type=float, default=1.0)

    n = sub.add_parser("nearest", help="closest balanced frame")
    n.add_argument("frame")
    n.add_argument("--norm", choices=("l1", "l2"), default="l2")
    n.add_argument("--weights", default=None, help="JSON list of weights for l1")

    m = sub.add_parser("complement", help="classical complement, or B-complement with --balanced")
    m.add_argument("frame")
    m.add_argument("--balanced", action="store_true")

    s = sub.add_parser("simulate", help="transmit coefficients over a noisy channel")
    s.add_argument("--frame", required=True)
    s.add_argument("--dual", default="auto")
    s.add_argument("--noise", required=True)
    s.add_argument("--trials", type=int, default=0)
    s.add_argument("--batches", type=int, default=16, help="batches for the anomaly detector")
    s.add_argument("--signal", default=None, help="JSON list with the signal (default: seeded random)")
    s.add_argument("--zero-fill", action="store_true")
    s.add_argument("--workers", type=int, default=None)
    return p


HANDLERS = {
    "build": _build,
    "check": _check,
    "report": _report,
    "dual": _dual,
    "complement": _complement,
    "nearest": _nearest,
    "simulate": _simulate,
}


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        tol = ToleranceConfig(
            rel_tol=core.DEFAULT_TOL.rel_tol if args.tol is None else args.tol,
            rank_tol=core.DEFAULT_TOL.rank_tol if args.rank_tol is None else args.rank_tol,
        )
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"balframes: error: {exc}", file=sys.stderr)
        return 2
    try:
        out, frame = HANDLERS[args.command](args, tol)
        if args.format == "csv":
            if frame is None:
                raise UsageError(f"--format csv is not available for '{args.command}'")
            stdout.write(frame_to_csv(frame))
        else:
            stdout.write(dumps(out, indent=args.indent) + "\n")
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"balframes: error: {exc}", file=sys.stderr)
        return 2
    except FrameError as exc:
        stdout.write(dumps({"error": exc.to_dict()}) + "\n")
        return 1
    return 0


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
