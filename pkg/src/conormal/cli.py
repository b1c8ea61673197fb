"""Command-line front end.

    conormal star     --variety SPEC [--kmax K]
    conormal gaussian --variety SPEC
    conormal t2       --variety SPEC [--kmax K]
    conormal extend   --variety SPEC [--kmax K]
    conormal catalog  [--suite NAME] [--jobs J]

Exit codes: 0 ok, 1 internal error, 2 inconclusive (UNSTABLE saturation
or a rejected presentation), 3 NO_LIFT.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import cache as cache_mod
from .exactalg import matmul_mod
from .config import RunConfig
from .engine import (
    INCONCLUSIVE,
    UNSTABLE,
    canonical_gaussian_corank,
    gaussian_wedge_kernel,
    h1_ideal_square,
    t_profiles,
)
from .report import dumps, make_report, new_record
from .specs import SpecError, resolve
from .varieties.base import Degenerate

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_NO_LIFT = 0, 1, 2, 3

log = logging.getLogger("conormal")


def _cache(cfg: RunConfig):
    root = cfg.cache_dir or cache_mod.default_cache_dir()
    return cache_mod.SubspaceCache(root) if root else None


def _h1(X, k, cfg, store):
    """h1_ideal_square with cache seeding for every prime it may touch."""
    fc, sat = cfg.field(), cfg.saturation()
    for q in (fc.p, *fc.alternates()):
        cache_mod.load_saturation(store, X, k, q, sat.window, sat.m_cap)
    r = h1_ideal_square(X, k, fc, sat)
    for q in r.primes:
        cache_mod.save_saturation(store, X, k, q, sat.window, sat.m_cap)
    return r


def _build(spec, cfg):
    return spec.build(cfg.prime, cfg.retries)


def _finish(rec, store, t0):
    rec["timings"]["total_s"] = round(time.perf_counter() - t0, 3)
    if store is not None:
        rec["timings"]["cache"] = {"hits": store.hits, "misses": store.misses}
    rec["flags"] = sorted(set(rec["flags"]))
    return rec


def cmd_star(spec, cfg: RunConfig, kmax: int | None = None) -> tuple[dict, int]:
    t0 = time.perf_counter()
    store = _cache(cfg)
    X = _build(spec, cfg)
    rec = new_record(spec, X)
    kmax = kmax or cfg.kmax
    h1, stab = {}, {}
    verdict = "HOLDS"
    for k in range(0, kmax + 1):
        t = time.perf_counter()
        r = _h1(X, k, cfg, store)
        h1[k] = r.value
        stab[k] = r.stabilization_m
        rec["primes"][str(k)] = r.primes
        rec["flags"] += r.flags
        rec["timings"][f"h1_k{k}_s"] = round(time.perf_counter() - t, 3)
        if k >= 3:
            if r.status == UNSTABLE:
                verdict = INCONCLUSIVE
            elif r.value and verdict != INCONCLUSIVE:
                verdict = "FAILS"
    rec["dims"]["h1"] = h1
    if kmax >= 2:
        rec["dims"]["gaussian_wedge_kernel"] = gaussian_wedge_kernel(X, cfg.prime, cfg.saturation()).dim
    rec["details"]["stabilization_m"] = stab
    rec["verdicts"]["star"] = verdict if kmax >= 3 else "NOT_PROBED"
    code = EXIT_INCONCLUSIVE if verdict == INCONCLUSIVE else EXIT_OK
    rec["status"] = verdict
    return _finish(rec, store, t0), code


def cmd_gaussian(spec, cfg: RunConfig, kmax: int | None = None) -> tuple[dict, int]:
    t0 = time.perf_counter()
    store = _cache(cfg)
    X = _build(spec, cfg)
    rec = new_record(spec, X)
    r2 = _h1(X, 2, cfg, store)
    kern = gaussian_wedge_kernel(X, cfg.prime, cfg.saturation()).dim
    rec["dims"]["gaussian_wedge_kernel"] = kern
    rec["dims"]["h1"] = {2: r2.value}
    rec["primes"]["2"] = r2.primes
    rec["flags"] += r2.flags
    rec["verdicts"]["kernel_equals_h1_2"] = kern == r2.value
    if X.is_canonical_curve:
        cor = canonical_gaussian_corank(X, cfg.prime, cfg.saturation())
        rec["dims"]["corank"] = cor["corank"]
        rec["details"]["gaussian"] = cor
    code = EXIT_INCONCLUSIVE if UNSTABLE in r2.flags else EXIT_OK
    return _finish(rec, store, t0), code


def cmd_t2(spec, cfg: RunConfig, kmax: int | None = None) -> tuple[dict, int]:
    t0 = time.perf_counter()
    store = _cache(cfg)
    X = _build(spec, cfg)
    rec = new_record(spec, X)
    if not X.is_canonical_curve:
        raise SpecError("t2 needs a canonical curve")
    kmax = kmax or cfg.kmax
    for k in range(1, kmax + 2):
        _h1(X, k, cfg, store)
    prof = t_profiles(X, kmax, cfg.field(), cfg.saturation())
    rec["dims"]["T1"] = {-1: prof["T1_minus1"]}
    rec["dims"]["T2"] = prof["T2"]
    rec["flags"] += prof["flags"]
    rec["verdicts"]["T2_vanishes"] = all(v == 0 for v in prof["T2"].values())
    code = EXIT_INCONCLUSIVE if UNSTABLE in prof["flags"] else EXIT_OK
    return _finish(rec, store, t0), code


def cmd_extend(spec, cfg: RunConfig, kmax: int | None = None) -> tuple[dict, int]:
    from .deform import (
        NO_LIFT,
        TERMINATED,
        PresentationRejected,
        extension_polynomials,
        first_order_space,
        first_order_state,
        flatness_check,
        presentation,
        second_order_lift,
        trivial_first_order,
    )

    t0 = time.perf_counter()
    X = _build(spec, cfg)
    rec = new_record(spec, X)
    kmax = kmax or min(cfg.kmax, 4)
    p = cfg.prime
    if not X.is_canonical_curve:
        raise SpecError("extend needs a canonical curve")
    try:
        pres = presentation(X, p)
    except PresentationRejected as exc:
        rec["status"] = "REJECT"
        rec["details"]["reason"] = str(exc)
        return _finish(rec, None, t0), EXIT_INCONCLUSIVE
    T1 = first_order_space(X, p)
    rec["dims"]["quadrics"] = pres.k
    rec["dims"]["linear_syzygies"] = pres.ell
    rec["dims"]["first_order"] = T1.dim
    rec["dims"]["trivial_first_order"] = trivial_first_order(pres).dim
    lifts = []
    code = EXIT_OK
    for i, v in enumerate(T1.basis):
        t = time.perf_counter()
        st = second_order_lift(first_order_state(pres, v))
        item = {"index": i, "status": st.status, "flags": list(st.flags)}
        if st.status == NO_LIFT:
            code = EXIT_NO_LIFT
        if st.f2 is not None:
            item["f2_r1_zero"] = not bool(np.any(matmul_mod(st.f2[None, :], st.r1, p)))
        if TERMINATED in st.flags:
            fl = flatness_check(st, kmax)
            item["flatness"] = fl["status"]
            item["flatness_first_bad_degree"] = fl["first_bad_degree"]
            item["t0_fiber_equal"] = all(fl["t0_fiber_equal"].values())
            item["quotient_dims"] = {k: q for k, (q, _) in fl["dims"].items()}
            item["generators"] = [str(q) for q in extension_polynomials(st)]
        lifts.append(item)
        rec["timings"][f"lift_{i}_s"] = round(time.perf_counter() - t, 3)
    rec["details"]["lifts"] = lifts
    rec["verdicts"]["all_lift"] = all(x["status"] == TERMINATED for x in lifts)
    rec["verdicts"]["flat"] = all(x.get("flatness") == "PASS" for x in lifts)
    rec["status"] = "EXTENDABLE" if rec["verdicts"]["all_lift"] and rec["verdicts"]["flat"] else "OBSTRUCTED"
    return _finish(rec, None, t0), code


COMMANDS = {"star": cmd_star, "gaussian": cmd_gaussian, "t2": cmd_t2, "extend": cmd_extend}

SUITES: dict[str, list[tuple[str, str, int | None]]] = {
    "veronese": [("star", s, 6) for s in ("veronese:1,2", "veronese:1,3", "veronese:1,4", "veronese:2,2",
                                          "veronese:2,3")],
    "gaussian": [("gaussian", s, None) for s in ("veronese:1,3", "veronese:1,4", "veronese:1,5", "segre:1,1",
                                                 "scroll:2,1", "genus4", "genus5")],
    "grassmannian": [("star", "g25", 5)],
    "points": [("star", "points5", 4)],
    "ci": [("star", "genus4", 6), ("star", "genus5", 6)],
    "tetragonal": [("star", s, 5) for s in ("tetragonal:2,1,1,b=1,1", "tetragonal:2,2,1,b=1,2",
                                            "tetragonal:2,1,1,b=0,2")],
    "pentagonal": [("star", "pentagonal:g=8", 5), ("star", "pentagonal:g=9", 5), ("t2", "pentagonal:g=8", 4)],
    "septic": [("gaussian", "plane-canonical:7", None), ("star", "plane-canonical:7", 4)],
    "extension": [("extend", "plane-canonical:7", 4)],
}
SUITES["quick"] = SUITES["veronese"] + SUITES["gaussian"] + SUITES["ci"] + SUITES["tetragonal"] + SUITES["pentagonal"]
SUITES["full"] = [job for name in ("quick", "grassmannian", "points", "septic", "extension") for job in SUITES[name]]


def _run_job(job, cfg: RunConfig) -> tuple[dict, int]:
    command, text, kmax = job
    spec = resolve(text, cfg.seed)
    try:
        return COMMANDS[command](spec, cfg, kmax)
    except Degenerate as exc:
        rec = new_record(spec)
        rec["status"] = "DEGENERATE"
        rec["flags"] = ["DEGENERATE"]
        rec["details"]["error"] = str(exc)
        return rec, EXIT_ERROR


def combine_codes(codes) -> int:
    codes = set(codes)
    for c in (EXIT_ERROR, EXIT_NO_LIFT, EXIT_INCONCLUSIVE):
        if c in codes:
            return c
    return EXIT_OK


def cmd_catalog(suite: str, cfg: RunConfig) -> tuple[list[dict], int]:
    if suite not in SUITES:
        raise SpecError(f"unknown suite {suite!r}; known: {', '.join(sorted(SUITES))}")
    jobs = SUITES[suite]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_job, jobs, [cfg] * len(jobs)))
    else:
        results = [_run_job(j, cfg) for j in jobs]
    for (command, _, _), (rec, _) in zip(jobs, results):
        rec["details"]["command"] = command
    return [r for r, _ in results], combine_codes(c for _, c in results)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conormal", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kmax", type=int, default=None)
    common.add_argument("--prime", type=int, default=RunConfig.prime)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--cache-dir", default=None, help=f"defaults to ${cache_mod.ENV_VAR}")
    common.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    common.add_argument("--window", type=int, default=2)
    common.add_argument("--mcap", type=int, default=6)
    common.add_argument("--retries", type=int, default=8)
    common.add_argument("-v", "--verbose", action="store_true")
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--variety", required=True, help="spec string (see README) or a .json spec file")
    p = sub.add_parser("catalog", parents=[common])
    p.add_argument("--suite", default="quick", choices=sorted(SUITES))
    return parser


def config_from_args(args) -> RunConfig:
    kmax = args.kmax or (4 if args.command == "extend" else 6)
    return RunConfig(prime=args.prime, kmax=kmax, window=args.window, mcap=args.mcap,
                     retries=args.retries, seed=args.seed, jobs=args.jobs, cache_dir=args.cache_dir, out=args.out)


def run(argv=None, write: bool = True) -> tuple[dict | None, int]:
    """Parse ``argv``, run the command and return (report, exit code); ``write=False`` skips output."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    cfg = config_from_args(args)
    if args.command == "catalog":
        records, code = cmd_catalog(args.suite, cfg)
    else:
        rec, code = _run_job((args.command, args.variety, args.kmax), cfg)
        records = [rec]
    echo = cfg.echo()
    if args.command == "catalog":
        echo["suite"] = args.suite
    report = make_report(args.command, echo, records, code)
    if not write:
        return report, code
    text = dumps(report)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return report, code


def main(argv=None) -> int:
    try:
        _, code = run(argv)
    except SystemExit:
        raise
    except (SpecError, Degenerate, ValueError) as exc:
        print(f"conormal: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception:  # noqa: BLE001 - reported as an internal error
        log.exception("internal error")
        return EXIT_ERROR
    return code


if __name__ == "__main__":
    sys.exit(main())
