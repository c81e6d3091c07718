"""Command-line entry point.

Subcommands wire the library modules to files: `check` prints a hypothesis
report, `render`/`exceptional` write PPM images, `e2measure`, `annulus-scan`,
`grid-bound`, and `counterexample` emit numeric reports, and `lemma-verify`
runs a quick cross-module invariant suite.  Exit codes: 0 success, 1 invalid
configuration, 2 internal error or failed verification.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .errors import ExpDynError
from .exceptional import c1_constant, e2_measure, in_E_mask, write_e2_csv
from .funcs import (
    ExpPoly,
    bundled_function,
    check_hypotheses,
    eval_direct,
    eval_log,
    load_function,
)
from .grid import (
    Tiling,
    annulus_tail_bound,
    band_measure_bound,
    distortion_constant_C2,
    good_square_near,
    koebe_distortion_factor,
    square_density_bound,
    tile_side_ok,
    write_density_csv,
)
from .measure import (
    CounterexampleParams,
    annulus_scan,
    b_measure_closed_form,
    b_measure_quadrature,
    counterexample_check,
    write_annulus_csv,
)
from .orbits import ClassifyParams, classify_batch
from .raster import Viewport, render_classification, render_exceptional, write_ppm
from .towers import TowerMag, tower_compare

BUNDLED = ("sin_z", "sin_z2", "sin_z3", "example_h")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _load_fn(args) -> ExpPoly:
    if args.fn in BUNDLED:
        return bundled_function(args.fn)
    return load_function(args.fn)


def _add_fn(p):
    p.add_argument(
        "--fn",
        required=True,
        help=f"function definition: a JSON path or one of {', '.join(BUNDLED)}",
    )


def _add_classify(p):
    p.add_argument("--alpha", type=float, default=0.25, help="growth exponent for escape certification")
    p.add_argument("--escape-radius", type=float, default=50.0, help="radius a certified-escape step must exceed")
    p.add_argument("--max-iter", type=int, default=512, help="iteration budget per orbit")
    p.add_argument("--cert-steps", type=int, default=3, help="consecutive certified steps required for escape")


def _classify_params(args) -> ClassifyParams:
    return ClassifyParams(
        alpha=args.alpha,
        escape_radius=args.escape_radius,
        max_iter=args.max_iter,
        cert_steps=args.cert_steps,
    )


def _add_viewport(p):
    p.add_argument("--center-re", type=float, default=0.0, help="viewport center, real part")
    p.add_argument("--center-im", type=float, default=0.0, help="viewport center, imaginary part")
    p.add_argument("--half", type=float, default=4.0, help="half side of the square viewport")
    p.add_argument("--px", type=int, default=800, help="image side in pixels")


def _viewport(args) -> Viewport:
    return Viewport.square(complex(args.center_re, args.center_im), args.half, args.px)


def _emit(args, payload: dict):
    text = json.dumps(payload, indent=2)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def build_parser() -> _Parser:
    p = _Parser(prog="expdyn", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("check", help="report which growth theorem the function satisfies")
    _add_fn(sp)
    sp.add_argument("--out", help="write the JSON report here instead of stdout")

    sp = sub.add_parser("render", help="render the orbit classification to a PPM image")
    _add_fn(sp)
    sp.add_argument("--out", required=True, help="output PPM path")
    _add_viewport(sp)
    _add_classify(sp)
    sp.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads (result-independent)")

    sp = sub.add_parser("exceptional", help="render the level-1/level-2 exceptional sets")
    _add_fn(sp)
    sp.add_argument("--out", required=True, help="output PPM path")
    _add_viewport(sp)

    sp = sub.add_parser("e2measure", help="estimate the level-2 set measure on an annulus")
    _add_fn(sp)
    sp.add_argument("--r-min", type=float, required=True)
    sp.add_argument("--r-max", type=float, required=True)
    sp.add_argument("--nr", type=int, default=64, help="radial grid count")
    sp.add_argument("--ntheta", type=int, default=4096, help="angular grid count")
    sp.add_argument("--out", help="optional CSV output path")

    sp = sub.add_parser("annulus-scan", help="classification fractions over ann(r) = {r <= |z| <= 2r}")
    _add_fn(sp)
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--samples", type=int, default=20000)
    sp.add_argument("--seed", type=int, default=0, help="low-discrepancy scramble seed")
    _add_classify(sp)
    sp.add_argument("--out", help="optional CSV output path")

    sp = sub.add_parser("grid-bound", help="density reports for good squares on an annulus")
    _add_fn(sp)
    sp.add_argument("--r-lo", type=float, required=True)
    sp.add_argument("--r-hi", type=float, required=True)
    sp.add_argument("--sigma", type=float, help="square-scale parameter; default 1/(8 d max|b|)")
    sp.add_argument("--alpha", type=float, default=0.25)
    sp.add_argument("--count", type=int, default=5, help="number of radii to probe")
    sp.add_argument("--out", help="optional CSV output path")

    sp = sub.add_parser("counterexample", help="slow-wedge bound checks and classification")
    sp.add_argument("--fn", default="example_h", help="function definition (default: the bundled slow-wedge example)")
    sp.add_argument("--r0", type=float, default=100.0)
    sp.add_argument("--R", type=float, default=10000.0)
    sp.add_argument("--samples", type=int, default=2000)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="write the JSON report here instead of stdout")

    sp = sub.add_parser("lemma-verify", help="run the cross-module invariant suite")
    sp.add_argument("--seed", type=int, default=0)

    return p


# ---------------------------------------------------------------------------
# Subcommand bodies


def _cmd_check(args) -> int:
    f = _load_fn(args)
    _emit(args, check_hypotheses(f).to_dict())
    return 0


def _cmd_render(args) -> int:
    f = _load_fn(args)
    img = render_classification(f, _viewport(args), _classify_params(args), threads=args.threads)
    write_ppm(img, args.out)
    return 0


def _cmd_exceptional(args) -> int:
    f = _load_fn(args)
    img = render_exceptional(f, _viewport(args))
    write_ppm(img, args.out)
    return 0


def _cmd_e2measure(args) -> int:
    f = _load_fn(args)
    val = e2_measure(f, args.r_min, args.r_max, args.nr, args.ntheta)
    if args.out:
        write_e2_csv(args.out, [(args.r_min, args.r_max, args.nr, args.ntheta, val)])
    print(json.dumps({"r_min": args.r_min, "r_max": args.r_max, "measure": val}))
    return 0


def _cmd_annulus_scan(args) -> int:
    f = _load_fn(args)
    rep = annulus_scan(f, args.r, args.samples, _classify_params(args), seed=args.seed)
    if args.out:
        write_annulus_csv(args.out, [rep])
    print(json.dumps(rep.to_dict(), indent=2))
    return 0


def _cmd_grid_bound(args) -> int:
    f = _load_fn(args)
    tiling = Tiling(f, args.r_lo, args.r_hi, args.sigma)
    radii = np.geomspace(args.r_lo * 1.02, args.r_hi * 0.98, args.count)
    reports = []
    for r in radii:
        tile = good_square_near(tiling, float(r))
        if tile is not None:
            reports.append(square_density_bound(f, tile, args.alpha))
    if args.out:
        write_density_csv(args.out, reports)
    print(
        json.dumps(
            {
                "requested": args.count,
                "found": len(reports),
                "density_upper_log": [rep.density_upper_log for rep in reports],
                "asymptotic_bound": [rep.asymptotic_bound for rep in reports],
            },
            indent=2,
        )
    )
    return 0


def _cmd_counterexample(args) -> int:
    params = CounterexampleParams(r0=args.r0, eps=args.eps, samples=args.samples)
    f = _load_fn(args)
    rep = counterexample_check(params, args.R, f=f, seed=args.seed)
    _emit(args, rep)
    return 0 if rep["violations"] == 0 else 2


def _cmd_lemma_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    f3 = bundled_function("sin_z3")
    checks = []

    def add(name, ok):
        checks.append((name, bool(ok)))

    add("koebe factor at 1/4 equals 625/81", abs(koebe_distortion_factor(0.25) - 625.0 / 81.0) < 1e-12)
    add("distortion constant exceeds the rho=1/2 factor", distortion_constant_C2() > 81.0)
    add(
        "distortion constant stable between 50 and 60 factors",
        abs(distortion_constant_C2(50) - distortion_constant_C2(60)) < 1e-12 * distortion_constant_C2(),
    )
    add("band bound linear", abs(band_measure_bound(10.0, 1.0) - 45.0 * math.pi) < 1e-12)
    add("annulus tail below one", annulus_tail_bound(4096.0, 0.25) < 1.0)

    pts = 2.0 * (rng.random(200) - 0.5) + 2j * (rng.random(200) - 0.5)
    ok = True
    for z in pts:
        try:
            direct = eval_direct(f3, z)
            lv = eval_log(f3, z)
        except ExpDynError:
            continue
        ok &= abs(complex(lv) - direct) <= 1e-9 * max(abs(direct), 1e-12)
    add("log-domain evaluation matches direct arithmetic", ok)

    a = rng.random(500) * 600
    b = rng.random(500) * 600
    ok = all(
        tower_compare(TowerMag(0, x), TowerMag(0, y)) == int(x > y) - int(x < y)
        for x, y in zip(a, b)
    )
    add("tower comparison agrees with direct comparison", ok)

    z = 12.0 + 0.05j
    add("growth along the real spine", eval_log(f3, z).logmod >= abs(z) ** 0.25)
    add("distance constant positive", c1_constant(f3) > 0)

    pts = 10.0 * np.exp(1j * rng.random(64) * 2 * math.pi) * (1 + rng.random(64))
    e1 = in_E_mask(f3, pts, 1)
    e2 = in_E_mask(f3, pts, 2)
    add("level-1 set contained in level-2 set", bool(np.all(~e1 | e2)))

    res = classify_batch(f3, [3.0 + 0.2j, -3.0 - 0.2j], ClassifyParams())
    add("classification is sign-symmetric", res["tag"][0] == res["tag"][1])

    tiling = Tiling(f3, 10.0, 20.0)
    sample = [tiling.tile_at(z) for z in 10.0 * (1 + rng.random(32)) * np.exp(1j * rng.random(32) * 2 * math.pi)]
    add("sampled tiles satisfy the side bounds", all(tile_side_ok(t, f3.d, tiling.sigma) for t in sample))

    closed = b_measure_closed_form(math.e**2, math.e**8)
    add("wedge quadrature matches the closed form", abs(b_measure_quadrature(math.e**2, math.e**8) - closed) < 1e-6 * closed)

    failures = 0
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    return 0 if failures == 0 else 2


_COMMANDS = {
    "check": _cmd_check,
    "render": _cmd_render,
    "exceptional": _cmd_exceptional,
    "e2measure": _cmd_e2measure,
    "annulus-scan": _cmd_annulus_scan,
    "grid-bound": _cmd_grid_bound,
    "counterexample": _cmd_counterexample,
    "lemma-verify": _cmd_lemma_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.cmd](args)
    except (ExpDynError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - internal faults
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
