#!/usr/bin/env python3
"""
Scattering toolkit - command line entry point
"""

import argparse
import hashlib
import logging
import math
import shlex
import sys
import time
from dataclasses import dataclass, field
from typing import List

from termcolor import cprint

from config import (
    CONSERVATION_TOL,
    CROSS_SOLVER_TOL,
    DATABASE_URL,
    FOUR_SITE_TOL,
    LOG_FORMAT,
    LOG_LEVEL,
    WAVEPACKET_TOL,
)
from csv_operation import write_probe_csv, write_spectrum_csv
from errors import ScatteringError, ValidationError
from four_site import (
    FourSiteParams,
    closed_form_deficit,
    closed_form_rt,
    four_site_center,
    transmission_T,
    transmission_Tprime,
    zeta,
)
from model import load_network_spec, serialize_network_spec
from pt_builder import fold, load_pt_spec
from report_store import add_run, get_run_history, make_session_factory
from scattering import solve_rt_direct, solve_rt_formula, solve_rt_raw, spectrum
from verify_suites import SUITE_NAMES, run_suites
from wavepacket_oracle import WavepacketConfig, run_wavepacket

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CHECK_FAILED = 2


@dataclass
class RunReport:
    command: str
    input_digest: str
    lines: List[str] = field(default_factory=list)
    passed: bool = True
    wall_time: float = 0.0

    def check(self, name, measured, tolerance, passed, at_most=True):
        relation = "<=" if at_most else ">="
        status = "PASS" if passed else "FAIL"
        line = f"{status} {name}: {measured:.3e} (tolerance {relation} {tolerance:.1e})"
        self.lines.append(line)
        self.passed = self.passed and passed
        cprint(line, "green" if passed else "red")

    def finish(self, started):
        self.wall_time = time.perf_counter() - started
        print(f"command: {self.command}")
        print(f"input digest: {self.input_digest}")
        print(f"wall time: {self.wall_time:.3f}s")


def _digest_file(path):
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


def _digest_text(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _fmt(z):
    z = complex(z)
    return f"{z.real:+.12f}{z.imag:+.12f}j"


def _print_solution(label, sol):
    print(f"{label}: r = {_fmt(sol.r)}, t = {_fmt(sol.t)}")
    print(f"{label}: T = {sol.transmission:.12f}, R = {sol.reflection:.12f}")


# --- subcommands ---

def cmd_solve(args, report):
    center, lead = load_network_spec(args.spec)
    solutions = {}
    if args.method in ("direct", "both"):
        solutions["direct"] = solve_rt_direct(center, lead, args.k)
    if args.method in ("formula", "both"):
        solutions["formula"] = solve_rt_formula(center, lead, args.k)
    for label, sol in solutions.items():
        _print_solution(label, sol)
        report.check(f"{label}/deficit", abs(sol.deficit), CONSERVATION_TOL, abs(sol.deficit) <= CONSERVATION_TOL)
    if len(solutions) == 2:
        gap = max(
            abs(solutions["direct"].r - solutions["formula"].r),
            abs(solutions["direct"].t - solutions["formula"].t),
        )
        report.check("formula_vs_direct", gap, CROSS_SOLVER_TOL, gap <= CROSS_SOLVER_TOL)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_spectrum(args, report):
    center, lead = load_network_spec(args.spec)
    result = spectrum(center, lead, args.k_min, args.k_max, args.steps, method=args.method, workers=args.workers)
    write_spectrum_csv(result, args.out)
    flagged = len(result.entries) - len(result.ok_entries())
    if flagged:
        cprint(f"{flagged} flagged point(s) written with status pole/singular", "yellow")
    print(f"wrote {len(result.entries)} points to {args.out}")
    return EXIT_OK


def cmd_verify(args, report):
    results = run_suites(args.suite, args.trials, args.seed, workers=args.workers)
    for result in results:
        print(f"suite {result.name}: {result.trials} trials, seed {result.seed}, {result.wall_time:.2f}s")
        for check in result.checks:
            if math.isinf(check.tolerance):
                cprint(f"REPORTED {check.name}: {check.measured:.3e}", "yellow")
                continue
            report.check(f"{result.name}/{check.name}", check.measured, check.tolerance, check.passed, check.at_most)
            if check.skipped:
                cprint(f"  {check.skipped} point(s) skipped as ill-conditioned or singular", "yellow")
        for check in result.failures():
            print(
                f"  worst offender: seed={check.worst_seed}, trial={check.worst_trial}, "
                f"k={check.worst_k}, value={check.measured:.3e}"
            )

    database_url = args.db or DATABASE_URL
    if database_url:
        session_factory = make_session_factory(database_url)
        for result in results:
            add_run(session_factory, report.command, report.input_digest, result)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_example(args, report):
    p = FourSiteParams(args.gamma1, args.gamma2)
    h, lead = four_site_center(p)
    k = args.k
    r, t = closed_form_rt(k, p)
    numeric = solve_rt_raw(h, lead, k)
    print(f"zeta = {_fmt(zeta(k, p))}")
    print(f"closed form: r = {_fmt(r)}, t = {_fmt(t)}, T = {abs(t) ** 2:.12f}")
    _print_solution("numeric", numeric)
    scale = max(1.0, abs(r), abs(t))
    gap = max(abs(r - numeric.r), abs(t - numeric.t)) / scale
    report.check("closed_form_vs_numeric", gap, FOUR_SITE_TOL, gap <= FOUR_SITE_TOL)
    deficit = closed_form_deficit(k, p)
    print(f"closed-form deficit = {deficit:.6e}, numeric deficit = {numeric.deficit:.6e}")
    deficit_gap = abs(deficit - numeric.deficit) / scale ** 2
    report.check("deficit_vs_numeric", deficit_gap, FOUR_SITE_TOL, deficit_gap <= FOUR_SITE_TOL)
    if p.balanced:
        print(f"T(k, gamma) = {transmission_T(k, p.gamma1):.12f}")
        print(f"T'(k, gamma) = {transmission_Tprime(k, p.gamma1):.12f}")
    if args.spectrum:
        result = spectrum(h, lead, 1e-3, math.pi - 1e-3, args.steps)
        write_spectrum_csv(result, args.spectrum)
        print(f"wrote {len(result.entries)} points to {args.spectrum}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_pt_fold(args, report):
    spec, lead = load_pt_spec(args.spec)
    center = fold(spec, lead)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(serialize_network_spec(center, lead))
        f.write("\n")
    print(f"folded n1={spec.n1}, n2={spec.n2} into n_a={center.n_a}, n_b={center.n_b}; wrote {args.out}")
    return EXIT_OK


def cmd_wavepacket(args, report):
    center, lead = load_network_spec(args.spec)
    config = WavepacketConfig(
        chain_half_length=args.length,
        sigma=args.sigma,
        k0=args.k0,
        x0=args.x0,
        t_final=args.t_final,
        dt=args.dt,
    )
    probe_every = args.probe_every if args.probe_every else (100 if args.out else None)
    result = run_wavepacket(center, lead, config, probe_every=probe_every)
    plane_wave = solve_rt_direct(center, lead, args.k0)
    print(f"p_left = {result.p_left:.6f} (|r|^2 = {plane_wave.reflection:.6f})")
    print(f"p_right = {result.p_right:.6f} (|t|^2 = {plane_wave.transmission:.6f})")
    print(f"p_center = {result.p_center:.3e}, total norm = {result.total_norm:.8f}")
    if result.projected_modes:
        cprint(
            f"{result.projected_modes} growing mode(s) projected out, max Im E = {result.max_growth_rate:.4g}",
            "yellow",
        )
    for name, measured in (
        ("p_left_vs_r2", abs(result.p_left - plane_wave.reflection)),
        ("p_right_vs_t2", abs(result.p_right - plane_wave.transmission)),
        ("norm_vs_1", abs(result.total_norm - 1.0)),
    ):
        report.check(name, measured, WAVEPACKET_TOL, measured <= WAVEPACKET_TOL)
    if args.out:
        write_probe_csv(result.probes, args.out)
        print(f"wrote {len(result.probes)} probe rows to {args.out}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_history(args, report):
    database_url = args.db or DATABASE_URL
    if not database_url:
        cprint("no ledger configured: pass --db or set DATABASE_URL", "yellow")
        return EXIT_INVALID
    runs = get_run_history(make_session_factory(database_url), limit=args.limit)
    for entry in runs:
        color = "green" if entry["outcome"] == "Passed" else "red"
        cprint(
            f"#{entry['run_id']} {entry['created_at']} {entry['suite']} seed={entry['seed']} "
            f"trials={entry['trials']} {entry['outcome']} ({entry['wall_time']:.2f}s)",
            color,
        )
    if not runs:
        print("no runs recorded")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="main.py", description="Tight-binding scattering toolkit")
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="r and t at one momentum")
    solve.add_argument("--spec", required=True)
    solve.add_argument("--k", type=float, required=True)
    solve.add_argument("--method", choices=["formula", "direct", "both"], default="both")
    solve.set_defaults(handler=cmd_solve)

    spec = sub.add_parser("spectrum", help="T, R and deficit on a k grid")
    spec.add_argument("--spec", required=True)
    spec.add_argument("--k-min", type=float, required=True)
    spec.add_argument("--k-max", type=float, required=True)
    spec.add_argument("--steps", type=int, required=True)
    spec.add_argument("--out", required=True)
    spec.add_argument("--method", choices=["direct", "formula"], default="direct")
    spec.add_argument("--workers", type=int, default=None)
    spec.set_defaults(handler=cmd_spectrum)

    verify = sub.add_parser("verify", help="run the random-ensemble checks")
    verify.add_argument("--trials", type=int, required=True)
    verify.add_argument("--seed", type=int, required=True)
    verify.add_argument("--suite", choices=list(SUITE_NAMES) + ["all"], default="all")
    verify.add_argument("--workers", type=int, default=None)
    verify.add_argument("--db", default=None, help="SQLAlchemy URL of the run ledger")
    verify.set_defaults(handler=cmd_verify)

    example = sub.add_parser("example", help="exactly solvable models")
    example_sub = example.add_subparsers(dest="model", required=True)
    four = example_sub.add_parser("four-site", help="4-site ring with gain and loss")
    four.add_argument("--gamma1", type=float, required=True)
    four.add_argument("--gamma2", type=float, required=True)
    four.add_argument("--k", type=float, default=math.pi / 3)
    four.add_argument("--spectrum", default=None)
    four.add_argument("--steps", type=int, default=201)
    four.set_defaults(handler=cmd_example)

    pt = sub.add_parser("pt", help="PT-symmetric graph tools")
    pt_sub = pt.add_subparsers(dest="action", required=True)
    pt_fold = pt_sub.add_parser("fold", help="fold a PT spec into a network spec")
    pt_fold.add_argument("--spec", required=True)
    pt_fold.add_argument("--out", required=True)
    pt_fold.set_defaults(handler=cmd_pt_fold)

    wave = sub.add_parser("wavepacket", help="time-domain check of |r|^2 and |t|^2")
    wave.add_argument("--spec", required=True)
    wave.add_argument("--k0", type=float, default=math.pi / 3)
    wave.add_argument("--sigma", type=float, default=15.0)
    wave.add_argument("--length", type=int, default=600)
    wave.add_argument("--out", default=None)
    wave.add_argument("--x0", type=float, default=None)
    wave.add_argument("--t-final", type=float, default=None)
    wave.add_argument("--dt", type=float, default=None)
    wave.add_argument("--probe-every", type=int, default=None)
    wave.set_defaults(handler=cmd_wavepacket)

    history = sub.add_parser("history", help="list stored verify runs")
    history.add_argument("--db", default=None)
    history.add_argument("--limit", type=int, default=20)
    history.set_defaults(handler=cmd_history)
    return parser


def _input_digest(args, argv):
    path = getattr(args, "spec", None)
    if path:
        return _digest_file(path)
    return _digest_text(" ".join(argv))


def run(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INVALID

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else LOG_LEVEL,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )
    if args.command == "verify":
        args.suite = [args.suite]

    started = time.perf_counter()
    try:
        report = RunReport(command=shlex.join(argv), input_digest=_input_digest(args, argv))
        code = args.handler(args, report)
    except ValidationError as e:
        logger.error(f"invalid input: {e}")
        cprint(f"error: {e}", "red", file=sys.stderr)
        return EXIT_INVALID
    except ScatteringError as e:
        logger.error(f"{type(e).__name__}: {e}")
        cprint(f"error: {type(e).__name__}: {e}", "red", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        logger.error(f"I/O error: {e}")
        cprint(f"error: {e}", "red", file=sys.stderr)
        return EXIT_INVALID
    report.finish(started)
    return code


if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
