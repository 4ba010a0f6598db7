"""Command-line front end.

    paralayer <subcommand> [--config PATH] [--set key=value ...] [--out DIR] [--plot] [--threads N]

Exit codes: 0 success, 1 acceptance failure, 2 configuration error,
3 numerical failure (non-convergence, non-injective layer, xi >= 1).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, acceptance, asymptotics, fiber2d, geometry, potentials, spec1d
from .config import ConfigError, RunConfig, dumps, load

log = logging.getLogger("paralayer")

EXIT_OK, EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

NUMERIC_ERRORS = (
    geometry.GeometryError,
    potentials.PotentialError,
    fiber2d.NumericalError,
    fiber2d.GridError,
    spec1d.DiscretizationError,
    ArithmeticError,
)


class InjectivityFailure(Exception):
    pass


def _threads(args) -> int:
    if args.threads:
        return max(1, args.threads)
    env = os.environ.get("PARALAYER_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _profile(cfg: RunConfig):
    return geometry.LayerProfile(cfg.alpha, cfg.k, cfg.R, geometry.Cap.parse(cfg.cap))


def _gate(cfg: RunConfig, prof, curv):
    rep = geometry.injectivity_check(prof, cfg.a, curv=curv)
    if not rep.ok:
        raise InjectivityFailure(f"half-width a = {cfg.a:g} fails the injectivity check "
                                 f"(rho_m = {rep.rho_m}): {rep.reason}")
    return rep


# ------------------------------------------------------------ subcommands


def cmd_geometry(cfg, out: Path, args, manifest):
    prof = _profile(cfg)
    arc = geometry.solve_arc_length(prof, cfg.s_max, cfg.n)
    curv = geometry.curvature_tables(prof, arc)
    geometry.write_tables_csv(out / "geometry.csv", arc, curv)
    xi, zeta = geometry.xi_zeta(curv, cfg.a, cfg.p)
    rep = geometry.injectivity_check(prof, cfg.a, curv=curv)
    manifest["results"] = {"rho_m": curv.rho_m(), "xi_p": xi, "zeta_p": zeta, "injective": rep.ok, "reason": rep.reason}
    return EXIT_OK


def cmd_potential(cfg, out: Path, args, manifest):
    prof = _profile(cfg)
    curv = geometry.build(prof, cfg.s_max, cfg.n)
    _gate(cfg, prof, curv)
    s = np.linspace(max(cfg.p, 1e-3), cfg.s_max, cfg.n)
    potentials.write_trace_csv(out / "potential.csv", s, 0.0, cfg.m, cfg.p, cfg.a, curv)
    manifest["results"] = {"smallest_positive_mode": potentials.smallest_positive_mode(cfg.a, curv)}
    return EXIT_OK


def _study(cfg, threads):
    sc = asymptotics.StudyConfig(cfg.alpha, cfg.k, cfg.a, cfg.p, cfg.h, cfg.safety, cfg.R, cfg.cap)
    return asymptotics.ratio_study(sc, cfg.E_list, workers=threads)


def cmd_spectrum1d(cfg, out: Path, args, manifest):
    res = _study(cfg, _threads(args))
    lower = [spec1d.CountingResult(r.E, r.count_lower, r.asymptote) for r in res.rows]
    upper = [spec1d.CountingResult(r.E, r.count_upper, r.asymptote) for r in res.rows]
    spec1d.write_counting_csv(out / "spectrum1d_lower.csv", lower)
    spec1d.write_counting_csv(out / "spectrum1d_upper.csv", upper)
    manifest["results"] = {"xi_p": res.xi, "zeta_p": res.zeta, **res.meta}
    return EXIT_OK


def cmd_fiber(cfg, out: Path, args, manifest):
    prof = _profile(cfg)
    curv = geometry.build(prof, cfg.fiber_s_max + 1.0, cfg.n)
    _gate(cfg, prof, curv)
    grid = fiber2d.StripGrid.graded(cfg.fiber_s_max, cfg.n_u, cfg.a, h0=cfg.h0, growth=cfg.growth)
    scan = fiber2d.nonzero_mode_scan(curv, grid, cfg.m_max, workers=_threads(args))
    rows = [(m, "dirichlet", 0.0, 0.0, c) for m, c in zip(scan.m, scan.counts)]
    if cfg.p > 0:
        rep = fiber2d.bracketing_check(curv, cfg.m, cfg.p, grid, cfg.E_list)
        for r in rep.rows():
            rows.append((cfg.m, "dirichlet-cut", rep.p, r["E"], r["dirichlet"]))
            rows.append((cfg.m, "full", 0.0, r["E"], r["full"]))
            if r["robin"] is not None:
                rows.append((cfg.m, "robin-cut", rep.p, r["E"], r["robin"]))
    fiber2d.write_counts_csv(out / "fiber.csv", rows)
    manifest["results"] = {"M": scan.M, "M_positive": scan.M_positive, "n_s": grid.n_s}
    return EXIT_OK


def cmd_asymptotics(cfg, out: Path, args, manifest):
    res = _study(cfg, _threads(args))
    asymptotics.write_study_csv(out / "asymptotics.csv", res.rows)
    if args.plot:
        asymptotics.plot_study_svg(out / "asymptotics.svg", res)
    manifest["results"] = {"band": list(res.band), "xi_p": res.xi, "zeta_p": res.zeta, **res.meta}
    return EXIT_OK


def cmd_verify(cfg, out: Path, args, manifest):
    results = acceptance.run_all(echo=print)
    manifest["results"] = {str(r.number): {"passed": r.passed, "detail": r.detail, "runtime": r.runtime} for r in results}
    with open(out / "acceptance.txt", "w") as fh:
        fh.write("\n".join(r.line() for r in results) + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE


COMMANDS = {
    "geometry": cmd_geometry,
    "potential": cmd_potential,
    "spectrum1d": cmd_spectrum1d,
    "fiber": cmd_fiber,
    "asymptotics": cmd_asymptotics,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="paralayer", description="Spectra of parabolic layers.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="flat key = value file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one key")
        sp.add_argument("--out", type=Path, help="output directory (default: output_dir of the config)")
        sp.add_argument("--plot", action="store_true", help="also write SVG plots where available")
        sp.add_argument("--threads", type=int, default=0, help="worker threads (env PARALAYER_THREADS)")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def _write_manifest(out: Path, manifest: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    manifest = {"command": args.command, "version": __version__, "backend": spec1d.kernels.BACKEND}
    out = args.out or Path("out")
    try:
        cfg = load(args.config, args.set)
        out = args.out or Path(cfg.output_dir)
        manifest["config"] = cfg.as_dict()
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.echo").write_text(dumps(cfg))
        np.random.seed(cfg.seed)
        status = COMMANDS[args.command](cfg, out, args, manifest)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        manifest["error"] = str(exc)
        status = EXIT_CONFIG
    except InjectivityFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        manifest["error"] = str(exc)
        status = EXIT_NUMERIC
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        manifest["error"] = repr(exc)
        status = EXIT_NUMERIC
    manifest["exit_status"] = status
    manifest["wall_time"] = time.perf_counter() - t0
    _write_manifest(out, manifest)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
