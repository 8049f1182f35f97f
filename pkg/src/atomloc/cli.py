"""Command-line front end.

    atomloc chi-scan  --delta 0 --delta 5 [--preset fig3] ...
    atomloc roots     [--preset fig3] ...
    atomloc dressed   [--preset fig6] ...
    atomloc verify    --seed 42 --samples 1000
    atomloc preset fig6

Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, verify
from .config import FORMATS, RunConfig, load_config
from .dressed import dressed_grid
from .errors import DegenerateEigenvalueWarning, InvalidConfig, InvalidParameters
from .model import chi_grid
from .output import Table, write_tables
from .presets import get_preset, phi_label
from .roots import branch_curves, branch_permutation
from .scan import periodic_grid

log = logging.getLogger("atomloc")

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

CHI_UNITS = {"kx": "rad", "chi_im": "N", "chi_re": "N", "delta": "gamma1"}


def _combos(cfg: RunConfig):
    """(tag, params, detunings) for every parameter set a command covers."""
    if cfg.preset is None:
        yield "scan", cfg.params, cfg.deltas
        return
    pre = get_preset(cfg.preset)
    for phi, g2, deltas in pre.combos():
        tag = f"{pre.id}_phi-{phi_label(phi)}_g2-{g2:g}"
        yield tag, pre.params(phi, g2).with_(prefactor=cfg.prefactor), cfg.deltas or deltas


def _metadata(cfg: RunConfig, command: str) -> dict:
    meta = {"command": command, "config": cfg.dump()}
    if cfg.preset is not None:
        # drive parameters come from the preset, not the config
        for k in ("omega1", "omega2", "omega3", "phi", "gamma1", "gamma2"):
            meta["config"].pop(k)
        meta["preset"] = get_preset(cfg.preset).header()
    return meta


def cmd_chi_scan(cfg: RunConfig) -> list:
    combos = list(_combos(cfg))
    if any(len(d) == 0 for _, _, d in combos):
        raise InvalidConfig("chi-scan needs at least one detuning (--delta)")
    tables = []
    kx = periodic_grid(cfg.grid)
    kx2 = periodic_grid(cfg.contour_grid)
    dgrid = np.linspace(cfg.delta_min, cfg.delta_max, cfg.delta_points)
    for tag, params, deltas in combos:
        pmeta = {"params": params.as_dict()}
        for d in deltas:
            re, im = chi_grid(params, d, kx)
            tables.append(Table(f"chi_{tag}_delta-{d:g}", ["kx", "chi_im", "chi_re"],
                                {"kx": kx, "chi_im": im / params.prefactor,
                                 "chi_re": re / params.prefactor},
                                CHI_UNITS, {**pmeta, "delta": d, "grid": cfg.grid}))
        dd, kk = np.meshgrid(dgrid, kx2, indexing="ij")
        _, im2 = chi_grid(params, dd, kk)
        tables.append(Table(f"chi2d_{tag}", ["delta", "kx", "chi_im"],
                            {"delta": dd.ravel(), "kx": kk.ravel(),
                             "chi_im": im2.ravel() / params.prefactor},
                            CHI_UNITS, {**pmeta, "delta_points": cfg.delta_points,
                                        "contour_grid": cfg.contour_grid}))
    return write_tables(cfg.out, "chi_scan", tables, _metadata(cfg, "chi-scan"), cfg.format)


def _phase_combos(cfg):
    seen = set()
    for tag, params, deltas in _combos(cfg):
        if cfg.preset is not None:
            tag = tag.rsplit("_g2-", 1)[0]
        if tag in seen:
            continue
        seen.add(tag)
        yield tag, params, deltas


def cmd_roots(cfg: RunConfig) -> list:
    tables = []
    kx = periodic_grid(cfg.grid)
    for tag, params, deltas in _phase_combos(cfg):
        br = branch_curves(params, kx)
        cols = ["kx", "delta1", "delta2", "delta3", "delta4", "delta5"]
        data = br.as_columns()
        meta = {"params": params.as_dict(), "markers": [float(d) for d in deltas]}
        tables.append(Table(f"roots_{tag}", cols, {c: data[c] for c in cols},
                            {c: ("rad" if c == "kx" else "gamma1") for c in cols}, meta))
        tables.append(Table(f"markers_{tag}", ["delta"],
                            {"delta": np.asarray(deltas, dtype=float)}, {"delta": "gamma1"},
                            {"params": params.as_dict()}))
    return write_tables(cfg.out, "roots", tables, _metadata(cfg, "roots"), cfg.format)


def cmd_dressed(cfg: RunConfig) -> list:
    tables = []
    kx = periodic_grid(cfg.grid)
    cols = ["kx", "lambda5", "lambda3", "lambda4", "gamma5", "gamma3", "gamma4"]
    for tag, params, _ in _combos(cfg):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", DegenerateEigenvalueWarning)
            lam, _, decay, flags = dressed_grid(params, kx)
        perm = branch_permutation(params, np.sin(kx), lam)
        lam = np.take_along_axis(lam, perm, axis=1)
        decay = np.take_along_axis(decay, perm, axis=1)
        data = {"kx": kx}
        for j, b in enumerate((5, 3, 4)):
            data[f"lambda{b}"] = lam[:, j]
            data[f"gamma{b}"] = decay[:, j]
        meta = {"params": params.as_dict(),
                "degenerate_points": int(np.count_nonzero(flags.any(axis=1))),
                "warnings": len(caught)}
        tables.append(Table(f"dressed_{tag}", cols, data,
                            {c: ("rad" if c == "kx" else "gamma1") for c in cols}, meta))
    return write_tables(cfg.out, "dressed", tables, _metadata(cfg, "dressed"), cfg.format)


def cmd_verify(cfg: RunConfig, corrupt_a_sign: bool = False):
    """Run every suite; returns (report text, all passed, written paths)."""
    results = verify.run_all(cfg.samples, cfg.seed, corrupt_a_sign=corrupt_a_sign)
    text = verify.report_text(results, cfg.samples, cfg.seed)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "verify_report.txt"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    paths = [path]
    if cfg.format == "json":
        tab = Table("verify", ["checked", "skipped", "worst", "tol", "passed"],
                    {"checked": [r.checked for r in results],
                     "skipped": [r.skipped for r in results],
                     "worst": [r.worst for r in results], "tol": [r.tol for r in results],
                     "passed": [float(r.passed) for r in results]},
                    meta={"suites": [r.name for r in results]})
        paths += write_tables(out, "verify_report", [tab], _metadata(cfg, "verify"), "json")
    return text, all(r.passed for r in results), paths


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    for name in ("omega1", "omega2", "omega3", "phi", "gamma1", "gamma2", "prefactor"):
        g.add_argument(f"--{name}", type=float, default=None)
    g = common.add_argument_group("run")
    g.add_argument("--config", help="INI configuration file")
    g.add_argument("--delta", type=float, action="append", dest="deltas",
                   help="probe detuning for line scans (repeatable)")
    g.add_argument("--grid", type=int, help="kx samples per line scan (default 4001)")
    g.add_argument("--contour-grid", type=int, dest="contour_grid")
    g.add_argument("--delta-range", type=float, nargs=2, metavar=("MIN", "MAX"))
    g.add_argument("--delta-points", type=int, dest="delta_points")
    g.add_argument("--out", help="output directory")
    g.add_argument("--format", choices=FORMATS)
    g.add_argument("--seed", type=int)
    g.add_argument("--samples", type=int)
    g.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="atomloc", description=__doc__.split("\n")[0] or None,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=f"atomloc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (("chi-scan", "absorption/dispersion line scans and 2-D maps"),
                           ("roots", "resonance branches delta1..delta5"),
                           ("dressed", "dressed-state energies and decay rates")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--preset", choices=("fig3", "fig4", "fig5", "fig6"))
    p = sub.add_parser("verify", parents=[common], help="run the cross-check suites")
    p.add_argument("--corrupt-a-sign", action="store_true", help=argparse.SUPPRESS)
    p = sub.add_parser("preset", parents=[common], help="all data for one figure preset")
    p.add_argument("preset", choices=("fig3", "fig4", "fig5", "fig6"))
    return ap


def _cli_values(ns) -> dict:
    vals = {k: getattr(ns, k, None) for k in
            ("omega1", "omega2", "omega3", "phi", "gamma1", "gamma2", "prefactor",
             "grid", "contour_grid", "delta_points", "out", "format", "seed", "samples",
             "preset")}
    if ns.deltas:
        vals["deltas"] = tuple(ns.deltas)
    if ns.delta_range:
        vals["delta_min"], vals["delta_max"] = ns.delta_range
    return vals


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(ns.config, _cli_values(ns))
        if ns.command == "verify":
            text, ok, paths = cmd_verify(cfg, corrupt_a_sign=ns.corrupt_a_sign)
            sys.stdout.write(text)
        else:
            run = {"chi-scan": [cmd_chi_scan], "roots": [cmd_roots], "dressed": [cmd_dressed],
                   "preset": [cmd_chi_scan, cmd_roots, cmd_dressed]}[ns.command]
            paths = [p for fn in run for p in fn(cfg)]
            ok = True
        for p in paths:
            log.info("wrote %s", p)
    except (InvalidConfig, InvalidParameters) as exc:
        print(f"atomloc: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        where = exc.filename or ""
        print(f"atomloc: I/O error{' at ' + str(where) if where else ''}: {exc.strerror or exc}",
              file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if ok else EXIT_VERIFY


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
