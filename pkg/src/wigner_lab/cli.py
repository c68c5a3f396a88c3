"""Command line interface.

Subcommands mirror the library: relations check, ensemble sample, spectrum,
census, oracle exact-moment, fermi shell/build/scan, freeness.  Text output
is CSV (floats rendered with %.17g) or JSON; matrices go to a compact
binary container.  Exit codes: 0 success, 2 validation problems (a JSON
error object lands on stderr), 3 exceeded compute budgets.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from typing import List, Optional, Sequence

import numpy as np

from . import fermi as fermi_mod
from . import freeness as free_mod
from . import relations, spectra, storage
from .common import BudgetError
from .ensembles import derive_seed, iter_matrices, make_spec
from .partitions import (census, exact_gaussian_moment, format_blocks,
                         parse_blocks)

_DEST_ALIASES = {"in": "in_path"}


class _Parser(argparse.ArgumentParser):
    """argparse that reports failures as JSON on stderr."""

    def error(self, message):
        code = "unknown_flag" if "unrecognized arguments" in message else "usage"
        _emit_error(code, message)
        raise SystemExit(2)


def _emit_error(code: str, detail: str) -> None:
    sys.stderr.write(json.dumps({"error": code, "detail": detail}) + "\n")


def _atomic_write(path: str, data: bytes) -> None:
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".tmp-")
    try:
        os.write(fd, data)
        os.close(fd)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.close(fd)
        except OSError:
            pass
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_text(args, text: str) -> None:
    if getattr(args, "out", None):
        _atomic_write(args.out, text.encode())
    else:
        sys.stdout.write(text)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _quote(cell: str) -> str:
    if any(ch in cell for ch in ',"\n'):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def _render_csv(args, header: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = []
    if not args.no_timestamp:
        stamp = datetime.now(timezone.utc).isoformat()
        lines.append(f"# generated {stamp}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_quote(_fmt(v)) for v in row))
    return "\n".join(lines) + "\n"


def _int_list(text) -> List[int]:
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(tok) for tok in str(text).split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"bad integer list {text!r}") from None


def _float_list(text) -> List[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"bad number list {text!r}") from None


def _load_config(argv: Sequence[str]) -> dict:
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config":
            if i + 1 >= len(argv):
                raise ValueError("--config needs a path")
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        loaded = json.load(fh)
    if not isinstance(loaded, dict):
        raise ValueError("config must be a JSON object")
    return loaded


def _apply_config(args, config: dict, argv: Sequence[str]) -> None:
    # explicit flags win; config only fills in what was not typed
    for key, value in config.items():
        if key == "config":
            continue
        dest = _DEST_ALIASES.get(key, key.replace("-", "_"))
        if not hasattr(args, dest):
            raise ValueError(f"unknown config key {key!r}")
        flag = "--" + key.replace("_", "-")
        typed = any(tok == flag or tok.startswith(flag + "=") for tok in argv)
        if not typed:
            setattr(args, dest, value)


def _fermi_params(args) -> dict:
    return {"d": args.d, "energy": args.energy, "band": args.band}


# ---------------------------------------------------------------- handlers

def cmd_relations_check(args) -> int:
    kind = args.kind
    params = _fermi_params(args) if kind == "fermi" else None
    if args.n is not None and args.ladder is not None:
        raise ValueError("pass either --n or --ladder, not both")
    if args.n is not None:
        size = int(args.n)
        if kind == "fermi":
            shell = fermi_mod.enumerate_shell(args.d, size, args.energy, args.band)
            rel = relations.make_relation("fermi", parameters={"shell": shell})
        else:
            rel = relations.make_relation(kind, size)
        rep = relations.check_conditions(rel, budget=args.budget)
        doc = {"kind": kind, "n": size, "c1": rep.c1_count, "c2": rep.c2_bound,
               "c3": rep.c3_count, "slopes": None, "pass": None}
    else:
        ladder = _int_list(args.ladder) if args.ladder is not None \
            else list(relations.DEFAULT_LADDER)
        diag = relations.growth_diagnostic(kind, ladder=ladder, parameters=params,
                                           margin=args.margin, budget=args.budget)
        doc = {
            "kind": kind,
            "n": ladder if kind == "fermi" else [r.n for r in diag.rows],
            "c1": [r.c1_count for r in diag.rows],
            "c2": [r.c2_bound for r in diag.rows],
            "c3": [r.c3_count for r in diag.rows],
            "slopes": {"c1": diag.c1_slope, "c3": diag.c3_slope,
                       "c2_constant": diag.c2_constant},
            "pass": diag.passed,
        }
    _write_text(args, json.dumps(doc, indent=2) + "\n")
    return 0


def _write_matrix_file(args, samples, n: int, count: int) -> None:
    if not args.out:
        raise ValueError("matrix output needs --out (binary data)")
    target = os.path.abspath(args.out)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".tmp-")
    os.close(fd)
    try:
        storage.write_matrices(tmp, samples, n=n, count=count)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_ensemble_sample(args) -> int:
    if args.kind == "fermi":
        raise ValueError("the shell model has its own pipeline: use fermi build")
    spec = make_spec(args.kind, args.n, args.family, seed=args.seed)
    _write_matrix_file(args, iter_matrices(spec, args.count), args.n, args.count)
    return 0


def cmd_spectrum(args) -> int:
    law = spectra.reference_law(args.law)
    mats = list(storage.iter_matrices(args.in_path))
    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        spectra_list = list(pool.map(np.linalg.eigvalsh, mats))
    header = ["sample_index", "k", "empirical_moment", "reference_moment",
              "ks_distance", "atom_mass"]
    rows = []
    for i, eigs in enumerate(spectra_list):
        eigs = np.sort(eigs * args.scale)
        moments = spectra.empirical_moments(eigs, args.order)
        ks = spectra.ks_distance(eigs, law, args.zero_tol)
        atom = spectra.atom_mass(eigs, args.zero_tol)
        for k in range(args.order + 1):
            rows.append([i, k, float(moments[k]), law.moment(k), ks, atom])
    _write_text(args, _render_csv(args, header, rows))
    return 0


def cmd_census(args) -> int:
    partition = parse_blocks(args.pi)
    k = partition.size
    header = ["n", "k", "pi", "s_count", "ps_count", "ns_count", "s_over_scale"]
    rows = []
    for n in _int_list(args.n):
        rel = relations.make_relation(args.kind, n)
        res = census(rel, partition, budget_steps=args.budget,
                     coarser=args.coarser)
        rows.append([n, k, format_blocks(partition), res.s_count, res.ps_count,
                     res.ns_count, res.s_count / n ** (1 + k / 2)])
    _write_text(args, _render_csv(args, header, rows))
    return 0


def cmd_oracle_exact_moment(args) -> int:
    spec = make_spec(args.kind, args.n, args.family, seed=0)
    value = exact_gaussian_moment(spec, args.k, budget_steps=args.budget)
    doc = {"kind": args.kind, "n": args.n, "family": args.family, "k": args.k,
           "rational": f"{value.numerator}/{value.denominator}",
           "value": float(value)}
    _write_text(args, json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_fermi_shell(args) -> int:
    shell = fermi_mod.enumerate_shell(args.d, args.L, args.energy, args.band)
    doc = {"d": shell.d, "L": shell.L, "E": shell.energy, "beta": shell.band,
           "n": shell.n, "points": shell.points.tolist()}
    _write_text(args, json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_fermi_build(args) -> int:
    shell = fermi_mod.enumerate_shell(args.d, args.L, args.energy, args.band)

    def draws():
        for i in range(args.count):
            field = fermi_mod.sample_potential(args.d, args.L, args.coupling,
                                               derive_seed(args.seed, i))
            em = fermi_mod.build_effective_matrix(
                shell, fermi_mod.fourier_potential(field))
            yield fermi_mod.rescale(em).entries

    _write_matrix_file(args, draws(), shell.n, args.count)
    return 0


def cmd_fermi_scan(args) -> int:
    result = fermi_mod.coupling_scan(args.d, args.energy, args.band,
                                     _float_list(args.couplings),
                                     seed=args.seed, draws=args.draws)
    header = ["lambda", "L", "n", "spectral_width"]
    rows = [[r.coupling, r.L, r.n, r.spectral_width] for r in result.rows]
    _write_text(args, _render_csv(args, header, rows))
    slopes = {"width_slope": result.width_slope, "size_slope": result.size_slope}
    sys.stdout.write(json.dumps(slopes) + "\n")
    return 0


def cmd_freeness(args) -> int:
    words = [w.strip() for w in args.words.split(";") if w.strip()]
    if not words:
        raise ValueError("no words given")
    parsed = [free_mod.parse_word(w) for w in words]
    factory = free_mod.DIAGONALS[args.diagonal]
    bindings = {}
    for word in parsed:
        for kind, index, _ in word:
            if kind == "d" and index not in bindings:
                bindings[index] = factory()
    rows_out = free_mod.freeness_report(parsed, bindings, _int_list(args.n),
                                        samples=args.samples, seed=args.seed)
    header = ["word", "n", "estimate", "std_error", "prediction", "z_score"]
    rows = [[r.word, r.n, r.estimate, r.std_error, r.prediction, r.z_score]
            for r in rows_out]
    _write_text(args, _render_csv(args, header, rows))
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", type=str, default=None)
    common.add_argument("--config", type=str, default=None)
    common.add_argument("--no-timestamp", action="store_true")

    parser = _Parser(prog="wigner-lab", allow_abbrev=False,
                     description="Correlated Wigner ensembles: conditions, "
                                 "spectra, censuses, and freeness checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rel = sub.add_parser("relations", allow_abbrev=False)
    rel_sub = p_rel.add_subparsers(dest="subcommand", required=True)
    p_check = rel_sub.add_parser("check", parents=[common], allow_abbrev=False)
    p_check.add_argument("--kind", required=True,
                         choices=["iid", "flip", "violating", "fermi"])
    p_check.add_argument("--n", type=int, default=None,
                         help="single size (lattice side for fermi)")
    p_check.add_argument("--ladder", type=str, default=None,
                         help="comma separated sizes (lattice sides for fermi)")
    p_check.add_argument("--budget", type=int, default=relations.DEFAULT_SCAN_BUDGET)
    p_check.add_argument("--margin", type=float, default=relations.DEFAULT_SLOPE_MARGIN)
    _add_fermi_geometry(p_check)
    p_check.set_defaults(handler=cmd_relations_check)

    p_ens = sub.add_parser("ensemble", allow_abbrev=False)
    ens_sub = p_ens.add_subparsers(dest="subcommand", required=True)
    p_sample = ens_sub.add_parser("sample", parents=[common], allow_abbrev=False)
    p_sample.add_argument("--kind", required=True,
                          choices=["iid", "flip", "violating", "fermi"])
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--family", default="gaussian_complex",
                          choices=["gaussian_complex", "gaussian_real", "rademacher"])
    p_sample.add_argument("--count", type=int, default=1)
    p_sample.set_defaults(handler=cmd_ensemble_sample)

    p_spec = sub.add_parser("spectrum", parents=[common], allow_abbrev=False)
    p_spec.add_argument("--in", dest="in_path", required=True)
    p_spec.add_argument("--order", type=int, default=8)
    p_spec.add_argument("--law", default="semicircle",
                        choices=["semicircle", "mixture"])
    p_spec.add_argument("--scale", type=float, default=1.0,
                        help="multiply eigenvalues before comparing")
    p_spec.add_argument("--zero-tol", type=float, default=None)
    p_spec.set_defaults(handler=cmd_spectrum)

    p_cen = sub.add_parser("census", parents=[common], allow_abbrev=False)
    p_cen.add_argument("--kind", required=True,
                       choices=["iid", "flip", "violating"])
    p_cen.add_argument("--n", type=str, required=True,
                       help="size or comma separated sizes")
    p_cen.add_argument("--pi", type=str, required=True,
                       help='partition blocks, e.g. "1-2,3-4"')
    p_cen.add_argument("--coarser", action="store_true",
                       help="only require within-block relations")
    p_cen.add_argument("--budget", type=int, default=10 ** 9)
    p_cen.set_defaults(handler=cmd_census)

    p_or = sub.add_parser("oracle", allow_abbrev=False)
    or_sub = p_or.add_subparsers(dest="subcommand", required=True)
    p_exact = or_sub.add_parser("exact-moment", parents=[common], allow_abbrev=False)
    p_exact.add_argument("--kind", required=True,
                         choices=["iid", "flip", "violating"])
    p_exact.add_argument("--n", type=int, required=True)
    p_exact.add_argument("--family", default="gaussian_complex",
                         choices=["gaussian_complex", "gaussian_real"])
    p_exact.add_argument("--k", type=int, required=True)
    p_exact.add_argument("--budget", type=int, default=10 ** 8)
    p_exact.set_defaults(handler=cmd_oracle_exact_moment)

    p_fermi = sub.add_parser("fermi", allow_abbrev=False)
    fermi_sub = p_fermi.add_subparsers(dest="subcommand", required=True)
    p_shell = fermi_sub.add_parser("shell", parents=[common], allow_abbrev=False)
    p_shell.add_argument("--L", type=int, required=True)
    _add_fermi_geometry(p_shell)
    p_shell.set_defaults(handler=cmd_fermi_shell)
    p_build = fermi_sub.add_parser("build", parents=[common], allow_abbrev=False)
    p_build.add_argument("--L", type=int, required=True)
    p_build.add_argument("--coupling", type=float, required=True)
    p_build.add_argument("--count", type=int, default=1)
    _add_fermi_geometry(p_build)
    p_build.set_defaults(handler=cmd_fermi_build)
    p_scan = fermi_sub.add_parser("scan", parents=[common], allow_abbrev=False)
    p_scan.add_argument("--couplings", type=str, required=True,
                        help="comma separated couplings; each picks its own L")
    p_scan.add_argument("--draws", type=int, default=1)
    _add_fermi_geometry(p_scan)
    p_scan.set_defaults(handler=cmd_fermi_scan)

    p_free = sub.add_parser("freeness", parents=[common], allow_abbrev=False)
    p_free.add_argument("--words", required=True,
                        help='semicolon separated, e.g. "x d x d;x^2 d^2"')
    p_free.add_argument("--diagonal", default="two_point",
                        choices=sorted(free_mod.DIAGONALS))
    p_free.add_argument("--n", type=str, default="200",
                        help="size or comma separated sizes")
    p_free.add_argument("--samples", type=int, default=50)
    p_free.set_defaults(handler=cmd_freeness)

    return parser


def _add_fermi_geometry(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, default=2, choices=[2, 3])
    p.add_argument("--energy", type=float, default=2.0)
    p.add_argument("--band", type=float, default=2.0 * math.pi)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        config = _load_config(argv)
        args = parser.parse_args(argv)
        _apply_config(args, config, argv)
        return args.handler(args)
    except SystemExit as exc:  # argparse help (0) or usage failures (2)
        code = exc.code
        return int(code) if code is not None else 0
    except BudgetError as exc:
        _emit_error("budget", str(exc))
        return 3
    except BrokenPipeError:
        return 0
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        _emit_error("invalid", str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
