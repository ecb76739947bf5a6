"""Command-line front end: ``fso-egc {fit,run,simulate,compare}``.

Tables are long-format (one row per model, branch count, metric, mean SNR
and argument) and deterministic: the same config and seed give
byte-identical files for any ``FSO_EGC_THREADS`` setting.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from typing import Optional, Sequence

from . import __version__, config, egc
from .errors import DomainError, NonConvergence, PoleCollision, ValidityError
from .mc import COLUMNS as SIM_COLUMNS, SimConfig, simulate_egc
from .mixture import GammaGammaParams, fit_gamma_gamma

log = logging.getLogger("fso_egc")

EXIT_OK, EXIT_SCHEMA, EXIT_VALIDITY, EXIT_CONVERGENCE = 0, 2, 3, 4

TABLE_COLUMNS = ("model", "n_branches", "metric", "gbar_db", "arg", "value")
MC_COLUMNS = ("mc", "mc_ci", "rel_err")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, str)):
        return str(v)
    return repr(float(v))


def _metadata(doc: dict) -> list[str]:
    return [
        f"fso-egc {__version__}",
        f"config_sha256 {config.config_hash(doc)}",
        f"name {doc.get('name', '')}",
    ]


def _render(doc: dict, columns: Sequence[str], rows: list[list], fmt: str) -> str:
    if fmt == "json":
        meta = {"version": __version__, "config_sha256": config.config_hash(doc), "name": doc.get("name", "")}
        body = [dict(zip(columns, row)) for row in rows]
        return json.dumps({"metadata": meta, "columns": list(columns), "rows": body}, indent=2) + "\n"
    buf = io.StringIO()
    for line in _metadata(doc):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, path: Optional[str]):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# table builders
# ---------------------------------------------------------------------------

def _sim_config(doc: dict, grid_db: Sequence[float], scale: float) -> SimConfig:
    sim = doc["sim"]
    stop = sim.get("stop_db", math.inf)
    grid = [config.db_to_linear(d) * scale for d in grid_db if d <= stop + 1e-12]
    return SimConfig(
        n_samples=sim["n_samples"],
        seed=sim.get("seed", 1),
        chunk_size=sim.get("chunk_size", 1 << 18),
        gbar_grid=grid,
        g_th=doc.get("outage", {}).get("g_th", 1.0),
        mod=config.modulation(doc),
    )


def _simulate_case(doc: dict, case: config.ModelCase, grid_db) -> dict[float, object]:
    cfg = _sim_config(doc, grid_db, case.gbar_scale)
    res = simulate_egc(case.link, cfg=cfg, fading=doc["sim"].get("fading", "mixture"))
    return {d: rec for d, rec in zip(grid_db, res.records)}


def _closed_rows(doc: dict, case: config.ModelCase, db: float) -> list[tuple]:
    """``(metric, arg, value, mc-key)`` tuples for one mean-SNR point."""
    link = case.link
    gbar = config.db_to_linear(db) * case.gbar_scale
    mod = config.modulation(doc)
    g_th = doc.get("outage", {}).get("g_th")
    out = []
    for metric in doc["metrics"]:
        if metric in ("pdf", "cdf"):
            fn = egc.snr_pdf if metric == "pdf" else egc.snr_cdf
            for g in doc["sweep"].get("g", [1.0]):
                out.append((metric, g, fn(link, gbar, g), None))
        elif metric == "moments":
            for n in doc.get("moments", [1, 2]):
                key = {1: "m1", 2: "m2"}.get(n)
                out.append((metric, n, egc.snr_moment(link, gbar, n), key))
        elif metric == "si":
            out.append((metric, None, egc.scintillation_index(link, gbar), "si"))
        elif metric == "outage":
            out.append((metric, g_th, egc.outage_probability(link, gbar, g_th), "outage"))
        elif metric == "aber":
            out.append((metric, None, egc.aber(link, gbar, mod), "aber"))
        elif metric == "asympt":
            out.append((metric, g_th, egc.outage_asymptotic(link, gbar, g_th), None))
    return out


def build_table(doc: dict, with_sim: bool) -> tuple[tuple[str, ...], list[list]]:
    grid_db = config.gbar_grid_db(doc)
    columns = TABLE_COLUMNS + (MC_COLUMNS if with_sim else ())
    rows = []
    for case in config.model_cases(doc):
        sims = _simulate_case(doc, case, grid_db) if with_sim else {}
        for db in grid_db:
            rec = sims.get(db)
            for metric, arg, value, key in _closed_rows(doc, case, db):
                row = [case.label, case.n, metric, db, arg, value]
                if with_sim:
                    mc = getattr(rec, key) if (rec is not None and key) else None
                    ci = getattr(rec, key + "_ci", None) if mc is not None else None
                    rel = (value - mc) / mc if mc else None
                    row += [mc, ci, rel]
                rows.append(row)
    return columns, rows


def simulate_table(doc: dict) -> tuple[tuple[str, ...], list[list]]:
    grid_db = config.gbar_grid_db(doc)
    columns = ("model", "n_branches") + SIM_COLUMNS
    rows = []
    for case in config.model_cases(doc):
        for db, rec in _simulate_case(doc, case, grid_db).items():
            rows.append([case.label, case.n] + [db if c == "gbar_db" else getattr(rec, c) for c in SIM_COLUMNS])
    return columns, rows


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def _resolve_config(args) -> dict:
    if args.config and args.preset:
        raise DomainError("use either --config or --preset, not both")
    if args.preset:
        doc = config.load_preset(args.preset)
    elif args.config:
        doc = config.load(args.config)
    else:
        raise DomainError("a config is required (--config PATH or --preset NAME)")
    return config.with_overrides(doc, args.seed, args.format, args.strict_validity)


def _out_path(args, doc: dict) -> Optional[str]:
    return args.out or doc.get("output", {}).get("path")


def cmd_fit(args) -> int:
    mg = fit_gamma_gamma(GammaGammaParams(args.alpha, args.beta), args.L, args.order)
    _emit(mg.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_run(args, compare: bool = False) -> int:
    doc = _resolve_config(args)
    if compare and "sim" not in doc:
        raise DomainError("compare needs a 'sim' block (or --seed)")
    columns, rows = build_table(doc, with_sim=compare or "sim" in doc)
    fmt = doc.get("output", {}).get("format", "csv")
    _emit(_render(doc, columns, rows, fmt), _out_path(args, doc))
    return EXIT_OK


def cmd_simulate(args) -> int:
    doc = _resolve_config(args)
    if "sim" not in doc:
        raise DomainError("simulate needs a 'sim' block (or --seed)")
    columns, rows = simulate_table(doc)
    fmt = doc.get("output", {}).get("format", "csv")
    _emit(_render(doc, columns, rows, fmt), _out_path(args, doc))
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--preset", choices=config.PRESETS, help="bundled configuration")
    common.add_argument("--seed", type=int, metavar="U64", help="Monte Carlo seed override")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format override")
    common.add_argument("--strict-validity", action="store_true",
                        help="require xi^2 > b for the first branch as well")

    p = argparse.ArgumentParser(prog="fso-egc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    f = sub.add_parser("fit", help="fit a mixture-Gamma model to a Gamma-Gamma channel")
    f.add_argument("--alpha", type=float, required=True)
    f.add_argument("--beta", type=float, required=True)
    f.add_argument("-L", type=int, default=10, help="number of mixture terms")
    f.add_argument("--order", choices=("min-shape", "as-given"), default="min-shape",
                   help="which Gamma-Gamma shape becomes the mixture shape b")
    f.add_argument("--out", metavar="PATH")

    sub.add_parser("run", parents=[common], help="closed-form metric sweep")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo sweep")
    sub.add_parser("compare", parents=[common], help="closed form next to Monte Carlo")
    return p


def _fail(code: int, kind: str, exc: Exception, **extra) -> int:
    report = {"error": kind, "exit_code": code, "message": str(exc), **extra}
    sys.stderr.write(json.dumps(report) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    verbs = {
        "fit": cmd_fit,
        "run": cmd_run,
        "simulate": cmd_simulate,
        "compare": lambda a: cmd_run(a, compare=True),
    }
    try:
        return verbs[args.verb](args)
    except ValidityError as exc:
        return _fail(EXIT_VALIDITY, "validity", exc, xi2=exc.xi2, b=exc.shape, branch=exc.branch)
    except (NonConvergence, PoleCollision) as exc:
        return _fail(EXIT_CONVERGENCE, "non-convergence", exc)
    except DomainError as exc:
        return _fail(EXIT_SCHEMA, "schema", exc)


if __name__ == "__main__":
    sys.exit(main())
