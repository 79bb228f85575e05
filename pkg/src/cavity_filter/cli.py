"""Command-line front end.

    cavity-filter filter   --model dk --g0 4 --A0 0.1 --T 0.1 --m 1,5,25
    cavity-filter filter   --model lz --v 0.126 --nbar 25 --sequence m5
    cavity-filter evolve   --model dk --g0 4 --A0 0.1 --T 0.1 --n-max 30
    cavity-filter sweep-q  --nbar 100 --m 25 --A0 0.1 --T 0.1 --grid 0.03:6:200
    cavity-filter widths   --mode lowpass --A0 2 --T 1 --g0 1 --m 1:25

Every option may also come from a JSON file given with ``--config``; options
on the command line win.  Exit status: 0 success, 2 invalid input,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, field, filtering, propagator
from .pulses import DKParams, LZParams, TabulatedPulse, case_a_filter, model_from_dict, model_to_dict

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

DEFAULTS = {
    "case": "a",
    "format": "csv",
    "state": "coherent",
    "sequence": "",
    "mode": "sharpening",
}


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    return format(float(x), ".17g")


def parse_grid(text: str) -> np.ndarray:
    try:
        start, stop, count = text.split(":")
        return analysis.grid(float(start), float(stop), int(count))
    except ValueError as exc:
        raise ConfigError(f"bad --grid {text!r}, expected start:stop:count") from exc


def parse_m(text) -> list[int]:
    """``"25"``, ``"1,5,25"`` or the inclusive range ``"1:25"``."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(x) for x in text]
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --m {text!r}") from exc


def build_model(cfg: dict):
    kind = cfg.get("model")
    if isinstance(kind, dict):
        return model_from_dict(kind)
    if kind in ("dk", "demkov-kunike"):
        missing = [k for k in ("g0", "A0", "T") if cfg.get(k) is None]
        if missing:
            raise ConfigError(f"Demkov-Kunike model needs {', '.join(missing)}")
        return DKParams(g0=cfg["g0"], A0=cfg["A0"], T=cfg["T"])
    if kind in ("lz", "landau-zener"):
        if cfg.get("lam") is not None:
            return LZParams(g0=cfg.get("g0") or 1.0, lam=cfg["lam"])
        if cfg.get("v") is not None:
            return LZParams.from_v(cfg["v"], g0=cfg.get("g0") or 1.0)
        raise ConfigError("Landau-Zener model needs --lambda or --v")
    raise ConfigError(f"unknown or missing --model {kind!r}")


def build_state(cfg: dict) -> field.PhotonDistribution:
    kind, nbar = cfg["state"], cfg.get("nbar")
    if nbar is None:
        raise ConfigError("--nbar is required for a field state")
    if kind == "coherent":
        return field.coherent(nbar)
    if kind == "thermal":
        return field.thermal(nbar)
    if kind == "fock":
        if nbar != int(nbar):
            raise ConfigError("fock state needs an integer --nbar")
        return field.fock(int(nbar))
    raise ConfigError(f"unknown --state {kind!r}")


def _record(cfg: dict) -> dict:
    """Parameter record embedded in every output."""
    rec = {k: v for k, v in sorted(cfg.items()) if v is not None and k not in ("out", "config")}
    if "model_obj" in rec:
        rec["model"] = model_to_dict(rec.pop("model_obj"))
    rec["version"] = __version__
    return rec


def _table_csv(record: dict, names: list[str], cols: list) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(record, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in zip(*cols):
        w.writerow([x if isinstance(x, str) else _fmt(x) for x in row])
    return buf.getvalue()


def _table_json(record: dict, names: list[str], cols: list) -> str:
    columns = {n: [x if isinstance(x, str) else float(x) for x in c] for n, c in zip(names, cols)}
    return json.dumps({"params": record, "columns": columns}, sort_keys=True) + "\n"


def _emit_table(cfg: dict, record: dict, names: list[str], cols: list) -> str:
    if cfg["format"] == "json":
        return _table_json(record, names, cols)
    return _table_csv(record, names, cols)


# ---------------------------------------------------------------------------
# commands


def cmd_filter(cfg: dict) -> tuple[str, int]:
    model = build_model(cfg)
    cfg["model_obj"] = model
    case = filtering.AtomInjectionCase(cfg["case"])
    if cfg.get("nbar") is not None:
        start = build_state(cfg)
        state = filtering.apply_sequence(start, model, cfg["sequence"], case)
        record = _record(cfg)
        record.update(state.header())
        if cfg["format"] == "json":
            doc = {"params": record, "dist": json.loads(state.dist.to_json())}
            return json.dumps(doc, sort_keys=True) + "\n", EXIT_OK
        return "# " + json.dumps(record, sort_keys=True) + "\n" + state.dist.to_csv(), EXIT_OK

    ms = parse_m(cfg.get("m") or "1")
    if any(m < 1 for m in ms):
        raise ConfigError("m must be >= 1")
    n_max = int(cfg.setdefault("n_max", 60))
    n = np.arange(n_max + 1)
    lower, upper = case_a_filter(np.arange(n_max + max(ms) + 1), model,
                                 approximate=bool(cfg.get("approximate")))
    names, cols = ["n"], [n]
    for m in ms:
        names.append(f"lower_m{m}")
        cols.append(lower[: n_max + 1] ** m)
    for m in ms:
        # prod_{nu=1..m} upper(n + nu)
        prod = np.ones(n_max + 1)
        for nu in range(1, m + 1):
            prod = prod * upper[nu: nu + n_max + 1]
        names.append(f"upper_m{m}")
        cols.append(prod)
    return _emit_table(cfg, _record(cfg), names, cols), EXIT_OK


def cmd_evolve(cfg: dict) -> tuple[str, int]:
    model = build_model(cfg)
    cfg["model_obj"] = model
    window = cfg.get("window")
    icfg = propagator.default_config(model, window=window,
                                     rel_tol=cfg.get("rel_tol") or 1e-9,
                                     abs_tol=cfg.get("abs_tol") or 1e-12)
    tol = cfg.get("tol")
    if tol is None:
        tol = 5e-3 if isinstance(model, LZParams) else 1e-6
    n_max = int(cfg.setdefault("n_max", 30))
    average = bool(cfg.get("average_tail"))
    analytic_ok = not isinstance(model, TabulatedPulse)
    names = ["n", "numeric", "analytic", "abs_error", "transfer", "status"]
    cols = [[] for _ in names]
    status = EXIT_OK
    for n in range(1, n_max + 1):
        try:
            num = propagator.numeric_lower_filter(n, model, icfg, average_tail=average)
            note = "ok"
        except propagator.IntegrationError as exc:
            num, note, status = math.nan, f"failed at t={exc.time:.17g}", EXIT_NUMERIC
        ana = case_a_filter(n, model)[0] if analytic_ok else math.nan
        err = abs(num - ana)
        if note == "ok" and analytic_ok and not err <= tol:
            note = "flagged"
        for col, x in zip(cols, (n, num, ana, err, 1.0 - num, note)):
            col.append(x)
    record = _record(cfg)
    record.update({"t_start": icfg.t_start, "t_end": icfg.t_end, "tol": tol,
                   "max_abs_error": float(np.nanmax(cols[3])) if analytic_ok else None})
    return _emit_table(cfg, record, names, cols), status


def _dk_template(cfg: dict) -> DKParams:
    missing = [k for k in ("A0", "T") if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"need {', '.join(missing)}")
    return DKParams(g0=cfg.get("g0") or 1.0, A0=cfg["A0"], T=cfg["T"])


def _emit_sweep(cfg: dict, table: analysis.SweepTable) -> str:
    if cfg["format"] == "json":
        doc = {"params": _record(cfg) | {"fixed": table.fixed},
               "columns": {table.axis_name: table.axis_values.tolist(),
                           **{k: v.tolist() for k, v in table.metrics.items()}}}
        return json.dumps(doc, sort_keys=True) + "\n"
    return "# " + json.dumps(_record(cfg), sort_keys=True) + "\n" + table.to_csv()


def cmd_sweep_q(cfg: dict) -> tuple[str, int]:
    template = _dk_template(cfg)
    if cfg.get("nbar") is None:
        raise ConfigError("--nbar is required")
    ms = parse_m(cfg.get("m") if cfg.get("m") is not None else "25")
    if len(ms) != 1 or ms[0] < 0:
        raise ConfigError("sweep-q takes a single m >= 0")
    g = parse_grid(cfg.get("grid") or f"{6 / analysis.DEFAULT_GRID_POINTS}:6:"
                   f"{analysis.DEFAULT_GRID_POINTS}")
    if np.any(g <= 0):
        raise ConfigError("g0 grid must be strictly positive")
    table = analysis.q_sweep(cfg["nbar"], ms[0], template, g,
                             approximate=bool(cfg.get("approximate")))
    return _emit_sweep(cfg, table), EXIT_OK


def cmd_widths(cfg: dict) -> tuple[str, int]:
    ms = parse_m(cfg.get("m") or "1:25")
    if any(m < 1 for m in ms):
        raise ConfigError("widths need m >= 1")
    if cfg.get("g0") is None:
        raise ConfigError("--g0 is required")
    params = _dk_template(cfg)
    if cfg["mode"] == "lowpass":
        table = analysis.lowpass_sweep(params, ms)
    elif cfg["mode"] == "sharpening":
        if cfg.get("nbar") is None:
            raise ConfigError("--nbar is required for sharpening widths")
        table = analysis.sharpening_sweep(cfg["nbar"], params, ms)
    else:
        raise ConfigError(f"unknown --mode {cfg['mode']!r}")
    return _emit_sweep(cfg, table), EXIT_OK


COMMANDS = {"filter": cmd_filter, "evolve": cmd_evolve, "sweep-q": cmd_sweep_q,
            "widths": cmd_widths}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavity-filter", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with default options")
        p.add_argument("--model", help="lz | dk (tabulated pulses via --config)")
        p.add_argument("--g0", type=float)
        p.add_argument("--A0", type=float)
        p.add_argument("--T", type=float)
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--v", type=float, help="Landau-Zener pi g0^2/lambda")
        p.add_argument("--nbar", type=float)
        p.add_argument("--state", choices=["coherent", "thermal", "fock"])
        p.add_argument("--sequence", help='outcomes, e.g. "--+-" or "m25"')
        p.add_argument("--m", help="atom count(s): 25, 1,5,25 or 1:25")
        p.add_argument("--case", choices=["a", "b"])
        p.add_argument("--n-max", dest="n_max", type=int)
        p.add_argument("--grid", help="start:stop:count")
        p.add_argument("--window", type=float,
                       help="half-window in units of T (dk) or lambda*tau^2 (lz)")
        p.add_argument("--rel-tol", dest="rel_tol", type=float)
        p.add_argument("--abs-tol", dest="abs_tol", type=float)
        p.add_argument("--tol", type=float, help="evolve: flag errors above this")
        p.add_argument("--average-tail", dest="average_tail", action="store_const", const=True)
        p.add_argument("--approximate", action="store_const", const=True,
                       help="use the non-adiabatic cos^2 filter")
        p.add_argument("--mode", choices=["sharpening", "lowpass"])
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=["csv", "json"])
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if "lambda" in doc:
            doc["lam"] = doc.pop("lambda")
        cfg.update({k.replace("-", "_"): v for k, v in doc.items()})
    cfg.update({k: v for k, v in vars(args).items() if v is not None})
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        text, status = COMMANDS[cfg["command"]](cfg)
    except (propagator.IntegrationError, filtering.ImpossibleOutcomeError,
            analysis.NoSolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out = cfg.get("out")
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
