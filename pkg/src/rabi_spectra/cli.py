"""Command-line interface: solve, sweep, gscan, validate, exceptional.

Exit codes: 0 success, 1 validation outside tolerance, 2 invalid parameters,
3 convergence failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .errors import (
    InvalidParameters,
    NoConvergence,
    NotConverged,
    RabiError,
    WindowEmpty,
)
from .model import Sector, TwoPhotonParams, params_from, sectors_of
from .oracle import state_checks, validate_roots
from .roots import ScanConfig, find_exceptional, find_spectrum
from .sweep import gscan, sweep_coupling

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3
EXIT_IO = 4

SPECTRUM_FIELDS = ["g", "sector", "level", "energy", "x", "kind", "residual"]
ED_FIELDS = ["energy_ed", "abs_err"]
STATE_FIELDS = ["state_residual", "defect"]
GSCAN_FIELDS = ["x", "sign", "log2_abs_g", "converged"]

# option name -> (type, default); shared by every subcommand and the config file
COMMON = {
    "model": (str, "rabi"),
    "g": (float, None),
    "delta": (float, 1.0),
    "eps": (float, 0.0),
    "emin": (float, -1.0),
    "emax": (float, 5.0),
    "trunc": (int, 0),
    "nf": (int, 0),
    "grid_per_unit": (int, 200),
    "refine_tol": (float, 1e-12),
    "lift_tol": (float, 1e-8),
    "format": (str, "csv"),
    "out": (str, "-"),
    "threads": (int, 1),
    "validate": (bool, False),
}
EXTRA = {
    "sweep": {"gmin": (float, 0.0), "gmax": (float, 1.0), "gstep": (float, 0.02)},
    "gscan": {"sector": (str, None), "xmin": (float, None), "xmax": (float, None), "points": (int, 1000)},
    "validate": {"tol": (float, 1e-6), "states": (bool, True)},
    "exceptional": {"nmin": (int, 0), "nmax": (int, 10)},
    "solve": {},
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rabi-spectra", description="Exact Rabi-model spectra from G-function zeros.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, extra in EXTRA.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="file of 'key = value' lines; flags override it")
        for key, (typ, _) in {**COMMON, **extra}.items():
            flag = "--" + key.replace("_", "-")
            if typ is bool:
                sp.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction, default=None)
            elif key == "model":
                sp.add_argument(flag, dest=key, choices=["rabi", "rabi2p"], default=None)
            elif key == "format":
                sp.add_argument(flag, dest=key, choices=["csv", "json"], default=None)
            else:
                sp.add_argument(flag, dest=key, type=typ, default=None)
    return ap


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise InvalidParameters(f"not a boolean: {text!r}")


def read_config(path: str) -> dict[str, str]:
    """Parse 'key = value' lines; '#' starts a comment."""
    out: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read config {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(EXIT_INVALID, f"{path}:{num}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _resolve(ns: argparse.Namespace) -> dict[str, Any]:
    known = {**COMMON, **EXTRA[ns.command]}
    cfg = read_config(ns.config) if ns.config else {}
    unknown = set(cfg) - set(known)
    if unknown:
        raise CliError(EXIT_INVALID, f"unknown config keys for {ns.command}: {sorted(unknown)}")
    opts: dict[str, Any] = {}
    for key, (typ, default) in known.items():
        val = getattr(ns, key)
        if val is None and key in cfg:
            try:
                val = _parse_bool(cfg[key]) if typ is bool else typ(cfg[key])
            except ValueError as exc:
                raise CliError(EXIT_INVALID, f"config value for {key}: {exc}") from exc
        opts[key] = default if val is None else val
    if opts["model"] not in ("rabi", "rabi2p"):
        raise CliError(EXIT_INVALID, f"unknown model {opts['model']!r}")
    if opts["format"] not in ("csv", "json"):
        raise CliError(EXIT_INVALID, f"unknown format {opts['format']!r}")
    return opts


def _scan_config(o: dict) -> ScanConfig:
    return ScanConfig(grid_per_unit=o["grid_per_unit"], refine_tol=o["refine_tol"], lift_tol=o["lift_tol"])


def _params(o: dict, g: Optional[float] = None):
    gv = o["g"] if g is None else g
    if gv is None:
        raise InvalidParameters("--g is required")
    return params_from(o["model"], gv, o["delta"], o["eps"])


def _window(o: dict):
    if not (math.isfinite(o["emin"]) and math.isfinite(o["emax"])) or o["emax"] <= o["emin"]:
        raise InvalidParameters("need finite --emin < --emax")
    return (o["emin"], o["emax"])


def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render(records: list[dict], fields: list[str], fmt: str, params: dict) -> str:
    if fmt == "json":
        clean = [{k: (float(r[k]) if isinstance(r[k], (float, np.floating)) else
                      bool(r[k]) if isinstance(r[k], (bool, np.bool_)) else r[k]) for k in fields} for r in records]
        return json.dumps({"version": __version__, "params": params, "records": clean}, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in records:
        w.writerow([_fmt(r[k]) for k in fields])
    return buf.getvalue()


def _emit(text: str, out: str):
    if out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {out}: {exc}") from exc


def _root_record(g: float, level: int, r) -> dict:
    return {"g": g, "sector": r.sector.value, "level": level, "energy": r.energy, "x": r.x,
            "kind": r.kind, "residual": r.residual}


# --------------------------------------------------------------------------
# subcommands


def _cmd_solve(o: dict):
    p = _params(o)
    window = _window(o)
    res = find_spectrum(p, window, _scan_config(o), o["trunc"])
    recs = [_root_record(p.g, i, r) for i, r in enumerate(res)]
    fields = list(SPECTRUM_FIELDS)
    code = EXIT_NOT_CONVERGED if res.unconverged else EXIT_OK
    if o["validate"]:
        rep = validate_roots(p, list(res), window, o["nf"] or None)
        lookup = {(row.sector, row.energy): row.energy_ed for row in rep.rows}
        for rec in recs:
            e_ed = lookup.get((rec["sector"], rec["energy"]), math.nan)
            rec["energy_ed"] = e_ed
            rec["abs_err"] = abs(rec["energy"] - e_ed) if not math.isnan(e_ed) else math.inf
        fields += ED_FIELDS
    return recs, fields, code


def _cmd_sweep(o: dict):
    if o["gstep"] <= 0 or o["gmax"] < o["gmin"]:
        raise InvalidParameters("need --gstep > 0 and --gmax >= --gmin")
    count = int(math.floor((o["gmax"] - o["gmin"]) / o["gstep"] + 1e-9)) + 1
    grid = [round(o["gmin"] + i * o["gstep"], 12) for i in range(count)]
    template = _params(o, grid[0])
    table = sweep_coupling(template, grid, _window(o), _scan_config(o), o["validate"], o["threads"], o["nf"] or None)
    fields = list(SPECTRUM_FIELDS) + (ED_FIELDS if o["validate"] else [])
    recs = [dict((k, getattr(r, k)) for k in fields) for r in table.rows if not r.error]
    code = EXIT_OK
    for r in table.failures():
        sys.stderr.write(f"g={r.g}: {r.error}\n")
        code = EXIT_NOT_CONVERGED
    return recs, fields, code


def _sector(o: dict, p) -> Sector:
    if o["sector"] is None:
        raise InvalidParameters("--sector is required for gscan")
    aliases = {s.value: s for s in Sector}
    aliases.update({"plus": Sector.ONE_PLUS, "minus": Sector.ONE_MINUS, "biased": Sector.ONE_BIASED,
                    "even-plus": Sector.EVEN_PLUS, "even-minus": Sector.EVEN_MINUS,
                    "odd-plus": Sector.ODD_PLUS, "odd-minus": Sector.ODD_MINUS})
    sec = aliases.get(o["sector"])
    if sec is None or sec not in sectors_of(p):
        raise InvalidParameters(f"sector {o['sector']!r} does not belong to this model; "
                                f"choose from {[s.value for s in sectors_of(p)]}")
    return sec


def _cmd_gscan(o: dict):
    p = _params(o)
    sec = _sector(o, p)
    if o["xmin"] is None or o["xmax"] is None:
        raise InvalidParameters("--xmin and --xmax are required for gscan")
    tr = gscan(p, sec, (o["xmin"], o["xmax"]), o["points"], _scan_config(o))
    recs = [{"x": float(x), "sign": int(s), "log2_abs_g": float(l), "converged": bool(c)}
            for x, s, l, c in zip(tr.x, tr.sign, tr.log2_abs_g, tr.converged)]
    code = EXIT_OK if bool(np.all(tr.converged)) else EXIT_NOT_CONVERGED
    return recs, list(GSCAN_FIELDS), code


def _cmd_validate(o: dict):
    p = _params(o)
    window = _window(o)
    res = find_spectrum(p, window, _scan_config(o), o["trunc"])
    rep = validate_roots(p, list(res), window, o["nf"] or None)
    lookup = {(row.sector, row.energy): row.energy_ed for row in rep.rows}
    n_f = o["nf"] or None
    recs = []
    worst_state = 0.0
    for i, r in enumerate(res):
        rec = _root_record(p.g, i, r)
        e_ed = lookup.get((r.sector.value, r.energy), math.nan)
        rec["energy_ed"] = e_ed
        rec["abs_err"] = abs(r.energy - e_ed) if not math.isnan(e_ed) else math.inf
        rec["state_residual"] = rec["defect"] = math.nan
        if o["states"] and r.kind == "regular":
            res_n, dfc = state_checks(p, r, n_f or (400 if isinstance(p, TwoPhotonParams) else 300))
            rec["state_residual"], rec["defect"] = res_n, dfc
            worst_state = max(worst_state, res_n)
        recs.append(rec)
    for e in rep.missing_ed:
        sys.stderr.write(f"ED level {e:.12g} has no G-function root\n")
    fields = SPECTRUM_FIELDS + ED_FIELDS + STATE_FIELDS
    max_err = max((rec["abs_err"] for rec in recs), default=0.0)
    sys.stderr.write(f"levels={len(recs)} max_abs_err={max_err:.3e} max_state_residual={worst_state:.3e} "
                     f"missing={len(rep.missing_ed)}\n")
    code = EXIT_OK
    if max_err > o["tol"] or rep.missing_ed or worst_state > o["tol"]:
        code = EXIT_TOLERANCE
    if res.unconverged:
        code = EXIT_NOT_CONVERGED
    return recs, fields, code


def _cmd_exceptional(o: dict):
    p = _params(o)
    if o["nmax"] < o["nmin"]:
        raise InvalidParameters("need --nmax >= --nmin")
    roots = find_exceptional(p, range(max(o["nmin"], 0), o["nmax"] + 1), _scan_config(o))
    recs = [_root_record(p.g, i, r) for i, r in enumerate(roots)]
    return recs, list(SPECTRUM_FIELDS), EXIT_OK


COMMANDS = {
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "gscan": _cmd_gscan,
    "validate": _cmd_validate,
    "exceptional": _cmd_exceptional,
}


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    ap = _parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        o = _resolve(ns)
        if o["model"] == "rabi2p" and o["eps"] != 0.0:
            raise InvalidParameters("--eps is not supported for rabi2p")
        if o["threads"] < 1:
            raise InvalidParameters("--threads must be >= 1")
        recs, fields, code = COMMANDS[ns.command](o)
        params = {k: v for k, v in o.items() if k not in ("out", "format", "threads")}
        _emit(render(recs, fields, o["format"], params), o["out"])
        return code
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except (InvalidParameters, WindowEmpty) as exc:
        sys.stderr.write(f"invalid parameters: {exc}\n")
        return EXIT_INVALID
    except (NotConverged, NoConvergence) as exc:
        sys.stderr.write(f"not converged: {exc}\n")
        return EXIT_NOT_CONVERGED
    except RabiError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_NOT_CONVERGED


def main() -> None:
    sys.exit(run_command())
