"""Energy-versus-coupling tables and G-function traces for plotting."""
from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameters, RabiError, WindowEmpty
from .gfunc import Branch
from .model import Params, Sector, TwoPhotonParams
from .oracle import validate_roots
from .roots import ScanConfig, find_spectrum


@dataclass(frozen=True)
class SpectrumRow:
    g: float
    sector: str
    level: int
    energy: float
    x: float
    kind: str
    residual: float
    energy_ed: float = math.nan
    abs_err: float = math.nan
    error: str = ""


@dataclass
class SpectrumTable:
    """Long-format spectrum: one row per level per coupling, sorted by (g, energy)."""

    rows: list[SpectrumRow] = field(default_factory=list)
    validated: bool = False

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def couplings(self) -> np.ndarray:
        return np.unique([r.g for r in self.rows])

    def at(self, g: float) -> list[SpectrumRow]:
        return [r for r in self.rows if r.g == g and not r.error]

    def counts(self) -> dict[float, int]:
        out: dict[float, int] = {}
        for r in self.rows:
            if not r.error:
                out[r.g] = out.get(r.g, 0) + 1
        return out

    def failures(self) -> list[SpectrumRow]:
        return [r for r in self.rows if r.error]

    def max_abs_err(self) -> float:
        vals = [r.abs_err for r in self.rows if not r.error]
        return max(vals, default=0.0)


def _with_coupling(p: Params, g: float) -> Params:
    return dataclasses.replace(p, g=float(g))


def _point(p: Params, window, cfg: ScanConfig, validate: bool, n_f: Optional[int]) -> list[SpectrumRow]:
    g = p.g
    try:
        roots = list(find_spectrum(p, window, cfg))
        ed: dict[tuple[str, float], float] = {}
        missing: list[float] = []
        if validate:
            rep = validate_roots(p, roots, window, n_f)
            for row in rep.rows:
                ed[(row.sector, row.energy)] = row.energy_ed
            missing = rep.missing_ed
        out = []
        for i, r in enumerate(roots):
            e_ed = ed.get((r.sector.value, r.energy), math.nan)
            err, note = math.nan, ""
            if validate:
                err = abs(r.energy - e_ed) if not math.isnan(e_ed) else math.inf
                note = "" if not math.isnan(e_ed) else "no ED partner"
            out.append(SpectrumRow(g, r.sector.value, i, r.energy, r.x, r.kind, r.residual, e_ed, err, note))
        for e in missing:
            out.append(SpectrumRow(g, "", -1, e, math.nan, "missing", math.nan, e, math.inf,
                                   "ED level without a G-function root"))
        return out
    except RabiError as exc:
        return [SpectrumRow(g, "", -1, math.nan, math.nan, "failed", math.nan, error=f"{type(exc).__name__}: {exc}")]


def sweep_coupling(p_template: Params, g_grid: Sequence[float], energy_window, cfg: ScanConfig = ScanConfig(),
                   validate: bool = False, threads: int = 1, n_f: Optional[int] = None) -> SpectrumTable:
    """find_spectrum at every coupling; a failed point is recorded, never fatal."""
    gs = [float(g) for g in g_grid]
    if isinstance(p_template, TwoPhotonParams) and gs and max(gs) >= 0.5:
        raise InvalidParameters("two-photon sweeps need g < 1/2")
    params = [_with_coupling(p_template, g) for g in gs]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda q: _point(q, energy_window, cfg, validate, n_f), params))
    else:
        chunks = [_point(q, energy_window, cfg, validate, n_f) for q in params]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r.g, math.inf if math.isnan(r.energy) else r.energy, r.sector, r.level))
    return SpectrumTable(rows, validated=validate)


@dataclass(frozen=True)
class GScanTrace:
    x: np.ndarray
    sign: np.ndarray
    log2_abs_g: np.ndarray
    converged: np.ndarray
    gaps: tuple[float, ...]

    def __len__(self):
        return self.x.size

    def sign_changes(self) -> list[tuple[float, float]]:
        """Adjacent grid pairs with opposite sign and no pole gap between them."""
        out = []
        for i in range(self.x.size - 1):
            a, b = self.x[i], self.x[i + 1]
            if self.sign[i] * self.sign[i + 1] < 0 and not any(a < p < b for p in self.gaps):
                out.append((float(a), float(b)))
        return out


def gscan(p: Params, sector: Sector, x_window, points: int, cfg: ScanConfig = ScanConfig()) -> GScanTrace:
    """Uniform trace of one G-branch with pole neighbourhoods cut out."""
    lo, hi = map(float, x_window)
    if points < 2:
        raise InvalidParameters("gscan needs at least 2 points")
    if not hi > lo:
        raise WindowEmpty(f"empty window ({lo}, {hi})")
    br = Branch(p, sector)
    poles = br.poles(lo, hi)
    x = np.linspace(lo, hi, points)
    if poles.size:
        keep = np.min(np.abs(x[:, None] - poles[None, :]), axis=1) > cfg.pole_exclusion
        x = x[keep]
    gv = br.evaluate(x)
    return GScanTrace(x, gv.sign(), gv.log2abs(), np.asarray(gv.converged), tuple(float(v) for v in poles))


__all__ = ["SpectrumRow", "SpectrumTable", "GScanTrace", "sweep_coupling", "gscan"]
