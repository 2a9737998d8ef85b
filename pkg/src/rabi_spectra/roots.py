"""Pole-aware zero finding on G-branches, exceptional roots and full spectra.

The scan splits a window into pole-free intervals, samples every interval on
one vectorized grid, brackets sign changes and bisects all brackets in
lockstep. Pairs of zeros closer than the grid spacing show up as local minima
of |G| without a sign change; those are zoomed into until they split or are
classified as tangent suspects.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .chains import one_photon_terms, two_photon_terms
from .errors import InvalidParameters, WindowEmpty
from .gfunc import Branch, branches_for, falpha_branches
from .model import (
    OnePhotonParams,
    Params,
    Sector,
    TwoPhotonParams,
    energy_to_x,
    sectors_of,
    two_photon_pole_energy,
    two_photon_sector,
    x_to_energy,
)

ZOOM_POINTS = 33
ZOOM_LEVELS = 8
TANGENT_RTOL = 1e-10


@dataclass(frozen=True)
class ScanConfig:
    grid_per_unit: int = 200
    refine_tol: float = 1e-12
    dedup_tol: float = 1e-9
    pole_exclusion: float = 1e-6
    lift_tol: float = 1e-8
    max_bisect: int = 50

    def __post_init__(self):
        for name in ("grid_per_unit", "refine_tol", "dedup_tol", "pole_exclusion", "lift_tol", "max_bisect"):
            if not getattr(self, name) > 0:
                raise InvalidParameters(f"{name} must be positive")
        if self.pole_exclusion <= self.refine_tol:
            raise InvalidParameters("pole_exclusion must exceed refine_tol")


@dataclass(frozen=True)
class Root:
    x: float
    energy: float
    sector: Sector
    residual: float
    kind: str = "regular"
    bracket: tuple[float, float] = (math.nan, math.nan)


@dataclass(frozen=True)
class Suspect:
    """Near-tangent |G| minimum that never changed sign."""

    x: float
    energy: float
    sector: Sector
    ratio: float


@dataclass
class ScanResult(Sequence):
    """Roots plus diagnostics. Behaves as the sequence of roots."""

    roots: list[Root] = field(default_factory=list)
    suspects: list[Suspect] = field(default_factory=list)
    unconverged: list[float] = field(default_factory=list)

    def __getitem__(self, i):
        return self.roots[i]

    def __len__(self):
        return len(self.roots)

    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.roots])

    def extend(self, other: "ScanResult"):
        self.roots.extend(other.roots)
        self.suspects.extend(other.suspects)
        self.unconverged.extend(other.unconverged)


# --------------------------------------------------------------------------
# regular zeros


def _intervals(branch: Branch, lo: float, hi: float, excl: float):
    poles = branch.poles(lo - 1.0, hi + 1.0)
    cuts = [lo]
    for p in poles:
        if lo - excl < p < hi + excl:
            cuts.extend([p - excl, p + excl])
    cuts.append(hi)
    pairs = [(cuts[i], cuts[i + 1]) for i in range(0, len(cuts), 2)]
    return [(a, b) for a, b in pairs if b > a]


def _log_abs(gv) -> np.ndarray:
    return gv.log2abs()


def _bisect(branch: Branch, a: np.ndarray, b: np.ndarray, sa: np.ndarray, cfg: ScanConfig):
    """Bisect all brackets together; returns the final (a, b)."""
    a = a.copy()
    b = b.copy()
    for _ in range(cfg.max_bisect):
        if np.all(b - a <= cfg.refine_tol):
            break
        m = 0.5 * (a + b)
        sm = branch.evaluate(m).sign()
        hit = sm == 0
        a = np.where((sm == sa) | hit, m, a)
        b = np.where((sm != sa) | hit, m, b)
    return a, b


def _zoom(branch: Branch, centres_lo: np.ndarray, centres_hi: np.ndarray, scale_log: np.ndarray):
    """Zoom into |G| minima until they split into brackets or run out of levels.

    Returns ``(brackets, suspects)``: brackets as (lo, hi, sign at lo), suspects
    as (x, log2 of |G| relative to the surrounding scale).
    """
    lo = centres_lo.copy()
    hi = centres_hi.copy()
    active = np.ones(lo.size, dtype=bool)
    brackets: list[tuple[float, float, float]] = []
    suspects: list[tuple[float, float]] = []
    t = np.linspace(0.0, 1.0, ZOOM_POINTS)
    for _level in range(ZOOM_LEVELS):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xs = lo[idx, None] + (hi[idx] - lo[idx])[:, None] * t[None, :]
        gv = branch.evaluate(xs.ravel())
        sg = gv.sign().reshape(xs.shape)
        lg = _log_abs(gv).reshape(xs.shape)
        for row, k in enumerate(idx):
            s = sg[row]
            change = np.flatnonzero(s[:-1] * s[1:] <= 0)
            if change.size:
                for c in change:
                    brackets.append((xs[row, c], xs[row, c + 1], s[c]))
                active[k] = False
                continue
            j = int(np.argmin(lg[row]))
            if j == 0 or j == ZOOM_POINTS - 1:
                active[k] = False  # monotone: no hidden pair
                continue
            lo[k], hi[k] = xs[row, j - 1], xs[row, j + 1]
        if _level == ZOOM_LEVELS - 1:
            for row, k in enumerate(idx):
                if active[k]:
                    j = int(np.argmin(lg[row]))
                    suspects.append((xs[row, j], lg[row, j] - scale_log[k]))
    return brackets, suspects


def find_zeros(branch: Branch, window, cfg: ScanConfig = ScanConfig()) -> ScanResult:
    """All sign-change zeros of ``branch`` in the x-window (alpha for F)."""
    lo, hi = map(float, window)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise InvalidParameters("window must be finite")
    if not hi > lo:
        raise WindowEmpty(f"empty window ({lo}, {hi})")
    result = ScanResult()
    ivals = _intervals(branch, lo, hi, cfg.pole_exclusion)
    if not ivals:
        return result
    grids = [np.linspace(a, b, max(int(math.ceil((b - a) * cfg.grid_per_unit)), 2) + 1) for a, b in ivals]
    allx = np.concatenate(grids)
    gv = branch.evaluate(allx)
    sg_all = gv.sign()
    lg_all = _log_abs(gv)
    conv_all = np.asarray(gv.converged)
    result.unconverged.extend(allx[~conv_all].tolist())

    br_a: list[float] = []
    br_b: list[float] = []
    br_s: list[float] = []
    br_scale: list[float] = []
    z_lo: list[float] = []
    z_hi: list[float] = []
    z_scale: list[float] = []
    exact: list[float] = []
    off = 0
    for xs in grids:
        k = xs.size
        s = sg_all[off:off + k]
        lg = lg_all[off:off + k]
        off += k
        exact.extend(xs[s == 0].tolist())
        change = np.flatnonzero(s[:-1] * s[1:] < 0)
        for c in change:
            br_a.append(xs[c])
            br_b.append(xs[c + 1])
            br_s.append(s[c])
            br_scale.append(max(lg[c], lg[c + 1]))
        if k >= 3:
            inner = np.arange(1, k - 1)
            is_min = (lg[inner] < lg[inner - 1]) & (lg[inner] < lg[inner + 1])
            same = (s[inner - 1] == s[inner]) & (s[inner] == s[inner + 1]) & (s[inner] != 0)
            for i in inner[is_min & same]:
                z_lo.append(xs[i - 1])
                z_hi.append(xs[i + 1])
                z_scale.append(max(lg[i - 1], lg[i + 1]))

    if z_lo:
        zb, zs = _zoom(branch, np.array(z_lo), np.array(z_hi), np.array(z_scale))
        for a, b, s in zb:
            if s == 0:
                exact.append(a)
                continue
            br_a.append(a)
            br_b.append(b)
            br_s.append(s)
            gab = branch.evaluate(np.array([a, b]))
            br_scale.append(float(np.max(_log_abs(gab))))
        for x, rel_log in zs:
            if rel_log < math.log2(TANGENT_RTOL):
                result.suspects.append(Suspect(float(x), float(branch.to_energy(x)), branch.sector, float(2.0 ** rel_log)))

    found: list[tuple[float, float, float, float]] = [(x, 0.0, x, x) for x in exact]
    if br_a:
        a0 = np.array(br_a)
        b0 = np.array(br_b)
        a, b = _bisect(branch, a0, b0, np.array(br_s), cfg)
        xm = 0.5 * (a + b)
        gm = _log_abs(branch.evaluate(xm))
        res = np.exp2(np.minimum(gm - np.array(br_scale), 0.0))
        found.extend(zip(xm.tolist(), res.tolist(), a.tolist(), b.tolist()))
    found.sort()
    for x, res, a, b in found:
        if result.roots and abs(x - result.roots[-1].x) <= cfg.dedup_tol:
            continue
        result.roots.append(Root(x=float(x), energy=float(branch.to_energy(x)), sector=branch.sector,
                                 residual=float(res), kind="regular", bracket=(float(a), float(b))))
    return result


# --------------------------------------------------------------------------
# exceptional roots


def _lift_ratio_one_photon(p: OnePhotonParams, n: int) -> float:
    t, _, _ = one_photon_terms(p.g, p.delta, 0.0, [float(n)], stop=n, adaptive=False)
    a = np.abs(t[:, 0])
    return float(a[n] / np.max(a[:n]))


def _lift_ratio_two_photon(p: TwoPhotonParams, n: int) -> float:
    idx, _, s, _, _ = two_photon_terms(p, [float(n)], n % 2, stop=n, adaptive=False)
    lg = s.log2abs()[:, 0]
    return float(np.exp2(lg[-1] - np.max(lg[:-1])))


def lift_ratio(p: Params, n: int) -> float:
    """|s_n(x=n)| / max_{k<n} |s_k(x=n)| for the chain that owns pole n.

    s_k are the series terms (t_k one-photon, f_k L_k two-photon); a ratio
    of zero means the pole is lifted and x = n is an eigenvalue.
    """
    if p.delta == 0.0:
        return 0.0
    if n < 2 if isinstance(p, TwoPhotonParams) else n < 1:
        return math.inf
    if isinstance(p, TwoPhotonParams):
        return _lift_ratio_two_photon(p, n)
    if p.biased:
        raise InvalidParameters("exceptional roots of the biased model are only supported at delta = 0")
    return _lift_ratio_one_photon(p, n)


def find_exceptional(p: Params, n_range: Iterable[int], cfg: ScanConfig = ScanConfig(),
                     sectors: Optional[Iterable[Sector]] = None) -> list[Root]:
    """Eigenvalues sitting exactly on poles (f_n(x=n) = 0), one per sector.

    A lifted pole is a crossing between the plus and minus branch that share
    the chain, so each hit is reported in both sectors.
    """
    wanted = set(sectors) if sectors is not None else set(sectors_of(p))
    out: list[Root] = []
    for n in n_range:
        n = int(n)
        if n < 0:
            continue
        if isinstance(p, OnePhotonParams) and p.biased:
            if p.delta != 0.0:
                raise InvalidParameters("exceptional roots of the biased model are only supported at delta = 0")
            for x in (n - p.eps / 2, n + p.eps / 2):
                out.append(Root(x=x, energy=float(x_to_energy(p, x)), sector=Sector.ONE_BIASED,
                                residual=0.0, kind="exceptional", bracket=(x, x)))
            continue
        ratio = lift_ratio(p, n)
        if not ratio < cfg.lift_tol:
            continue
        if isinstance(p, TwoPhotonParams):
            energy = float(two_photon_pole_energy(p.g, n))
            secs = [two_photon_sector(n % 2, 1), two_photon_sector(n % 2, -1)]
        else:
            energy = float(x_to_energy(p, n))
            secs = [Sector.ONE_PLUS, Sector.ONE_MINUS]
        for s in secs:
            if s in wanted:
                out.append(Root(x=float(n), energy=energy, sector=s, residual=ratio,
                                kind="exceptional", bracket=(float(n), float(n))))
    out.sort(key=lambda r: (r.energy, r.sector.value))
    return out


def exceptional_couplings(delta: float, n: int, g_grid: Sequence[float], tol: float = 1e-12) -> list[float]:
    """Two-photon couplings where pole n is lifted (sign change of f_n(x=n) in g).

    Scans the signed series term f_n(n) L_n over ``g_grid`` and bisects every
    sign change down to ``tol``.
    """

    def signed(g: float) -> float:
        p = TwoPhotonParams(g, delta)
        _, f, _, _, _ = two_photon_terms(p, [float(n)], n % 2, stop=n, adaptive=False, overlaps=False)
        return float(f.sign()[-1, 0])

    gs = np.asarray(g_grid, dtype=float)
    sig = np.array([signed(g) for g in gs])
    out = []
    for i in np.flatnonzero(sig[:-1] * sig[1:] < 0):
        a, b, sa = gs[i], gs[i + 1], sig[i]
        while b - a > tol:
            m = 0.5 * (a + b)
            sm = signed(m)
            if sm == 0:
                a = b = m
                break
            if sm == sa:
                a = m
            else:
                b = m
        out.append(0.5 * (a + b))
    return out


# --------------------------------------------------------------------------
# full spectrum


def _analytic_zero_coupling(p: Params, e_lo: float, e_hi: float) -> ScanResult:
    """g = 0: levels n - s delta/2 (s = +-1), labelled by the sector they belong to."""
    res = ScanResult()
    top = int(math.ceil(e_hi + abs(p.delta))) + 1
    for n in range(max(top, 0) + 1):
        for s in (1, -1):
            e = n - s * p.delta / 2
            if not e_lo <= e <= e_hi:
                continue
            if isinstance(p, TwoPhotonParams):
                parity = s * (-1) ** (n // 2)
                sec = two_photon_sector(n % 2, -parity)
            elif p.biased:
                continue
            else:
                sec = Sector.ONE_MINUS if s * (-1) ** n > 0 else Sector.ONE_PLUS
            res.roots.append(Root(x=float(energy_to_x(p, e)), energy=e, sector=sec, residual=0.0,
                                  kind="regular", bracket=(e, e)))
    return res


def _biased_zero_coupling(p: OnePhotonParams, e_lo: float, e_hi: float) -> ScanResult:
    # uncoupled qubit with bias: -(eps sz + delta sx)/2 has levels -+ sqrt(eps^2 + delta^2)/2
    res = ScanResult()
    w = math.hypot(p.eps, p.delta) / 2
    top = int(math.ceil(e_hi + w)) + 1
    for n in range(max(top, 0) + 1):
        for e in (n - w, n + w):
            if e_lo <= e <= e_hi:
                res.roots.append(Root(x=e, energy=e, sector=Sector.ONE_BIASED, residual=0.0,
                                      kind="regular", bracket=(e, e)))
    return res


def _sort_key(r: Root):
    return (r.energy, r.sector.value, r.kind)


def find_spectrum(p: Params, energy_window, cfg: ScanConfig = ScanConfig(), n_max: int = 0) -> ScanResult:
    """Every eigenvalue in the energy window, merged over sectors and sorted."""
    e_lo, e_hi = map(float, energy_window)
    if not (math.isfinite(e_lo) and math.isfinite(e_hi)):
        raise InvalidParameters("energy window must be finite")
    if not e_hi > e_lo:
        raise WindowEmpty(f"empty energy window ({e_lo}, {e_hi})")
    if p.g == 0.0:
        out = _biased_zero_coupling(p, e_lo, e_hi) if isinstance(p, OnePhotonParams) and p.biased \
            else _analytic_zero_coupling(p, e_lo, e_hi)
        out.roots.sort(key=_sort_key)
        return out
    x_lo, x_hi = (float(v) for v in energy_to_x(p, np.array([e_lo, e_hi])))
    out = ScanResult()
    for br in branches_for(p, n_max):
        out.extend(find_zeros(br, (x_lo, x_hi), cfg))
    exc_ok = not (isinstance(p, OnePhotonParams) and p.biased and p.delta != 0.0)
    if exc_ok:
        lo_n = max(int(math.floor(x_lo - abs(p.eps))), 0)
        hi_n = int(math.ceil(x_hi + abs(p.eps)))
        for r in find_exceptional(p, range(lo_n, hi_n + 1), cfg):
            if e_lo <= r.energy <= e_hi:
                out.roots.append(r)
    out.roots.sort(key=_sort_key)
    return out


# --------------------------------------------------------------------------
# F(alpha) route


def falpha_spectrum(p: OnePhotonParams, energy_window, cfg: ScanConfig = ScanConfig(), M: int = 80,
                    stability_tol: float = 1e-7) -> ScanResult:
    """Energies from zeros of F(alpha), E = alpha g -+ delta/2.

    Truncating F at order M adds spurious zeros that drift as M changes; only
    zeros that reappear at order 3M/2 (within ``stability_tol`` in energy)
    are kept.
    """
    if p.g == 0.0:
        raise InvalidParameters("the F(alpha) route needs g > 0")
    e_lo, e_hi = map(float, energy_window)
    if not e_hi > e_lo:
        raise WindowEmpty(f"empty energy window ({e_lo}, {e_hi})")
    out = ScanResult()
    for br, br2 in zip(falpha_branches(p, M), falpha_branches(p, M + M // 2)):
        shift = br.sector.sign * p.delta / 2
        window = ((e_lo + shift) / p.g, (e_hi + shift) / p.g)
        first = find_zeros(br, window, cfg)
        second = find_zeros(br2, window, cfg).energies()
        for r in first:
            if second.size and np.min(np.abs(second - r.energy)) <= stability_tol:
                out.roots.append(r)
    out.roots.sort(key=_sort_key)
    return out


__all__ = [
    "ScanConfig",
    "Root",
    "Suspect",
    "ScanResult",
    "find_zeros",
    "find_exceptional",
    "exceptional_couplings",
    "lift_ratio",
    "find_spectrum",
    "falpha_spectrum",
]
