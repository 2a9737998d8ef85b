"""G-functions and F(alpha), evaluated on whole grids of x at once.

Overall positive constants (the e^{-g^2/2} vacuum factor, g^{-M} in F) are
dropped; only signs and zeros matter. Every value is returned as an
ExtendedReal so two-photon sums with factorial-sized overlaps stay finite.

A :class:`Branch` bundles one G-function with its poles and its x -> E map;
the root finder only talks to branches.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chains import (
    M_FALPHA,
    N_ONE_PHOTON,
    falpha_terms,
    one_photon_terms,
    two_photon_terms,
)
from .errors import InvalidParameters
from .model import (
    OnePhotonParams,
    Params,
    Sector,
    TwoPhotonParams,
    derive_squeeze_frame,
    sectors_of,
    two_photon_pole_energy,
    two_photon_sector,
    x_to_energy,
)
from .xreal import ExtendedReal

# Ceiling for adaptive two-photon chains; near g = 1/2 the series ratio
# approaches 1 and several hundred terms are needed.
N_TWO_PHOTON_CEILING = 1600


@dataclass(frozen=True)
class GValue:
    """G at one or many x. Array fields share the shape of the input x."""

    value: ExtendedReal
    converged: np.ndarray
    nearest_pole_distance: np.ndarray
    n_used: np.ndarray

    def to_float(self) -> np.ndarray:
        return self.value.to_float()

    def sign(self) -> np.ndarray:
        return self.value.sign()

    def log2abs(self) -> np.ndarray:
        return self.value.log2abs()


@dataclass(frozen=True)
class PoleSet:
    positions: np.ndarray
    tags: tuple[str, ...]

    def __len__(self):
        return len(self.positions)


def _pack(value: ExtendedReal, conv, dist, n_used, scalar: bool) -> GValue:
    if scalar:
        return GValue(value[0], conv[0], dist[0], n_used[0])
    return GValue(value, conv, dist, n_used)


def _distance(x: np.ndarray, poles: np.ndarray) -> np.ndarray:
    if poles.size == 0:
        return np.full(x.shape, np.inf)
    return np.min(np.abs(x[:, None] - poles[None, :]), axis=1)


def _parity_sign(parity) -> int:
    if isinstance(parity, Sector):
        return parity.sign
    table = {"plus": 1, "+": 1, 1: 1, "minus": -1, "-": -1, -1: -1}
    if parity not in table:
        raise InvalidParameters(f"parity must be plus or minus, got {parity!r}")
    return table[parity]


# --------------------------------------------------------------------------
# one-photon


def eval_g0(p: OnePhotonParams, x, parity, N: int = N_ONE_PHOTON) -> GValue:
    """G0^{+-}(x) = sum_n t_n (1 -+ (delta/2)/(x - n)) for the unbiased model."""
    if p.eps != 0.0:
        raise InvalidParameters("eval_g0 needs eps = 0; use eval_g_biased")
    sign = _parity_sign(parity)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    t, n_used, conv = one_photon_terms(p.g, p.delta, 0.0, xs, N)
    n = np.arange(t.shape[0])[:, None]
    g = np.sum(t * (1.0 - sign * (p.delta / 2) / (xs[None, :] - n)), axis=0)
    dist = _distance(xs, np.arange(t.shape[0], dtype=float))
    return _pack(ExtendedReal.from_float(g), conv, dist, n_used, np.ndim(x) == 0)


def _biased_parts(p: OnePhotonParams, xs: np.ndarray, N: int):
    half = p.eps / 2
    out = []
    for shift in (-half, half):  # B-frame (K+) then A-frame (K-)
        t, n_used, conv = one_photon_terms(p.g, p.delta, shift, xs, N)
        n = np.arange(t.shape[0])[:, None]
        r = t.sum(axis=0)
        rbar = np.sum(t / (xs[None, :] - n + shift), axis=0)
        out.append((r, rbar, n_used, conv))
    return out


def eval_g_biased(p: OnePhotonParams, x, N: int = N_ONE_PHOTON) -> GValue:
    """G_eps(x) = (delta/2)^2 Rbar+ Rbar- - R+ R-.

    R- and Rbar- come from the A-frame chain (poles x = n - eps/2), R+ and
    Rbar+ from the B-frame chain (poles x = n + eps/2).
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    (rp, rbp, np_, cp), (rm, rbm, nm, cm) = _biased_parts(p, xs, N)
    g = (p.delta / 2) ** 2 * rbp * rbm - rp * rm
    n = np.arange(N + 1, dtype=float)
    dist = _distance(xs, np.concatenate([n - p.eps / 2, n + p.eps / 2]))
    return _pack(ExtendedReal.from_float(g), cp & cm, dist, np.maximum(np_, nm), np.ndim(x) == 0)


# --------------------------------------------------------------------------
# two-photon


def eval_g2p(p: TwoPhotonParams, x, start, parity, N: int = N_TWO_PHOTON_CEILING) -> GValue:
    """G_{e,o}^{+-}(x) = sum_n f_n [1 +- delta (u^2+v^2) / (2 (n - x))] L_n.

    ``start`` is 0/"even" or 1/"odd"; only indices of that parity enter.
    """
    s0 = {"even": 0, "odd": 1, 0: 0, 1: 1}[start]
    sign = _parity_sign(parity)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    b = derive_squeeze_frame(p).beta2
    idx, _, s, n_used, conv = two_photon_terms(p, xs, s0, N)
    bracket = 1.0 + sign * p.delta * b / (2.0 * (idx[:, None] - xs[None, :]))
    g = (s * bracket).sum(axis=0)
    dist = _distance(xs, idx.astype(float))
    return _pack(g, conv, dist, n_used, np.ndim(x) == 0)


# --------------------------------------------------------------------------
# F(alpha)


def eval_falpha(p: OnePhotonParams, alpha_disp, parity, M: int = M_FALPHA) -> GValue:
    """g^M F(alpha) = sum_j (2 alpha g)^j / j! d_{M-j}, with d_m = c_m g^m.

    A zero at alpha maps to the energy alpha g - delta/2 (plus) or
    alpha g + delta/2 (minus). F has no poles.
    """
    if p.eps != 0.0:
        raise InvalidParameters("the F(alpha) route covers the unbiased model only")
    if M < 0:
        raise InvalidParameters("M must be >= 0")
    sign = _parity_sign(parity)
    a = np.atleast_1d(np.asarray(alpha_disp, dtype=float))
    d, P = falpha_terms(p, a, sign, M)
    f = np.sum(P * d[::-1], axis=0)
    ones = np.ones(a.shape, dtype=bool)
    return _pack(ExtendedReal.from_float(f), ones, np.full(a.shape, np.inf),
                 np.full(a.shape, M), np.ndim(alpha_disp) == 0)


# --------------------------------------------------------------------------
# poles and branches


def pole_locations(p: Params, x_window, sector: Optional[Sector] = None) -> PoleSet:
    """Poles of the model's G-function(s) inside the closed x-window."""
    lo, hi = map(float, x_window)
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise InvalidParameters("window must be finite")
    lo, hi = min(lo, hi), max(lo, hi)
    pos: list[float] = []
    tags: list[str] = []

    def add(family: np.ndarray, tag: str):
        for v in family[(family >= lo) & (family <= hi)]:
            pos.append(float(v))
            tags.append(tag)

    top = max(int(np.ceil(hi + abs(p.eps))) + 1, 0)
    n = np.arange(0, top + 1, dtype=float)
    if isinstance(p, TwoPhotonParams):
        if sector is None:
            add(n, "x-n")
        else:
            add(n[(n.astype(int) % 2) == sector.start], "x-n")
    elif p.biased:
        add(n + p.eps / 2, "x-n-eps/2")
        add(n - p.eps / 2, "x-n+eps/2")
    else:
        add(n, "x-n")
    order = np.argsort(pos, kind="stable")
    merged_pos: list[float] = []
    merged_tags: list[str] = []
    for i in order:
        if merged_pos and pos[i] == merged_pos[-1]:
            merged_tags[-1] = merged_tags[-1] + "|" + tags[i]
        else:
            merged_pos.append(pos[i])
            merged_tags.append(tags[i])
    return PoleSet(np.array(merged_pos), tuple(merged_tags))


@dataclass(frozen=True)
class Branch:
    """One G-function: evaluation, poles and conversion to energy."""

    params: Params
    sector: Sector
    n_max: int = 0
    variable: str = field(default="x")

    def evaluate(self, x) -> GValue:
        p, s = self.params, self.sector
        if s in (Sector.ONE_PLUS, Sector.ONE_MINUS):
            return eval_g0(p, x, s, self.n_max or N_ONE_PHOTON)
        if s is Sector.ONE_BIASED:
            return eval_g_biased(p, x, self.n_max or N_ONE_PHOTON)
        if s in (Sector.FALPHA_PLUS, Sector.FALPHA_MINUS):
            return eval_falpha(p, x, s, self.n_max or M_FALPHA)
        return eval_g2p(p, x, s.start, s, self.n_max or N_TWO_PHOTON_CEILING)

    def poles(self, lo: float, hi: float) -> np.ndarray:
        if self.sector in (Sector.FALPHA_PLUS, Sector.FALPHA_MINUS):
            return np.empty(0)
        sec = self.sector if isinstance(self.params, TwoPhotonParams) else None
        return pole_locations(self.params, (lo, hi), sec).positions

    def to_energy(self, x):
        if self.sector in (Sector.FALPHA_PLUS, Sector.FALPHA_MINUS):
            return np.asarray(x) * self.params.g - self.sector.sign * self.params.delta / 2
        return x_to_energy(self.params, x)

    def pole_energy(self, n):
        if isinstance(self.params, TwoPhotonParams):
            return two_photon_pole_energy(self.params.g, n)
        return x_to_energy(self.params, n)


def branches_for(p: Params, n_max: int = 0) -> tuple[Branch, ...]:
    return tuple(Branch(p, s, n_max) for s in sectors_of(p))


def falpha_branches(p: OnePhotonParams, M: int = M_FALPHA) -> tuple[Branch, ...]:
    return (Branch(p, Sector.FALPHA_PLUS, M, "alpha"), Branch(p, Sector.FALPHA_MINUS, M, "alpha"))


__all__ = [
    "GValue",
    "PoleSet",
    "Branch",
    "eval_g0",
    "eval_g_biased",
    "eval_g2p",
    "eval_falpha",
    "pole_locations",
    "branches_for",
    "falpha_branches",
    "two_photon_sector",
]
