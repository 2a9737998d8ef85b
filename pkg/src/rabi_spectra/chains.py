"""Recurrence-defined coefficient sequences behind every G-function.

One-photon chains are run directly in the g-absorbed variable t_n = f_n g^n,
whose recurrence

    m t_m = g Omega(m-1) t_{m-1} - g^2 t_{m-2},
    g Omega(m) = [(m + beta - E) - delta^2 / (4 (m - alpha - E))] / 2,

has O(1) terms and no 1/g. Two-photon chains keep the raw f_n and the
squeezed-vacuum overlaps L_n separately, both in extended range, because f_n
shrinks like 1/k! while L_n grows like (2k)!/k!.

The ``*_terms`` functions are the vectorized workhorses (one column per x);
the public ``*_chain`` functions wrap a single x into a CoefficientChain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import InvalidParameters, PoleTooClose, ZeroCoupling
from .model import (
    OnePhotonParams,
    Sector,
    SqueezeFrame,
    TwoPhotonParams,
    derive_one_photon_constants,
    derive_squeeze_frame,
    energy_to_x,
)
from .xreal import ExtendedReal

POLE_GUARD = 1e-12
TAIL_RTOL = 1e-14
TAIL_RUN = 5
MIN_TERMS = 60
N_ONE_PHOTON = 200
N_TWO_PHOTON = 400
M_FALPHA = 80

_LOG2_TAIL = math.log2(TAIL_RTOL)


@dataclass(frozen=True)
class CoefficientChain:
    """Coefficients f_n (or t_n, c_m, L_n) for index n = 0..len-1 at one x.

    When ``scaled`` is true the stored terms carry a factor ``scale**n``
    (t_n = f_n g^n); :meth:`coefficients` strips it.
    """

    terms: ExtendedReal
    scaled: bool
    x: float
    converged: bool
    n_used: int
    frame: str
    sector: Optional[Sector] = None
    scale: float = 1.0

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, n) -> ExtendedReal:
        return self.terms[n]

    def values(self) -> np.ndarray:
        """Stored terms as plain floats."""
        return self.terms.to_float()

    def coefficients(self) -> ExtendedReal:
        """Unscaled coefficients (divides out scale**n in extended range)."""
        if not self.scaled or self.scale == 1.0:
            return self.terms
        n = np.arange(len(self.terms))
        if self.scale == 0.0:
            raise ZeroCoupling("cannot unscale a chain built at g = 0")
        # scale**n built from its log2 so it never overflows
        total = n * math.log2(self.scale)
        exp = np.floor(total).astype(np.int64)
        powers = ExtendedReal(np.exp2(total - exp), exp)
        return self.terms / powers


class TailTracker:
    """Per-point relative tail test on series terms given as log2 magnitudes.

    A point is done once TAIL_RUN consecutive terms sit below
    TAIL_RTOL * (largest term so far) and at least ``min_terms`` are in.
    """

    def __init__(self, n_points: int, min_terms):
        self.peak = np.full(n_points, -np.inf)
        self.run = np.zeros(n_points, dtype=np.int64)
        self.done = np.zeros(n_points, dtype=bool)
        self.n_used = np.zeros(n_points, dtype=np.int64)
        self.min_terms = np.broadcast_to(np.asarray(min_terms), (n_points,))

    def update(self, n: int, log2_term: np.ndarray) -> np.ndarray:
        self.peak = np.maximum(self.peak, log2_term)
        small = log2_term < self.peak + _LOG2_TAIL
        self.run = np.where(small, self.run + 1, 0)
        newly = (~self.done) & (self.run >= TAIL_RUN) & (n >= self.min_terms)
        self.n_used = np.where(newly, n, self.n_used)
        self.done |= newly
        return self.done


def min_terms_for(x) -> np.ndarray:
    """Terms can grow while n < x, so never stop before well past x."""
    return np.maximum(MIN_TERMS, 2 * np.ceil(np.abs(np.asarray(x, dtype=float))) + 10).astype(np.int64)


def _guard(den, what: str):
    if np.any(np.abs(den) < POLE_GUARD):
        raise PoleTooClose(f"{what}: recurrence denominator within {POLE_GUARD:g} of zero")


# --------------------------------------------------------------------------
# one-photon


def one_photon_terms(g: float, delta: float, shift: float, x, n_max: int = N_ONE_PHOTON,
                     *, stop: Optional[int] = None, adaptive: bool = True):
    """Scaled chain t_n(x), n = 0..n_last, for one frame.

    ``shift`` is +eps/2 for the A-frame (alpha, beta) and -eps/2 for the
    B-frame (alpha', beta'); poles sit at x = m - shift. Returns
    ``(t, n_used, converged)`` with ``t`` of shape (n_last + 1, len(x)).
    With ``stop`` the chain is built exactly up to index ``stop`` (only
    denominators m < stop are touched), which is how pole values are taken.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    last = n_max if stop is None else stop
    g2 = g * g
    q = delta * delta / 4.0
    if last >= 1:
        dens = np.arange(last)[:, None] - shift - x[None, :]
        _guard(dens, "one-photon chain")
    t = np.zeros((last + 1, x.size))
    t[0] = 1.0
    tail = TailTracker(x.size, min_terms_for(x))
    tail.update(0, np.zeros(x.size))

    def g_omega(m):
        return ((m + 4 * g2 + shift - x) - q / (m - shift - x)) / 2.0

    if last >= 1:
        t[1] = g_omega(0)
        with np.errstate(divide="ignore"):
            tail.update(1, np.log2(np.abs(t[1])))
    n = 1
    for m in range(2, last + 1):
        t[m] = (g_omega(m - 1) * t[m - 1] - g2 * t[m - 2]) / m
        n = m
        with np.errstate(divide="ignore"):
            done = tail.update(m, np.log2(np.abs(t[m])))
        if adaptive and stop is None and done.all():
            break
    t = t[: n + 1]
    n_used = np.where(tail.done, tail.n_used, n)
    return t, n_used, tail.done


def one_photon_chain(p: OnePhotonParams, E: float, frame: str = "A", N: int = N_ONE_PHOTON) -> CoefficientChain:
    """g-scaled chain t_n = f_n g^n at energy E in the A- or B-frame."""
    if N < 2:
        raise InvalidParameters("chain length N must be >= 2")
    if frame not in ("A", "B"):
        raise InvalidParameters(f"frame must be 'A' or 'B', got {frame!r}")
    x = float(energy_to_x(p, E))
    shift = p.eps / 2 if frame == "A" else -p.eps / 2
    t, n_used, conv = one_photon_terms(p.g, p.delta, shift, [x], N, adaptive=False)
    return CoefficientChain(
        terms=ExtendedReal.from_float(t[:, 0]),
        scaled=True,
        x=x,
        converged=bool(conv[0]),
        n_used=int(n_used[0]),
        frame=frame,
        sector=Sector.ONE_BIASED if p.biased else None,
        scale=p.g,
    )


# --------------------------------------------------------------------------
# two-photon


@lru_cache(maxsize=64)
def _overlaps(u: float, v: float, n_max: int) -> ExtendedReal:
    # L_{2k} = (2k-1)!! (v/u)^k and L_{2k+1} = v (2k+1)!! (v/u)^k, built by
    # incremental products so no factorial is ever materialized.
    ratio = v / u
    mant = np.zeros(n_max + 1)
    exp = np.zeros(n_max + 1, dtype=np.int64)
    cur = [ExtendedReal(1.0, 0), ExtendedReal(v, 0)]
    for n in range(n_max + 1):
        k = n // 2
        par = n % 2
        if k > 0:
            cur[par] = cur[par] * ((n - 1) * ratio if par == 0 else n * ratio)
        mant[n] = cur[par].mant
        exp[n] = cur[par].exp
    return ExtendedReal(mant, exp, normalized=True)


def squeeze_overlaps(frame: SqueezeFrame, N: int) -> CoefficientChain:
    """Squeezed-vacuum projections L_n, n = 0..N, in extended range.

    Even n: L_n = sqrt(n!) <0|n>_b / <0|0>_b. Odd n: the even vacuum has no
    overlap with odd states, so the odd sector projects on the one-photon
    state instead, L_n = u v sqrt(n!) <1|n>_b / <0|0>_b, normalized so L_1 = v.
    Closed forms: L_{2k} = (2k)!/k! (v/2u)^k, L_{2k+1} = (2k+1)!/k! v (v/2u)^k.
    """
    if N < 2:
        raise InvalidParameters("N must be >= 2")
    terms = _overlaps(frame.u, frame.v, N)
    return CoefficientChain(terms=terms, scaled=False, x=float("nan"), converged=True,
                            n_used=N, frame="squeeze")


def two_photon_terms(p: TwoPhotonParams, x, start: int, n_max: int = N_TWO_PHOTON, *,
                     stop: Optional[int] = None, adaptive: bool = True, overlaps: bool = True):
    """Two-photon chain f_n(x) at indices start, start+2, ... in extended range.

    Returns ``(idx, f, s, n_used, converged)``: ``f`` and ``s = f L`` are
    ExtendedReal arrays of shape (len(idx), len(x)); the tail test runs on
    ``s``. ``stop`` builds exactly up to index ``stop`` (pole evaluation).
    """
    if p.g == 0.0:
        raise ZeroCoupling("two-photon recurrence divides by uv + g(u^2+v^2) = 0 at g = 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    fr = derive_squeeze_frame(p)
    u, v, b = fr.u, fr.v, fr.beta2
    d = u * v + p.g * b
    E = (x - v * v) / b
    q = p.delta * p.delta * b / 4.0
    last = n_max if stop is None else stop
    idx_all = np.arange(start, last + 1, 2)
    if idx_all.size > 1:
        _guard(idx_all[:-1, None] - x[None, :], "two-photon chain")
    L = _overlaps(u, v, max(last, 2))
    log2L = L.log2abs()

    def w(m):
        return (b * m + v * v + 2 * p.g * u * v * (2 * m + 1) - E - q / (m - x)) / d

    k_total = idx_all.size
    mant = np.zeros((k_total, x.size))
    expo = np.zeros((k_total, x.size), dtype=np.int64)
    prev = np.zeros(x.size)  # f_{m-2} in current scale
    cur = np.ones(x.size)  # f_m in current scale
    scale = np.zeros(x.size, dtype=np.int64)
    mant[0] = 1.0
    tail = TailTracker(x.size, min_terms_for(x))
    tail.update(start, np.full(x.size, log2L[start]))
    k_last = 0
    for k in range(1, k_total):
        m = idx_all[k - 1]
        nxt = (w(m) * cur - prev) / ((m + 2) * (m + 1))
        big = np.maximum(np.abs(nxt), np.abs(cur))
        _, sh = np.frexp(np.where(big > 0, big, 1.0))
        sh = sh.astype(np.int64)
        prev = np.ldexp(cur, -sh)
        cur = np.ldexp(nxt, -sh)
        scale = scale + sh
        mant[k] = cur
        expo[k] = scale
        k_last = k
        with np.errstate(divide="ignore"):
            lt = np.log2(np.abs(cur)) + scale + log2L[m + 2]
        done = tail.update(m + 2, lt)
        if adaptive and stop is None and done.all():
            break
    idx = idx_all[: k_last + 1]
    f = ExtendedReal(mant[: k_last + 1], expo[: k_last + 1])
    s = f * L[idx][:, None] if overlaps else None
    n_used = np.where(tail.done, tail.n_used, idx[-1])
    return idx, f, s, n_used, tail.done


def two_photon_chain(p: TwoPhotonParams, x: float, start: str | int = "even", N: int = N_TWO_PHOTON) -> CoefficientChain:
    """Raw f_n chain (extended range) with f_0 = 1 (even) or f_1 = 1 (odd)."""
    if N < 4:
        raise InvalidParameters("chain length N must be >= 4")
    s0 = {"even": 0, "odd": 1, 0: 0, 1: 1}[start]
    idx, f, _, n_used, conv = two_photon_terms(p, [x], s0, N, adaptive=False)
    mant = np.zeros(N + 1)
    exp = np.zeros(N + 1, dtype=np.int64)
    mant[idx] = f.mant[:, 0]
    exp[idx] = f.exp[:, 0]
    return CoefficientChain(
        terms=ExtendedReal(mant, exp, normalized=True),
        scaled=False,
        x=float(x),
        converged=bool(conv[0]),
        n_used=int(n_used[0]),
        frame="b-even" if s0 == 0 else "b-odd",
    )


# --------------------------------------------------------------------------
# F(alpha) polynomial route


def falpha_terms(p: OnePhotonParams, alpha, sign: int, M: int = M_FALPHA):
    """Scaled F-chain d_m = c_m g^m and weights P_j = (2 alpha g)^j / j!.

    The recurrence for c_m, with c_0 = 1 and c_1 = 0, multiplied by g^m:

        (m+1) d_{m+1} = -(m + s delta/2) d_m - (alpha + g) g d_{m-1}
                        + s (-1)^m (delta/2) sum_j P_j d_{m-j}

    Returns ``(d, P)``, both of shape (M + 1, len(alpha)).
    """
    if p.g == 0.0:
        raise ZeroCoupling("the F(alpha) recurrence is singular at g = 0")
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    g = p.g
    half = p.delta / 2
    P = np.ones((M + 1, a.size))
    for j in range(1, M + 1):
        P[j] = P[j - 1] * (2 * a * g) / j
    d = np.zeros((M + 1, a.size))
    d[0] = 1.0
    for m in range(1, M):
        conv = np.einsum("ji,ji->i", P[: m + 1], d[m::-1])
        d[m + 1] = (-(m + sign * half) * d[m] - (a + g) * g * d[m - 1]
                    + sign * (-1) ** m * half * conv) / (m + 1)
    return d, P


def falpha_chain(p: OnePhotonParams, alpha_disp: float, parity: int | str = "plus", M: int = M_FALPHA) -> CoefficientChain:
    if p.eps != 0.0:
        raise InvalidParameters("the F(alpha) route covers the unbiased model only")
    if M < 4:
        raise InvalidParameters("M must be >= 4")
    sign = _parity_sign(parity)
    d, _ = falpha_terms(p, [alpha_disp], sign, M)
    return CoefficientChain(
        terms=ExtendedReal.from_float(d[:, 0]),
        scaled=True,
        x=float(alpha_disp),
        converged=True,
        n_used=M,
        frame="falpha",
        sector=Sector.FALPHA_PLUS if sign > 0 else Sector.FALPHA_MINUS,
        scale=p.g,
    )


def _parity_sign(parity) -> int:
    if isinstance(parity, Sector):
        return parity.sign
    if parity in ("plus", "+", 1, +1):
        return 1
    if parity in ("minus", "-", -1):
        return -1
    raise InvalidParameters(f"parity must be plus or minus, got {parity!r}")


# --------------------------------------------------------------------------


def relate_e_from_f(chain: CoefficientChain, p, E: float) -> CoefficientChain:
    """Upper-spin coefficients e_m from the lower-spin chain f_m.

    One-photon: e_m = (delta/2) / (m - alpha - E) f_m (alpha' in the B-frame).
    Two-photon: e_m = (delta/2) / ((m - v^2)/(u^2+v^2) - E) f_m.
    The factor is a per-index ratio, so any rescaling of the chain carries over.
    """
    n = np.arange(len(chain))
    if isinstance(p, TwoPhotonParams):
        fr = derive_squeeze_frame(p)
        den = (n - fr.v ** 2) / fr.beta2 - E
    else:
        c = derive_one_photon_constants(p)
        a = c.alpha if chain.frame == "A" else c.alpha_p
        den = n - a - E
    populated = ~chain.terms.iszero()
    _guard(den[populated], "relate_e_from_f")
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(populated, (p.delta / 2) / den, 0.0)
    return CoefficientChain(
        terms=chain.terms * factor,
        scaled=chain.scaled,
        x=chain.x,
        converged=chain.converged,
        n_used=chain.n_used,
        frame=chain.frame,
        sector=chain.sector,
        scale=chain.scale,
    )
