"""Exact-diagonalization oracle and Fock-space eigenstate checks.

Independent of the G-function machinery: plain Fock-basis Hamiltonians, a
cyclic Jacobi eigensolver, and explicit constructions of displaced and
squeezed number states. G-method eigenstates are rebuilt in the Fock basis
from their coefficient chains so that residuals ||(H - E) psi|| and the
agreement between two independent frames can be measured directly.

Basis ordering of the full matrix is interleaved, index 2n + s with s = 0
for spin up (sz = +1) and s = 1 for spin down.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba
import numpy as np
import scipy.sparse as sp
from scipy.optimize import linear_sum_assignment
from scipy.sparse.linalg import expm_multiply

from .errors import CutoffTooSmall, DegenerateState, InvalidParameters, NoConvergence
from .model import (
    OnePhotonParams,
    Params,
    Sector,
    SqueezeFrame,
    TwoPhotonParams,
    derive_squeeze_frame,
    two_photon_sector,
)

ED_CUTOFF_ONE_PHOTON = 300
ED_CUTOFF_TWO_PHOTON = 400
STATE_TAIL_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 60


@dataclass(frozen=True)
class SymMatrix:
    entries: np.ndarray

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]


# --------------------------------------------------------------------------
# Hamiltonians


def _photon_step(p: Params) -> int:
    return 2 if isinstance(p, TwoPhotonParams) else 1


def _coupling(p: Params, n: np.ndarray) -> np.ndarray:
    """<n + k| photon operator |n>, k = 1 (a^dag) or 2 (a^dag^2), times g."""
    if isinstance(p, TwoPhotonParams):
        return p.g * np.sqrt((n + 1.0) * (n + 2.0))
    return p.g * np.sqrt(n + 1.0)


def build_hamiltonian(p: Params, N_f: int) -> SymMatrix:
    """Dense 2(N_f+1) matrix in the interleaved |n> x {up, down} basis."""
    if N_f < 0:
        raise CutoffTooSmall("photon cutoff must be >= 0")
    k = _photon_step(p)
    n = np.arange(N_f + 1)
    h = np.zeros((2 * (N_f + 1), 2 * (N_f + 1)))
    for s, sz in ((0, 1.0), (1, -1.0)):
        i = 2 * n + s
        h[i, i] = n - sz * p.eps / 2
        if N_f >= k:
            c = sz * _coupling(p, n[:-k])
            h[i[:-k], i[k:]] = c
    h[2 * n, 2 * n + 1] = -p.delta / 2
    upper = np.triu(h)
    return SymMatrix(upper + np.triu(upper, 1).T)


def apply_hamiltonian(p: Params, up: np.ndarray, down: np.ndarray):
    """H acting on a two-component state; same truncation as build_hamiltonian."""
    k = _photon_step(p)
    n = np.arange(up.size, dtype=float)
    c = _coupling(p, n[:-k])

    def field_term(psi):
        out = np.zeros_like(psi)
        out[k:] += c * psi[:-k]
        out[:-k] += c * psi[k:]
        return out

    h_up = (n - p.eps / 2) * up + field_term(up) - p.delta / 2 * down
    h_down = (n + p.eps / 2) * down - field_term(down) - p.delta / 2 * up
    return h_up, h_down


def sector_blocks(p: Params, N_f: int) -> dict[Sector, SymMatrix]:
    """Symmetry blocks in the sx basis (unbiased models only).

    One-photon: parity sx (-1)^N = +1 is the "minus" G-branch. Two-photon:
    photon parity q and Pi' = sx (-1)^floor(N/2); Pi' = +1 is "minus".
    Each block is tridiagonal: diag n - s_n delta/2, off-diag the photon coupling.
    """
    if isinstance(p, OnePhotonParams) and p.biased:
        raise InvalidParameters("a static bias breaks parity; use the full matrix")
    out: dict[Sector, SymMatrix] = {}
    if isinstance(p, TwoPhotonParams):
        for q in (0, 1):
            n = np.arange(q, N_f + 1, 2)
            for parity in (1, -1):
                sx = parity * (-1.0) ** (n // 2)
                out[two_photon_sector(q, -parity)] = _tridiag(n - sx * p.delta / 2, _coupling(p, n[:-1]))
    else:
        n = np.arange(N_f + 1)
        for parity, sec in ((1, Sector.ONE_MINUS), (-1, Sector.ONE_PLUS)):
            sx = parity * (-1.0) ** n
            out[sec] = _tridiag(n - sx * p.delta / 2, _coupling(p, n[:-1]))
    return out


def _tridiag(diag: np.ndarray, off: np.ndarray) -> SymMatrix:
    m = np.diag(diag.astype(float))
    if off.size:
        m += np.diag(off, 1) + np.diag(off, -1)
    return SymMatrix(m)


# --------------------------------------------------------------------------
# Jacobi eigensolver


@numba.njit(cache=True, nogil=True)
def _jacobi_sweeps(a, tol, max_sweeps):
    n = a.shape[0]
    norm = 0.0
    for i in range(n):
        for j in range(n):
            norm += a[i, j] * a[i, j]
    norm = math.sqrt(norm)
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += a[i, j] * a[i, j]
        off = math.sqrt(2.0 * off)
        if off <= tol * norm:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                if abs(apq) < 1e-300 + 1e-18 * (abs(app) + abs(aqq)):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[p, k]
                    akq = a[q, k]
                    a[p, k] = c * akp - s * akq
                    a[q, k] = s * akp + c * akq
                for k in range(n):
                    a[k, p] = a[p, k]
                    a[k, q] = a[q, k]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
    return -1


def sym_eigenvalues(m: SymMatrix | np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """All eigenvalues by cyclic Jacobi rotations, sorted ascending."""
    a = np.array(m.entries if isinstance(m, SymMatrix) else m, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParameters("matrix must be square")
    if a.shape[0] == 0:
        return np.empty(0)
    if not np.allclose(a, a.T, rtol=0, atol=1e-14 * max(1.0, np.abs(a).max())):
        raise InvalidParameters("matrix must be symmetric")
    if _jacobi_sweeps(a, tol, max_sweeps) < 0:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(a))


def inverse_iteration(m: SymMatrix | np.ndarray, energy: float, iters: int = 3,
                      orthogonal_to: Sequence[np.ndarray] = ()) -> np.ndarray:
    """Unit eigenvector near ``energy`` (re-orthogonalized against given vectors)."""
    a = np.asarray(m.entries if isinstance(m, SymMatrix) else m, dtype=float)
    n = a.shape[0]
    shift = energy + 1e-10 * max(1.0, abs(energy))
    lhs = a - shift * np.eye(n)
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(n)
    for _ in range(iters):
        for w in orthogonal_to:
            v -= np.dot(w, v) * w
        v = np.linalg.solve(lhs, v)
        v /= np.linalg.norm(v)
    for w in orthogonal_to:
        v -= np.dot(w, v) * w
    return v / np.linalg.norm(v)


# --------------------------------------------------------------------------
# ED spectra


@dataclass(frozen=True)
class EDLevel:
    energy: float
    sector: Optional[Sector]


def ed_levels(p: Params, N_f: Optional[int] = None, blocked: bool = True) -> list[EDLevel]:
    """All ED eigenvalues (labelled by sector when the model is unbiased)."""
    if N_f is None:
        N_f = ED_CUTOFF_TWO_PHOTON if isinstance(p, TwoPhotonParams) else ED_CUTOFF_ONE_PHOTON
    biased = isinstance(p, OnePhotonParams) and p.biased
    if blocked and not biased:
        out = [EDLevel(float(e), sec) for sec, blk in sector_blocks(p, N_f).items() for e in sym_eigenvalues(blk)]
    else:
        sec = Sector.ONE_BIASED if biased else None
        out = [EDLevel(float(e), sec) for e in sym_eigenvalues(build_hamiltonian(p, N_f))]
    out.sort(key=lambda lv: (lv.energy, lv.sector.value if lv.sector else ""))
    return out


def ed_energies(p: Params, N_f: Optional[int] = None, blocked: bool = True) -> np.ndarray:
    return np.array([lv.energy for lv in ed_levels(p, N_f, blocked)])


def ed_truncation_shift(p: Params, N_f: int, count: int = 8, extra: int = 50) -> float:
    """Largest change of the lowest ``count`` levels when N_f grows by ``extra``."""
    a = ed_energies(p, N_f)[:count]
    b = ed_energies(p, N_f + extra)[:count]
    return float(np.max(np.abs(a - b)))


# --------------------------------------------------------------------------
# Fock vectors and frame states


@dataclass(frozen=True)
class FockVector:
    """Photon amplitudes for spin up and spin down; ``down`` is None for a single block."""

    up: np.ndarray
    down: Optional[np.ndarray] = None

    @property
    def photon_cutoff(self) -> int:
        return self.up.size - 1

    def blocks(self) -> list[np.ndarray]:
        return [self.up] if self.down is None else [self.up, self.down]

    def norm(self) -> float:
        return float(math.sqrt(sum(float(np.dot(b, b)) for b in self.blocks())))

    @property
    def tail(self) -> float:
        """max |psi_{N_f}|, |psi_{N_f-1}| over blocks, relative to the norm."""
        nrm = self.norm()
        t = max(float(np.max(np.abs(b[-2:]))) for b in self.blocks())
        return t / nrm if nrm > 0 else 0.0

    def normalized(self) -> "FockVector":
        nrm = self.norm()
        return FockVector(self.up / nrm, None if self.down is None else self.down / nrm)

    def dot(self, other: "FockVector") -> float:
        return float(sum(np.dot(a, b) for a, b in zip(self.blocks(), other.blocks())))

    def interleaved(self) -> np.ndarray:
        """Vector in the ordering of build_hamiltonian."""
        if self.down is None:
            raise InvalidParameters("single-block vector has no spin structure")
        out = np.empty(2 * self.up.size)
        out[0::2] = self.up
        out[1::2] = self.down
        return out

    def truncated(self, N_f: int) -> "FockVector":
        return FockVector(self.up[: N_f + 1], None if self.down is None else self.down[: N_f + 1])


@numba.njit(cache=True, nogil=True)
def _frame_rows(u, v, shift, n_max, cutoff):
    # Rows <m|k> of the number states of L = u a + v a^dag + shift together
    # with those of the mirrored frame (v, shift) -> (-v, -shift).
    # For m >= k the relation L|k> = sqrt(k)|k-1>, solved upward in m,
    #   <m+1|k> = (sqrt(k)<m|k-1> - v sqrt(m)<m-1|k> - shift <m|k>) / (u sqrt(m+1)),
    # only ever shrinks errors. Below the diagonal it would amplify them, so
    # those entries come from the mirror frame: both frame maps are real
    # orthogonal and transposing one gives the other, <m|k> = <k|m>'.
    rows = np.zeros((2, n_max + 1, cutoff + 1))
    sgn = (1.0, -1.0)
    for k in range(n_max + 1):
        for f in range(2):
            vv = sgn[f] * v
            ss = sgn[f] * shift
            r = rows[f, k]
            for m in range(min(k, cutoff + 1)):
                r[m] = rows[1 - f, m, k]
            if k == 0:
                r[0] = 1.0
            for m in range(max(k - 1, 0), cutoff):
                acc = -ss * r[m]
                if k > 0:
                    acc += math.sqrt(k) * rows[f, k - 1, m]
                if m > 0:
                    acc -= vv * math.sqrt(m) * r[m - 1]
                r[m + 1] = acc / (u * math.sqrt(m + 1.0))
            if k == 0:
                nrm = 0.0
                for m in range(cutoff + 1):
                    nrm += r[m] * r[m]
                nrm = math.sqrt(nrm)
                for m in range(cutoff + 1):
                    r[m] /= nrm
    return rows


def displaced_basis(shift: float, n_max: int, N_f: int) -> np.ndarray:
    """Rows |n>_A for n = 0..n_max, A = a + shift (B-frame: shift = -g).

    Same states as (A^dag)^n / sqrt(n!) applied to the coherent vacuum with
    amplitudes (-shift)^m / sqrt(m!), computed by a stable recursion in m.
    """
    if n_max < 0 or N_f < 1:
        raise CutoffTooSmall("need n_max >= 0 and N_f >= 1")
    return _frame_rows(1.0, 0.0, float(shift), int(n_max), int(N_f))[0]


def _check_tail(vec: np.ndarray, what: str):
    nrm = np.linalg.norm(vec)
    if nrm == 0 or np.max(np.abs(vec[-2:])) > STATE_TAIL_TOL * nrm:
        raise CutoffTooSmall(f"{what}: Fock tail exceeds {STATE_TAIL_TOL:g}; raise N_f")


def displaced_fock_vector(g: float, n: int, N_f: int) -> FockVector:
    """|n>_A with A = a + g, built from the coherent vacuum by (a^dag + g)/sqrt(k)."""
    if n < 0:
        raise InvalidParameters("n must be >= 0")
    if 2 * n > N_f:
        raise CutoffTooSmall(f"need N_f >= 2n, got N_f={N_f}, n={n}")
    vec = displaced_basis(g, n, N_f)[n]
    _check_tail(vec, "displaced state")
    return FockVector(vec)


def squeezed_vacuum(u: float, v: float, N_f: int) -> np.ndarray:
    """|0> annihilated by u a + v a^dag: c_{m+1} = -(v/u) sqrt(m/(m+1)) c_{m-1}."""
    c = np.zeros(N_f + 1)
    c[0] = 1.0
    r = v / u
    for m in range(1, N_f, 2):
        c[m + 1] = -r * math.sqrt(m / (m + 1)) * c[m - 1]
    return c / np.linalg.norm(c)


def _squeeze_generator(v: float, N_f: int):
    # T = exp(theta (a^2 - a^dag^2) / 2) maps |n> to |n>_b for b = cosh(theta) a
    # + sinh(theta) a^dag, i.e. theta = asinh(v); negative v gives the c-frame
    theta = math.asinh(v)
    m = np.arange(N_f - 1, dtype=float)
    a2 = sp.diags([np.sqrt((m + 1.0) * (m + 2.0))], [2], shape=(N_f + 1, N_f + 1))
    return (0.5 * theta * (a2 - a2.T)).tocsr()


def squeeze_apply(v: float, coeffs: np.ndarray, N_f: int) -> np.ndarray:
    """sum_n coeffs[n] |n>_b in the Fock basis (columns of a 2-D ``coeffs`` are mapped separately).

    Building |n>_b one by one amplifies rounding errors at large n, so the
    squeeze unitary is applied to the coefficient vector instead.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.shape[0] > N_f + 1:
        raise CutoffTooSmall("more coefficients than Fock states")
    padded = np.zeros((N_f + 1,) + c.shape[1:])
    padded[: c.shape[0]] = c
    if v == 0.0:
        return padded
    return expm_multiply(_squeeze_generator(v, N_f), padded)


def squeezed_basis(u: float, v: float, n_max: int, N_f: int) -> np.ndarray:
    """Rows |n> = (u a^dag + v a)^n / sqrt(n!) |0>, n = 0..n_max (u^2 - v^2 = 1)."""
    if n_max < 0 or N_f < 1:
        raise CutoffTooSmall("need n_max >= 0 and N_f >= 1")
    if not math.isclose(u * u - v * v, 1.0, rel_tol=1e-12):
        raise InvalidParameters("squeeze frame needs u^2 - v^2 = 1")
    return squeeze_apply(v, np.eye(n_max + 1), N_f).T


def squeezed_fock_vector(frame: SqueezeFrame, n: int, N_f: int, conjugate: bool = False) -> FockVector:
    """|n>_b for b = u a + v a^dag (``conjugate`` gives the c-frame, v -> -v)."""
    if n < 0:
        raise InvalidParameters("n must be >= 0")
    if 4 * n > N_f:
        raise CutoffTooSmall(f"need N_f >= 4n, got N_f={N_f}, n={n}")
    v = -frame.v if conjugate else frame.v
    vec = squeezed_basis(frame.u, v, n, N_f)[n]
    _check_tail(vec, "squeezed state")
    return FockVector(vec)


# --------------------------------------------------------------------------
# eigenstate reconstruction


MILLER_TOL = 1e-15


def _miller_one_photon(g: float, delta: float, x: float, shift: float, top: int) -> np.ndarray:
    """w_n = sqrt(n!) f_n of the minimal (normalizable) chain, w_0 = 1.

    Ratios rho_m = f_m / f_{m-1} by the backward continued fraction
    rho_m = 1 / (Omega(m) - (m+1) rho_{m+1}), started from rho_top = 0.
    """
    q = delta * delta / 4

    def omega(m):
        return ((m + 4 * g * g + shift - x) - q / (m - shift - x)) / (2 * g)

    rho = np.zeros(top + 2)
    for m in range(top, 0, -1):
        rho[m] = 1.0 / (omega(m) - (m + 1) * rho[m + 1])
    w = np.ones(top + 1)
    for n in range(1, top + 1):
        w[n] = w[n - 1] * math.sqrt(n) * rho[n]
    return w


def _miller_two_photon(p: TwoPhotonParams, x: float, start: int, top: int) -> np.ndarray:
    """w_m = sqrt(m!) f_m on indices of one parity (zeros elsewhere), w_start = 1."""
    fr = derive_squeeze_frame(p)
    u, v, b = fr.u, fr.v, fr.beta2
    d = u * v + p.g * b
    e = (x - v * v) / b
    q = p.delta * p.delta * b / 4

    def wfun(m):
        return (b * m + v * v + 2 * p.g * u * v * (2 * m + 1) - e - q / (m - x)) / d

    rho = np.zeros(top + 3)
    first = start + 2
    for m in range(top - (top - start) % 2, first - 1, -2):
        rho[m] = 1.0 / (wfun(m) - (m + 2) * (m + 1) * rho[m + 2])
    w = np.zeros(top + 1)
    w[start] = 1.0
    for m in range(first, top + 1, 2):
        w[m] = w[m - 2] * math.sqrt(m * (m - 1)) * rho[m]
    return w


def _keep(w: np.ndarray) -> int:
    big = np.max(np.abs(w))
    idx = np.flatnonzero(np.abs(w) > MILLER_TOL * big)
    return int(idx[-1]) if idx.size else 0


def _chain_top(p: Params) -> int:
    """Start index of the backward recursion.

    Enough terms for the state itself (decay 2g per two steps, two-photon)
    plus enough for the continued fraction to forget its start value
    (contraction 4g^2 per two steps).
    """
    if isinstance(p, TwoPhotonParams):
        digits = math.log(MILLER_TOL)
        keep = 2 * digits / math.log(2 * p.g) if p.g > 0 else 0
        settle = 2 * digits / math.log(4 * p.g * p.g) if p.g > 0 else 0
        return int(keep + settle) + 60
    return int(8 * p.g * p.g + 40 * p.g) + 80


def frame_coefficients(p: Params, x: float, sector: Sector, frame: str = "primary"):
    """(w_f, w_e): sqrt(n!)-weighted lower/upper chain coefficients at x.

    ``frame`` is "primary" (A or b) or "secondary" (B or c); the secondary
    chain uses alpha', beta' (one-photon) and the same recurrence otherwise.
    """
    if p.g == 0.0:
        raise InvalidParameters("frame reconstruction needs g > 0")
    if isinstance(p, TwoPhotonParams):
        top = _chain_top(p)
        w = _miller_two_photon(p, x, sector.start, top)
        w = w[: _keep(w) + 1]
        fr = derive_squeeze_frame(p)
        n = np.arange(w.size)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(w != 0, (p.delta / 2) / ((n - fr.v ** 2) / fr.beta2 - float((x - fr.v ** 2) / fr.beta2)), 0.0)
        return w, w * ratio
    shift = p.eps / 2 if frame == "primary" else -p.eps / 2
    w = _miller_one_photon(p.g, p.delta, x, shift, _chain_top(p))
    w = w[: _keep(w) + 1]
    n = np.arange(w.size)
    return w, w * (p.delta / 2) / (n - shift - x)


def _working_cutoff(p: Params, n_keep: int, N_f: int) -> int:
    # |n>_b spreads to Fock index ~ (u + v)^2 n; |n>_A to ~ (sqrt(n) + g)^2
    if isinstance(p, TwoPhotonParams):
        fr = derive_squeeze_frame(p)
        return max(N_f, int(1.2 * (fr.u + fr.v) ** 2 * n_keep) + 200)
    return max(N_f, n_keep + int(4 * p.g * p.g + 20 * p.g) + 80)


def reconstruct_frame_state(p: Params, x: float, sector: Sector, N_f: int, frame: str = "primary") -> FockVector:
    """Unnormalized two-component state from one frame, on a working cutoff >= N_f."""
    primary = frame == "primary"
    wf, we = frame_coefficients(p, x, sector, frame)
    work = _working_cutoff(p, wf.size, N_f)
    n = np.arange(wf.size)
    if isinstance(p, TwoPhotonParams):
        fr = derive_squeeze_frame(p)
        phase = np.ones(wf.size) if primary else (-1.0) ** ((n + 1) // 2)
        f_part, e_part = squeeze_apply(fr.v if primary else -fr.v,
                                       np.stack([phase * wf, phase * we], axis=1), work).T
    else:
        rows = displaced_basis(p.g if primary else -p.g, wf.size - 1, work)
        phase = np.ones(wf.size) if primary else (-1.0) ** n
        f_part = (phase * wf) @ rows
        e_part = (phase * we) @ rows
    # primary frame: spin up carries e, spin down f; the secondary frame swaps
    return FockVector(e_part, f_part) if primary else FockVector(f_part, e_part)


def reconstruct_eigenstate(p: Params, root, N_f: int) -> FockVector:
    """Normalized Fock-basis eigenstate of a regular root (primary frame).

    The vector is returned on a working cutoff of at least N_f so that the
    reconstruction itself never truncates; its tail is checked.
    """
    if getattr(root, "kind", "regular") == "exceptional":
        raise DegenerateState("exceptional roots are degenerate; the frame state is not unique")
    if p.g == 0.0:
        return _decoupled_state(p, root, N_f)
    psi = reconstruct_frame_state(p, root.x, root.sector, N_f, "primary")
    if psi.tail > STATE_TAIL_TOL:
        raise CutoffTooSmall("reconstructed state has a fat Fock tail")
    return psi.normalized()


def _decoupled_state(p: Params, root, N_f: int) -> FockVector:
    # g = 0: |n> (up + s down)/sqrt2 with sx = s and E = n - s delta/2
    for s in (1, -1):
        n = int(round(root.energy + s * p.delta / 2))
        if n < 0 or abs(n - s * p.delta / 2 - root.energy) > 1e-9:
            continue
        if isinstance(p, TwoPhotonParams):
            sec = two_photon_sector(n % 2, -s * (-1) ** (n // 2))
        else:
            sec = Sector.ONE_MINUS if s * (-1) ** n > 0 else Sector.ONE_PLUS
        if sec != root.sector:
            continue
        if n > N_f:
            raise CutoffTooSmall("cutoff below the photon number of the level")
        up = np.zeros(N_f + 1)
        down = np.zeros(N_f + 1)
        up[n] = 1 / math.sqrt(2)
        down[n] = s / math.sqrt(2)
        return FockVector(up, down)
    raise InvalidParameters("energy and sector do not match a decoupled level")


def residual_norm(p: Params, energy: float, psi: FockVector) -> float:
    """||(H - E) psi|| / ||psi|| on the cutoff of psi."""
    if psi.down is None:
        raise InvalidParameters("residual needs a two-component state")
    if psi.tail > 1e-8:
        raise CutoffTooSmall("state tail above 1e-8; the truncated H is not trustworthy")
    hu, hd = apply_hamiltonian(p, psi.up, psi.down)
    r = np.sqrt(np.sum((hu - energy * psi.up) ** 2) + np.sum((hd - energy * psi.down) ** 2))
    return float(r / psi.norm())


@dataclass(frozen=True)
class Proportionality:
    defect: float
    ratio: float


def proportionality_check(p: Params, root, N_f: int = 0) -> Proportionality:
    """Compare the states built independently in the two frames.

    Returns 1 - |<psi1|psi2>| / (|psi1| |psi2|) and the scalar <psi1|psi2>/|psi2|^2.
    """
    if getattr(root, "kind", "regular") == "exceptional":
        raise DegenerateState("proportionality is not defined at an exceptional (degenerate) root")
    if p.g == 0.0:
        return Proportionality(0.0, 1.0)
    a = reconstruct_frame_state(p, root.x, root.sector, N_f, "primary")
    b = reconstruct_frame_state(p, root.x, root.sector, N_f, "secondary")
    return _compare(a, b)


def _compare(a: FockVector, b: FockVector) -> Proportionality:
    size = max(a.up.size, b.up.size)
    a = _pad(a, size)
    b = _pad(b, size)
    ab = a.dot(b)
    na, nb = a.norm(), b.norm()
    return Proportionality(defect=float(max(0.0, 1.0 - abs(ab) / (na * nb))), ratio=float(ab / nb ** 2))


def state_checks(p: Params, root, N_f: int) -> tuple[float, float]:
    """(residual, proportionality defect) of a regular root, sharing one primary-frame build."""
    if p.g == 0.0:
        psi = reconstruct_eigenstate(p, root, N_f)
        return residual_norm(p, root.energy, psi), 0.0
    if getattr(root, "kind", "regular") == "exceptional":
        raise DegenerateState("exceptional roots are degenerate; the frame state is not unique")
    a = reconstruct_frame_state(p, root.x, root.sector, N_f, "primary")
    if a.tail > STATE_TAIL_TOL:
        raise CutoffTooSmall("reconstructed state has a fat Fock tail")
    b = reconstruct_frame_state(p, root.x, root.sector, N_f, "secondary")
    return residual_norm(p, root.energy, a), _compare(a, b).defect


def _pad(psi: FockVector, size: int) -> FockVector:
    extra = size - psi.up.size
    if extra <= 0:
        return psi
    z = np.zeros(extra)
    return FockVector(np.concatenate([psi.up, z]), np.concatenate([psi.down, z]))


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationRow:
    sector: str
    kind: str
    energy: float
    energy_ed: float
    abs_err: float
    residual: float = math.nan
    defect: float = math.nan


@dataclass
class ValidationReport:
    rows: list[ValidationRow] = field(default_factory=list)
    unmatched_roots: list[float] = field(default_factory=list)
    missing_ed: list[float] = field(default_factory=list)

    @property
    def max_abs_err(self) -> float:
        return max((r.abs_err for r in self.rows), default=0.0)

    @property
    def max_residual(self) -> float:
        vals = [r.residual for r in self.rows if not math.isnan(r.residual)]
        return max(vals, default=0.0)

    @property
    def max_defect(self) -> float:
        vals = [r.defect for r in self.rows if not math.isnan(r.defect)]
        return max(vals, default=0.0)

    @property
    def complete(self) -> bool:
        return not self.unmatched_roots and not self.missing_ed

    def passed(self, tol: float = 1e-6) -> bool:
        return self.complete and self.max_abs_err <= tol


def validate_roots(p: Params, roots, energy_window, N_f: Optional[int] = None, states: bool = False,
                   match_tol: float = 1e-4) -> ValidationReport:
    """Match roots to ED levels sector by sector (optimal assignment)."""
    e_lo, e_hi = map(float, energy_window)
    levels = ed_levels(p, N_f)
    report = ValidationReport()
    biased = isinstance(p, OnePhotonParams) and p.biased
    keys = sorted({(lv.sector.value if lv.sector else "") for lv in levels} |
                  {(r.sector.value if not biased else Sector.ONE_BIASED.value) for r in roots})
    n_state = N_f or (ED_CUTOFF_TWO_PHOTON if isinstance(p, TwoPhotonParams) else ED_CUTOFF_ONE_PHOTON)
    for key in keys:
        rs = [r for r in roots if (Sector.ONE_BIASED.value if biased else r.sector.value) == key]
        ed = np.array([lv.energy for lv in levels if (lv.sector.value if lv.sector else "") == key
                       and e_lo - match_tol <= lv.energy <= e_hi + match_tol])
        eg = np.array([r.energy for r in rs])
        used = set()
        if eg.size and ed.size:
            cost = np.abs(eg[:, None] - ed[None, :])
            ri, ci = linear_sum_assignment(cost)
            for i, j in zip(ri, ci):
                if cost[i, j] > match_tol:
                    continue
                used.add(j)
                r = rs[i]
                res = dfc = math.nan
                if states and r.kind == "regular":
                    res, dfc = state_checks(p, r, n_state)
                report.rows.append(ValidationRow(key, r.kind, r.energy, float(ed[j]), float(cost[i, j]), res, dfc))
            matched_roots = set(ri[cost[ri, ci] <= match_tol])
        else:
            matched_roots = set()
        report.unmatched_roots.extend(float(eg[i]) for i in range(eg.size) if i not in matched_roots)
        report.missing_ed.extend(float(ed[j]) for j in range(ed.size)
                                 if j not in used and e_lo < ed[j] < e_hi)
    report.rows.sort(key=lambda r: (r.energy, r.sector))
    return report


__all__ = [
    "SymMatrix",
    "FockVector",
    "EDLevel",
    "ValidationRow",
    "ValidationReport",
    "Proportionality",
    "build_hamiltonian",
    "apply_hamiltonian",
    "sector_blocks",
    "sym_eigenvalues",
    "inverse_iteration",
    "ed_levels",
    "ed_energies",
    "ed_truncation_shift",
    "displaced_basis",
    "displaced_fock_vector",
    "squeezed_vacuum",
    "squeezed_basis",
    "squeezed_fock_vector",
    "frame_coefficients",
    "reconstruct_frame_state",
    "reconstruct_eigenstate",
    "residual_norm",
    "proportionality_check",
    "state_checks",
    "squeeze_apply",
    "validate_roots",
]
