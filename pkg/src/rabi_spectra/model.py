"""Model parameters, Bogoliubov frame constants and the x <-> E maps.

Units are fixed by hbar = omega = 1. A cavity frequency other than one is
handled by the caller: divide delta, eps, g by omega before building the
params and multiply the returned energies by omega.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .errors import CouplingOutOfRange, InvalidParameters

# Two-photon couplings closer than this to 1/2 are rejected (beta overflows).
COLLAPSE_GUARD = 1e-9


class Sector(str, Enum):
    """One label per G-branch."""

    ONE_PLUS = "one-photon-unbiased-plus"
    ONE_MINUS = "one-photon-unbiased-minus"
    ONE_BIASED = "one-photon-biased"
    EVEN_PLUS = "two-photon-even-plus"
    EVEN_MINUS = "two-photon-even-minus"
    ODD_PLUS = "two-photon-odd-plus"
    ODD_MINUS = "two-photon-odd-minus"
    FALPHA_PLUS = "falpha-plus"
    FALPHA_MINUS = "falpha-minus"

    def __str__(self) -> str:
        return self.value

    @property
    def sign(self) -> int:
        """+1 for the plus branch, -1 for minus, 0 for the biased branch."""
        if self.value.endswith("-plus"):
            return 1
        if self.value.endswith("-minus"):
            return -1
        return 0

    @property
    def start(self) -> int:
        """Chain start index (0 even, 1 odd) of a two-photon sector."""
        return 1 if self.value.startswith("two-photon-odd") else 0


ONE_PHOTON_SECTORS = (Sector.ONE_PLUS, Sector.ONE_MINUS)
TWO_PHOTON_SECTORS = (Sector.EVEN_PLUS, Sector.EVEN_MINUS, Sector.ODD_PLUS, Sector.ODD_MINUS)


def two_photon_sector(start: int, sign: int) -> Sector:
    table = {
        (0, 1): Sector.EVEN_PLUS,
        (0, -1): Sector.EVEN_MINUS,
        (1, 1): Sector.ODD_PLUS,
        (1, -1): Sector.ODD_MINUS,
    }
    return table[(start % 2, sign)]


def _check_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise InvalidParameters(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class OnePhotonParams:
    """H = -(eps sz + delta sx)/2 + a^dag a + g (a^dag + a) sz."""

    g: float
    delta: float
    eps: float = 0.0

    def __post_init__(self):
        _check_finite(g=self.g, delta=self.delta, eps=self.eps)
        if self.g < 0:
            raise InvalidParameters(f"coupling g must be >= 0, got {self.g}")

    @property
    def model(self) -> str:
        return "rabi"

    @property
    def biased(self) -> bool:
        return self.eps != 0.0


@dataclass(frozen=True)
class TwoPhotonParams:
    """H = -delta sx/2 + a^dag a + g (a^dag^2 + a^2) sz, with 0 <= g < 1/2."""

    g: float
    delta: float

    def __post_init__(self):
        _check_finite(g=self.g, delta=self.delta)
        if self.g < 0:
            raise InvalidParameters(f"coupling g must be >= 0, got {self.g}")
        if self.g >= 0.5 - COLLAPSE_GUARD:
            raise CouplingOutOfRange(
                f"two-photon coupling must satisfy g < 1/2 (spectral collapse), got {self.g}"
            )

    @property
    def model(self) -> str:
        return "rabi2p"

    @property
    def eps(self) -> float:
        return 0.0


Params = Union[OnePhotonParams, TwoPhotonParams]


@dataclass(frozen=True)
class OnePhotonConstants:
    alpha: float
    beta: float
    alpha_p: float
    beta_p: float


@dataclass(frozen=True)
class SqueezeFrame:
    u: float
    v: float
    beta2: float

    @property
    def collapse_factor(self) -> float:
        """sqrt(1 - 4 g^2) = 1 / beta2."""
        return 1.0 / self.beta2


def derive_one_photon_constants(p: OnePhotonParams) -> OnePhotonConstants:
    g2 = p.g * p.g
    half = p.eps / 2
    return OnePhotonConstants(alpha=g2 + half, beta=3 * g2 + half, alpha_p=g2 - half, beta_p=3 * g2 - half)


def derive_squeeze_frame(p: TwoPhotonParams | float) -> SqueezeFrame:
    g = p.g if isinstance(p, TwoPhotonParams) else float(p)
    if not 0 <= g < 0.5 - COLLAPSE_GUARD:
        raise CouplingOutOfRange(f"two-photon coupling must satisfy 0 <= g < 1/2, got {g}")
    s = math.sqrt(1.0 - 4.0 * g * g)
    beta2 = 1.0 / s
    # (beta2 - 1)/2 = 2 g^2 / (s (1 + s)), written without the cancellation
    v = g * math.sqrt(2.0 / (s * (1.0 + s)))
    return SqueezeFrame(u=math.sqrt((beta2 + 1) / 2), v=v, beta2=beta2)


def x_to_energy(p: Params, x):
    """Physical energy of spectral variable x (scalar or array)."""
    if isinstance(p, OnePhotonParams):
        return np.subtract(x, p.g * p.g)
    fr = derive_squeeze_frame(p)
    return np.divide(np.subtract(x, fr.v * fr.v), fr.beta2)


def energy_to_x(p: Params, energy):
    if isinstance(p, OnePhotonParams):
        return np.add(energy, p.g * p.g)
    fr = derive_squeeze_frame(p)
    return np.add(np.multiply(energy, fr.beta2), fr.v * fr.v)


def two_photon_pole_energy(g: float, n):
    """Energy at the pole x = n: (n + 1/2) sqrt(1 - 4 g^2) - 1/2."""
    return (np.asarray(n, dtype=float) + 0.5) * math.sqrt(1.0 - 4.0 * g * g) - 0.5


def params_from(model: str, g: float, delta: float, eps: float = 0.0) -> Params:
    if model == "rabi":
        return OnePhotonParams(g=g, delta=delta, eps=eps)
    if model == "rabi2p":
        if eps != 0.0:
            raise InvalidParameters("a static bias is not supported for the two-photon model")
        return TwoPhotonParams(g=g, delta=delta)
    raise InvalidParameters(f"unknown model {model!r}")


def sectors_of(p: Params) -> tuple[Sector, ...]:
    if isinstance(p, TwoPhotonParams):
        return TWO_PHOTON_SECTORS
    if p.biased:
        return (Sector.ONE_BIASED,)
    return ONE_PHOTON_SECTORS
