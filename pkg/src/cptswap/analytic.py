"""Closed-form solution for the symmetric (balanced-drive) configuration.

With equal couplings, cavity rates and Rabi frequencies the dynamics
separates into a bright field mode A+ = (A1 + A2)/sqrt(2) that sees an
empty cavity and a dark mode A- = (A1 - A2)/sqrt(2) coupled to the
trapped atoms.  The dark-mode chain (field, dark dipole, ground-state
coherence) solves in closed form per sideband:

    beta(w)  = g^2 N (gamma0 - i w) / [(gamma - i w)(gamma0 - i w) + O'^2]
    lam_p(w) = (kappa + i w) / (kappa - i w)            (bright mode)
    lam_m(w) = (kappa + i w - beta) / (kappa - i w + beta)  (dark mode)

and the outgoing quadrature spectra of the original modes are

    S1_out = |lam_p + lam_m|^2/4 S1_in + |lam_p - lam_m|^2/4 S2_in
             + (1 - |lam_m|^2)/2,

with S2_out obtained by swapping the input roles.  The crossover scale
is the trapping-narrowed cavity halfwidth

    kappa_cpt ~= gamma0 + kappa O'^2 / (g^2 N),

separating a transparency regime (w << kappa_cpt), a swapping regime
(kappa_cpt << w << kappa) where the fields exchange their fluctuation
spectra, and a reflection regime (w >> kappa).

For gamma0 = 0 this module is an exact oracle for the numeric engine;
for gamma0 > 0 it is exact for the ground-decoherence channel used by
`cptswap.model` but labeled approximate relative to generic
decoherence models, and the numeric path stays authoritative.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParameterError
from .model import DriveSpec, SystemParams

__all__ = [
    "SymmetricCase",
    "Regime",
    "RegimeLabel",
    "beta",
    "lambdas",
    "symmetric_spectra",
    "spectra_from_lambdas",
    "kappa_cpt",
    "efficiency",
    "efficiency_approx",
    "classify_regime",
    "normal_mode_frequency",
]


@dataclass(frozen=True)
class SymmetricCase:
    """Parameter bundle for the balanced configuration.

    ``gn2`` is g^2 N (rate^2); all other entries are rates in kappa
    units.  Use `from_params` to build one from validated system
    parameters, which rejects asymmetric inputs.
    """

    gn2: float
    gamma: float
    gamma0: float
    kappa: float
    omega_prime: float

    def __post_init__(self):
        if min(self.gn2, self.gamma, self.kappa, self.omega_prime) <= 0.0 or self.gamma0 < 0.0:
            raise ParameterError("symmetric case requires positive rates (gamma0 >= 0)")
        kc = self.kappa_cpt
        if not (0.0 < kc < self.kappa):
            warnings.warn(
                f"kappa_cpt = {kc:.3g} outside (0, kappa): no narrowed trapping window",
                stacklevel=3,
            )

    @classmethod
    def from_params(cls, params: SystemParams, drive: DriveSpec) -> "SymmetricCase":
        if not params.is_symmetric:
            raise ParameterError("closed-form solution requires g1=g2, kappa1=kappa2, gamma1=gamma2")
        if drive.omega1 != drive.omega2:
            raise ParameterError("closed-form solution requires balanced Rabi frequencies")
        return cls(
            gn2=params.g1 * params.g2 * params.n_atoms,
            gamma=params.gamma,
            gamma0=params.gamma0,
            kappa=params.kappa1,
            omega_prime=drive.omega_prime,
        )

    @property
    def cooperativity(self) -> float:
        return self.gn2 / (2.0 * self.kappa * self.gamma)

    @property
    def kappa_cpt(self) -> float:
        return kappa_cpt(self)


def beta(case: SymmetricCase, omega) -> complex | np.ndarray:
    """Dark-mode self-energy beta(w); exact evaluation."""
    w = np.asarray(omega, dtype=float)
    num = case.gn2 * (case.gamma0 - 1j * w)
    den = (case.gamma - 1j * w) * (case.gamma0 - 1j * w) + case.omega_prime**2
    out = num / den
    return out if out.shape else complex(out)


def lambdas(case: SymmetricCase, omega):
    """Bright and dark reflection coefficients (lam_p, lam_m).

    |lam_p| = 1 always; |lam_m| <= 1 (the medium is passive).
    """
    w = np.asarray(omega, dtype=float)
    b = beta(case, w)
    lam_p = (case.kappa + 1j * w) / (case.kappa - 1j * w)
    lam_m = (case.kappa + 1j * w - b) / (case.kappa - 1j * w + b)
    if w.shape:
        return lam_p, lam_m
    return complex(lam_p), complex(lam_m)


def spectra_from_lambdas(lam_p, lam_m, s1_in: float, s2_in: float):
    """Output spectra for given mode reflection coefficients.

    S_out = |lam_p + lam_m|^2/4 S_own + |lam_p - lam_m|^2/4 S_other
            + (1 - |lam_m|^2)/2.
    """
    keep = np.abs(lam_p + lam_m) ** 2 / 4.0
    swap = np.abs(lam_p - lam_m) ** 2 / 4.0
    fill = (1.0 - np.abs(lam_m) ** 2) / 2.0
    return keep * s1_in + swap * s2_in + fill, keep * s2_in + swap * s1_in + fill


def symmetric_spectra(case: SymmetricCase, inputs, omega, theta: float = 0.0):
    """Closed-form output spectra (S_X1, S_X2) at quadrature angle theta."""
    s1_in = inputs[0].quadrature_spectrum(theta)
    s2_in = inputs[1].quadrature_spectrum(theta)
    lam_p, lam_m = lambdas(case, omega)
    return spectra_from_lambdas(lam_p, lam_m, s1_in, s2_in)


def kappa_cpt(case: SymmetricCase) -> float:
    """Trapping-narrowed cavity halfwidth gamma0 + kappa O'^2/(g^2 N).

    Valid for O' << g sqrt(N); warns when O'^2 > 0.1 g^2 N.
    """
    if case.omega_prime**2 > 0.1 * case.gn2:
        warnings.warn(
            "kappa_cpt formula used outside its validity range (O' not << g sqrt(N))",
            stacklevel=2,
        )
    return case.gamma0 + case.kappa * case.omega_prime**2 / case.gn2


def efficiency(case: SymmetricCase, omega):
    """Exact swapping efficiency eta = |lam_p - lam_m|^2 / 4."""
    lam_p, lam_m = lambdas(case, omega)
    return np.abs(lam_p - lam_m) ** 2 / 4.0


def efficiency_approx(case: SymmetricCase, omega):
    """Scaling approximation kappa^2/(kappa^2+w^2) * w^2/(w^2+kappa_cpt^2)."""
    w = np.asarray(omega, dtype=float)
    kc = case.kappa_cpt
    out = (case.kappa**2 / (case.kappa**2 + w**2)) * (w**2 / (w**2 + kc**2))
    return out if out.shape else float(out)


def normal_mode_frequency(case: SymmetricCase) -> float:
    """Atom-cavity normal-mode (polariton) frequency g sqrt(N)."""
    return float(np.sqrt(case.gn2))


class Regime(Enum):
    TRANSPARENCY = "transparency"
    SWAPPING = "swapping"
    REFLECTION = "reflection"
    CROSSOVER = "crossover"


@dataclass(frozen=True)
class RegimeLabel:
    """Classification of an analysis frequency plus the band edges used."""

    regime: Regime
    kappa_cpt: float
    kappa: float

    @property
    def name(self) -> str:
        return self.regime.value


def classify_regime(case: SymmetricCase, omega: float) -> RegimeLabel:
    """Assign a frequency to transparency/swapping/reflection bands.

    The decade-wide crossover bands around kappa_cpt and kappa (factor 3
    on each side) are reported honestly instead of being forced into a
    neighboring regime.
    """
    kc = case.kappa_cpt
    if omega < kc / 3.0:
        reg = Regime.TRANSPARENCY
    elif 3.0 * kc < omega < case.kappa / 3.0:
        reg = Regime.SWAPPING
    elif omega > 3.0 * case.kappa:
        reg = Regime.REFLECTION
    else:
        reg = Regime.CROSSOVER
    return RegimeLabel(regime=reg, kappa_cpt=kc, kappa=case.kappa)
