"""Langevin diffusion matrix from generalized Einstein relations.

The atomic Langevin forces F_mu accompanying the damping terms are
delta-correlated, <F_mu(t) F_nu^dag(t')> = Gamma[mu, nu] delta(t - t'),
equivalently Gamma[mu, nu] is the coefficient of 2*pi*delta(w + w') in
the Fourier-domain correlator.  Gamma is obtained mechanically from the
drift map A (the same single-atom generator that builds the drift
matrix) through

    2 D(X, Y) = <A(X Y)> - <A(X) Y> - <X A(Y)>,

evaluated with the single-atom product algebra P_ij P_kl = d_jk P_il at
the steady-state means and scaled by N (independent identical atoms).
Field rows and columns are zero: vacuum input noise enters through the
input operators in `cptswap.spectra`, not through Langevin forces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import operators as op
from .errors import PositivityError
from .model import DriveSpec, SteadyState, SystemParams, _drive_of

__all__ = ["DiffusionMatrix", "atomic_product", "diffusion_matrix"]

_PSD_RTOL = 1e-10


def atomic_product(i: int, j: int, k: int, l: int) -> tuple[tuple[int, int], float]:
    """Single-atom product P_ij * P_kl = delta_jk * P_il.

    Returns ``((i, l), coefficient)`` with all indices in {1, 2, 3};
    collective products follow by atom independence.
    """
    for idx in (i, j, k, l):
        if idx not in (1, 2, 3):
            raise IndexError(f"state index out of range: {idx}")
    return (i, l), (1.0 if j == k else 0.0)


@dataclass(frozen=True)
class DiffusionMatrix:
    """Gram matrix Gamma[mu, nu] = strength of <F_mu F_nu^dag>."""

    gamma: np.ndarray
    params: SystemParams
    drive: DriveSpec | None = None

    def force_self_correlation(self, weights: np.ndarray) -> float:
        """Strength of <F F^dag> for the combination F = sum_mu w_mu F_mu."""
        w = np.asarray(weights, dtype=complex)
        return float(np.real(w @ self.gamma @ w.conj()))

    def dark_mode_force_strength(self) -> float:
        """Self-correlation of the dark dipole force F_- built from |D><3|."""
        if self.drive is None:
            return 0.0
        dark, _ = op.dark_bright_states(self.drive.omega1, self.drive.omega2)
        pd3 = np.outer(dark, np.array([0.0, 0.0, 1.0]))
        return self.force_self_correlation(_atomic_weights(pd3))

    def ground_coherence_force_strength(self) -> float:
        """Self-correlation of F_Q with Q = |D><B| (balanced drive: |-><+|)."""
        if self.drive is None:
            return 0.0
        dark, bright = op.dark_bright_states(self.drive.omega1, self.drive.omega2)
        q = np.outer(dark, bright.conj())
        return self.force_self_correlation(_atomic_weights(q))


def _atomic_weights(x: np.ndarray) -> np.ndarray:
    """Expansion coefficients of a 3x3 atomic operator over the 12-basis.

    Requires the P33 component to vanish (all operators used here live
    off the excited-state diagonal or are built from it explicitly).
    """
    w = np.zeros(op.N_OPS, dtype=complex)
    for mu, (i, j) in zip(op.ATOMIC, op.ATOMIC_IJ):
        w[mu] = x[i - 1, j - 1]
    return w


def _einstein_gram(gen, rho: np.ndarray, basis_mats) -> np.ndarray:
    """Gram matrix <F_a F_b^dag> for operators given as 3x3 matrices."""
    nb = len(basis_mats)
    gram = np.zeros((nb, nb), dtype=complex)
    acted = [gen(x) for x in basis_mats]
    for a, xa in enumerate(basis_mats):
        for b, xb in enumerate(basis_mats):
            ybd = xb.conj().T
            gram[a, b] = (
                np.trace(rho @ gen(xa @ ybd))
                - np.trace(rho @ (acted[a] @ ybd))
                - np.trace(rho @ (xa @ gen(ybd)))
            )
    return gram


def diffusion_matrix(
    params: SystemParams,
    ss: SteadyState,
    *,
    basis_mats=None,
) -> DiffusionMatrix:
    """Diffusion (noise-correlation) matrix at the given steady state.

    Parameters
    ----------
    params, ss
        System parameters and a consistent steady state.
    basis_mats
        Optional alternative list of eight 3x3 atomic operators replacing
        the canonical basis (used to verify basis covariance); the result
        is still embedded at the atomic indices, in the given order.

    Returns
    -------
    DiffusionMatrix
        12x12 Gram matrix, Hermitian positive semidefinite, linear in N,
        with zero field rows/columns.

    Raises
    ------
    PositivityError
        If the Gram matrix has an eigenvalue below -1e-10 times its
        largest eigenvalue: that signals an operator-algebra bug, not a
        numerical nuisance.
    """
    gamma = np.zeros((op.N_OPS, op.N_OPS), dtype=complex)
    n = params.n_atoms
    drive = _drive_of(ss, params) if n > 0.0 else None

    if n > 0.0:
        h = op.interaction_hamiltonian(ss.a1, ss.a2, params.g1, params.g2)
        channels = op.lindblad_channels(params, drive)
        gen = op.adjoint_generator(h, channels)
        rho = op.mean_matrix(ss, n)
        mats = list(basis_mats) if basis_mats is not None else list(op.ATOMIC_MATS)
        block = n * _einstein_gram(gen, rho, mats)
        gamma[np.ix_(op.ATOMIC, op.ATOMIC)] = block

    herm_defect = float(np.abs(gamma - gamma.conj().T).max())
    gamma = 0.5 * (gamma + gamma.conj().T)

    evals, evecs = np.linalg.eigh(gamma)
    top = float(evals.max()) if evals.size else 0.0
    floor = -_PSD_RTOL * max(top, 1e-300)
    if evals.min() < floor:
        raise PositivityError(
            f"diffusion matrix not PSD: min eigenvalue {evals.min():.3e} "
            f"vs max {top:.3e} (hermiticity defect {herm_defect:.3e})"
        )
    if evals.size and evals.min() < 0.0:
        evals = np.clip(evals, 0.0, None)
        gamma = (evecs * evals) @ evecs.conj().T

    return DiffusionMatrix(gamma=gamma, params=params, drive=drive)
