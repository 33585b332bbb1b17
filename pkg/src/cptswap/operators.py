"""Single-atom operator algebra for the three-level Lambda system.

Everything in the linearized model reduces to bookkeeping on the nine
single-atom operators P_ij = |i><j| (i, j = 1..3): products obey
P_ij P_kl = delta_jk P_il, so drift generators, noise correlators and
basis rotations can all be evaluated with plain 3x3 matrix algebra.
This module provides that algebra plus the canonical ordering of the
twelve fluctuation operators used by the drift matrix.

Conventions
-----------
* States |1>, |2> are the stable ground states, |3> the excited state.
* The interaction Hamiltonian (rotating frame, resonant fields) is
  H = -(O1 P31 + O2 P32 + h.c.) with O_i = g_i <A_i> the intracavity
  Rabi frequencies; for drift/diffusion work the fields are frozen at
  their mean values.
* Damping enters through Lindblad channels: spontaneous emission
  |3> -> |1> at gamma1 and |3> -> |2> at gamma2, plus a ground-state
  decoherence channel at rate gamma0 acting in the drive-adapted
  dark/bright basis (see `ground_decoherence_channel`).
"""

from __future__ import annotations

import numpy as np

# Canonical ordering of the twelve fluctuation operators.  dP33 is
# eliminated through population conservation dP33 = -dP11 - dP22.
LABELS = (
    "P13", "P31", "P23", "P32", "P12", "P21", "P11", "P22",
    "A1", "A1d", "A2", "A2d",
)
N_OPS = 12
ATOMIC = tuple(range(8))
FIELDS = (8, 9, 10, 11)
IDX = {name: i for i, name in enumerate(LABELS)}

# Conjugation involution: each operator paired with its adjoint.
CONJ = (1, 0, 3, 2, 5, 4, 6, 7, 9, 8, 11, 10)

# (i, j) state labels of the eight atomic basis operators, 1-indexed.
ATOMIC_IJ = ((1, 3), (3, 1), (2, 3), (3, 2), (1, 2), (2, 1), (1, 1), (2, 2))


def conjugation_matrix(n: int = N_OPS) -> np.ndarray:
    """Permutation matrix of the conjugation involution."""
    p = np.zeros((n, n))
    for mu in range(n):
        p[mu, CONJ[mu]] = 1.0
    return p


def proj(i: int, j: int) -> np.ndarray:
    """Single-atom operator |i><j| as a 3x3 matrix (states 1-indexed)."""
    if i not in (1, 2, 3) or j not in (1, 2, 3):
        raise IndexError(f"state indices must be in 1..3, got ({i}, {j})")
    e = np.zeros((3, 3), dtype=complex)
    e[i - 1, j - 1] = 1.0
    return e


ATOMIC_MATS = tuple(proj(i, j) for (i, j) in ATOMIC_IJ)


def dark_bright_states(omega1: float, omega2: float) -> tuple[np.ndarray, np.ndarray]:
    """Drive-adapted dark and bright ground-state superpositions.

    |D> = (O2|1> - O1|2>)/O'  decouples from the light,
    |B> = (O1|1> + O2|2>)/O'  carries the full coupling O'.
    """
    op = np.hypot(omega1, omega2)
    if op <= 0.0:
        raise ValueError("dark/bright basis undefined for zero drive")
    dark = np.array([omega2, -omega1, 0.0], dtype=complex) / op
    bright = np.array([omega1, omega2, 0.0], dtype=complex) / op
    return dark, bright


def interaction_hamiltonian(a1: complex, a2: complex, g1: float, g2: float) -> np.ndarray:
    """Mean-field Hamiltonian -(g1 a1 P31 + g2 a2 P32 + h.c.), 3x3."""
    h = -(g1 * a1 * proj(3, 1) + g2 * a2 * proj(3, 2))
    return h + h.conj().T


def ground_decoherence_channel(gamma0: float, omega1: float, omega2: float) -> np.ndarray:
    """Lindblad operator for the ground-state coherence decay.

    Returns sqrt(2*gamma0) |D><B| in the drive-adapted basis.  This is
    the unique single-channel realization for which the dark/bright
    coherence Q = |D><B| damps at exactly gamma0 while the fully
    trapped state stays stationary, which is what the closed-form
    dark-mode treatment assumes; in particular it reproduces
    <F_Q F_Q^dag> = 2*gamma0*N at the trapped steady state.
    """
    dark, bright = dark_bright_states(omega1, omega2)
    return np.sqrt(2.0 * gamma0) * np.outer(dark, bright.conj())


def lindblad_channels(params, drive) -> list[np.ndarray]:
    """All single-atom jump operators for the given parameters."""
    chans = [
        np.sqrt(params.gamma1) * proj(1, 3),
        np.sqrt(params.gamma2) * proj(2, 3),
    ]
    if params.gamma0 > 0.0 and drive.omega_prime > 0.0:
        chans.append(
            ground_decoherence_channel(params.gamma0, drive.omega1, drive.omega2)
        )
    return chans


def adjoint_generator(h: np.ndarray, channels: list[np.ndarray]):
    """Heisenberg-picture drift map X -> i[H, X] + sum_k D_k^dag[X].

    Returns a closure acting on 3x3 operator matrices.
    """
    pre = [(L.conj().T, L, L.conj().T @ L) for L in channels]

    def act(x: np.ndarray) -> np.ndarray:
        out = 1j * (h @ x - x @ h)
        for ld, L, ldl in pre:
            out += ld @ x @ L - 0.5 * (ldl @ x + x @ ldl)
        return out

    return act


def liouvillian_matrix(h: np.ndarray, channels: list[np.ndarray]) -> np.ndarray:
    """Schroedinger-picture generator as a 9x9 matrix on vec(rho).

    vec() is row-major; used by the steady-state solver and by the
    independent null-space oracle in the tests.
    """
    eye = np.eye(3)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for L in channels:
        ldl = L.conj().T @ L
        sup += np.kron(L, L.conj())
        sup -= 0.5 * (np.kron(ldl, eye) + np.kron(eye, ldl.T))
    return sup


def mean_matrix(ss, n_atoms: float) -> np.ndarray:
    """Single-atom density matrix rho from collective steady-state means.

    rho[j-1, i-1] = <P_ij>/N, so that <X> = Tr(rho X) for any 3x3
    operator X.  For N = 0 the atomic means vanish and rho is zero.
    """
    if n_atoms == 0.0:
        return np.zeros((3, 3), dtype=complex)
    m = np.zeros((3, 3), dtype=complex)
    m[0, 0] = ss.p11
    m[1, 1] = ss.p22
    m[2, 2] = ss.p33
    m[2, 0] = ss.p13      # rho_31 = <P13>/N
    m[0, 2] = np.conj(ss.p13)
    m[2, 1] = ss.p23
    m[1, 2] = np.conj(ss.p23)
    m[1, 0] = ss.p12
    m[0, 1] = np.conj(ss.p12)
    return m / n_atoms


# ---------------------------------------------------------------------------
# Real parametrization of the conjugation-symmetric 12-vector, used by the
# time-domain stochastic oracle.  Pairs map to (Re, Im); self-conjugate
# operators (P11, P22) stay as single real coordinates.

REAL_LABELS = (
    "ReP13", "ImP13", "ReP23", "ImP23", "ReP12", "ImP12", "P11", "P22",
    "ReA1", "ImA1", "ReA2", "ImA2",
)

_PAIRS = ((0, 1), (2, 3), (4, 5), (8, 9), (10, 11))
_SELF = (6, 7)


def complex_from_real() -> np.ndarray:
    """Matrix J with v = J u mapping real coordinates to the complex basis."""
    j = np.zeros((N_OPS, N_OPS), dtype=complex)
    col = {}
    k = 0
    for (p, q) in _PAIRS:
        col[p] = (k, k + 1)
        k += 2
    # interleave to keep real coordinates aligned with REAL_LABELS order
    j[0, 0], j[0, 1] = 1.0, 1.0j
    j[1, 0], j[1, 1] = 1.0, -1.0j
    j[2, 2], j[2, 3] = 1.0, 1.0j
    j[3, 2], j[3, 3] = 1.0, -1.0j
    j[4, 4], j[4, 5] = 1.0, 1.0j
    j[5, 4], j[5, 5] = 1.0, -1.0j
    j[6, 6] = 1.0
    j[7, 7] = 1.0
    j[8, 8], j[8, 9] = 1.0, 1.0j
    j[9, 8], j[9, 9] = 1.0, -1.0j
    j[10, 10], j[10, 11] = 1.0, 1.0j
    j[11, 10], j[11, 11] = 1.0, -1.0j
    return j


def real_from_complex() -> np.ndarray:
    """Inverse of `complex_from_real` (u = K v)."""
    return np.linalg.inv(complex_from_real())
