"""Mean-field steady state and linearized drift of the atom-cavity system.

The physical system is an ensemble of N three-level Lambda atoms inside a
single-ended cavity, with two resonant intracavity fields A1, A2 driving
the |1>-|3> and |2>-|3> transitions.  The Heisenberg-Langevin equations
for the collective operators P_ij and the fields are

    dP13/dt = -gamma P13 + i g1 A1 (P11 - P33) + i g2 A2 P12 + F13
    dP23/dt = -gamma P23 + i g2 A2 (P22 - P33) + i g1 A1 P21 + F23
    dP12/dt = -gamma0-channel - i g1 A1 P32 + i g2 A2^dag P13 + F12
    dP11/dt = gamma1 P33 + i g1 A1^dag P13 - i g1 A1 P31 + F11
    dP22/dt = gamma2 P33 + i g2 A2^dag P23 - i g2 A2 P32 + F22
    dA_i/dt = -kappa_i A_i + i g_i P_i3 + sqrt(2 kappa_i) A_i^in

with gamma = (gamma1 + gamma2)/2 and gamma0 the ground-state coherence
decay rate.  The gamma0 damping acts in the drive-adapted dark/bright
basis (see `cptswap.operators.ground_decoherence_channel`) so that the
dark/bright coherence damps at exactly gamma0, which is the form the
closed-form solution of `cptswap.analytic` assumes.

Everything is expressed in units of a reference cavity rate kappa
(kappa1 = kappa2 = 1 by default); the drive is parametrized directly by
the intracavity Rabi frequencies O_i = g_i <A_i>, with the input
amplitudes back-solved from the cavity equations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import operators as op
from .errors import ConvergenceError, ParameterError

__all__ = [
    "SystemParams",
    "DriveSpec",
    "SteadyState",
    "FluctuationBasis",
    "DriftMatrix",
    "validate_params",
    "solve_steady_state",
    "build_drift_matrix",
]

_SS_TOL = 1e-12
_SS_MAX_ITER = 200


@dataclass(frozen=True)
class SystemParams:
    """Atom-cavity rates and couplings, all in units of the reference kappa.

    The atom number enters physical predictions only through g^2 N and
    related products, so (g, N) may be rescaled freely at fixed g*sqrt(N);
    the factory `validate_params` defaults to N = 1.
    """

    g1: float
    g2: float
    n_atoms: float
    gamma1: float
    gamma2: float
    gamma0: float
    kappa1: float = 1.0
    kappa2: float = 1.0

    @property
    def gamma(self) -> float:
        """Optical dipole decay rate (gamma1 + gamma2)/2."""
        return 0.5 * (self.gamma1 + self.gamma2)

    @property
    def g_sqrt_n(self) -> float:
        return np.sqrt(self.g1 * self.g2 * self.n_atoms)

    @property
    def cooperativity(self) -> float:
        """C = g^2 N / (2 kappa gamma), quoted for the symmetric case."""
        kappa = np.sqrt(self.kappa1 * self.kappa2)
        return self.g1 * self.g2 * self.n_atoms / (2.0 * kappa * self.gamma)

    @property
    def is_symmetric(self) -> bool:
        return (
            self.g1 == self.g2
            and self.kappa1 == self.kappa2
            and self.gamma1 == self.gamma2
        )


def validate_params(
    g_sqrtN: float | None = None,
    gamma: float | None = None,
    gamma0: float = 0.0,
    kappa: float = 1.0,
    *,
    gamma1: float | None = None,
    gamma2: float | None = None,
    g1: float | None = None,
    g2: float | None = None,
    n_atoms: float = 1.0,
    kappa1: float | None = None,
    kappa2: float | None = None,
) -> SystemParams:
    """Validate a raw parameter record and fill in derived quantities.

    Two entry styles are accepted: the figure-caption style
    (``g_sqrtN``, ``gamma``, ``gamma0``, ``kappa``) or explicit
    per-transition values.  Hard violations (non-positive kappa or
    gamma, negative gamma0, negative N) raise `ParameterError`; soft
    violations (gamma0 >= gamma, zero optical depth) warn.
    """
    if kappa1 is None:
        kappa1 = kappa
    if kappa2 is None:
        kappa2 = kappa
    if gamma1 is None or gamma2 is None:
        if gamma is None:
            raise ParameterError("either gamma or the gamma1/gamma2 split is required")
        gamma1 = gamma if gamma1 is None else gamma1
        gamma2 = gamma if gamma2 is None else gamma2
    if g1 is None or g2 is None:
        if g_sqrtN is None:
            raise ParameterError("either g_sqrtN or explicit g1/g2 is required")
        if n_atoms < 0.0:
            raise ParameterError(f"atom number must be >= 0, got {n_atoms}")
        g = g_sqrtN / np.sqrt(n_atoms) if n_atoms > 0.0 else g_sqrtN
        g1 = g if g1 is None else g1
        g2 = g if g2 is None else g2

    if kappa1 <= 0.0 or kappa2 <= 0.0:
        raise ParameterError(f"cavity decay rates must be > 0, got ({kappa1}, {kappa2})")
    if gamma1 <= 0.0 or gamma2 <= 0.0:
        raise ParameterError(f"excited-state decay branches must be > 0, got ({gamma1}, {gamma2})")
    if gamma0 < 0.0:
        raise ParameterError(f"ground-state decoherence rate must be >= 0, got {gamma0}")
    if n_atoms < 0.0:
        raise ParameterError(f"atom number must be >= 0, got {n_atoms}")
    if g1 < 0.0 or g2 < 0.0:
        raise ParameterError(f"couplings must be >= 0, got ({g1}, {g2})")

    params = SystemParams(g1, g2, n_atoms, gamma1, gamma2, gamma0, kappa1, kappa2)

    if gamma0 >= params.gamma:
        warnings.warn(
            f"gamma0 = {gamma0} is not small compared to gamma = {params.gamma}; "
            "the model assumes gamma0 << gamma1,2",
            stacklevel=2,
        )
    if params.n_atoms > 0.0 and g1 * g2 * n_atoms == 0.0:
        warnings.warn("g^2 N vanishes although N > 0 (decoupled atoms)", stacklevel=2)
    return params


@dataclass(frozen=True)
class DriveSpec:
    """Target intracavity Rabi frequencies O_i = g_i <A_i> (rate units).

    ``phase`` applies a common phase to both intracavity mean fields;
    the relative drive phase is fixed to zero (in-phase drives).
    """

    omega1: float
    omega2: float
    phase: float = 0.0

    def __post_init__(self):
        if self.omega1 < 0.0 or self.omega2 < 0.0:
            raise ParameterError("Rabi frequencies must be >= 0")
        if self.omega1 == 0.0 and self.omega2 == 0.0:
            raise ParameterError("at least one drive must be nonzero")

    @property
    def omega_prime(self) -> float:
        return float(np.hypot(self.omega1, self.omega2))

    def check_saturation(self, params: SystemParams) -> None:
        """Warn when the two-photon transition is not safely saturated.

        The saturation requirement is interpreted as O'^2 >> gamma*gamma0
        (the printed condition is not dimensionally consistent); the
        warning threshold is O'^2 <= 10 gamma gamma0.
        """
        if params.gamma0 > 0.0 and self.omega_prime**2 <= 10.0 * params.gamma * params.gamma0:
            warnings.warn(
                "drive too weak to saturate the two-photon transition: "
                f"O'^2 = {self.omega_prime ** 2:.3g} <= 10*gamma*gamma0 = "
                f"{10 * params.gamma * params.gamma0:.3g}",
                stacklevel=2,
            )


@dataclass(frozen=True)
class SteadyState:
    """Mean values of the collective operators and field amplitudes.

    Populations and coherences are in atom-number units (<P11> + <P22> +
    <P33> = N); field amplitudes are the intracavity means with the
    input amplitudes back-solved from the cavity equations.
    """

    p11: float
    p22: float
    p33: float
    p13: complex
    p23: complex
    p12: complex
    a1: complex
    a2: complex
    a1_in: complex
    a2_in: complex
    residual: float = 0.0

    @property
    def total_population(self) -> float:
        return self.p11 + self.p22 + self.p33


class FluctuationBasis:
    """Canonical index map of the twelve fluctuation operators.

    Order: dP13, dP31, dP23, dP32, dP12, dP21, dP11, dP22, dA1, dA1+,
    dA2, dA2+.  dP33 is eliminated via dP33 = -dP11 - dP22.  The
    conjugation permutation pairs each operator with its adjoint
    (dP11, dP22 are self-paired).
    """

    labels = op.LABELS
    size = op.N_OPS
    conjugation = op.CONJ
    atomic = op.ATOMIC
    fields = op.FIELDS
    index = op.IDX

    @staticmethod
    def conjugation_matrix() -> np.ndarray:
        return op.conjugation_matrix()


@dataclass(frozen=True)
class DriftMatrix:
    """Drift matrix M with d(dv)/dt = M dv + input couplings + Langevin forces."""

    m: np.ndarray
    params: SystemParams
    drive: DriveSpec | None

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.m)

    def max_real_eigenvalue(self) -> float:
        return float(self.eigenvalues().real.max())

    def conjugation_defect(self) -> float:
        """Max deviation from P M P = conj(M) with P the involution."""
        p = op.conjugation_matrix()
        return float(np.abs(p @ self.m @ p - self.m.conj()).max())


def _dark_state_rho(drive: DriveSpec) -> np.ndarray:
    dark, _ = op.dark_bright_states(drive.omega1, drive.omega2)
    return np.outer(dark, dark.conj())


def _hermitian_basis() -> list[np.ndarray]:
    """Orthonormal traceless Hermitian 3x3 basis (Gell-Mann style)."""
    basis = []
    for i in range(3):
        for j in range(i + 1, 3):
            s = np.zeros((3, 3), dtype=complex)
            s[i, j] = s[j, i] = 1.0 / np.sqrt(2.0)
            basis.append(s)
            a = np.zeros((3, 3), dtype=complex)
            a[i, j] = -1.0j / np.sqrt(2.0)
            a[j, i] = 1.0j / np.sqrt(2.0)
            basis.append(a)
    d1 = np.diag([1.0, -1.0, 0.0]).astype(complex) / np.sqrt(2.0)
    d2 = np.diag([1.0, 1.0, -2.0]).astype(complex) / np.sqrt(6.0)
    basis.extend([d1, d2])
    return basis


def solve_steady_state(params: SystemParams, drive: DriveSpec) -> SteadyState:
    """Self-consistent mean values at fixed intracavity Rabi frequencies.

    The intracavity amplitudes are fixed to <A_i> = O_i/g_i (common
    phase from ``drive.phase``), which makes the atomic mean-value
    equations the steady state of a single-atom Lindblad generator with
    frozen classical fields.  A damped Newton iteration, seeded from the
    analytic dark-state solution, refines vec(rho) until the residual of
    all mean-value equations is below 1e-12 (relative, in units of the
    largest rate); the input amplitudes are then back-solved from the
    cavity equations.

    Raises
    ------
    ParameterError
        If O' = 0 while N > 0 (the trapping pump is undefined).
    ConvergenceError
        If the residual target is not met within 200 iterations.
    """
    phase = np.exp(1j * drive.phase)
    n = params.n_atoms

    if n == 0.0:
        a1 = (drive.omega1 / params.g1 if params.g1 > 0.0 else 0.0) * phase
        a2 = (drive.omega2 / params.g2 if params.g2 > 0.0 else 0.0) * phase
        return SteadyState(
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, a1, a2,
            np.sqrt(params.kappa1 / 2.0) * a1,
            np.sqrt(params.kappa2 / 2.0) * a2,
        )

    if drive.omega_prime == 0.0:
        raise ParameterError("O' = 0 with N > 0: the trapped steady state is undefined")
    if params.g1 == 0.0 and drive.omega1 > 0.0 or params.g2 == 0.0 and drive.omega2 > 0.0:
        raise ParameterError("cannot realize a finite Rabi frequency with zero coupling")
    drive.check_saturation(params)

    a1 = (drive.omega1 / params.g1 if params.g1 > 0.0 else 0.0) * phase
    a2 = (drive.omega2 / params.g2 if params.g2 > 0.0 else 0.0) * phase

    h = op.interaction_hamiltonian(a1, a2, params.g1, params.g2)
    channels = op.lindblad_channels(params, drive)
    sup = op.liouvillian_matrix(h, channels)

    rates = [params.gamma1, params.gamma2, params.gamma0,
             params.kappa1, params.kappa2, drive.omega_prime]
    scale = max(rates)

    rho = _dark_state_rho(drive)
    basis = _hermitian_basis()
    # residual projected on the traceless Hermitian directions; the trace
    # component is conserved exactly by the generator
    jac = np.empty((len(basis), len(basis)))
    for k, bk in enumerate(basis):
        col = (sup @ bk.reshape(-1)).reshape(3, 3)
        for r, br in enumerate(basis):
            jac[r, k] = np.real(np.trace(br.conj().T @ col))

    def residual_vec(r):
        drho = (sup @ r.reshape(-1)).reshape(3, 3)
        return np.array([np.real(np.trace(b.conj().T @ drho)) for b in basis])

    res = residual_vec(rho)
    it = 0
    while np.abs(res).max() > _SS_TOL * scale and it < _SS_MAX_ITER:
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        damping = 1.0
        for _ in range(30):
            cand = rho + damping * sum(s * b for s, b in zip(step, basis))
            new_res = residual_vec(cand)
            if np.abs(new_res).max() < np.abs(res).max():
                rho, res = cand, new_res
                break
            damping *= 0.5
        else:
            break
        it += 1

    resid = float(np.abs(res).max() / scale)
    if resid > _SS_TOL:
        raise ConvergenceError(
            f"steady state did not converge: residual {resid:.3e} after {it} iterations",
            residual=resid,
        )

    # collective means <P_ij> = N * Tr(rho P_ij) = N * rho[j, i]
    p13 = n * rho[2, 0]
    p23 = n * rho[2, 1]
    a1_in = (params.kappa1 * a1 - 1j * params.g1 * p13) / np.sqrt(2.0 * params.kappa1)
    a2_in = (params.kappa2 * a2 - 1j * params.g2 * p23) / np.sqrt(2.0 * params.kappa2)
    return SteadyState(
        p11=float(n * rho[0, 0].real),
        p22=float(n * rho[1, 1].real),
        p33=float(n * rho[2, 2].real),
        p13=complex(p13),
        p23=complex(p23),
        p12=complex(n * rho[1, 0]),
        a1=complex(a1),
        a2=complex(a2),
        a1_in=complex(a1_in),
        a2_in=complex(a2_in),
        residual=resid,
    )


def _drive_of(ss: SteadyState, params: SystemParams) -> DriveSpec:
    o1 = abs(params.g1 * ss.a1)
    o2 = abs(params.g2 * ss.a2)
    phase = np.angle(ss.a1) if o1 >= o2 else np.angle(ss.a2)
    return DriveSpec(o1, o2, phase)


def build_drift_matrix(params: SystemParams, ss: SteadyState) -> DriftMatrix:
    """Linearized drift over the canonical fluctuation basis.

    The atomic block is the single-atom Heisenberg generator with the
    fields frozen at their means (dP33 eliminated); the atom-field
    columns carry the linearized Hamiltonian coupling through the
    steady-state means, and the field rows are the cavity response.
    For N = 0 the atom-field couplings are dropped entirely and M is
    block-diagonal with field blocks -kappa_i.
    """
    n = params.n_atoms
    m = np.zeros((op.N_OPS, op.N_OPS), dtype=complex)

    drive = _drive_of(ss, params) if n > 0.0 else None
    h = op.interaction_hamiltonian(ss.a1, ss.a2, params.g1, params.g2)
    if drive is not None:
        channels = op.lindblad_channels(params, drive)
    else:
        channels = [
            np.sqrt(params.gamma1) * op.proj(1, 3),
            np.sqrt(params.gamma2) * op.proj(2, 3),
        ]
    gen = op.adjoint_generator(h, channels)

    # atomic-atomic block with dP33 -> -dP11 - dP22
    for mu in op.ATOMIC:
        out = gen(op.ATOMIC_MATS[mu])
        coeff = {ij: out[ij[0] - 1, ij[1] - 1] for ij in op.ATOMIC_IJ}
        c33 = out[2, 2]
        coeff[(1, 1)] -= c33
        coeff[(2, 2)] -= c33
        for nu, ij in enumerate(op.ATOMIC_IJ):
            m[mu, nu] = coeff[ij]

    if n > 0.0:
        # atom <- field columns: -i g <[P_ab, X]> per field operator, with
        # collective means <P_ab> = N Tr(rho E_ab)
        rho = op.mean_matrix(ss, n)
        couplers = (
            (op.IDX["A1"], params.g1, op.proj(3, 1)),
            (op.IDX["A1d"], params.g1, op.proj(1, 3)),
            (op.IDX["A2"], params.g2, op.proj(3, 2)),
            (op.IDX["A2d"], params.g2, op.proj(2, 3)),
        )
        for mu in op.ATOMIC:
            x = op.ATOMIC_MATS[mu]
            for col, g, pab in couplers:
                comm = pab @ x - x @ pab
                m[mu, col] = -1j * g * n * np.trace(rho @ comm)
        # field <- atom couplings dA_i/dt += i g_i dP_i3
        m[op.IDX["A1"], op.IDX["P13"]] = 1j * params.g1
        m[op.IDX["A1d"], op.IDX["P31"]] = -1j * params.g1
        m[op.IDX["A2"], op.IDX["P23"]] = 1j * params.g2
        m[op.IDX["A2d"], op.IDX["P32"]] = -1j * params.g2

    for name, kappa in (("A1", params.kappa1), ("A1d", params.kappa1),
                        ("A2", params.kappa2), ("A2d", params.kappa2)):
        i = op.IDX[name]
        m[i, i] += -kappa

    return DriftMatrix(m=m, params=params, drive=drive)
