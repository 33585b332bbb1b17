"""Frequency response, input-output composition and quadrature spectra.

Fourier convention: x(w) = integral x(t) exp(+i w t) dt, so a linear
system dv/dt = M v + s(t) solves to v(w) = R(w) s(w) with
R(w) = (-i w I - M)^(-1); the cavity response then carries the
(kappa - i w) denominators of the closed-form solution.

Quadratures are X_theta = dA e^(-i theta) + dA^dag e^(i theta) with the
angle measured from each field's own mean output phase, and spectra are
normalized so that vacuum gives S = 1 (shot noise) at every frequency:

    <dX_theta(w) dX_theta(w')> = 2 pi delta(w + w') S_X(w).

Two-frequency correlators of the sideband vector are carried as Gram
matrices G[mu, nu] = strength of <v_mu(w) v_nu^dag(w')>, for which the
output assembly is simply G_out = T_in G_in T_in^dag + T_at Gamma T_at^dag.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import operators as op
from .errors import IllConditionedError, ParameterError
from .model import DriftMatrix, SteadyState, SystemParams

__all__ = [
    "GaussianInputState",
    "TransferSet",
    "SpectrumResult",
    "response_matrix",
    "output_transfer",
    "input_correlation",
    "quadrature_spectrum",
]

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class GaussianInputState:
    """Broadband Gaussian description of one input beam.

    ``r`` is the squeeze factor (r = 0 gives a coherent/vacuum beam) and
    ``phi`` the squeeze angle measured from the beam's mean-field phase;
    phi = 0 squeezes the amplitude quadrature.  The state is minimal
    uncertainty: S_theta * S_(theta+pi/2) = 1 for every theta.
    """

    mean: complex = 0.0
    r: float = 0.0
    phi: float = 0.0
    broadband: bool = True

    def __post_init__(self):
        if self.r < 0.0:
            raise ParameterError(f"squeeze factor must be >= 0, got {self.r}")

    @classmethod
    def coherent(cls, mean: complex = 0.0) -> "GaussianInputState":
        return cls(mean=mean)

    @classmethod
    def squeezed(cls, r: float, phi: float = 0.0, mean: complex = 0.0) -> "GaussianInputState":
        return cls(mean=mean, r=r, phi=phi)

    @classmethod
    def from_squeeze_db(cls, db: float, phi: float = 0.0, mean: complex = 0.0) -> "GaussianInputState":
        """Squeezed state with S_(theta=phi) = 10^(-db/10)."""
        s0 = 10.0 ** (-db / 10.0)
        return cls(mean=mean, r=-0.5 * np.log(s0), phi=phi)

    def quadrature_spectrum(self, theta: float) -> float:
        """Input spectrum S_theta = cosh 2r - sinh 2r cos 2(theta - phi).

        Both theta and phi are measured from the beam's mean-field phase,
        so the mean drops out of this expression.
        """
        return float(
            np.cosh(2.0 * self.r)
            - np.sinh(2.0 * self.r) * np.cos(2.0 * (theta - self.phi))
        )

    def gram(self) -> np.ndarray:
        """2x2 sideband Gram block over (a, a^dag).

        Entries: <a a^dag> = cosh^2 r on the diagonal, <a^dag a> = sinh^2 r,
        and the anomalous <a a> = -e^(2i(phi + arg mean)) sinh r cosh r.
        """
        ch, sh = np.cosh(self.r), np.sinh(self.r)
        ref = np.angle(self.mean) if self.mean != 0.0 else 0.0
        anom = -np.exp(2.0j * (self.phi + ref)) * sh * ch
        return np.array([[ch * ch, anom], [np.conj(anom), sh * sh]], dtype=complex)


@dataclass(frozen=True)
class TransferSet:
    """Sideband transfer matrices at one analysis frequency.

    ``t_in`` (4x4) maps the input vector (dA1in, dA1in+, dA2in, dA2in+)
    to the output vector; ``t_at`` (4x12) maps the Langevin force vector.
    """

    omega: float
    t_in: np.ndarray
    t_at: np.ndarray


@dataclass(frozen=True)
class SpectrumResult:
    """Output quadrature spectra over a frequency grid (shot noise = 1)."""

    omega: np.ndarray
    theta: float
    s_x1: np.ndarray
    s_x2: np.ndarray
    sum_residual: np.ndarray | None = None
    meta: dict = field(default_factory=dict)


def response_matrix(m: DriftMatrix | np.ndarray, omega: float) -> np.ndarray:
    """Sideband response R(w) = (-i w I - M)^(-1).

    Raises `IllConditionedError` when the solve sits within condition
    number 1e12 of an undamped pole, naming the nearest resonance.
    """
    mm = m.m if isinstance(m, DriftMatrix) else m
    a = -1j * omega * np.eye(mm.shape[0]) - mm
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        eigs = np.linalg.eigvals(mm)
        nearest = eigs[np.argmin(np.abs(eigs - (-1j * omega)))]
        raise IllConditionedError(
            f"response at omega = {omega:g} is within condition {cond:.2e} of the "
            f"resonance at omega = {(1j * nearest):g} (drift eigenvalue {nearest:g})"
        )
    return np.linalg.inv(a)


def _io_matrices(params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Input-coupling (12x4) and output-projection (4x12) matrices."""
    lin = np.zeros((op.N_OPS, 4))
    sout = np.zeros((4, op.N_OPS))
    roots = (
        np.sqrt(2.0 * params.kappa1),
        np.sqrt(2.0 * params.kappa1),
        np.sqrt(2.0 * params.kappa2),
        np.sqrt(2.0 * params.kappa2),
    )
    for k, idx in enumerate(op.FIELDS):
        lin[idx, k] = roots[k]
        sout[k, idx] = roots[k]
    return lin, sout


def output_transfer(
    params: SystemParams,
    ss: SteadyState,
    m: DriftMatrix,
    omega: float,
) -> TransferSet:
    """Compose cavity input coupling, response and output relation.

    Implements A_out = sqrt(2 kappa) A - A_in on top of R(w):
    T_in = S R(w) L - I and T_at = S R(w).
    """
    r = response_matrix(m, omega)
    lin, sout = _io_matrices(params)
    sr = sout @ r
    return TransferSet(omega=omega, t_in=sr @ lin - np.eye(4), t_at=sr)


def input_correlation(inputs) -> np.ndarray:
    """Broadband sideband Gram matrix of the two independent input beams.

    ``inputs`` is the pair of `GaussianInputState`; cross-field blocks are
    zero (no input entanglement).  Returns the 4x4 matrix over
    (a1, a1^dag, a2, a2^dag) with G[mu, nu] = strength of <v_mu v_nu^dag>.
    """
    if len(inputs) != 2:
        raise ParameterError("exactly two input beams are required")
    g = np.zeros((4, 4), dtype=complex)
    g[:2, :2] = inputs[0].gram()
    g[2:, 2:] = inputs[1].gram()
    return g


def _quadrature_from_gram(gram: np.ndarray, pair: tuple[int, int], theta: float) -> float:
    """S_theta of one field from its output Gram block."""
    a, ad = pair
    c_aad = gram[a, a]
    c_ada = gram[ad, ad]
    c_aa = gram[a, ad]
    return float(np.real(c_aad + c_ada + 2.0 * np.real(np.exp(-2.0j * theta) * c_aa)))


def output_mean_phases(params: SystemParams, ss: SteadyState) -> tuple[float, float]:
    """Phases of the mean output amplitudes (quadrature references)."""
    outs = (
        np.sqrt(2.0 * params.kappa1) * ss.a1 - ss.a1_in,
        np.sqrt(2.0 * params.kappa2) * ss.a2 - ss.a2_in,
    )
    return tuple(float(np.angle(o)) if o != 0.0 else 0.0 for o in outs)


def quadrature_spectrum(
    params: SystemParams,
    ss: SteadyState,
    inputs,
    omega_grid: np.ndarray,
    theta: float = 0.0,
    *,
    drift: DriftMatrix | None = None,
    diffusion=None,
    with_sum_residual: bool = True,
) -> SpectrumResult:
    """Output quadrature noise spectra of both fields over a frequency grid.

    Per frequency the output sideband Gram matrix is assembled as
    T_in G_in T_in^dag + T_at Gamma T_at^dag and the quadrature spectrum
    read off as S = <a a^dag> + <a^dag a> + 2 Re(e^(-2i theta) <a a>)
    per output field, with theta measured from the field's mean output
    phase.  Precomputed ``drift``/``diffusion`` may be passed to avoid
    rebuilding them per call.

    Returns a `SpectrumResult`; when ``with_sum_residual`` is set, the
    residual (S1 + S2)_out - (S1 + S2)_in is attached.
    """
    from .model import build_drift_matrix
    from .noise import diffusion_matrix

    m = drift if drift is not None else build_drift_matrix(params, ss)
    gam = diffusion if diffusion is not None else diffusion_matrix(params, ss)
    g_in = input_correlation(inputs)
    phi1, phi2 = output_mean_phases(params, ss)

    omega_grid = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    s1 = np.empty_like(omega_grid)
    s2 = np.empty_like(omega_grid)
    for k, w in enumerate(omega_grid):
        t = output_transfer(params, ss, m, w)
        gram_out = t.t_in @ g_in @ t.t_in.conj().T + t.t_at @ gam.gamma @ t.t_at.conj().T
        s1[k] = _quadrature_from_gram(gram_out, (0, 1), theta + phi1)
        s2[k] = _quadrature_from_gram(gram_out, (2, 3), theta + phi2)

    resid = None
    if with_sum_residual:
        in1 = inputs[0].quadrature_spectrum(theta)
        in2 = inputs[1].quadrature_spectrum(theta)
        resid = (s1 + s2) - (in1 + in2)
    return SpectrumResult(
        omega=omega_grid, theta=theta, s_x1=s1, s_x2=s2, sum_residual=resid,
        meta={"inputs": tuple(inputs)},
    )
