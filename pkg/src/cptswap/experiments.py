"""Reference pipelines: swap spectra, efficiency maps, consistency checks
and an independent time-domain stochastic oracle.

The pipelines bundle the lower-level modules into the three standard
studies of the system (balanced-drive output spectra over the full
sideband range, swapping efficiency over frequency and cooperativity,
and efficiency over an unbalanced-drive grid) plus two verification
tools: an analytic-vs-numeric consistency report and a Monte-Carlo
estimate of the spectra from integrating the classical (c-number)
Langevin system in the time domain.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov

from . import operators as op
from .analytic import SymmetricCase, classify_regime, efficiency, symmetric_spectra
from .errors import ParameterError
from .model import (
    DriveSpec,
    SystemParams,
    build_drift_matrix,
    solve_steady_state,
    validate_params,
)
from .noise import diffusion_matrix
from .spectra import (
    GaussianInputState,
    input_correlation,
    output_mean_phases,
    quadrature_spectrum,
)

__all__ = [
    "AxisSpec",
    "EfficiencyMap",
    "ConsistencyReport",
    "OracleEstimate",
    "OracleResult",
    "default_omega_grid",
    "baseline_inputs",
    "run_swap_spectrum",
    "run_efficiency_map",
    "run_asymmetric_map",
    "consistency_report",
    "stochastic_oracle",
    "numeric_efficiency",
]

# exact -3 dB: e^(-2r) = 1/2
R_3DB = 0.5 * np.log(2.0)


def default_omega_grid(points: int = 400) -> np.ndarray:
    """Log-spaced sideband grid over [1e-4, 1e3] kappa (figure range)."""
    return np.logspace(-4.0, 3.0, points)


@dataclass(frozen=True)
class AxisSpec:
    """One scan axis: name, range, number of points and spacing."""

    name: str
    min: float
    max: float
    points: int
    spacing: str = "log"

    def __post_init__(self):
        if self.spacing not in ("log", "linear"):
            raise ParameterError(f"axis spacing must be 'log' or 'linear', got {self.spacing!r}")
        if self.points < 1 or self.max < self.min:
            raise ParameterError(f"bad axis range for {self.name}")
        if self.spacing == "log" and self.min <= 0.0:
            raise ParameterError(f"log axis {self.name} requires min > 0")

    def grid(self) -> np.ndarray:
        if self.points == 1:
            return np.array([0.5 * (self.min + self.max)])
        if self.spacing == "log":
            return np.logspace(np.log10(self.min), np.log10(self.max), self.points)
        return np.linspace(self.min, self.max, self.points)


@dataclass
class EfficiencyMap:
    """Gridded swapping efficiency with axis metadata.

    ``values[i, j]`` corresponds to ``axes[0].grid()[i]`` and
    ``axes[1].grid()[j]``.  Failed cells hold NaN and are counted in
    ``failures`` with a short log entry each.
    """

    axes: tuple[AxisSpec, AxisSpec]
    values: np.ndarray
    fixed: dict = field(default_factory=dict)
    failures: int = 0
    failure_log: list = field(default_factory=list)

    def check_range(self, slack: float = 1e-9) -> bool:
        vals = self.values[np.isfinite(self.values)]
        return bool(((vals >= -slack) & (vals <= 1.0 + slack)).all())


@dataclass
class ConsistencyReport:
    """Analytic-vs-numeric deviation summary over a frequency grid."""

    tolerance: float
    max_rel_dev: float
    mean_rel_dev: float
    passed: bool
    offending_omegas: np.ndarray
    n_points: int = 0


def baseline_inputs(ss=None, squeeze_r: float = R_3DB, phi: float = 0.0):
    """Coherent beam on field 1, amplitude-squeezed beam on field 2."""
    m1 = ss.a1_in if ss is not None else 0.0
    m2 = ss.a2_in if ss is not None else 0.0
    return (
        GaussianInputState.coherent(m1),
        GaussianInputState.squeezed(r=squeeze_r, phi=phi, mean=m2),
    )


@dataclass
class SwapSpectrumRun:
    """Numeric and closed-form spectra for one balanced configuration."""

    omega: np.ndarray
    theta: float
    numeric_s1: np.ndarray
    numeric_s2: np.ndarray
    analytic_s1: np.ndarray
    analytic_s2: np.ndarray
    regimes: list
    sum_residual: np.ndarray
    case: SymmetricCase
    inputs: tuple


def run_swap_spectrum(
    params: SystemParams,
    drive: DriveSpec,
    inputs=None,
    omega_grid: np.ndarray | None = None,
    theta: float = 0.0,
) -> SwapSpectrumRun:
    """Output spectra of both fields via the numeric and closed-form paths.

    The default configuration reproduces the balanced-drive benchmark:
    coherent field 1, 3 dB amplitude-squeezed field 2, spectra at
    theta = 0 over the default grid.
    """
    ss = solve_steady_state(params, drive)
    if inputs is None:
        inputs = baseline_inputs(ss)
    grid = default_omega_grid() if omega_grid is None else np.asarray(omega_grid, dtype=float)

    numeric = quadrature_spectrum(params, ss, inputs, grid, theta)
    case = SymmetricCase.from_params(params, drive)
    ana1, ana2 = symmetric_spectra(case, inputs, grid, theta)
    regimes = [classify_regime(case, w) for w in grid]
    return SwapSpectrumRun(
        omega=grid,
        theta=theta,
        numeric_s1=numeric.s_x1,
        numeric_s2=numeric.s_x2,
        analytic_s1=np.asarray(ana1),
        analytic_s2=np.asarray(ana2),
        regimes=regimes,
        sum_residual=numeric.sum_residual,
        case=case,
        inputs=tuple(inputs),
    )


def numeric_efficiency(
    params: SystemParams,
    drive: DriveSpec,
    omega: float,
    inputs=None,
) -> float:
    """Swapping efficiency (1 - S_X1_out)/(1 - S_X2_in) from the full model."""
    ss = solve_steady_state(params, drive)
    if inputs is None:
        inputs = baseline_inputs(ss)
    s2_in = inputs[1].quadrature_spectrum(0.0)
    if s2_in >= 1.0:
        raise ParameterError("efficiency needs a squeezed second input (S_X2_in < 1)")
    res = quadrature_spectrum(params, ss, inputs, np.array([omega]), 0.0,
                              with_sum_residual=False)
    return float((1.0 - res.s_x1[0]) / (1.0 - s2_in))


def run_efficiency_map(
    omega_axis: AxisSpec,
    c_axis: AxisSpec,
    *,
    gamma: float = 0.5,
    omega_rabi: float = 0.25,
    gamma0: float = 0.0,
    kappa: float = 1.0,
    spot_checks: int = 10,
    seed: int = 0,
) -> EfficiencyMap:
    """Exact swapping efficiency over (analysis frequency, cooperativity).

    Each cell evaluates the closed-form eta with g^2 N derived from the
    cooperativity axis through C = g^2 N/(2 kappa gamma); a seeded random
    sample of cells is re-evaluated through the full numeric pipeline and
    the worst deviation recorded in ``fixed['spot_check_max_dev']``.
    """
    omegas = omega_axis.grid()
    cs = c_axis.grid()
    if (cs <= 0.0).any():
        raise ParameterError("cooperativity axis must be positive")
    drive = DriveSpec(omega_rabi, omega_rabi)
    values = np.empty((omega_axis.points, c_axis.points))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for j, c in enumerate(cs):
            case = SymmetricCase(
                gn2=2.0 * kappa * gamma * c,
                gamma=gamma,
                gamma0=gamma0,
                kappa=kappa,
                omega_prime=drive.omega_prime,
            )
            values[:, j] = efficiency(case, omegas)

    fixed = {
        "gamma": gamma, "omega_rabi": omega_rabi, "gamma0": gamma0, "kappa": kappa,
    }
    if spot_checks > 0:
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(spot_checks):
            i = int(rng.integers(omega_axis.points))
            j = int(rng.integers(c_axis.points))
            gn2 = 2.0 * kappa * gamma * cs[j]
            params = validate_params(
                g_sqrtN=np.sqrt(gn2), gamma=gamma, gamma0=gamma0, kappa=kappa
            )
            eta_num = numeric_efficiency(params, drive, omegas[i])
            worst = max(worst, abs(eta_num - values[i, j]))
        fixed["spot_check_max_dev"] = worst
        fixed["spot_checks"] = spot_checks
    return EfficiencyMap(axes=(omega_axis, c_axis), values=values, fixed=fixed)


def run_asymmetric_map(
    params: SystemParams,
    omega_probe: float,
    omega1_axis: AxisSpec,
    omega2_axis: AxisSpec,
    *,
    squeeze_r: float = R_3DB,
    threads: int = 1,
) -> EfficiencyMap:
    """Swapping efficiency over an unbalanced Rabi-frequency grid.

    Every cell runs the full numeric path (steady state, drift, noise,
    transfer at the probe frequency); there is no closed form away from
    the balanced diagonal.  Cells whose steady state fails are recorded
    as NaN with a log entry instead of aborting the map.
    """
    o1s = omega1_axis.grid()
    o2s = omega2_axis.grid()
    values = np.full((omega1_axis.points, omega2_axis.points), np.nan)
    failures = []

    def cell(i: int, j: int) -> float:
        drive = DriveSpec(o1s[i], o2s[j])
        return numeric_efficiency(params, drive, omega_probe,
                                  inputs=baseline_inputs(None, squeeze_r=squeeze_r))

    def row(i: int):
        out = np.empty(omega2_axis.points)
        for j in range(omega2_axis.points):
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    out[j] = cell(i, j)
            except Exception as exc:  # per-cell isolation
                out[j] = np.nan
                failures.append((i, j, f"{type(exc).__name__}: {exc}"))
        return out

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, range(omega1_axis.points)))
        for i, r in enumerate(rows):
            values[i] = r
    else:
        for i in range(omega1_axis.points):
            values[i] = row(i)

    return EfficiencyMap(
        axes=(omega1_axis, omega2_axis),
        values=values,
        fixed={
            "omega_probe": omega_probe,
            "g_sqrtN": params.g_sqrt_n,
            "gamma": params.gamma,
            "gamma0": params.gamma0,
            "kappa": params.kappa1,
        },
        failures=len(failures),
        failure_log=failures,
    )


def consistency_report(
    cases,
    omega_grid: np.ndarray | None = None,
    tol: float = 1e-6,
    *,
    theta: float = 0.0,
    squeeze_r: float = R_3DB,
) -> ConsistencyReport:
    """Compare numeric and closed-form spectra over symmetric configurations.

    ``cases`` is an iterable of (params, drive) pairs, each balanced and
    symmetric.  Passes iff the maximum relative deviation over all grid
    points and both fields stays below ``tol``; offending frequencies are
    collected for diagnosis (for gamma0 > 0 deviations concentrate below
    the narrowed linewidth and are reported, not failed, by callers that
    opt to treat them so).
    """
    grid = default_omega_grid() if omega_grid is None else np.asarray(omega_grid, dtype=float)
    max_dev = 0.0
    devs = []
    offending = set()
    for params, drive in cases:
        run = run_swap_spectrum(params, drive,
                                inputs=baseline_inputs(None, squeeze_r=squeeze_r),
                                omega_grid=grid, theta=theta)
        rel = np.maximum(
            np.abs(run.numeric_s1 - run.analytic_s1) / np.abs(run.analytic_s1),
            np.abs(run.numeric_s2 - run.analytic_s2) / np.abs(run.analytic_s2),
        )
        devs.append(rel)
        max_dev = max(max_dev, float(rel.max()))
        offending.update(grid[rel >= tol].tolist())
    mean_dev = float(np.mean(devs)) if devs else 0.0
    return ConsistencyReport(
        tolerance=tol,
        max_rel_dev=max_dev,
        mean_rel_dev=mean_dev,
        passed=max_dev < tol,
        offending_omegas=np.array(sorted(offending)),
        n_points=len(grid),
    )


# ---------------------------------------------------------------------------
# Time-domain stochastic oracle


@dataclass(frozen=True)
class OracleEstimate:
    omega: float
    field: int           # 1 or 2
    estimate: float
    stderr: float


@dataclass
class OracleResult:
    estimates: list
    seed: int
    duration: float
    dt: float
    n_trajectories: int
    n_segments: int

    def get(self, omega: float, fld: int) -> OracleEstimate:
        for e in self.estimates:
            if e.field == fld and np.isclose(e.omega, omega):
                return e
        raise KeyError((omega, fld))


def _real_transforms():
    j = op.complex_from_real()
    k = op.real_from_complex()
    j4 = np.array(
        [[1.0, 1.0j, 0.0, 0.0],
         [1.0, -1.0j, 0.0, 0.0],
         [0.0, 0.0, 1.0, 1.0j],
         [0.0, 0.0, 1.0, -1.0j]], dtype=complex,
    )
    k4 = np.linalg.inv(j4)
    return j, k, j4, k4


def _as_real(mat: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    if np.abs(mat.imag).max() > tol * max(1.0, np.abs(mat.real).max()):
        raise AssertionError("matrix expected to be real after conjugation transform")
    return mat.real.copy()


def _two_sided(gram: np.ndarray, conj_perm) -> np.ndarray:
    """<v_mu v_nu> matrix from a Gram matrix <v_mu v_nu^dag>."""
    p = np.zeros_like(gram)
    for nu, nub in enumerate(conj_perm):
        p[nub, nu] = 1.0
    return gram @ p


def _psd_sqrt(sigma: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Rectangular factor L with L L^T = sigma, rank-truncated."""
    evals, evecs = np.linalg.eigh(0.5 * (sigma + sigma.T))
    top = max(evals.max(), 0.0)
    if evals.min() < -1e-8 * max(top, 1.0):
        raise AssertionError(f"noise covariance not PSD: min eig {evals.min():.3e}")
    keep = evals > rtol * top
    return evecs[:, keep] * np.sqrt(evals[keep])


def stochastic_oracle(
    params: SystemParams,
    drive: DriveSpec,
    inputs,
    probes,
    duration: float,
    seed: int,
    *,
    theta: float = 0.0,
    dt: float = 0.1,
    n_trajectories: int = 256,
    block: int = 512,
) -> OracleResult:
    """Monte-Carlo spectrum estimate from the c-number Langevin system.

    The linear Langevin equations are driven with Gaussian white noises
    whose covariance is the symmetrized version of the quantum
    correlators (atomic diffusion matrix plus input sideband
    correlators), integrated with the exact discrete-time propagator of
    the joint (state, integrated-output) system, and the output
    quadrature spectra are estimated at the probe frequencies by
    averaged periodograms over ``n_trajectories`` independent
    trajectories split into segments of fifty periods of the slowest
    probe.  Returns estimates with one-sigma statistical errors;
    identical seeds give bit-identical results.

    ``duration`` is the simulated time per trajectory (units 1/kappa)
    and must cover at least fifty periods of the lowest probe frequency.
    """
    probes = np.sort(np.asarray(probes, dtype=float))
    if (probes <= 0.0).any():
        raise ParameterError("probe frequencies must be positive")
    if probes.max() >= 0.7 * np.pi / dt:
        raise ParameterError("probe too close to the sampling Nyquist rate; reduce dt")
    t_seg = 50.0 * 2.0 * np.pi / probes.min()
    if duration < t_seg:
        raise ParameterError(
            f"duration {duration:g} too short for the lowest probe frequency "
            f"(requires >= 50 periods = {t_seg:g})"
        )

    ss = solve_steady_state(params, drive)
    m = build_drift_matrix(params, ss)
    gam = diffusion_matrix(params, ss)
    phi1, phi2 = output_mean_phases(params, ss)

    j, k, j4, k4 = _real_transforms()
    m_u = _as_real(k @ m.m @ j)

    # symmetrized noise covariances in real coordinates
    c_at = _two_sided(gam.gamma, op.CONJ)
    sig_at = _as_real(k @ (0.5 * (c_at + c_at.T)) @ k.T)[:8, :8]
    g_in = input_correlation(inputs)
    c_in = _two_sided(g_in, (1, 0, 3, 2))
    sig_in = _as_real(k4 @ (0.5 * (c_in + c_in.T)) @ k4.T)

    # loading matrices: state (12) and integrated outputs (4)
    lin = np.zeros((12, 4))
    sout = np.zeros((4, 12), dtype=complex)
    roots = (np.sqrt(2.0 * params.kappa1), np.sqrt(2.0 * params.kappa2))
    for kk, idx in enumerate(op.FIELDS):
        r = roots[0] if kk < 2 else roots[1]
        lin[idx, kk] = r
        sout[kk, idx] = r
    b_in = _as_real(k @ lin.astype(complex) @ j4)       # 12x4, real
    c_y = _as_real(k4 @ sout @ j)                        # 4x12, real

    nz = 16
    a_z = np.zeros((nz, nz))
    a_z[:12, :12] = m_u
    a_z[12:, :12] = c_y
    g_load = np.zeros((nz, 12))
    g_load[:8, :8] = np.eye(8)
    g_load[:12, 8:] = b_in
    g_load[12:, 8:] = -np.eye(4)
    q_w = np.zeros((12, 12))
    q_w[:8, :8] = sig_at
    q_w[8:, 8:] = sig_in
    q_z = g_load @ q_w @ g_load.T

    # exact discretization (Van Loan)
    c_big = np.zeros((2 * nz, 2 * nz))
    c_big[:nz, :nz] = -a_z
    c_big[:nz, nz:] = q_z
    c_big[nz:, nz:] = a_z.T
    e_big = expm(c_big * dt)
    e_step = e_big[nz:, nz:].T
    sig_step = e_step @ e_big[:nz, nz:]
    l_step = _psd_sqrt(sig_step)

    # stationary state covariance for transient-free initial conditions
    q_state = q_z[:12, :12]
    sig_inf = solve_continuous_lyapunov(m_u, -q_state)
    l_inf = _psd_sqrt(sig_inf)

    rng = np.random.default_rng(seed)
    n_seg = int(duration // t_seg)
    steps_per_seg = int(round(t_seg / dt))
    t_seg = steps_per_seg * dt
    n_steps = n_seg * steps_per_seg

    z = np.zeros((nz, n_trajectories))
    z[:12] = l_inf @ rng.standard_normal((l_inf.shape[1], n_trajectories))

    # per-probe segment DFT accumulators for the binned output increments:
    # rows 0..n_probe-1 rotate as e^{+iwt}, rows n_probe.. as e^{-iwt}
    n_probe = len(probes)
    acc = np.zeros((2, 2 * n_probe, n_trajectories), dtype=complex)
    seg_est = [[[] for _ in range(n_probe)] for _ in range(2)]

    # single-precision noise generation: sub-1e-6 relative error in the
    # injected covariance, far below the statistical resolution
    l32 = l_step.astype(np.float32)
    n_noise = l_step.shape[1]
    step_in_seg = 0
    done = 0
    dy = np.empty((block, 4, n_trajectories))
    while done < n_steps:
        # blocks never span a segment boundary
        nb = min(block, n_steps - done, steps_per_seg - step_in_seg)
        noise = l32 @ rng.standard_normal((n_noise, nb * n_trajectories), dtype=np.float32)
        noise = noise.reshape(nz, nb, n_trajectories)
        for b in range(nb):
            znew = e_step @ z
            znew += noise[:, b]
            dy[b] = znew[12:] - z[12:]
            z = znew
        outs = (dy[:nb, 0] + 1j * dy[:nb, 1], dy[:nb, 2] + 1j * dy[:nb, 3])

        local = (step_in_seg + np.arange(nb)) * dt
        phases = np.exp(1j * np.outer(probes, local))
        ph_both = np.concatenate([phases, phases.conj()], axis=0)  # (2 n_probe, nb)
        for f in range(2):
            acc[f] += ph_both @ outs[f]
        done += nb
        step_in_seg += nb

        if step_in_seg == steps_per_seg:
            # close the segment: X(w) DFT from the two rotating sums
            for f, phref in ((0, theta + phi1), (1, theta + phi2)):
                for pi in range(n_probe):
                    dft = (np.exp(-1j * phref) * acc[f, pi]
                           + np.exp(1j * phref) * np.conj(acc[f, n_probe + pi]))
                    # out samples carry dt: periodogram S = |sum x e^{iwt} dt|^2/T
                    pwr = np.abs(dft) ** 2 / (steps_per_seg * dt)
                    seg_est[f][pi].extend(pwr.tolist())
            acc[:] = 0.0
            step_in_seg = 0

    estimates = []
    for f in range(2):
        for pi, w in enumerate(probes):
            vals = np.array(seg_est[f][pi])
            estimates.append(OracleEstimate(
                omega=float(w),
                field=f + 1,
                estimate=float(vals.mean()),
                stderr=float(vals.std(ddof=1) / np.sqrt(len(vals))),
            ))
    return OracleResult(
        estimates=estimates,
        seed=seed,
        duration=duration,
        dt=dt,
        n_trajectories=n_trajectories,
        n_segments=n_seg,
    )
