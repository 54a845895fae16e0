"""Classical steady states, stability analysis and the critical drive.

With the noise dropped, the intracavity equations have fixed points
obeying three complex conditions (the plus variables are conjugates in
the mean-field limit):

    0 = eps1 - gamma1 a1 + kappa conj(a2) a3
    0 = eps2 - gamma2 a2 + kappa conj(a1) a3
    0 = -gamma3 a3 - kappa a1 a2

For symmetric driving (gamma1 = gamma2 = gamma, eps1 = eps2 = eps real)
eliminating the low-frequency amplitude leaves a cubic in a3,

    kappa^2 gamma3 a3^3 - 2 gamma gamma3 kappa a3^2
        + gamma^2 gamma3 a3 + kappa eps^2 = 0,

which is monotone on a3 <= 0 and therefore has exactly one nonpositive
real root: the physical branch (a3 <= 0, a = eps/(gamma - kappa a3) >= 0).
Raising the drive pushes kappa*a3 toward -gamma, where the slowest drift
eigenvalue crosses zero; that defines the critical operating point.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, SteadyStateError
from .params import SystemParams
from .spectra import STABILITY_TOL, drift_matrix, drift_matrix_raw

# Residual bound every returned steady state must satisfy.
RESIDUAL_TOL = 1e-10

# Newton/fixed-point iteration budget for the general solver.
MAX_ITERATIONS = 10_000


@dataclass(frozen=True)
class SteadyStateSolution:
    """Classical fixed point plus solver diagnostics.

    ``residual`` is the largest magnitude among the three fixed-point
    equations evaluated at the solution; every constructor verifies it
    below RESIDUAL_TOL.  ``candidates`` records all cubic roots (symmetric
    path) for inspection.
    """

    alpha1: complex
    alpha2: complex
    alpha3: complex
    residual: float
    method: str
    candidates: tuple = ()

    @property
    def phase_space(self):
        """Six-component phase-space vector with conjugate plus variables."""
        return np.array(
            [
                self.alpha1,
                np.conj(self.alpha1),
                self.alpha2,
                np.conj(self.alpha2),
                self.alpha3,
                np.conj(self.alpha3),
            ],
            dtype=complex,
        )

    @property
    def intensities(self):
        """Mean photon numbers (|a1|^2, |a2|^2, |a3|^2)."""
        return (abs(self.alpha1) ** 2, abs(self.alpha2) ** 2, abs(self.alpha3) ** 2)


@dataclass(frozen=True)
class StabilityReport:
    """Eigenvalues of the drift matrix at a steady state.

    ``stable`` means every eigenvalue real part exceeds the margin
    tolerance; ``margin`` is the smallest real part.
    """

    eigenvalues: tuple
    stable: bool
    margin: float


@dataclass(frozen=True)
class CriticalPoint:
    """Critical drive of the symmetric cavity.

    At the boundary the high-frequency amplitude reaches -gamma/kappa and
    the low-frequency amplitude reaches alpha_c = epsilon_c/(2 gamma).
    """

    alpha_c: float
    epsilon_c: float
    alpha3_c: float


@dataclass(frozen=True)
class StabilityBoundary:
    """One row of a stability-map scan."""

    gamma3_over_gamma: float
    epsilon_boundary: float | None
    epsilon_closed_form: float
    bracketed: bool
    note: str = ""


def classical_rhs(params, x):
    """Noise-free right-hand sides over the six phase-space components."""
    a1, a1p, a2, a2p, a3, a3p = x
    k = params.kappa
    g1, g2, g3 = params.gammas
    return np.array(
        [
            params.eps1 - g1 * a1 + k * a2p * a3,
            np.conj(params.eps1) - g1 * a1p + k * a2 * a3p,
            params.eps2 - g2 * a2 + k * a1p * a3,
            np.conj(params.eps2) - g2 * a2p + k * a1 * a3p,
            -g3 * a3 - k * a1 * a2,
            -g3 * a3p - k * a1p * a2p,
        ],
        dtype=complex,
    )


def residual_norm(params, alpha1, alpha2, alpha3):
    """Largest magnitude among the three fixed-point equations."""
    k = params.kappa
    g1, g2, g3 = params.gammas
    r1 = params.eps1 - g1 * alpha1 + k * np.conj(alpha2) * alpha3
    r2 = params.eps2 - g2 * alpha2 + k * np.conj(alpha1) * alpha3
    r3 = -g3 * alpha3 - k * alpha1 * alpha2
    return float(max(abs(r1), abs(r2), abs(r3)))


def _cubic_coeffs(kappa, gamma, gamma3, eps):
    return (
        kappa**2 * gamma3,
        -2.0 * gamma * gamma3 * kappa,
        gamma**2 * gamma3,
        kappa * eps**2,
    )


def _closed_form_root(kappa, gamma, gamma3, eps):
    """Physical root of the symmetric cubic via the explicit radical form.

    The radicand combination suffers catastrophic cancellation at strong
    drive, so the radical value is polished with a few Newton steps on the
    cubic before use.
    """
    inner = 27 * gamma3**4 * kappa**8 * eps**2 * (27 * kappa**2 * eps**2 + 4 * gamma3 * gamma**3)
    xi3 = -2 * gamma**3 * gamma3**3 * kappa**3 - 27 * gamma3**2 * kappa**5 * eps**2 + np.sqrt(inner)
    # real cube root; xi3 <= 0 for all physical parameters
    xi = -np.abs(xi3) ** (1.0 / 3.0) if xi3 < 0 else xi3 ** (1.0 / 3.0)
    if xi == 0.0:
        return 0.0
    a3 = (
        4.0 * gamma / kappa
        + 16.0 ** (1.0 / 3.0) * gamma**2 * gamma3 / xi
        + 2.0 ** (2.0 / 3.0) * xi / (gamma3 * kappa**2)
    ) / 6.0
    c3, c2, c1, c0 = _cubic_coeffs(kappa, gamma, gamma3, eps)
    for _ in range(4):
        f = ((c3 * a3 + c2) * a3 + c1) * a3 + c0
        fp = (3 * c3 * a3 + 2 * c2) * a3 + c1
        a3 -= f / fp
    return a3


def solve_steady_symmetric(params: SystemParams) -> SteadyStateSolution:
    """Closed-form steady state of the symmetrically driven cavity.

    Requires gamma1 = gamma2 and a common real nonnegative pump.  Returns
    the unique physical branch (a3 <= 0) and verifies it against the full
    fixed-point equations.
    """
    if not params.is_symmetric:
        raise ValueError("solve_steady_symmetric requires symmetric parameters")
    eps_c = params.symmetric_eps()
    if eps_c.imag != 0 or eps_c.real < 0:
        raise ValueError("closed-form solution requires a real nonnegative pump")
    eps = eps_c.real
    gamma = params.symmetric_gamma()
    gamma3 = params.gamma3

    if eps == 0.0:
        return SteadyStateSolution(0j, 0j, 0j, 0.0, "closed-form-symmetric", (0j,))
    if gamma <= 0 or gamma3 <= 0:
        raise ValueError("a driven cavity needs gamma > 0 and gamma3 > 0 for a steady state")

    roots = np.roots(_cubic_coeffs(params.kappa, gamma, gamma3, eps))
    a3 = _closed_form_root(params.kappa, gamma, gamma3, eps)
    alpha = eps / (gamma - params.kappa * a3)
    residual = residual_norm(params, alpha, alpha, a3)
    if not residual < RESIDUAL_TOL or not a3 <= 0:
        raise SteadyStateError(
            f"closed-form root failed verification (residual {residual:.3e}, a3 {a3!r})",
            candidates=roots,
        )
    return SteadyStateSolution(
        complex(alpha), complex(alpha), complex(a3), residual,
        "closed-form-symmetric", tuple(roots),
    )


def solve_steady_general(params: SystemParams) -> SteadyStateSolution:
    """Numeric fixed point of the classical equations for arbitrary driving.

    Newton iteration on the six phase-space components (the flow is
    holomorphic, so the complex Jacobian is exactly -A) with a damped
    step fallback; agrees with the closed form in the symmetric case.
    """
    g1, g2, g3 = params.gammas
    if min(g1, g2, g3) <= 0:
        raise ValueError("solve_steady_general requires all loss rates > 0")

    if params.eps1 == 0 and params.eps2 == 0:
        return SteadyStateSolution(0j, 0j, 0j, 0.0, "numeric-general")

    x = np.array(
        [
            params.eps1 / g1,
            np.conj(params.eps1) / g1,
            params.eps2 / g2,
            np.conj(params.eps2) / g2,
            0j,
            0j,
        ],
        dtype=complex,
    )

    def max_abs(v):
        return float(np.max(np.abs(v)))

    n_iter = 0
    res = max_abs(classical_rhs(params, x))
    while n_iter < MAX_ITERATIONS:
        if res < 1e-12:
            break
        F = classical_rhs(params, x)
        A = drift_matrix_raw(params.kappa, g1, g2, g3, x)
        try:
            step = np.linalg.solve(-A, -F)
        except np.linalg.LinAlgError:
            step = None
        if step is not None and np.all(np.isfinite(step)):
            # backtracking on the residual
            lam = 1.0
            accepted = False
            for _ in range(60):
                trial = x + lam * step
                trial_res = max_abs(classical_rhs(params, trial))
                n_iter += 1
                if trial_res < res:
                    x, res = trial, trial_res
                    accepted = True
                    break
                lam *= 0.5
            if accepted and lam * max_abs(step) < 1e-14:
                break
            if accepted:
                continue
        # damped fixed-point fallback: relax toward the explicit updates
        a1, a1p, a2, a2p, a3, a3p = x
        upd = np.array(
            [
                (params.eps1 + params.kappa * a2p * a3) / g1,
                (np.conj(params.eps1) + params.kappa * a2 * a3p) / g1,
                (params.eps2 + params.kappa * a1p * a3) / g2,
                (np.conj(params.eps2) + params.kappa * a1 * a3p) / g2,
                -params.kappa * a1 * a2 / g3,
                -params.kappa * a1p * a2p / g3,
            ],
            dtype=complex,
        )
        x = 0.9 * x + 0.1 * upd
        res = max_abs(classical_rhs(params, x))
        n_iter += 1

    residual = residual_norm(params, x[0], x[2], x[4])
    if not residual < RESIDUAL_TOL:
        raise ConvergenceError(
            f"steady-state iteration exhausted its budget (residual {residual:.3e})",
            last_iterate=x,
        )
    return SteadyStateSolution(
        complex(x[0]), complex(x[2]), complex(x[4]), residual, "numeric-general"
    )


def solve_steady(params: SystemParams) -> SteadyStateSolution:
    """Dispatch: closed form when the symmetric form applies, else numeric."""
    if params.is_symmetric and params.eps1.imag == 0 and params.eps1.real >= 0:
        if params.eps1 == 0 or (params.gamma1 > 0 and params.gamma3 > 0):
            return solve_steady_symmetric(params)
    return solve_steady_general(params)


def eigenvalues_symmetric(params: SystemParams, ss: SteadyStateSolution):
    """Closed-form drift eigenvalues for the real symmetric steady state.

    Returned in the conventional order (l1, l2, l3, l4, l5, l6); l1 is the
    branch that crosses zero at the critical drive.
    """
    if not params.is_symmetric:
        raise ValueError("eigenvalues_symmetric requires symmetric parameters")
    if abs(np.imag(ss.alpha1)) > 1e-9 or abs(np.imag(ss.alpha3)) > 1e-9:
        raise ValueError("eigenvalues_symmetric requires a real steady state")
    gamma = params.symmetric_gamma()
    gamma3 = params.gamma3
    k = params.kappa
    a = np.real(ss.alpha1)
    a3 = np.real(ss.alpha3)

    common = (gamma - gamma3) ** 2 + k**2 * (a3**2 - 8 * a**2)
    cross = 2 * k * a3 * (gamma - gamma3)
    root_plus = np.sqrt(complex(common + cross))
    root_minus = np.sqrt(complex(common - cross))
    lam = np.empty(6, dtype=complex)
    lam[0] = gamma + k * a3
    lam[1] = gamma - k * a3
    lam[2] = 0.5 * (gamma + gamma3 + k * a3 + root_plus)
    lam[3] = 0.5 * (gamma + gamma3 + k * a3 - root_plus)
    lam[4] = 0.5 * (gamma + gamma3 - k * a3 + root_minus)
    lam[5] = 0.5 * (gamma + gamma3 - k * a3 - root_minus)
    return lam


def stability(params: SystemParams, ss: SteadyStateSolution | None = None) -> StabilityReport:
    """Numeric eigenvalue stability of the steady state."""
    if ss is None:
        ss = solve_steady(params)
    eig = np.linalg.eigvals(drift_matrix(params, ss))
    order = np.lexsort((eig.imag, eig.real))
    eig = eig[order]
    margin = float(eig.real.min())
    return StabilityReport(tuple(eig), margin > STABILITY_TOL, margin)


def critical_point(params: SystemParams) -> CriticalPoint:
    """Critical drive of the symmetric cavity.

    Substituting a3 = -gamma/kappa into the fixed-point relations gives
    epsilon_c = 2 gamma sqrt(gamma gamma3)/kappa and
    alpha_c = epsilon_c/(2 gamma); asymmetric driving has no such simple
    expression and is rejected.
    """
    if not params.is_symmetric:
        raise ValueError("critical_point is defined for symmetric driving only")
    gamma = params.symmetric_gamma()
    gamma3 = params.gamma3
    if gamma <= 0 or gamma3 <= 0:
        raise ValueError("critical_point requires gamma > 0 and gamma3 > 0")
    eps_c = 2.0 * gamma * np.sqrt(gamma * gamma3) / params.kappa
    return CriticalPoint(
        alpha_c=eps_c / (2.0 * gamma),
        epsilon_c=eps_c,
        alpha3_c=-gamma / params.kappa,
    )


def drive_ratios(params: SystemParams):
    """Low-frequency amplitude relative to critical, as (amplitude, intensity).

    The intensity ratio (alpha/alpha_c)^2 is the operating-depth figure
    used when comparing drive strengths; both ratios are reported because
    they are easy to conflate.
    """
    ss = solve_steady_symmetric(params)
    cp = critical_point(params)
    amp = float(np.real(ss.alpha1)) / cp.alpha_c
    return amp, amp**2


def stability_map(kappa, gamma, gamma3_over_gamma, epsilon_range, rel_tol=1e-6):
    """Stability boundary of the symmetric cavity over a loss-ratio grid.

    For each gamma3/gamma the boundary drive is located by bisection on
    the stability margin inside ``epsilon_range = (lo, hi)``.  A grid row
    whose range fails to bracket the boundary is reported, not fatal.
    """
    ratios = np.asarray(gamma3_over_gamma, dtype=float)
    if ratios.size == 0 or np.any(np.diff(ratios) <= 0):
        raise ValueError("gamma3_over_gamma must be a nonempty increasing grid")
    eps_lo, eps_hi = float(epsilon_range[0]), float(epsilon_range[1])
    if not 0 <= eps_lo < eps_hi:
        raise ValueError("epsilon_range must satisfy 0 <= lo < hi")

    rows = []
    for ratio in ratios:
        p_of = lambda e: SystemParams.symmetric(kappa, gamma, ratio * gamma, e)
        closed = 2.0 * gamma * np.sqrt(gamma * (ratio * gamma)) / kappa

        def margin(e):
            return stability(p_of(e)).margin

        m_lo, m_hi = margin(max(eps_lo, 1e-12 * closed)), margin(eps_hi)
        if m_lo <= 0 or m_hi >= 0:
            note = "entire range unstable" if m_lo <= 0 else "entire range stable"
            rows.append(StabilityBoundary(float(ratio), None, closed, False, note))
            continue
        lo, hi = eps_lo, eps_hi
        while hi - lo > rel_tol * hi:
            mid = 0.5 * (lo + hi)
            if margin(mid) > 0:
                lo = mid
            else:
                hi = mid
        rows.append(StabilityBoundary(float(ratio), 0.5 * (lo + hi), closed, True))
    return rows
