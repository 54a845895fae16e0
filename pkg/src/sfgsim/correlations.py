"""Physical correlations from ensemble moment tables.

Stochastic phase-space averages are normally ordered, so every measurable
quantity needs its ordering correction exactly once, here: quadrature
variances gain the vacuum +1, photon-number variances gain the mean.
Entanglement witnesses follow from the corrected quadrature moments:
the joint-quadrature (Duan-Simon) sum with separability threshold 4 and
the inferred-variance (Reid) product with threshold 1.

All reported series are real; the imaginary residue of each raw value is
checked against a tolerance plus five standard errors before being
discarded.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CorrelationError
from .trajectories import MomentTable

# Absolute imaginary residue allowed on top of 5 SE.
IMAG_TOL = 1e-8

# Division guards.
FANO_MEAN_GUARD = 1e-6
EPR_VARIANCE_GUARD = 1e-9


@dataclass(frozen=True)
class QuadratureSpec:
    """A single-mode quadrature: mode index 1..3 and angle theta (mod 2pi)."""

    mode: int
    theta: float = 0.0

    def __post_init__(self):
        if self.mode not in (1, 2, 3):
            raise ValueError(f"mode must be 1, 2 or 3, got {self.mode}")
        object.__setattr__(self, "theta", float(self.theta) % (2.0 * np.pi))

    @classmethod
    def x(cls, mode):
        return cls(mode, 0.0)

    @classmethod
    def y(cls, mode):
        return cls(mode, np.pi / 2.0)


@dataclass
class CorrelationSeries:
    """A time series of one correlation with its threshold.

    ``threshold`` is the classical/separable boundary the series is
    compared against (1 for squeezing, Fano and inferred-variance
    products, 4 for the joint-quadrature sum).
    """

    times: np.ndarray
    values: np.ndarray
    se: np.ndarray
    threshold: float
    label: str = ""

    def __iter__(self):
        return iter((self.times, self.values, self.se))


def _realize(raw, se_raw, label):
    """Strip a complex series to its real part, asserting the residue."""
    raw = np.asarray(raw)
    imag = np.abs(raw.imag) if np.iscomplexobj(raw) else np.zeros(raw.shape)
    bound = IMAG_TOL + 5.0 * np.where(np.isfinite(se_raw), se_raw, 0.0)
    if np.any(imag > bound):
        worst = float(imag.max())
        raise CorrelationError(
            f"{label}: imaginary residue {worst:.3e} exceeds tolerance; "
            "moment table is inconsistent"
        )
    return raw.real


def _series(m: MomentTable, fn, threshold, label):
    value, se = m.batch_statistic(fn)
    se = np.asarray(se, dtype=float)
    return CorrelationSeries(
        times=m.times,
        values=_realize(value, se, label),
        se=se,
        threshold=threshold,
        label=label,
    )


def _variance_raw(view, q):
    """Normally-ordered quadrature variance plus the vacuum unit."""
    j = q.mode - 1
    phase = np.exp(-2j * q.theta)
    caa = view.aa[:, j, j] - view.a[:, j] ** 2
    cpp = view.apap[:, j, j] - view.ap[:, j] ** 2
    cpa = view.apa[:, j, j] - view.ap[:, j] * view.a[:, j]
    return 1.0 + phase * caa + np.conj(phase) * cpp + 2.0 * cpa


def _covariance_raw(view, qj, qk):
    """Stochastic covariance of two quadrature variables (no vacuum term)."""
    j, k = qj.mode - 1, qk.mode - 1
    ej, ek = np.exp(-1j * qj.theta), np.exp(-1j * qk.theta)
    caa = view.aa[:, j, k] - view.a[:, j] * view.a[:, k]
    cpp = view.apap[:, j, k] - view.ap[:, j] * view.ap[:, k]
    # E[a_j a_k+] sits at apa[k, j]: the stochastic variables commute
    cap = view.apa[:, k, j] - view.a[:, j] * view.ap[:, k]
    cpa = view.apa[:, j, k] - view.ap[:, j] * view.a[:, k]
    return ej * ek * caa + ej * np.conj(ek) * cap + np.conj(ej) * ek * cpa \
        + np.conj(ej) * np.conj(ek) * cpp


def quadrature_variance(m: MomentTable, q: QuadratureSpec) -> CorrelationSeries:
    """V(X_mode(theta)); below 1 means squeezing."""
    return _series(
        m, lambda v: _variance_raw(v, q), 1.0,
        f"V(X{q.mode}(theta={q.theta:.4g}))",
    )


def quadrature_covariance(m, qj, qk) -> CorrelationSeries:
    """Covariance of two quadratures; same-mode same-angle gives V - 1."""
    return _series(
        m, lambda v: _covariance_raw(v, qj, qk), 0.0,
        f"cov(X{qj.mode}({qj.theta:.3g}), X{qk.mode}({qk.theta:.3g}))",
    )


def fano(m: MomentTable, modes=(1, 2)) -> CorrelationSeries:
    """Fano factor of the photon-number sum over ``modes``.

    F = V(N)/<N> with the physical variance; coherent light gives exactly
    1, below 1 is sub-Poissonian.
    """
    idx = [mode - 1 for mode in modes]
    gview = m.global_view()
    mean_n = np.real(sum(gview.apa[:, j, j] for j in idx))
    if np.any(mean_n < FANO_MEAN_GUARD):
        raise CorrelationError(
            f"Fano factor undefined: mean photon number below {FANO_MEAN_GUARD}"
        )

    def raw(view):
        n1 = sum(view.apa[:, j, j] for j in idx)
        n2 = sum(view.nn[:, j, k] for j in idx for k in idx)
        return 1.0 + (n2 - n1**2) / n1

    label = "F(N" + "+N".join(str(mode) for mode in modes) + ")"
    return _series(m, raw, 1.0, label)


def fano_sum(m: MomentTable) -> CorrelationSeries:
    """Fano factor of the summed low-frequency intensities."""
    return fano(m, modes=(1, 2))


def duan_simon(m: MomentTable, sign=+1) -> CorrelationSeries:
    """V(X1 +/- X2) + V(Y1 -/+ Y2) for the low-frequency pair; threshold 4.

    The interaction correlates the `+` combination; the opposite sign
    carries excess noise.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    x1, x2 = QuadratureSpec.x(1), QuadratureSpec.x(2)
    y1, y2 = QuadratureSpec.y(1), QuadratureSpec.y(2)

    def raw(view):
        vx = _variance_raw(view, x1) + _variance_raw(view, x2) \
            + 2.0 * sign * _covariance_raw(view, x1, x2)
        vy = _variance_raw(view, y1) + _variance_raw(view, y2) \
            - 2.0 * sign * _covariance_raw(view, y1, y2)
        return vx + vy

    tag = "+" if sign > 0 else "-"
    return _series(m, raw, 4.0, f"V(X1{tag}X2)+V(Y1{'-' if sign > 0 else '+'}Y2)")


def epr_product(m: MomentTable, inferred, steering) -> CorrelationSeries:
    """Reid inferred-variance product for mode ``inferred``; threshold 1.

    Conditions on the quadratures of mode ``steering`` with the optimal
    linear gain; below 1 the steering mode steers the inferred one.
    """
    if inferred == steering:
        raise ValueError("inferred and steering modes must differ")
    xj, yj = QuadratureSpec.x(inferred), QuadratureSpec.y(inferred)
    xk, yk = QuadratureSpec.x(steering), QuadratureSpec.y(steering)

    gview = m.global_view()
    for q in (xk, yk):
        v = _variance_raw(gview, q)
        if np.any(np.real(v) < EPR_VARIANCE_GUARD):
            raise CorrelationError(
                "inferred variances undefined: steering-mode variance below "
                f"{EPR_VARIANCE_GUARD}"
            )

    def raw(view):
        vinf_x = _variance_raw(view, xj) \
            - _covariance_raw(view, xj, xk) ** 2 / _variance_raw(view, xk)
        vinf_y = _variance_raw(view, yj) \
            - _covariance_raw(view, yj, yk) ** 2 / _variance_raw(view, yk)
        return vinf_x * vinf_y

    return _series(m, raw, 1.0, f"EPR{inferred}{steering}")
