"""Stochastic phase-space trajectories and ensemble moment accumulation.

The doubled phase space carries six independent complex amplitudes
(a1, a1+, a2, a2+, a3, a3+); the plus variables equal the conjugates only
in a distributional sense.  The Ito equations read

    da1  = (eps1 - gamma1 a1 + kappa a2+ a3) dt + sqrt(kappa a3 /2)(w1 + i w3) dt^(1/2)
    da1+ = (eps1* - gamma1 a1+ + kappa a2 a3+) dt + sqrt(kappa a3+/2)(w2 + i w4) dt^(1/2)
    da2  = (eps2 - gamma2 a2 + kappa a1+ a3) dt + sqrt(kappa a3 /2)(w1 - i w3) dt^(1/2)
    da2+ = (eps2* - gamma2 a2+ + kappa a1 a3+) dt + sqrt(kappa a3+/2)(w2 - i w4) dt^(1/2)
    da3  = (-gamma3 a3 - kappa a1 a2) dt
    da3+ = (-gamma3 a3+ - kappa a1+ a2+) dt

with w1..w4 independent standard normals per step and the principal
complex square root.  Because the noise coefficients depend only on the
noiseless components a3/a3+, the Ito and Stratonovich readings coincide
and a semi-implicit midpoint step integrates the drift at second order
with no interpretation bias.

Ensemble averages of products of these variables converge to
normally-ordered operator moments.  Trajectories are grouped into a fixed
number of batches; batch means provide standard errors.  Each batch is
reduced in one contiguous pass, so every reported moment is a pure
function of (seed, n_traj, n_batches, grid) - bit-identical under any
chunking or thread count.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EnsembleQualityError
from .noise import draw_block, trajectory_generator
from .params import SystemParams

# Any amplitude beyond this magnitude flags the trajectory as diverged;
# roughly 1e5 times the largest physical amplitude of interest here.
DIVERGENCE_GUARD = 1e8

# Fixed-point iterations of the semi-implicit midpoint.
MIDPOINT_ITERATIONS = 3

# Diverged fraction beyond which the ensemble is rejected outright.
MAX_DIVERGED_FRACTION = 1e-4

# Vectorization width target: whole batches are grouped into processing
# chunks of roughly this many trajectories.  Performance only - batch
# sums are computed per batch segment, so results never depend on it.
TRAJECTORY_CHUNK = 32768

# Steps of noise drawn per generator call (performance only).
NOISE_STEP_CHUNK = 256

_MODES = ("cavity", "travelling-wave")


@dataclass(frozen=True)
class PhaseSpacePoint:
    """One point of the doubled phase space."""

    a1: complex = 0j
    a1p: complex = 0j
    a2: complex = 0j
    a2p: complex = 0j
    a3: complex = 0j
    a3p: complex = 0j

    @classmethod
    def coherent(cls, alpha1=0j, alpha2=0j, alpha3=0j):
        """Coherent-state initial condition: plus variables are conjugates."""
        return cls(
            complex(alpha1), np.conj(complex(alpha1)),
            complex(alpha2), np.conj(complex(alpha2)),
            complex(alpha3), np.conj(complex(alpha3)),
        )

    @classmethod
    def vacuum(cls):
        return cls()

    def as_array(self):
        return np.array(
            [self.a1, self.a1p, self.a2, self.a2p, self.a3, self.a3p], dtype=complex
        )

    @property
    def is_finite(self):
        return bool(np.all(np.isfinite(self.as_array().view(float))))


@dataclass(frozen=True)
class TrajectoryConfig:
    """Integration grid, ensemble size and reproducibility controls.

    ``dt`` and ``t_max`` are in scaled interaction time
    zeta = kappa |a1(0)| t for travelling-wave runs and in raw time for
    cavity runs.  ``sample_stride`` is the number of steps between
    recorded samples; ``n_batches`` fixes the standard-error layout.
    """

    dt: float
    t_max: float
    n_traj: int
    seed: int
    sample_stride: int = 10
    mode: str = "cavity"
    n_batches: int = 64

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not self.t_max >= self.dt:
            raise ValueError("t_max must cover at least one step")
        if self.n_traj < 2:
            raise ValueError("n_traj must be >= 2 so variances are estimable")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        if self.n_batches < 2:
            raise ValueError("n_batches must be >= 2")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def n_steps(self):
        return int(round(self.t_max / self.dt))

    @property
    def n_samples(self):
        return self.n_steps // self.sample_stride + 1

    def sample_times(self):
        steps = np.arange(self.n_samples) * self.sample_stride
        return steps * self.dt


class MomentView:
    """Normally-ordered moment arrays at every sample time.

    ``a``/``ap`` are first moments with shape (S, 3); ``aa``, ``apap``,
    ``apa`` and ``nn`` are (S, 3, 3) second/fourth-moment tables with
    apa[s, j, k] = E[a_j+ a_k] and nn over n_j = a_j+ a_j.
    """

    __slots__ = ("a", "ap", "aa", "apap", "apa", "nn")

    def __init__(self, a, ap, aa, apap, apa, nn):
        self.a, self.ap = a, ap
        self.aa, self.apap, self.apa, self.nn = aa, apap, apa, nn


@dataclass
class MomentTable:
    """Batch-resolved ensemble moments on the sample grid.

    Per-batch means (first axis) let any derived statistic carry a
    standard error from the spread of batch values; the combined view
    weights batches by their surviving trajectory counts.
    """

    times: np.ndarray
    batch_counts: np.ndarray
    batch_valid: np.ndarray
    a: np.ndarray        # (B, S, 3) E[a_j]
    ap: np.ndarray       # (B, S, 3) E[a_j+]
    aa: np.ndarray       # (B, S, 3, 3) E[a_j a_k]
    apap: np.ndarray     # (B, S, 3, 3) E[a_j+ a_k+]
    apa: np.ndarray      # (B, S, 3, 3) E[a_j+ a_k]
    nn: np.ndarray       # (B, S, 3, 3) E[n_j n_k]
    n_diverged: int
    config: TrajectoryConfig
    params: SystemParams

    @property
    def n_valid(self):
        return int(self.batch_valid.sum())

    @property
    def nonempty(self):
        return np.nonzero(self.batch_valid > 0)[0]

    def _combine(self, arr):
        idx = self.nonempty
        w = self.batch_valid[idx].astype(float)
        shape = (-1,) + (1,) * (arr.ndim - 1)
        return (arr[idx] * w.reshape(shape)).sum(axis=0) / w.sum()

    def global_view(self):
        return MomentView(*(self._combine(t) for t in
                            (self.a, self.ap, self.aa, self.apap, self.apa, self.nn)))

    def batch_view(self, b):
        return MomentView(self.a[b], self.ap[b], self.aa[b], self.apap[b],
                          self.apa[b], self.nn[b])

    def batch_statistic(self, fn):
        """Evaluate ``fn(view)`` globally and per batch.

        Returns ``(value, se)`` where the standard error is the spread of
        the per-batch values over sqrt(number of nonempty batches).
        """
        value = np.asarray(fn(self.global_view()))
        idx = self.nonempty
        per_batch = np.stack([np.asarray(fn(self.batch_view(b))) for b in idx])
        nb = len(idx)
        if nb < 2:
            return value, np.full(value.shape, np.nan)
        se = per_batch.std(axis=0, ddof=1) / np.sqrt(nb)
        return value, se

    def intensities(self):
        """Mean photon numbers E[n_j] with standard errors, shape (S, 3)."""
        value, se = self.batch_statistic(lambda v: np.real(np.einsum("sjj->sj", v.apa)))
        return value, np.real(se)


def _drift(params, s):
    """Drift over a block of states, shape (n, 6) complex."""
    k = params.kappa
    g1, g2, g3 = params.gammas
    a1, a1p, a2, a2p, a3, a3p = (s[:, i] for i in range(6))
    out = np.empty_like(s)
    out[:, 0] = params.eps1 - g1 * a1 + k * a2p * a3
    out[:, 1] = np.conj(params.eps1) - g1 * a1p + k * a2 * a3p
    out[:, 2] = params.eps2 - g2 * a2 + k * a1p * a3
    out[:, 3] = np.conj(params.eps2) - g2 * a2p + k * a1 * a3p
    out[:, 4] = -g3 * a3 - k * a1 * a2
    out[:, 5] = -g3 * a3p - k * a1p * a2p
    return out


def _advance(params, s, dt, w):
    """One semi-implicit midpoint step for a block of trajectories.

    ``w`` holds four standard normals per trajectory, shape (n, 4); pass
    zeros for the deterministic flow.  Three fixed-point iterations locate
    the drift midpoint m, the step completes as 2m - s (second-order
    deterministic part), and the noise amplitudes are evaluated at m; no
    Stratonovich correction is needed because the noise coefficients ride
    on the noiseless components only.
    """
    half = 0.5 * dt
    m = s
    for _ in range(MIDPOINT_ITERATIONS):
        m = s + half * _drift(params, m)
    new = 2.0 * m - s
    root = np.sqrt(dt)
    s3 = np.sqrt(0.5 * params.kappa * m[:, 4])
    s3p = np.sqrt(0.5 * params.kappa * m[:, 5])
    new[:, 0] += root * s3 * (w[:, 0] + 1j * w[:, 2])
    new[:, 1] += root * s3p * (w[:, 1] + 1j * w[:, 3])
    new[:, 2] += root * s3 * (w[:, 0] - 1j * w[:, 2])
    new[:, 3] += root * s3p * (w[:, 1] - 1j * w[:, 3])
    return new


def step(params, state, dt, noise):
    """Single-trajectory step; ``noise`` is a length-4 array of normals.

    Divergence is the caller's concern: check ``is_finite`` on the result
    (run_ensemble guards whole blocks at sample times).
    """
    s = state.as_array().reshape(1, 6).astype(complex)
    w = np.asarray(noise, dtype=float).reshape(1, 4)
    out = _advance(params, s, dt, w)[0]
    return PhaseSpacePoint(*out)


def _raw_dt(params, init, cfg):
    """Integration step in raw time, converting from scaled units if needed."""
    if cfg.mode == "travelling-wave":
        if not params.is_travelling_wave:
            raise ValueError(
                "travelling-wave runs require zero loss rates and pumps"
            )
        scale = params.kappa * abs(init.a1)
        if scale <= 0:
            raise ValueError(
                "travelling-wave time scaling needs a nonzero initial a1"
            )
        return cfg.dt / scale
    return cfg.dt


def _alive_mask(s):
    """Finite and inside the divergence guard, per trajectory."""
    finite = np.all(np.isfinite(s.view(float).reshape(s.shape[0], -1)), axis=1)
    with np.errstate(invalid="ignore"):
        small = np.all(np.abs(s) <= DIVERGENCE_GUARD, axis=1)
    return finite & small


def _batch_bounds(n_traj, n_batches):
    counts = np.full(n_batches, n_traj // n_batches, dtype=int)
    counts[: n_traj % n_batches] += 1
    bounds = np.concatenate([[0], np.cumsum(counts)])
    return counts, bounds


class _ChunkSums:
    """Per-batch moment sums for one contiguous group of batches."""

    def __init__(self, nb, ns):
        self.a = np.zeros((nb, ns, 3), dtype=complex)
        self.ap = np.zeros((nb, ns, 3), dtype=complex)
        self.aa = np.zeros((nb, ns, 3, 3), dtype=complex)
        self.apap = np.zeros((nb, ns, 3, 3), dtype=complex)
        self.apa = np.zeros((nb, ns, 3, 3), dtype=complex)
        self.nn = np.zeros((nb, ns, 3, 3), dtype=complex)
        self.valid = np.zeros(nb, dtype=int)

    def tables(self):
        return self.a, self.ap, self.aa, self.apap, self.apa, self.nn


def accumulate_sample(sums, rec, s, segments, keep=None):
    """Add one sample's moment products to per-batch sums.

    ``s`` is the (n, 6) state block, ``segments`` the batch start offsets
    within the block (np.add.reduceat layout), ``keep`` an optional
    boolean mask that removes diverged trajectories (their states may be
    non-finite, so they are replaced by zeros rather than weighted).
    Exposed so a reference implementation can share the exact reduction
    arithmetic.
    """
    a = s[:, 0::2]
    ap = s[:, 1::2]
    if keep is not None:
        a = np.where(keep[:, None], a, 0.0)
        ap = np.where(keep[:, None], ap, 0.0)
    nph = ap * a
    aa = a[:, :, None] * a[:, None, :]
    apap = ap[:, :, None] * ap[:, None, :]
    apa = ap[:, :, None] * a[:, None, :]
    nn = nph[:, :, None] * nph[:, None, :]
    sums.a[:, rec] += np.add.reduceat(a, segments, axis=0)
    sums.ap[:, rec] += np.add.reduceat(ap, segments, axis=0)
    sums.aa[:, rec] += np.add.reduceat(aa, segments, axis=0)
    sums.apap[:, rec] += np.add.reduceat(apap, segments, axis=0)
    sums.apa[:, rec] += np.add.reduceat(apa, segments, axis=0)
    sums.nn[:, rec] += np.add.reduceat(nn, segments, axis=0)


def _run_chunk(params, init, cfg, dt_raw, lo, hi, segments):
    """Integrate trajectories [lo, hi) and stream per-batch moment sums.

    ``segments`` holds the batch start offsets relative to ``lo`` (chunks
    always cover whole batches).  A chunk containing diverged
    trajectories is integrated a second time with those trajectories
    zero-weighted from t=0, so they never touch any average; the noise
    streams are counter-based and replay exactly.
    """
    n = hi - lo
    nb = len(segments)
    sums = _ChunkSums(nb, cfg.n_samples)
    alive = _pass(params, init, cfg, dt_raw, lo, hi, segments, sums, keep=None)
    if not alive.all():
        sums = _ChunkSums(nb, cfg.n_samples)
        _pass(params, init, cfg, dt_raw, lo, hi, segments, sums, keep=alive)
    sums.valid = np.add.reduceat(alive.astype(int), segments)
    return sums, int(n - alive.sum())


def _pass(params, init, cfg, dt_raw, lo, hi, segments, sums, keep):
    n = hi - lo
    s = np.tile(init.as_array(), (n, 1))
    alive = np.ones(n, dtype=bool)
    accumulate_sample(sums, 0, s, segments, keep)
    gens = [trajectory_generator(cfg.seed, i) for i in range(lo, hi)]

    n_steps, stride = cfg.n_steps, cfg.sample_stride
    done, rec = 0, 1
    with np.errstate(over="ignore", invalid="ignore"):
        while done < n_steps:
            todo = min(NOISE_STEP_CHUNK, n_steps - done)
            noise = draw_block(gens, todo)
            for k in range(todo):
                s = _advance(params, s, dt_raw, noise[:, k, :])
                done += 1
                if done % stride == 0 and rec < cfg.n_samples:
                    alive &= _alive_mask(s)
                    accumulate_sample(sums, rec, s, segments, keep)
                    rec += 1
    return alive


def run_ensemble(params, init, cfg, threads=None):
    """Integrate the full ensemble and accumulate normally-ordered moments.

    Trajectory ``i`` draws its noise from a stream keyed by
    ``(cfg.seed, i)`` and each batch is reduced over its own contiguous
    segment, so the outcome is a pure function of the configuration:
    identical for any chunking and any thread count.  Diverged
    trajectories are excluded from every average and counted; more than
    MAX_DIVERGED_FRACTION of them raises EnsembleQualityError, since
    divergence signals a configuration fault.
    """
    if threads is None:
        threads = int(os.environ.get("SFGSIM_THREADS", "1"))
    dt_raw = _raw_dt(params, init, cfg)
    if not init.is_finite:
        raise ValueError("initial state must be finite")

    B = cfg.n_batches
    S = cfg.n_samples
    counts, bounds = _batch_bounds(cfg.n_traj, B)

    # group whole batches into chunks near the vectorization target
    batch_size = max(1, int(counts.max()))
    per_chunk = max(1, TRAJECTORY_CHUNK // batch_size)
    groups = [(b, min(b + per_chunk, B)) for b in range(0, B, per_chunk)]

    table = {name: np.zeros((B, S) + tail, dtype=complex)
             for name, tail in (("a", (3,)), ("ap", (3,)), ("aa", (3, 3)),
                                ("apap", (3, 3)), ("apa", (3, 3)), ("nn", (3, 3)))}
    valid = np.zeros(B, dtype=int)
    diverged = np.zeros(len(groups), dtype=int)

    def do_group(gi):
        b_lo, b_hi = groups[gi]
        lo, hi = bounds[b_lo], bounds[b_hi]
        if hi == lo:
            return
        segments = (bounds[b_lo:b_hi] - lo).astype(np.intp)
        # reduceat needs strictly advancing offsets; empty batches keep zeros
        keep = np.concatenate([np.diff(segments) > 0, [hi - lo > segments[-1]]])
        sums, n_div = _run_chunk(params, init, cfg, dt_raw, lo, hi, segments[keep])
        rows = np.arange(b_lo, b_hi)[keep]
        for name, part in zip(("a", "ap", "aa", "apap", "apa", "nn"), sums.tables()):
            table[name][rows] = part
        valid[rows] = sums.valid
        diverged[gi] = n_div

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(do_group, range(len(groups))))
    else:
        for gi in range(len(groups)):
            do_group(gi)

    n_diverged = int(diverged.sum())
    if n_diverged > MAX_DIVERGED_FRACTION * cfg.n_traj:
        raise EnsembleQualityError(
            f"{n_diverged} of {cfg.n_traj} trajectories hit the divergence "
            f"guard ({DIVERGENCE_GUARD:.0e}); shrink dt or revisit the parameters",
            n_diverged=n_diverged,
            n_traj=cfg.n_traj,
        )

    def mean(arr):
        shape = (B,) + (1,) * (arr.ndim - 1)
        w = np.where(valid > 0, valid, 1).reshape(shape).astype(float)
        out = arr / w
        out[valid == 0] = np.nan
        return out

    return MomentTable(
        times=cfg.sample_times(),
        batch_counts=counts,
        batch_valid=valid.copy(),
        a=mean(table["a"]),
        ap=mean(table["ap"]),
        aa=mean(table["aa"]),
        apap=mean(table["apap"]),
        apa=mean(table["apa"]),
        nn=mean(table["nn"]),
        n_diverged=n_diverged,
        config=cfg,
        params=params,
    )


def semiclassical_trajectory(params, init, cfg):
    """Deterministic mean-field path on the ensemble's sample grid.

    Same midpoint integrator with the noise removed; returns
    ``(times, states)`` with states of shape (S, 6).
    """
    dt_raw = _raw_dt(params, init, cfg)
    s = init.as_array().reshape(1, 6)
    zeros = np.zeros((1, 4))
    states = np.empty((cfg.n_samples, 6), dtype=complex)
    states[0] = s[0]
    rec = 1
    for k in range(1, cfg.n_steps + 1):
        s = _advance(params, s, dt_raw, zeros)
        if not _alive_mask(s)[0]:
            raise EnsembleQualityError(
                f"semiclassical path hit the divergence guard at step {k}"
            )
        if k % cfg.sample_stride == 0 and rec < cfg.n_samples:
            states[rec] = s[0]
            rec += 1
    return cfg.sample_times(), states
