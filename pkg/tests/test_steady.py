import numpy as np
import pytest

import sfgsim as sf
from sfgsim.errors import SteadyStateError

import oracles

# frozen against the damped fixed-point and scipy-Newton oracles (both
# agree to 1e-10); kappa=0.01, gamma=1, gamma3=10
FROZEN_SYMMETRIC = {
    200.0: (159.4562116631, -25.4262834380),
    400.0: (247.8136534524, -61.4116068374),
    600.0: (307.9529006073, -94.8349889924),
}


def params(eps, kappa=0.01, gamma=1.0, gamma3=10.0):
    return sf.SystemParams.symmetric(kappa, gamma, gamma3, eps)


def test_unpumped_cavity_is_empty():
    ss = sf.solve_steady_symmetric(params(0.0))
    assert ss.alpha1 == 0 and ss.alpha2 == 0 and ss.alpha3 == 0
    assert ss.residual == 0.0


@pytest.mark.parametrize("eps", sorted(FROZEN_SYMMETRIC))
def test_symmetric_against_frozen_oracle_values(eps):
    ss = sf.solve_steady_symmetric(params(eps))
    a, a3 = FROZEN_SYMMETRIC[eps]
    assert ss.alpha1 == pytest.approx(a, abs=1e-8)
    assert ss.alpha2 == pytest.approx(a, abs=1e-8)
    assert ss.alpha3 == pytest.approx(a3, abs=1e-8)
    assert ss.method == "closed-form-symmetric"
    assert ss.residual < 1e-10


def test_symmetric_against_live_oracles():
    for eps in (150.0, 333.0, 615.0):
        a_fp, a3_fp = oracles.fixed_point_symmetric(0.01, 1.0, 10.0, eps)
        a_nw, a3_nw = oracles.newton_symmetric(0.01, 1.0, 10.0, eps)
        assert a_fp == pytest.approx(a_nw, abs=1e-9)
        ss = sf.solve_steady_symmetric(params(eps))
        assert ss.alpha1 == pytest.approx(a_fp, abs=1e-8)
        assert ss.alpha3 == pytest.approx(a3_fp, abs=1e-8)


def test_symmetric_requires_symmetric_params():
    with pytest.raises(ValueError):
        sf.solve_steady_symmetric(sf.SystemParams(0.01, 1.0, 2.0, 10.0, 400.0, 400.0))
    with pytest.raises(ValueError):
        sf.solve_steady_symmetric(
            sf.SystemParams(0.01, 1.0, 1.0, 10.0, 400.0j, 400.0j))


def test_candidate_roots_reported():
    ss = sf.solve_steady_symmetric(params(600.0))
    assert len(ss.candidates) == 3
    # exactly one nonpositive real root among the candidates
    real = [r for r in ss.candidates if abs(r.imag) < 1e-9 and r.real <= 0]
    assert len(real) == 1


def test_general_matches_symmetric():
    p = params(400.0)
    s1 = sf.solve_steady_symmetric(p)
    s2 = sf.solve_steady_general(p)
    assert abs(s1.alpha1 - s2.alpha1) < 1e-8
    assert abs(s1.alpha3 - s2.alpha3) < 1e-8
    assert s2.method == "numeric-general"


def test_general_asymmetric_frozen():
    # frozen against scipy-Newton and damped fixed-point oracles
    p = sf.SystemParams(0.01, 1.0, 40.0, 2.0, 400.0, 2400.0)
    ss = sf.solve_steady_general(p)
    assert ss.alpha1 == pytest.approx(352.46568261, abs=1e-6)
    assert ss.alpha2 == pytest.approx(51.93500876, abs=1e-6)
    assert ss.alpha3 == pytest.approx(-91.52654157, abs=1e-6)
    assert ss.residual < 1e-10

    a1, a2, a3 = oracles.newton_general(0.01, 1.0, 40.0, 2.0, 400.0, 2400.0)
    assert ss.alpha1 == pytest.approx(a1, abs=1e-7)
    assert ss.alpha3 == pytest.approx(a3, abs=1e-7)
    f1, f2, f3 = oracles.fixed_point_general(0.01, 1.0, 40.0, 2.0, 400.0, 2400.0)
    assert a1 == pytest.approx(f1, abs=1e-7) and a3 == pytest.approx(f3, abs=1e-7)


def test_general_zero_pump_gives_vacuum():
    ss = sf.solve_steady_general(sf.SystemParams(0.01, 1.0, 1.0, 10.0))
    assert ss.alpha1 == 0 and ss.alpha3 == 0


def test_general_requires_positive_gammas():
    with pytest.raises(ValueError):
        sf.solve_steady_general(sf.SystemParams(0.01, 1.0, 0.0, 10.0, 1.0, 1.0))


def test_general_supports_complex_pumps():
    p = sf.SystemParams(0.01, 1.0, 1.0, 10.0, 400 * np.exp(0.7j), 400 * np.exp(-0.2j))
    ss = sf.solve_steady_general(p)
    assert ss.residual < 1e-10
    assert abs(ss.alpha3.imag) > 1.0  # genuinely complex operating point


def test_closed_form_numeric_agreement_sweep():
    rng = np.random.default_rng(2024)
    for _ in range(40):
        kappa = 10 ** rng.uniform(-3, -1)
        gamma = rng.uniform(0.5, 2.0)
        gamma3 = rng.uniform(1.0, 20.0)
        eps = rng.uniform(0.0, 0.9) * 2 * gamma * np.sqrt(gamma * gamma3) / kappa
        p = sf.SystemParams.symmetric(kappa, gamma, gamma3, eps)
        s1 = sf.solve_steady_symmetric(p)
        s2 = sf.solve_steady_general(p)
        scale = max(1.0, abs(s1.alpha1))
        assert abs(s1.alpha1 - s2.alpha1) / scale < 1e-8
        assert abs(s1.alpha3 - s2.alpha3) / scale < 1e-8
        # residual and sign contracts
        assert s1.residual < 1e-10 and s2.residual < 1e-10
        assert np.real(s1.alpha3) <= 0 and np.real(s1.alpha1) >= 0


def test_residual_norm_contract():
    p = params(512.0)
    ss = sf.solve_steady_symmetric(p)
    assert sf.residual_norm(p, ss.alpha1, ss.alpha2, ss.alpha3) == ss.residual
    # perturbing the solution must break the residual bound
    bad = sf.residual_norm(p, ss.alpha1 + 1e-3, ss.alpha2, ss.alpha3)
    assert bad > 1e-10


def test_phase_space_vector_conjugate_layout():
    ss = sf.solve_steady_general(
        sf.SystemParams(0.01, 1.0, 1.0, 10.0, 300 * np.exp(0.5j), 300 * np.exp(0.5j)))
    vec = ss.phase_space
    assert vec[1] == np.conj(vec[0])
    assert vec[5] == np.conj(vec[4])


def test_internal_inconsistency_error_carries_candidates():
    with pytest.raises(SteadyStateError) as err:
        raise SteadyStateError("forced", candidates=(1j, 2j))
    assert err.value.candidates == (1j, 2j)
