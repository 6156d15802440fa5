import math

import numpy as np
import pytest
from scipy.integrate import quad

from efimov.errors import (
    InfeasibleRangeError,
    NoDimerError,
    ParameterError,
    PoleError,
)
from efimov.twobody import (
    EREParams,
    PotentialParams,
    dimer_binding,
    form_factor,
    h_bound,
    k_cot_delta,
    k_cot_delta_from_ksq,
    map_ere_to_potential,
    map_potential_to_ere,
    off_shell_amplitude,
    potential_from_inv_a_r0,
)


def h_quadrature(kappa, beta):
    """Independent oracle: adaptive quadrature of the loop integral.

    h(i kappa) = (2 pi)^-3 * 4 pi * int_0^inf q^2 dq / ((beta^2+q^2)^2 (q^2+kappa^2))
    """
    integrand = lambda q: q * q / ((beta**2 + q * q) ** 2 * (q * q + kappa**2))
    val, _ = quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=1e-12)
    return val / (2.0 * math.pi**2)


class TestFormFactor:
    def test_values(self):
        assert form_factor(0.0, 1.0) == 1.0
        assert form_factor(1.0, 1.0) == 0.5
        assert form_factor(3.0, 2.0) == pytest.approx(1.0 / 13.0, rel=1e-15)

    def test_even(self):
        assert form_factor(-0.7, 1.3) == form_factor(0.7, 1.3)

    def test_bad_beta(self):
        with pytest.raises(ParameterError):
            form_factor(1.0, 0.0)
        with pytest.raises(ParameterError):
            form_factor(1.0, -2.0)


class TestHBound:
    def test_frozen_values(self):
        # frozen from the quadrature oracle (agrees to 1e-10)
        assert h_bound(0.0, 1.0) == pytest.approx(1.0 / (8.0 * math.pi), rel=1e-14)
        assert h_bound(1.0, 1.0) == pytest.approx(1.0 / (32.0 * math.pi), rel=1e-14)
        assert h_bound(0.0, 2.0) == pytest.approx(1.0 / (64.0 * math.pi), rel=1e-14)

    def test_against_quadrature(self):
        # closed form vs adaptive quadrature over kappa/beta in [0, 100]
        for beta in (0.5, 1.0, 7.0):
            for ratio in (0.0, 1e-3, 0.1, 1.0, 10.0, 100.0):
                kappa = ratio * beta
                closed = h_bound(kappa, beta)
                oracle = h_quadrature(kappa, beta)
                assert closed == pytest.approx(oracle, rel=1e-10)

    def test_monotone_in_kappa_and_beta(self):
        kappas = np.linspace(0.0, 50.0, 101)
        vals = h_bound(kappas, 1.3)
        assert np.all(np.diff(vals) < 0.0)
        betas = np.linspace(0.2, 20.0, 101)
        vals_b = np.array([h_bound(0.7, b) for b in betas])
        assert np.all(np.diff(vals_b) < 0.0)

    def test_domain(self):
        with pytest.raises(ParameterError):
            h_bound(-1.0, 1.0)
        with pytest.raises(ParameterError):
            h_bound(1.0, 0.0)


class TestKCotDelta:
    def test_unitarity_values(self):
        params = PotentialParams(lam=8.0 * math.pi, beta=1.0)
        assert k_cot_delta(0.0, params) == pytest.approx(0.0, abs=1e-15)

    def test_k2_coefficient_is_half_r0(self):
        # r0 = 3 at (8 pi, 1): fit the quartic exactly from four samples
        params = PotentialParams(lam=8.0 * math.pi, beta=1.0)
        k = np.array([0.1, 0.2, 0.3, 0.4])
        coeffs = np.polyfit(k**2, k_cot_delta(k, params), 2)
        assert coeffs[1] == pytest.approx(1.5, rel=1e-10)  # r0/2
        assert coeffs[2] == pytest.approx(0.0, abs=1e-12)  # -1/a

    def test_continuation_to_bound_state(self):
        params = PotentialParams(lam=32.0 * math.pi, beta=1.0)
        assert k_cot_delta_from_ksq(-1.0, params) == pytest.approx(-1.0, rel=1e-14)

    def test_exact_quartic_identity(self):
        # k cot(delta) equals -1/a + r0 k^2/2 + (4 pi/lam) k^4 identically
        rng = np.random.RandomState(20240811)
        for _ in range(50):
            lam = 10.0 ** rng.uniform(-1.0, 3.0)
            beta = 10.0 ** rng.uniform(-1.0, 1.0)
            k = 10.0 ** rng.uniform(-2.0, 1.5)
            params = PotentialParams(lam=lam, beta=beta)
            ere = map_potential_to_ere(params)
            poly = (-ere.inv_a + 0.5 * ere.r0 * k**2
                    + (4.0 * math.pi / lam) * k**4)
            lhs = k_cot_delta(k, params)
            assert abs(lhs - poly) <= 1e-12 * max(abs(lhs), abs(poly), 1e-30)

    def test_negative_k_rejected(self):
        with pytest.raises(ParameterError):
            k_cot_delta(-0.5, PotentialParams(lam=1.0, beta=1.0))


class TestEREMaps:
    def test_unitarity_map(self):
        ere = map_potential_to_ere(PotentialParams(lam=8.0 * math.pi, beta=1.0))
        assert ere.inv_a == pytest.approx(0.0, abs=1e-15)
        assert ere.r0 == pytest.approx(3.0, rel=1e-15)
        assert ere.R0 == pytest.approx(0.0, abs=1e-14)

    def test_bound_dimer_map(self):
        ere = map_potential_to_ere(PotentialParams(lam=32.0 * math.pi, beta=1.0))
        assert ere.inv_a == pytest.approx(0.375, rel=1e-15)
        assert ere.r0 == pytest.approx(1.5, rel=1e-15)

    def test_inverse_map_examples(self):
        pot = map_ere_to_potential(EREParams(inv_a=0.0), beta=1.0)
        assert pot.lam == pytest.approx(8.0 * math.pi, rel=1e-15)
        pot = map_ere_to_potential(EREParams(inv_a=0.375), beta=1.0)
        assert pot.lam == pytest.approx(32.0 * math.pi, rel=1e-15)

    def test_infeasible(self):
        with pytest.raises(InfeasibleRangeError):
            map_ere_to_potential(EREParams(inv_a=1.0), beta=1.0)

    def test_round_trip(self):
        rng = np.random.RandomState(7)
        for _ in range(25):
            inv_a = rng.uniform(-2.0, 0.4)
            beta = 10.0 ** rng.uniform(-0.5, 1.0)
            if 0.5 * beta - inv_a <= 0.0:
                continue
            pot = map_ere_to_potential(EREParams(inv_a=inv_a), beta)
            back = map_potential_to_ere(pot)
            assert back.inv_a == pytest.approx(inv_a, rel=1e-12, abs=1e-12)
            assert pot.beta == beta

    def test_eq31_consistency(self):
        # -R0 - (r0/2 - 3/(2 beta) + 2/(a beta^2)) vanishes for every output
        rng = np.random.RandomState(11)
        for _ in range(25):
            lam = 10.0 ** rng.uniform(0.0, 3.0)
            beta = 10.0 ** rng.uniform(-0.5, 1.0)
            ere = map_potential_to_ere(PotentialParams(lam=lam, beta=beta))
            resid = -ere.R0 - (0.5 * ere.r0 - 1.5 / beta
                               + 2.0 * ere.inv_a / beta**2)
            assert abs(resid) <= 1e-12 * max(ere.r0, 1.0)

    def test_from_inv_a_r0(self):
        pot = potential_from_inv_a_r0(0.0, 3.0)
        assert pot.beta == pytest.approx(1.0, rel=1e-14)
        assert pot.lam == pytest.approx(8.0 * math.pi, rel=1e-14)
        back = map_potential_to_ere(potential_from_inv_a_r0(0.2, 0.9))
        assert back.inv_a == pytest.approx(0.2, rel=1e-12)
        assert back.r0 == pytest.approx(0.9, rel=1e-12)
        with pytest.raises(InfeasibleRangeError):
            potential_from_inv_a_r0(0.0, -1.0)


class TestDimer:
    def test_exact_pole(self):
        dimer = dimer_binding(PotentialParams(lam=32.0 * math.pi, beta=1.0))
        assert dimer.kappa_d == pytest.approx(1.0, rel=1e-11)
        residual = 1.0 / (32.0 * math.pi) - h_bound(dimer.kappa_d, 1.0)
        assert abs(residual) <= 1e-10
        assert dimer.energy == pytest.approx(-1.0, rel=1e-10)

    def test_no_dimer_at_unitarity(self):
        with pytest.raises(NoDimerError):
            dimer_binding(PotentialParams(lam=8.0 * math.pi, beta=1.0))

    def test_closed_form_oracle(self):
        # the pole condition inverts analytically: kappa_d = sqrt(lam/(8 pi beta)) - beta
        rng = np.random.RandomState(3)
        for _ in range(20):
            beta = 10.0 ** rng.uniform(-0.5, 0.8)
            lam = 8.0 * math.pi * beta**3 * 10.0 ** rng.uniform(0.05, 2.0)
            kappa = dimer_binding(PotentialParams(lam=lam, beta=beta)).kappa_d
            exact = math.sqrt(lam / (8.0 * math.pi * beta)) - beta
            assert kappa == pytest.approx(exact, rel=1e-11)

    def test_pole_consistency_with_kcotdelta(self):
        params = PotentialParams(lam=32.0 * math.pi, beta=1.0)
        kappa_d = dimer_binding(params).kappa_d
        val = k_cot_delta_from_ksq(-kappa_d**2, params)
        assert val == pytest.approx(-kappa_d, rel=1e-10)


class TestOffShellAmplitude:
    def test_numerator_symmetry(self):
        # the g-product is symmetric: a(q, k)(1/lam - h(k)) = a(k, q)(1/lam - h(q))
        params = PotentialParams(lam=8.0 * math.pi, beta=1.0)
        q, k = 0.3, 0.7
        a_qk = off_shell_amplitude(q, k, params)
        a_kq = off_shell_amplitude(k, q, params)
        ratio = a_qk / a_kq
        from efimov.twobody import _h_continued
        expected = (1.0 / params.lam - _h_continued(q, 1.0)) / \
                   (1.0 / params.lam - _h_continued(k, 1.0))
        assert ratio == pytest.approx(expected, rel=1e-13)

    def test_on_shell_unitarity_identity(self):
        # 1/a(k,k) = k cot(delta) - i k, exact for this potential
        params = PotentialParams(lam=32.0 * math.pi, beta=1.3)
        for k in (0.1, 0.9, 4.0):
            amp = off_shell_amplitude(k, k, params)
            inv = 1.0 / amp
            assert inv.real == pytest.approx(k_cot_delta(k, params), rel=1e-12)
            assert inv.imag == pytest.approx(-k, rel=1e-12)

    def test_unitarity_divergence_at_threshold(self):
        # 1/a = 0: amplitude grows without bound as k -> 0
        params = PotentialParams(lam=8.0 * math.pi, beta=1.0)
        small = abs(off_shell_amplitude(1e-5, 1e-5, params))
        large = abs(off_shell_amplitude(1e-2, 1e-2, params))
        assert small > 100.0 * large

    def test_denominator_sign_change_across_pole(self):
        params = PotentialParams(lam=32.0 * math.pi, beta=1.0)
        kappa_d = dimer_binding(params).kappa_d
        below = 1.0 / params.lam - h_bound(0.9 * kappa_d, 1.0)
        above = 1.0 / params.lam - h_bound(1.1 * kappa_d, 1.0)
        assert below < 0.0 < above

    def test_pole_error(self):
        params = PotentialParams(lam=32.0 * math.pi, beta=1.0)
        with pytest.raises(PoleError) as exc:
            off_shell_amplitude(0.5, 1j * 1.0, params)
        assert exc.value.kappa_d == pytest.approx(1.0, rel=1e-10)

    def test_bound_state_kinematics_real(self):
        params = PotentialParams(lam=32.0 * math.pi, beta=1.0)
        amp = off_shell_amplitude(0.4, 1j * 0.5, params)
        assert amp.imag == pytest.approx(0.0, abs=1e-15)
