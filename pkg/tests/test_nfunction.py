import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from orlicz import nfunction as NF
from orlicz.errors import ConfigurationError, DomainError, EvaluationError, OverflowGuardError

# reference values from 30-digit mpmath evaluations of the closed forms
PHI_EXP_1 = 0.859140914229522617680
H_EXP_1 = 0.316060279414278839202
G_EXP_1 = 0.948180838242836517607
PHI_EXP_3 = 4051.04196378769200385
RATIO_EXP_3 = 532113908675.019874770


EXP = NF.exponential()
POW3 = NF.power(3)


def quad_phi(nf, t):
    return integrate.quad(lambda s: s * nf.phi(s), 0.0, abs(t), epsabs=0, epsrel=1e-13)[0]


def brute_conjugate(nf, s, t_hi):
    t = np.linspace(0.0, t_hi, 400001)
    vals = s * t - nf.big_phi(t)
    k = int(np.argmax(vals))
    lo, hi = t[max(k - 1, 0)], t[min(k + 1, t.size - 1)]
    tt = np.linspace(lo, hi, 20001)
    return float(np.max(s * tt - nf.big_phi(tt)))


class TestEvaluation:
    def test_zero(self):
        assert EXP.big_phi(0.0) == 0.0
        assert POW3.big_phi(0.0) == 0.0

    def test_exponential_at_one(self):
        assert EXP.big_phi(1.0) == pytest.approx(PHI_EXP_1, rel=1e-14)
        assert NF.big_phi(EXP, 1.0) == pytest.approx(PHI_EXP_1, rel=1e-14)

    def test_power_at_two(self):
        assert POW3.big_phi(2.0) == pytest.approx(8 / 3, rel=1e-15)

    @pytest.mark.parametrize("nf", [EXP, POW3, NF.power(1.5)], ids=["exp", "p3", "p1.5"])
    def test_closed_form_matches_quadrature(self, nf):
        for t in np.linspace(0.05, 3.0, 25):
            assert nf.big_phi(t) == pytest.approx(quad_phi(nf, t), rel=1e-10)

    def test_custom_density_uses_quadrature(self):
        nf = NF.custom(lambda a: np.exp(a * a))
        for t in (0.3, 1.0, 2.0):
            assert nf.big_phi(t) == pytest.approx(EXP.big_phi(t), rel=1e-10)

    def test_custom_dphi_by_central_difference(self):
        nf = NF.custom(lambda a: np.exp(a * a))
        assert nf.dphi(1.0) == pytest.approx(2 * np.e, rel=1e-8)

    def test_custom_without_step_cannot_differentiate(self):
        nf = NF.custom(lambda a: np.exp(a * a), h_fd=None)
        with pytest.raises(ConfigurationError):
            nf.dphi(1.0)
        with pytest.raises(ConfigurationError):
            NF.check_phi_conditions(nf, 2.0, 3.0)

    def test_overflow_guard(self):
        with pytest.raises(OverflowGuardError) as exc:
            EXP.big_phi(30.0)
        assert exc.value.t == 30.0

    def test_power_needs_p_above_one(self):
        with pytest.raises(DomainError):
            NF.power(1.0)

    @given(st.floats(-5, 5, allow_nan=False))
    def test_evenness(self, t):
        assert EXP.big_phi(t) == EXP.big_phi(-t)
        assert POW3.big_phi(t) == POW3.big_phi(-t)

    def test_strictly_increasing(self):
        t = np.linspace(1e-3, 5, 2000)
        assert np.all(np.diff(EXP.big_phi(t)) > 0)
        assert np.all(np.diff(POW3.big_phi(t)) > 0)

    def test_t_phi_strictly_increasing(self):
        t = np.linspace(1e-3, 5, 2000)
        for nf in (EXP, POW3):
            assert np.all(np.diff(nf.flux(t)) > 0)


class TestInverse:
    def test_zero(self):
        assert NF.big_phi_inverse(EXP, 0.0) == 0.0

    def test_power(self):
        assert NF.big_phi_inverse(POW3, 9.0) == pytest.approx(3.0, abs=1e-11)

    def test_exponential(self):
        assert NF.big_phi_inverse(EXP, PHI_EXP_1) == pytest.approx(1.0, abs=1e-10)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            NF.big_phi_inverse(EXP, -1.0)

    @pytest.mark.parametrize("nf", [EXP, POW3], ids=["exp", "p3"])
    def test_round_trip(self, nf):
        t = np.linspace(0.0, 3.0, 301)
        assert np.max(np.abs(NF.big_phi_inverse(nf, nf.big_phi(t)) - t)) <= 1e-8

    def test_out_of_range(self):
        with pytest.raises(EvaluationError):
            NF.big_phi_inverse(EXP, 1e308)


class TestConjugate:
    def test_zero(self):
        assert NF.conjugate(EXP, 0.0) == 0.0

    def test_power_two(self):
        assert NF.conjugate(NF.power(2), 3.0) == pytest.approx(4.5, rel=1e-15)

    def test_exponential_at_e(self):
        assert NF.conjugate(EXP, np.e) == pytest.approx(np.e - PHI_EXP_1, abs=1e-10)

    @pytest.mark.parametrize("s", [0.3, 1.0, 2.5, 7.0])
    def test_exponential_against_brute_force(self, s):
        assert NF.conjugate(EXP, s) == pytest.approx(brute_conjugate(EXP, s, 3.0), abs=1e-9)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.5])
    def test_power_duality(self, p):
        nf = NF.power(p)
        q = p / (p - 1)
        s = np.linspace(0.0, 5.0, 101)
        assert np.allclose(NF.conjugate(nf, s), s ** q / q, rtol=1e-9, atol=0)
        # the generic stationarity route agrees with the closed form
        generic = NF.custom(lambda a: a ** (p - 2), big_phi=lambda a: a ** p / p)
        assert np.allclose(NF.conjugate(generic, s[1:]), s[1:] ** q / q, rtol=1e-9)

    def test_legendre_equality(self):
        for nf in (EXP, POW3):
            t = np.linspace(0.01, 3.0, 64)
            s = nf.flux(t)
            lhs = s * t
            rhs = nf.big_phi(t) + NF.conjugate(nf, s)
            assert np.max(np.abs(lhs - rhs) / np.maximum(1, lhs)) <= 1e-8

    def test_young_inequality_grid(self):
        t = np.linspace(0.0, 3.0, 64)
        s = np.linspace(0.0, 3.0, 64)
        for nf in (EXP, POW3):
            T, Sg = np.meshgrid(t, s)
            assert np.all(Sg * T <= nf.big_phi(T) + NF.conjugate(nf, Sg) + 1e-12)

    def test_conjugate_out_of_range(self):
        with pytest.raises(EvaluationError):
            NF.conjugate(EXP, 1e307)


class TestDelta2:
    def test_power(self):
        res = NF.check_delta2(POW3, np.logspace(-3, 3, 50))
        assert res.holds
        assert res.sup_ratio == pytest.approx(8.0, abs=1e-9)

    def test_exponential(self):
        res = NF.check_delta2(EXP, np.array([0.5, 1.0, 3.0]))
        assert not res.holds
        assert res.witness == 3.0
        assert res.sup_ratio == pytest.approx(RATIO_EXP_3, rel=1e-9)

    def test_single_point(self):
        res = NF.check_delta2(EXP, [0.7])
        assert res.sup_ratio == pytest.approx(EXP.big_phi(1.4) / EXP.big_phi(0.7), rel=1e-15)

    def test_bad_grid(self):
        with pytest.raises(DomainError):
            NF.check_delta2(EXP, [0.0, 1.0])

    def test_conjugate_of_exponential_is_delta2(self):
        star = NF.conjugate_nfunction(EXP)
        assert NF.check_delta2(star, np.logspace(-2, 1.5, 80)).holds


class TestIndices:
    def test_l_index(self):
        assert EXP.l_index == pytest.approx(2.0, abs=1e-6)
        assert POW3.l_index == pytest.approx(3.0, abs=1e-6)

    def test_h(self):
        assert NF.h_func(EXP, 1.0) == pytest.approx(H_EXP_1, abs=1e-12)
        assert NF.h_func(EXP, -1.0) == NF.h_func(EXP, 1.0)
        assert NF.h_func(EXP, 1e-4) == pytest.approx(0.5, abs=1e-6)
        assert np.allclose(NF.h_func(POW3, np.linspace(0.1, 5, 20)), 1 / 3, rtol=1e-13)

    def test_h_at_zero(self):
        with pytest.raises(DomainError):
            NF.h_func(EXP, 0.0)


@pytest.fixture(scope="module")
def exp_report():
    return NF.check_phi_conditions(EXP, 2 * np.sqrt(2), 3.0)


@pytest.fixture(scope="module")
def pow_report():
    return NF.check_phi_conditions(POW3, 2 * np.sqrt(2), 3.0)


class TestConditions:
    def test_phi3_power(self, pow_report):
        e = pow_report["phi3"]
        assert e.holds
        assert e.data["l"] == pytest.approx(3.0, abs=1e-12)
        assert e.data["variation"] <= 1e-12

    def test_phi3_exponential(self, exp_report):
        assert exp_report["phi3"].data["l"] == pytest.approx(2.0, abs=1e-6)

    def test_phi4_as_printed_power(self, pow_report):
        e = pow_report["phi4"]
        assert not e.holds
        assert e.lhs == pytest.approx(3.0) and e.rhs == pytest.approx(2.0)
        assert e.lhs > e.rhs

    def test_phi4_power_at_one(self):
        ratio, middle, upper = NF.phi4_terms(POW3, 1.0)
        assert (ratio, middle) == pytest.approx((3.0, 2.0))

    def test_phi4_exponential_left_fails_below_about_1_12(self):
        t = np.array([0.5, 1.0, 1.1, 1.15, 2.0])
        ratio, middle, _ = NF.phi4_terms(EXP, t)
        assert list(ratio <= middle) == [False, False, False, True, True]

    def test_phi5_exponential_tends_to_d_squared(self, exp_report):
        e = exp_report["phi5"]
        assert e.holds
        assert e.data["final"] == pytest.approx(8.0, rel=1e-6)

    def test_violations_carry_witness(self, exp_report, pow_report):
        for rep in (exp_report, pow_report):
            for e in rep.entries:
                if not e.holds:
                    assert e.lhs > e.rhs or e.margin < 0

    def test_expected_verdicts(self, exp_report, pow_report):
        assert set(exp_report.violations) == {"phi4", "phi6", "delta2"}
        assert set(pow_report.violations) == {"phi4"}

    def test_grids_recorded(self, exp_report):
        d = exp_report.to_dict()
        assert set(d["grids"]) >= {"small", "mid", "large"}
        for c in d["conditions"]:
            assert {"id", "verdict", "witness_t", "lhs", "rhs", "margin", "grid_spec"} <= set(c)

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            NF.check_phi_conditions(EXP, 0.0, 3.0)


class TestPSTransform:
    def test_exponential_at_one(self):
        rep = NF.ps_transform_check(EXP, [1.0])
        assert rep.v[0] == pytest.approx(H_EXP_1, abs=1e-12)
        assert rep.g[0] == pytest.approx(G_EXP_1, abs=1e-12)
        assert rep.S[0] == pytest.approx(1 - G_EXP_1, abs=1e-12)
        assert rep.e3_holds and rep.e2_holds
        assert not rep.S_nonpositive_everywhere

    def test_power(self):
        rep = NF.ps_transform_check(POW3, np.logspace(-2, 2, 30))
        assert np.allclose(rep.g, 2 / 3, rtol=1e-12)
        assert np.allclose(rep.S, 1 / 3, rtol=1e-12)
        assert rep.e2_holds and rep.e3_holds

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            NF.ps_transform_check(EXP, [0.0])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_young_property(t, s):
    for nf in (EXP, POW3):
        assert s * t <= nf.big_phi(t) + NF.conjugate(nf, s) + 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(1.1, 6.0), st.floats(0.0, 10.0))
def test_power_conjugate_property(p, s):
    q = p / (p - 1)
    assert NF.conjugate(NF.power(p), s) == pytest.approx(s ** q / q, rel=1e-9, abs=1e-300)
