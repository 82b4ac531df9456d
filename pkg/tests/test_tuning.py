"""Tests for PID synthesis by pole placement and stability verdicts.

The quartic coefficients and roots below were frozen from the closed-form
coefficient formulas before the module existed.
"""

import numpy as np
import pytest

from tiltrotor.linsys import Polynomial, poly_roots
from tiltrotor.tuning import (
    PidGains,
    PolePlacementSpec,
    PoleSumError,
    StabilityVerdict,
    characteristic_poly,
    pid_tf,
    place_poles,
    routh_hurwitz_stable,
    stability_check,
)
from tiltrotor.vehicle import MotorParams

MOTOR = MotorParams(k_m=10.0, l_m=0.110, r_m=0.140)
MASS = 577.0
LAMBDA_UP = 9.0
GAINS = PidGains(kp=4.142, ki=0.004, kd=30.48)

# Frozen quartic for the gains above: s^4 + kb s^3 + c2 s^2 + c1 s + c0
KB = 1.2883251930045694
QUARTIC_ASC = (0.0006302190011028833, 0.6525917756420356, 4.822120686938711, KB, 1.0)
QUARTIC_ROOTS = (
    -0.5741774502459185 - 2.081242457613509j,
    -0.5741774502459185 + 2.081242457613509j,
    -0.1389975859473628 + 0j,
    -0.0009727065653705269 + 0j,
)


class TestPidTf:
    def test_full_pid_structure(self):
        g = pid_tf(GAINS)
        assert g.num.coefficients == (0.004, 4.142, 30.48)
        assert g.den.coefficients == (0.0, 1.0)

    def test_pure_proportional_is_constant(self):
        g = pid_tf(PidGains(kp=0.65, ki=0.0, kd=0.0)).canonical()
        assert g.num.coefficients == (0.65,)
        assert g.den.coefficients == (1.0,)

    def test_value_at_one(self):
        g = pid_tf(GAINS)
        assert g.num(1.0) / g.den(1.0) == pytest.approx(30.48 + 4.142 + 0.004)

    def test_all_zero_gains_rejected(self):
        with pytest.raises(ValueError):
            pid_tf(PidGains(kp=0.0, ki=0.0, kd=0.0))

    def test_nonfinite_gains_rejected(self):
        with pytest.raises(ValueError):
            PidGains(kp=float("nan"), ki=0.0, kd=1.0)


class TestCharacteristicPoly:
    def test_frozen_quartic(self):
        p = characteristic_poly(MOTOR, MASS, LAMBDA_UP, GAINS)
        assert p.coefficients == pytest.approx(QUARTIC_ASC, rel=1e-9)

    def test_zero_gain_limit_is_open_loop(self):
        p = characteristic_poly(MOTOR, MASS, LAMBDA_UP, PidGains(0.0, 0.0, 0.0))
        assert p.coefficients == pytest.approx(
            (0.0, 0.0, 0.019851898534740828, KB, 1.0), rel=1e-12
        )

    def test_kb_independent_of_gains(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            g = PidGains(*rng.uniform(0.0, 50.0, size=3))
            p = characteristic_poly(MOTOR, MASS, LAMBDA_UP, g)
            assert p.coefficients[3] == KB

    def test_c1_linear_in_kp(self):
        # slope K_m k_t / (L_m m), exact
        slope = 10.0 / (0.110 * MASS)
        for kp in (0.5, 1.0, 7.0):
            p = characteristic_poly(MOTOR, MASS, LAMBDA_UP, PidGains(kp, 0.1, 1.0))
            assert p.coefficients[1] == pytest.approx(kp * slope, rel=1e-12)


class TestPlacePoles:
    def test_round_trip_recovers_table_gains(self):
        roots = poly_roots(characteristic_poly(MOTOR, MASS, LAMBDA_UP, GAINS))
        gains = place_poles(MOTOR, MASS, LAMBDA_UP, roots)
        assert gains.kp == pytest.approx(4.142, rel=1e-6)
        assert gains.ki == pytest.approx(0.004, rel=1e-6)
        assert gains.kd == pytest.approx(30.48, rel=1e-6)

    def test_frozen_roots_give_table_gains(self):
        gains = place_poles(MOTOR, MASS, LAMBDA_UP, QUARTIC_ROOTS)
        assert gains.kp == pytest.approx(4.142, rel=1e-6)
        assert gains.ki == pytest.approx(0.004, rel=1e-6)
        assert gains.kd == pytest.approx(30.48, rel=1e-6)

    def test_sum_constraint_violation_reports_required_sum(self):
        with pytest.raises(PoleSumError) as exc:
            place_poles(MOTOR, MASS, LAMBDA_UP, (-1.0, -1.0, -1.0, -1.0))
        assert exc.value.required_sum == pytest.approx(-KB, rel=1e-9)

    def test_non_conjugate_set_rejected(self):
        poles = (-0.1 + 1.0j, -0.2 - 1.0j, -0.4, -KB + 0.7)
        with pytest.raises(ValueError, match="conjugat"):
            place_poles(MOTOR, MASS, LAMBDA_UP, poles)

    def test_wrong_count_rejected(self):
        with pytest.raises(ValueError):
            place_poles(MOTOR, MASS, LAMBDA_UP, (-1.0, -0.2883251930045694))

    def test_round_trip_property_random_pole_sets(self):
        rng = np.random.default_rng(1234)
        for trial in range(30):
            a = rng.uniform(0.05, 1.0)
            wd = rng.uniform(0.2, 3.0)
            r1 = -rng.uniform(0.01, 0.2)
            # choose the last real pole so the sum constraint holds exactly
            r2 = -KB - (2 * -a) - r1
            if r2 >= -1e-3:
                continue
            poles = (complex(-a, wd), complex(-a, -wd), r1, r2)
            gains = place_poles(MOTOR, MASS, LAMBDA_UP, poles)
            p = characteristic_poly(MOTOR, MASS, LAMBDA_UP, gains)
            want = np.real(np.poly([complex(z) for z in poles]))[::-1]
            assert p.coefficients == pytest.approx(tuple(want), rel=1e-9, abs=1e-12), (
                f"trial {trial}: round trip drifted"
            )

    def test_spec_object_validates(self):
        with pytest.raises(PoleSumError):
            PolePlacementSpec(poles=(-1.0, -1.0, -1.0, -1.0), kb=KB)
        spec = PolePlacementSpec(poles=QUARTIC_ROOTS, kb=KB)
        assert len(spec.poles) == 4


class TestStability:
    def test_first_order(self):
        assert stability_check(Polynomial((1.0, 1.0))).stable
        assert not stability_check(Polynomial((-1.0, 1.0))).stable

    def test_table_quartic_stable(self):
        verdict = stability_check(Polynomial(QUARTIC_ASC))
        assert verdict.stable
        assert verdict.margin == pytest.approx(-0.0009727065653705269, rel=1e-6)
        assert len(verdict.roots) == 4

    def test_imaginary_axis_pair_not_asymptotically_stable(self):
        verdict = stability_check(Polynomial((1.0, 0.0, 1.0)))
        assert not verdict.stable
        assert verdict.margin == 0.0

    def test_margin_sign_is_the_verdict(self):
        rng = np.random.default_rng(77)
        for _ in range(50):
            roots = rng.uniform(-2.0, 2.0, size=3)
            p = Polynomial(np.poly(roots)[::-1])
            verdict = stability_check(p)
            assert verdict.stable == (verdict.margin < 0)

    def test_zero_polynomial_rejected(self):
        with pytest.raises(ValueError):
            stability_check(Polynomial((0.0,)))
        with pytest.raises(ValueError):
            stability_check(Polynomial((5.0,)))

    def test_routh_agrees_with_roots_on_random_quartics(self):
        # 1000 quartics with roots at least 1e-3 off the imaginary axis.
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 1000:
            re = rng.uniform(-3.0, 3.0, size=2)
            if np.any(np.abs(re) < 1e-3):
                continue
            im = rng.uniform(0.1, 3.0, size=2)
            roots = [
                complex(re[0], im[0]), complex(re[0], -im[0]),
                complex(re[1], im[1]), complex(re[1], -im[1]),
            ]
            p = Polynomial(np.real(np.poly(roots))[::-1])
            want = bool(np.all(re < 0))
            got_routh = routh_hurwitz_stable(p)
            got_roots = stability_check(p).stable
            assert got_routh == got_roots == want, f"disagreement on roots {roots}"
            checked += 1
