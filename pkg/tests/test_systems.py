import numpy as np
import pytest
from numpy.testing import assert_allclose

from phpencil.linalg import inertia
from phpencil.stability import stability_radius
from phpencil.systems import (
    DescriptorSystem,
    PHSystem,
    controllability_observability_check,
    descriptor_to_ph,
    ph_to_descriptor,
    popov_eval,
    random_strictly_passive,
    transfer_eval,
    validate_ph,
)

from conftest import crandn


def scalar_system():
    return DescriptorSystem(E=[[1]], A=[[-1]], B=[[1]], C=[[1]], D=[[0]])


def random_descriptor(rng, n=3, m=2):
    return DescriptorSystem(
        E=crandn(rng, n, n), A=crandn(rng, n, n), B=crandn(rng, n, m),
        C=crandn(rng, m, n), D=crandn(rng, m, m),
    )


class TestTypes:
    def test_dimension_checks(self):
        with pytest.raises(ValueError):
            DescriptorSystem(E=np.eye(2), A=np.eye(3), B=np.ones((2, 1)),
                             C=np.ones((1, 2)), D=np.eye(1))

    def test_dims(self):
        sys = scalar_system()
        assert (sys.n, sys.m) == (1, 1)


class TestValidatePh:
    def test_manifestly_valid(self):
        ph = PHSystem(E=np.eye(2), J=np.zeros((2, 2)), R=np.eye(2),
                      G=np.zeros((2, 1)), P=np.zeros((2, 1)), S=np.eye(1),
                      N=np.zeros((1, 1)))
        assert validate_ph(ph).passed

    def test_negative_definite_r(self):
        ph = PHSystem(E=np.eye(2), J=np.zeros((2, 2)), R=-np.eye(2),
                      G=np.zeros((2, 1)), P=np.zeros((2, 1)), S=np.eye(1),
                      N=np.zeros((1, 1)))
        report = validate_ph(ph)
        assert not report.passed
        assert any(v.name == "W_positive_semidefinite" for v in report.violations)

    def test_non_skew_j(self):
        ph = PHSystem(E=np.eye(2), J=np.eye(2), R=np.eye(2),
                      G=np.zeros((2, 1)), P=np.zeros((2, 1)), S=np.eye(1),
                      N=np.zeros((1, 1)))
        report = validate_ph(ph)
        assert not report.passed
        assert any(v.name == "V_skew_hermitian" for v in report.violations)


class TestConversions:
    def test_ph_to_descriptor_substitution(self):
        e1 = np.zeros((2, 1))
        e1[0, 0] = 1.0
        ph = PHSystem(E=np.eye(2), J=np.zeros((2, 2)), R=np.eye(2),
                      G=e1, P=np.zeros((2, 1)), S=np.eye(1), N=np.zeros((1, 1)))
        sys = ph_to_descriptor(ph)
        assert_allclose(sys.A, -np.eye(2))
        assert_allclose(sys.B, e1)
        assert_allclose(sys.C, e1.T)
        assert_allclose(sys.D, [[1.0]])

    def test_zero_blocks_give_zero_descriptor(self):
        z2, z21, z1 = np.zeros((2, 2)), np.zeros((2, 1)), np.zeros((1, 1))
        sys = ph_to_descriptor(PHSystem(E=z2, J=z2, R=z2, G=z21, P=z21, S=z1, N=z1))
        for name in "EABCD":
            assert np.all(getattr(sys, name) == 0)

    def test_descriptor_to_ph_split(self):
        e1 = np.zeros((2, 1))
        e1[0, 0] = 1.0
        sys = DescriptorSystem(E=np.eye(2), A=-np.eye(2), B=e1, C=e1.T, D=[[1.0]])
        ph = descriptor_to_ph(sys)
        assert np.linalg.norm(ph.J) < 1e-15
        assert_allclose(ph.R, np.eye(2))
        assert_allclose(ph.G, e1)
        assert np.linalg.norm(ph.P) < 1e-15
        assert_allclose(ph.S, [[1.0]])
        assert np.linalg.norm(ph.N) < 1e-15

    def test_skew_a_gives_zero_r(self, rng):
        a = crandn(rng, 3, 3)
        a = a - a.conj().T
        sys = DescriptorSystem(E=np.eye(3), A=a, B=np.ones((3, 1)),
                               C=np.ones((1, 3)), D=[[1.0]])
        assert np.linalg.norm(descriptor_to_ph(sys).R) < 1e-15

    def test_involution_descriptor_side(self, rng):
        sys = random_descriptor(rng)
        back = ph_to_descriptor(descriptor_to_ph(sys))
        for name in "EABCD":
            orig, rec = getattr(sys, name), getattr(back, name)
            assert np.linalg.norm(rec - orig) <= 1e-15 * max(np.linalg.norm(orig), 1)

    def test_involution_ph_side(self, rng):
        ph = random_strictly_passive(3, 2, seed=123)
        back = descriptor_to_ph(ph_to_descriptor(ph))
        for name in "EJRGPSN":
            orig, rec = getattr(ph, name), getattr(back, name)
            assert np.linalg.norm(rec - orig) <= 1e-14 * max(np.linalg.norm(orig), 1)


class TestTransferAndPopov:
    def test_scalar_at_zero(self):
        assert_allclose(transfer_eval(scalar_system(), 0.0), [[1.0]])

    def test_high_frequency_approaches_feedthrough(self):
        t = transfer_eval(scalar_system(), 1e8)
        assert abs(t[0, 0]) < 1e-7

    def test_zero_b_gives_feedthrough(self, rng):
        sys = DescriptorSystem(E=np.eye(2), A=-np.eye(2), B=np.zeros((2, 2)),
                               C=crandn(rng, 2, 2), D=crandn(rng, 2, 2))
        assert_allclose(transfer_eval(sys, 0.7 + 0.3j), sys.D)

    def test_popov_scalar(self):
        assert_allclose(popov_eval(scalar_system(), 0.0), [[2.0]])

    def test_popov_pure_feedthrough(self):
        sys = DescriptorSystem(E=np.eye(2), A=-np.eye(2), B=np.zeros((2, 2)),
                               C=np.zeros((2, 2)), D=np.eye(2))
        for w in (0.0, 1.0, -17.3):
            assert_allclose(popov_eval(sys, w), 2 * np.eye(2))

    def test_popov_exactly_hermitian(self, rng):
        sys = ph_to_descriptor(random_strictly_passive(4, 2, seed=5))
        phi = popov_eval(sys, 0.37)
        assert np.array_equal(phi, phi.conj().T)

    def test_popov_positive_definite_on_grid(self):
        sys = ph_to_descriptor(random_strictly_passive(4, 2, seed=21))
        for w in np.logspace(-4, 4, 50):
            assert np.min(np.linalg.eigvalsh(popov_eval(sys, w))) > 0


class TestControllabilityObservability:
    def test_uncontrollable_repeated_eigenvalue(self):
        # [lam E - A, B] loses rank at lam = -1: second state is untouched by B
        sys = DescriptorSystem(E=np.eye(2), A=-np.eye(2), B=[[1.0], [0.0]],
                               C=[[1.0, 1.0]], D=[[0.0]])
        report = controllability_observability_check(sys)
        assert not report.passed
        assert any("controllability" in v.name for v in report.violations)

    def test_controllable_and_observable(self):
        sys = DescriptorSystem(E=np.eye(2), A=np.diag([-1.0, -2.0]),
                               B=[[1.0], [1.0]], C=[[1.0, 1.0]], D=[[0.0]])
        assert controllability_observability_check(sys).passed

    def test_full_b_coverage(self, rng):
        sys = DescriptorSystem(E=np.eye(2), A=crandn(rng, 2, 2), B=np.eye(2),
                               C=np.eye(2), D=np.zeros((2, 2)))
        report = controllability_observability_check(sys)
        assert not any("controllability" in v.name for v in report.violations)


class TestGenerator:
    def test_validates_and_definite(self):
        ph = random_strictly_passive(1, 1, seed=0)
        assert validate_ph(ph).passed
        assert ph.E[0, 0].real > 0
        d = ph.S - ph.N
        assert (d + d.conj().T)[0, 0].real > 0

    def test_deterministic_in_seed(self):
        a = random_strictly_passive(3, 2, seed=42)
        b = random_strictly_passive(3, 2, seed=42)
        for name in "EJRGPSN":
            assert np.array_equal(getattr(a, name), getattr(b, name))
        c = random_strictly_passive(3, 2, seed=43)
        assert np.linalg.norm(a.E - c.E) > 0

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_inertia_of_generated_blocks(self, seed):
        ph = random_strictly_passive(4, 2, seed=seed)
        assert inertia(ph.E).astuple() == (4, 0, 0)
        assert inertia(ph.dissipation_matrix()).astuple() == (6, 0, 0)

    @pytest.mark.parametrize("seed", [3, 17])
    def test_popov_grid_positive(self, seed):
        sys = ph_to_descriptor(random_strictly_passive(3, 2, seed=seed))
        for w in np.logspace(-4, 4, 50):
            assert np.min(np.linalg.eigvalsh(popov_eval(sys, w))) > 0

    def test_target_rho_calibration(self):
        ph = random_strictly_passive(4, 2, seed=8, target_rho=1e-3)
        sys = ph_to_descriptor(ph)
        rho = stability_radius(sys.E, sys.A).rho
        assert 1e-3 / 3 <= rho <= 1e-3 * 3
        assert validate_ph(ph).passed
