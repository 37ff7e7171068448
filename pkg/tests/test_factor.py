import numpy as np
import pytest

from blochfactor.blochcore import BlochFunc, bloch_seminorm
from blochfactor.factor import (build_factorization, gamma2_bracket, ideal_inequality_check,
                                kwapien_lb, kwapien_ratio, pietsch_ub, psum2_ub, rank_one,
                                unitary_criterion_check)
from blochfactor.errors import InvalidInputError
from blochfactor.molecules import WeightedSeq


@pytest.fixture(scope="module")
def kernel_cert():
    f = BlochFunc.kernel(0.4 - 0.2j, [0.6, 0.8j])
    c, cert = pietsch_ub(f, seed=0)
    return f, c, cert


def test_pietsch_rank_one_kernel(kernel_cert):
    f, c, cert = kernel_cert
    assert c == pytest.approx(1.0, rel=0.02)
    assert c >= bloch_seminorm(f).lower
    assert cert.verify()
    assert cert.weights.sum() == pytest.approx(1.0)
    assert np.all(cert.weights >= 0)


def test_factorization_reconstructs(kernel_cert):
    f, c, cert = kernel_cert
    wit = build_factorization(f, cert)
    assert wit.residual <= 1e-6
    assert wit.bound <= c * 1.02
    assert wit.bound >= bloch_seminorm(f).lower * (1 - 1e-6)


def test_rank_one_bracket():
    g = BlochFunc.monomial(2)
    f = rank_one(g, [3.0, 4.0])
    assert f.gamma2.lower <= 5 * 4 / (3 * np.sqrt(3)) <= f.gamma2.upper


def test_kwapien_lb_sits_between(kernel_cert):
    f, c, _ = kernel_cert
    lb = kwapien_lb(f, budget=200, seed=1)
    assert bloch_seminorm(f).lower - 1e-9 <= lb <= c * (1 + 1e-9)


def test_kwapien_ratio_singleton():
    f = BlochFunc.kernel(0.5)
    a = WeightedSeq([(1.0, 0.5)])
    assert kwapien_ratio(f, a, a) == pytest.approx(1.0)
    assert kwapien_ratio(f, a, WeightedSeq([(0.0, 0.1)])) is None


def test_orthogonal_sum_certificate_near_seminorm():
    # two kernels in orthogonal directions; the certificate must track rho, not sqrt(2)
    f = BlochFunc.kernel(0.5, [1, 0]) + BlochFunc.kernel(-0.5, [0, 1])
    c, cert = pietsch_ub(f, seed=0)
    rho = bloch_seminorm(f).upper
    assert c <= rho * 1.02
    assert build_factorization(f, cert).bound <= c * 1.02


def test_unitary_check_passes_with_certified_c(kernel_cert):
    f, c, _ = kernel_cert
    rep = unitary_criterion_check(f, c, n=4, trials=200, seed=2)
    assert rep.max_ratio <= 1 + 1e-6


def test_unitary_check_refutes_small_c(kernel_cert):
    f, _, _ = kernel_cert
    rep = unitary_criterion_check(f, 0.1, n=4, trials=200, seed=2)
    assert rep.max_ratio > 1


def test_unitary_size_limits(kernel_cert):
    with pytest.raises(InvalidInputError):
        unitary_criterion_check(kernel_cert[0], 1.0, n=17)


def test_ideal_checks_pass(kernel_cert):
    f, c, _ = kernel_cert
    t = np.array([[1.0, 2j], [0.5, -1.0]])
    checks = ideal_inequality_check(t, f, 0.3 + 0.4j, pietsch=c, budget=100)
    assert all(ch.passed for ch in checks)


def test_psum2_dominates_pietsch(kernel_cert):
    f, c, _ = kernel_cert
    est = psum2_ub(f, n_points=400, n_samples=400, seed=0)
    assert c <= est * 1.05


def test_psum2_more_samples_never_increase():
    f = BlochFunc.monomial(2, [1.0, 1j])
    a = psum2_ub(f, n_points=200, n_samples=200, seed=3)
    b = psum2_ub(f, n_points=200, n_samples=800, seed=3)
    assert b <= a + 1e-12


def test_gamma2_bracket_ordered():
    f = BlochFunc.monomial(1, [0.5])
    br, cert, wit = gamma2_bracket(f, budget=100)
    assert br.lower <= br.upper * (1 + 1e-9)
    assert br.upper == pytest.approx(0.5, rel=0.02)
