import numpy as np
import pytest

from blochfactor.blochcore import BlochFunc
from blochfactor.errors import InvalidInputError
from blochfactor.molecules import (WeightedSeq, molecule_norm_lb, molecule_norm_opt,
                                   molecule_norm_ub_triangle, pairing)


def test_pairing_is_derivative_evaluation():
    m = WeightedSeq([(2.0, 0.5), (1j, -0.3)])
    f = BlochFunc.monomial(2)
    assert pairing(m, f) == pytest.approx(2.0 * 1.0 + 1j * (-0.6))


def test_pairing_is_linear_in_weights():
    m = WeightedSeq([(1 + 1j, 0.2j), (0.5, 0.7)])
    f = BlochFunc.kernel(0.1 - 0.4j)
    assert pairing(m.scale(2), f) == pytest.approx(2 * pairing(m, f))


def test_triangle_bound():
    m = WeightedSeq([(1.0, 0.5), (-2.0, 0.0)])
    assert molecule_norm_ub_triangle(m) == pytest.approx(1 / 0.75 + 2)


def test_single_atom_lower_bound_is_exact():
    # the kernel at z attains |gamma_z(f_z)| = 1/(1-|z|^2)
    z = 0.6j
    assert molecule_norm_lb(WeightedSeq([(1.0, z)]), budget=50) == pytest.approx(1 / (1 - 0.36))


def test_lower_never_exceeds_triangle(rng):
    for _ in range(5):
        k = 3
        m = WeightedSeq(zip(rng.standard_normal(k), 0.8 * rng.random(k) * np.exp(2j * np.pi * rng.random(k))))
        assert molecule_norm_lb(m, budget=200) <= molecule_norm_ub_triangle(m) * (1 + 1e-9)


def test_opposite_atoms_cancel():
    m = WeightedSeq([(1.0, 0.3), (-1.0, 0.3)])
    assert molecule_norm_lb(m) == 0.0 or molecule_norm_lb(m) < 1e-12


def test_atom_norm_bracket():
    z = 0.5
    r = molecule_norm_opt(WeightedSeq([(1.0, z)]))
    exact = 1 / (1 - z * z)
    assert r.lower <= exact * (1 + 1e-12) and exact <= r.upper * (1 + 1e-12)
    assert (r.upper - r.lower) / exact <= 0.02


def test_two_point_molecule_bracket_is_ordered():
    m = WeightedSeq([(1.0, 0.2), (1j, -0.4 + 0.1j)])
    r = molecule_norm_opt(m, degree=24)
    assert r.lower <= r.upper <= molecule_norm_ub_triangle(m) + 1e-12
    assert molecule_norm_lb(m, budget=500) <= r.upper * (1 + 1e-6)


def test_empty_and_invalid():
    assert molecule_norm_opt(WeightedSeq()).upper == 0.0
    with pytest.raises(InvalidInputError):
        WeightedSeq([(1.0, 1.5)])
    with pytest.raises(InvalidInputError):
        WeightedSeq.from_dict({"pairs": [{"z": [0, 0]}]})


def test_json_roundtrip():
    m = WeightedSeq([(1 + 2j, 0.1), (3, -0.2j)])
    back = WeightedSeq.from_json(m.to_json())
    np.testing.assert_array_equal(back.weights, m.weights)
    np.testing.assert_array_equal(back.points, m.points)
