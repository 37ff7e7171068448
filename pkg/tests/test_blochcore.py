import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blochfactor.blochcore import (BlochFunc, ComposedMap, GridSpec, Monomial,
                                   bloch_seminorm, grid_max, hyperbolic_profile,
                                   monomial_bloch_norm, poly_to_blochfunc, random_ball_batch,
                                   random_ball_function, self_map_blaschke)
from blochfactor.errors import InvalidInputError

disc_points = st.builds(lambda r, t: complex(r * math.cos(t), r * math.sin(t)),
                        st.floats(0, 0.9), st.floats(0, 2 * math.pi))


def test_monomial_norm_closed_form():
    assert monomial_bloch_norm(1) == pytest.approx(1.0)
    assert monomial_bloch_norm(2) == pytest.approx(4 / (3 * math.sqrt(3)))
    br = bloch_seminorm(BlochFunc.monomial(2))
    assert br.lower <= 4 / (3 * math.sqrt(3)) <= br.upper


@pytest.mark.parametrize("z", [0j, 0.3j, 0.7, -0.5 + 0.2j])
def test_kernel_has_unit_seminorm(z):
    br = bloch_seminorm(BlochFunc.kernel(z))
    assert br.lower <= 1.0 <= br.upper
    assert br.width <= 2e-3
    assert abs(br.argmax - z) <= 2 * br.mesh


def test_derivative_matches_finite_difference(rng):
    f = BlochFunc.kernel(0.4 - 0.3j, [1, 2j]) + BlochFunc.monomial(3, [0.5, -1])
    w = 0.2 + 0.1j
    h = 1e-6
    fd = (f.value(w + h) - f.value(w - h)) / (2 * h)
    np.testing.assert_allclose(f.deriv(w), fd, rtol=1e-7)


def test_zero_function():
    br = bloch_seminorm(BlochFunc.zero(2))
    assert br.lower == br.upper == 0.0


def test_seminorm_is_homogeneous():
    f = BlochFunc.kernel(0.5) + BlochFunc.monomial(2, [0.3])
    a = bloch_seminorm(f)
    b = bloch_seminorm(f.scale(2.5j))
    assert b.lower == pytest.approx(2.5 * a.lower, rel=1e-9)


def test_refinement_is_monotone():
    f = BlochFunc.kernel(0.8j) + BlochFunc.monomial(2, [0.5])
    prev = None
    for n in (16, 32, 64, 128):
        br = bloch_seminorm(f, GridSpec(n_r=n, n_theta=n))
        assert br.lower <= br.upper
        if prev is not None:
            assert br.lower >= prev.lower
            assert br.upper <= prev.upper + 1e-12
        prev = br


@settings(max_examples=15, deadline=None)
@given(disc_points, disc_points)
def test_triangle_inequality(z1, z2):
    f, g = BlochFunc.kernel(z1), BlochFunc.kernel(z2, [0.5])
    grid = GridSpec(n_r=32, n_theta=32)
    s = bloch_seminorm(f + g, grid)
    assert s.lower <= bloch_seminorm(f, grid).upper + bloch_seminorm(g, grid).upper + 1e-12


def test_composition_contracts():
    f = BlochFunc.kernel(0.6)
    h = self_map_blaschke(0.3 + 0.2j)
    val, _ = grid_max(ComposedMap(f, h))
    assert val <= bloch_seminorm(f).upper * (1 + 1e-6)


def test_blaschke_maps_into_disc(rng):
    h = self_map_blaschke(-0.5 + 0.4j)
    w = 0.99 * np.sqrt(rng.random(500)) * np.exp(2j * np.pi * rng.random(500))
    assert np.all(np.abs(h.value(w)) < 1)
    assert h.value(0) == 0


def test_hyperbolic_profile_at_kernel_center():
    z = 0.4 + 0.1j
    assert hyperbolic_profile(BlochFunc.kernel(z), z) == pytest.approx(1.0)


def test_json_roundtrip():
    f = BlochFunc.kernel(0.4 - 0.3j, [1, 2j]) + BlochFunc.monomial(3, [0.5, -1])
    g = BlochFunc.from_json(f.to_json())
    assert json.loads(g.to_json()) == json.loads(f.to_json())


def test_invalid_inputs():
    with pytest.raises(InvalidInputError):
        BlochFunc.kernel(1.0)
    with pytest.raises(InvalidInputError):
        BlochFunc(2, [([1.0], Monomial(1))])
    with pytest.raises(InvalidInputError):
        GridSpec(n_r=4)
    with pytest.raises(InvalidInputError):
        BlochFunc.from_dict({"dim": 1, "terms": [{"payload": [[1, 0]], "basis": {"type": "x"}}]})


def test_poly_conversion():
    f = poly_to_blochfunc([1, 0, 2])
    w = 0.3
    assert f.value(w)[0] == pytest.approx(w + 2 * w ** 3)


def test_random_ball_members_have_norm_at_most_one(rng):
    coeffs = random_ball_batch(20, 6, rng)
    for c in coeffs[:5]:
        assert bloch_seminorm(poly_to_blochfunc(c), GridSpec(n_r=32, n_theta=32)).lower <= 1 + 1e-9
    f = random_ball_function(5, seed=1)
    assert bloch_seminorm(f).lower <= 1 + 1e-9


def test_random_ball_batch_prefix_stable():
    a = random_ball_batch(10, 5, np.random.default_rng(4))
    b = random_ball_batch(30, 5, np.random.default_rng(4))
    np.testing.assert_array_equal(a, b[:10])
