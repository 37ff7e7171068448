import numpy as np
import pytest

from blochfactor.blochcore import BlochFunc
from blochfactor.duality import (VecMolecule, crossnorm_checks, default_candidates, vec_pairing,
                                 w2_lb, w2_ub)
from blochfactor.errors import InvalidInputError


def test_pairing_is_bilinear():
    f = BlochFunc.kernel(0.3, [1, 1j])
    g = VecMolecule(2, [(1 + 1j, 0.2, [1, 2]), (0.5, -0.4j, [1j, 0])])
    assert vec_pairing(f, g.scale(2)) == pytest.approx(2 * vec_pairing(f, g))
    # no conjugation on the payload
    single = VecMolecule(1, [(1.0, 0.0, [1j])])
    assert vec_pairing(BlochFunc.monomial(1), single) == pytest.approx(1j)


def test_pairing_additive():
    f = BlochFunc.monomial(2, [1, -1])
    g1 = VecMolecule(2, [(1.0, 0.5, [1, 0])])
    g2 = VecMolecule(2, [(2.0, 0.1j, [0, 1])])
    assert vec_pairing(f, g1 + g2) == pytest.approx(vec_pairing(f, g1) + vec_pairing(f, g2))


def test_single_term_value():
    # one term: w2 equals |lambda| ||x|| / (1 - |z|^2)
    g = VecMolecule(3, [(2.0, 0.6, [1, 2, 2])])
    exact = 2 * 3 / (1 - 0.36)
    assert w2_ub(g) == pytest.approx(exact)
    assert w2_lb(g) == pytest.approx(exact, rel=0.02)


def test_sandwich_random(rng):
    pool = 0.8 * rng.random(6) * np.exp(2j * np.pi * rng.random(6))
    for _ in range(20):
        d = int(rng.integers(1, 4))
        k = int(rng.integers(1, 5))
        g = VecMolecule(d, [(rng.standard_normal(), pool[rng.integers(6)],
                             rng.standard_normal(d) + 1j * rng.standard_normal(d)) for _ in range(k)])
        assert w2_lb(g) <= w2_ub(g) + 1e-9


def test_cancelling_terms_have_zero_norm():
    g = VecMolecule(2, [(1.0, 0.3, [1, 0]), (-1.0, 0.3, [1, 0])])
    assert w2_ub(g) == 0.0
    assert w2_lb(g) == 0.0


def test_candidates_are_unit_directions():
    g = VecMolecule(2, [(1.0, 0.3, [3, 4j])])
    (cand,) = default_candidates(g)
    assert np.linalg.norm(cand.mapping.terms[0][0]) == pytest.approx(1.0)
    assert cand.pietsch == pytest.approx(1.0, rel=0.02)


def test_crossnorm_checks_pass():
    g = VecMolecule(2, [(1.0, 0.3, [1, 0]), (0.5j, -0.5, [1, 1])])
    checks = crossnorm_checks(g, BlochFunc.kernel(0.2), [1, -1j])
    assert all(ch.passed for ch in checks)
    assert len(checks) == 3


def test_invalid_molecules():
    with pytest.raises(InvalidInputError):
        VecMolecule(2, [(1.0, 0.3, [1, 0, 0])])
    with pytest.raises(InvalidInputError):
        vec_pairing(BlochFunc.monomial(1), VecMolecule(2))
    with pytest.raises(InvalidInputError):
        VecMolecule.from_dict({"dim": 1})


def test_json_roundtrip():
    g = VecMolecule(2, [(1 + 1j, 0.2, [1, 2j])])
    back = VecMolecule.from_json(g.to_json())
    assert back.to_dict() == g.to_dict()
