import itertools

import numpy as np
import pytest

from plurilatt.errors import ConservationViolated, SingularConversion
from plurilatt.lagrangian import (
    ComplexAnalysisLagrangian,
    DiagonalLagrangian,
    FactorizedLagrangian,
    QNetLagrangian,
    ThreePointLagrangian,
    family_for,
    from_moutard,
    lagrangian_constraint_check,
    qnet_extend_cube,
    qnet_gauge_normalize,
    to_moutard,
)
from plurilatt.lattice import Cube, Plaquette, QuadSurface, box_plaquettes, enumerate_cubes
from plurilatt.variational import verify_cube
from plurilatt.weights import ConstraintTriple, WeightField, propagate, random_initial_field

ORIGIN = (0, 0, 0)
KEY = (ORIGIN, (1, 2))
BOX = ((0, 2),) * 3
KINDS = ["complex_p", "pair_pq", "triangular", "offdiagonal", "three_point", "qnet"]


def propagated_family(kind, seed=0, box=BOX):
    return family_for(propagate(random_initial_field(kind, box, seed), box))


@pytest.mark.parametrize("kind", KINDS)
def test_zero_field_gives_zero(kind):
    family = propagated_family(kind)
    assert family.evaluate(Plaquette(*KEY), (0, 0, 0, 0)) == 0
    gram = family.cube_gram(Cube(ORIGIN, (1, 2, 3)))
    assert gram.value(np.zeros(8)) == 0


def test_complex_family_unit_weight():
    family = ComplexAnalysisLagrangian(WeightField("complex_p", {KEY: 1}))
    assert family.evaluate(Plaquette(*KEY), (0, 1, 1, 0)) == pytest.approx(1)


def test_complex_family_coefficients():
    p = 1.5 - 0.5j
    alpha, beta, gamma = ComplexAnalysisLagrangian(WeightField("complex_p", {KEY: p})).abg(KEY)
    assert (alpha, beta, gamma) == pytest.approx((1 / 1.5, -0.5 / 1.5, abs(p) ** 2 / 1.5))
    assert beta**2 - alpha * gamma == pytest.approx(-1)


@pytest.mark.parametrize("kind", KINDS)
def test_reversed_plaquette_negates(kind, rng):
    family = propagated_family(kind)
    p = Plaquette(*KEY)
    u = {v: complex(*rng.normal(size=2)) for v in p.vertices}
    assert family.evaluate(p.reversed(), u) == pytest.approx(-family.evaluate(p, u), rel=1e-13)


@pytest.mark.parametrize("kind", KINDS)
def test_matrix_and_closed_form_agree(kind, rng):
    family = propagated_family(kind, seed=5)
    for key in box_plaquettes(BOX):
        for sign in (1, -1):
            p = Plaquette(*key, sign)
            u = {v: complex(*rng.normal(size=2)) for v in p.vertices}
            assert family.evaluate(p, u) == pytest.approx(family.evaluate_formula(p, u), rel=1e-12)


@pytest.mark.parametrize("kind", ["complex_p", "pair_pq", "triangular", "offdiagonal"])
def test_action_kills_constants(kind):
    family = propagated_family(kind)
    surface = QuadSurface(Plaquette(*k) for k in box_plaquettes(((0, 2), (0, 2), (0, 0))))
    assert family.action(surface, {v: 3.5 - 1j for v in surface.vertices}) == pytest.approx(0, abs=1e-12)


def test_action_is_additive(rng):
    family = propagated_family("pair_pq")
    a, b = Plaquette((0, 0, 0), (1, 2)), Plaquette((1, 1, 1), (2, 3), -1)
    u = {v: complex(*rng.normal(size=2)) for v in a.vertices + b.vertices}
    assert family.action(QuadSurface([a]), u) == pytest.approx(family.evaluate(a, u))
    total = family.action(QuadSurface([a, b]), u)
    assert total == pytest.approx(family.evaluate(a, u) + family.evaluate(b, u))


def test_gram_matches_cube_action(rng):
    family = propagated_family("complex_p")
    cube = Cube((1, 0, 1), (1, 2, 3))
    x = rng.normal(size=8)
    u = dict(zip(cube.vertices, x))
    expected = sum(family.evaluate(face, u) for face in cube.faces())
    assert family.cube_gram(cube).value(x) == pytest.approx(expected, rel=1e-12)
    m = family.cube_gram(cube).matrix
    np.testing.assert_allclose(m, m.T)


def test_three_point_rows_vanish():
    family = propagated_family("three_point")
    for cube in enumerate_cubes(BOX):
        m = family.cube_gram(cube).matrix
        assert not m[0].any() and not m[7].any()
        assert not m[:, 0].any() and not m[:, 7].any()
        assert verify_cube(family.cube_gram(cube)).rank == 2


def test_three_point_ignores_far_vertex(rng):
    family = ThreePointLagrangian(WeightField("three_point", {KEY: 0.8 + 0.1j}))
    u = list(rng.normal(size=4))
    moved = u[:2] + [u[2] + 10] + u[3:]
    assert family.evaluate(Plaquette(*KEY), u) == family.evaluate(Plaquette(*KEY), moved)


@pytest.mark.parametrize(
    "abg, abc",
    [((1, 0, 1), (1, 0, -1)), ((1, 1, 1), (1, -1, 0))],
)
def test_moutard_conversion_examples(abg, abc):
    m = to_moutard(*abg)
    assert (m.a, m.b, m.c) == pytest.approx(abc)
    assert from_moutard(m) == pytest.approx(abg)


def test_moutard_round_trip(rng):
    for _ in range(100):
        abg = tuple(complex(*rng.normal(size=2)) for _ in range(3))
        assert from_moutard(to_moutard(*abg)) == pytest.approx(abg, rel=1e-14)


def test_moutard_conversion_guards():
    with pytest.raises(SingularConversion):
        to_moutard(0, 1, 1)
    with pytest.raises(SingularConversion):
        from_moutard((0, 1, 1))


def test_constraint_check_complex_and_factorized(rng):
    complex_family = propagated_family("complex_p")
    assert max(map(abs, lagrangian_constraint_check(complex_family, (1, 0, 1)).values())) < 1e-12
    factorized = propagated_family("pair_pq")
    assert isinstance(factorized, FactorizedLagrangian)
    assert max(map(abs, lagrangian_constraint_check(factorized, (1, 0, -1)).values())) < 1e-12

    coeffs = {k: tuple(np.array(v) * (1 + 0.1 * rng.normal())) for k, v in complex_family.coefficients.items()}
    perturbed = DiagonalLagrangian(coeffs)
    assert max(map(abs, lagrangian_constraint_check(perturbed, (1, 0, 1)).values())) > 1e-3


def test_moutard_field_lagrangian_meets_its_constraint(rng):
    triple = ConstraintTriple(1.0, 0.4 - 0.2j, -0.7)
    weights = propagate(random_initial_field("moutard_abc", BOX, rng, triple), BOX)
    family = DiagonalLagrangian.from_moutard_field(weights)
    # multiplying λa + μσb + νc = 0 by α gives the same triple in terms of (α, β, γ)
    residuals = lagrangian_constraint_check(family, triple)
    scale = max(abs(x) for v in family.coefficients.values() for x in v) ** 2
    assert max(map(abs, residuals.values())) < 1e-10 * scale


def test_qnet_linear_system_solves_corner_equations(rng):
    box = ((0, 1),) * 4
    weights = propagate(random_initial_field("qnet", box, rng), box)
    family = QNetLagrangian(weights)
    for cube in enumerate_cubes(box):
        x, spread = qnet_extend_cube(weights, cube, *rng.normal(size=4))
        assert spread < 1e-12
        gram = family.cube_gram(cube)
        assert np.abs(gram.gradient(x)).max() <= 1e-9 * gram.norm() * np.linalg.norm(x)


def _qnet_data(box, rng, factor):
    weights = propagate(random_initial_field("qnet", box, rng), box)
    return {k: (c_ij, c_ji, factor * c_ij * c_ji) for k, (c_ij, c_ji, _) in weights.values.items()}


def test_gauge_identity(rng):
    result = qnet_gauge_normalize(_qnet_data(BOX, rng, 1.0), BOX)
    assert all(g == 1 for g in result.gauge.values())
    assert result.normalization_residual == 0


def test_gauge_constant_factor(rng):
    result = qnet_gauge_normalize(_qnet_data(BOX, rng, 2.0), BOX)
    assert result.relation_residual < 1e-10
    assert result.normalization_residual < 1e-10
    g = result.gauge
    # separable: g(n) depends on n only through the pairwise products along axes
    for m in itertools.product(range(3), repeat=3):
        assert g[m] == pytest.approx(2.0 ** -(m[0] * m[1] + m[1] * m[2] + m[0] * m[2]))


def test_gauge_rejects_random_d(rng):
    data = _qnet_data(BOX, rng, 1.0)
    data = {k: (a, b, complex(*rng.normal(size=2))) for k, (a, b, _) in data.items()}
    with pytest.raises(ConservationViolated):
        qnet_gauge_normalize(data, BOX)
