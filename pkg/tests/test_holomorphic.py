import numpy as np
import pytest

from plurilatt.errors import InconsistentCoefficients, MultiplyConnected, NotHarmonic
from plurilatt.fields import BiConstant, ScalarField
from plurilatt.holomorphic import (
    cauchy_riemann_residual,
    cauchy_riemann_residuals,
    closure_residuals,
    conjugate,
    dual_lagrangian,
    holo_from_harmonic,
    moutard_propagate,
)
from plurilatt.lagrangian import ComplexAnalysisLagrangian, DiagonalLagrangian
from plurilatt.lattice import Plaquette, QuadSurface, parity, planar_patch
from plurilatt.variational import DirichletProblem, el_residuals, solve_dirichlet
from plurilatt.weights import ConstraintTriple, MoutardCoeffs, WeightField, random_datum

PATCH = planar_patch((5, 4), dim=2)
ANCHORS = {(0, 0): 0.0, (1, 0): 0.0}


def random_complex_weights(rng, surface=PATCH):
    return WeightField("complex_p", {k: complex(rng.uniform(0.5, 2), rng.uniform(-1, 1)) for k in surface.keys()})


def moutard_family(rng, surface=PATCH):
    triple = ConstraintTriple(1.0, 0.3, -0.8)
    values = {k: random_datum("moutard_abc", rng, k[0], triple) for k in surface.keys()}
    return DiagonalLagrangian.from_moutard_field(WeightField("moutard_abc", values, triple))


def harmonic(family, rng, surface=PATCH):
    boundary = {v: rng.normal() for v in surface.boundary_vertices}
    return solve_dirichlet(DirichletProblem(surface, family, boundary), require_coercive=False)


def test_conjugate_of_zero_is_bi_constant(rng):
    family = ComplexAnalysisLagrangian(random_complex_weights(rng))
    zero = ScalarField(dict.fromkeys(PATCH.vertices, 0.0))
    v = conjugate(zero, PATCH, family, {(2, 2): 1.5, (2, 1): -0.5})
    expected = BiConstant(1.5, -0.5).as_field(PATCH.vertices)
    assert v == expected


@pytest.mark.parametrize("weights", ["constant", "random"])
def test_conjugate_closes_on_harmonic_fields(weights, rng):
    if weights == "constant":
        field = WeightField("complex_p", dict.fromkeys(PATCH.keys(), 1.0))
    else:
        field = random_complex_weights(rng)
    family = ComplexAnalysisLagrangian(field)
    u = harmonic(family, rng)
    assert max(map(abs, closure_residuals(u, PATCH, family).values())) <= 1e-9
    v = conjugate(u, PATCH, family, ANCHORS)
    f = ScalarField((n, u[n] + 1j * v[n]) for n in PATCH.vertices)
    assert max(map(abs, cauchy_riemann_residuals(f, PATCH, field).values())) <= 1e-9


def test_conjugate_rejects_non_harmonic(rng):
    family = ComplexAnalysisLagrangian(random_complex_weights(rng))
    u = harmonic(family, rng)
    u[(2, 2)] += 0.1
    with pytest.raises(NotHarmonic) as info:
        conjugate(u, PATCH, family, ANCHORS)
    assert info.value.point == (2, 2)


def test_conjugate_anchor_rules(rng):
    family = ComplexAnalysisLagrangian(random_complex_weights(rng))
    u = harmonic(family, rng)
    with pytest.raises(ValueError):
        conjugate(u, PATCH, family, {(0, 0): 0.0, (1, 1): 0.0})
    with pytest.raises(ValueError):
        conjugate(u, PATCH, family, {(0, 0): 0.0})


def test_conjugate_rejects_annulus(rng):
    ring = QuadSurface(p for p in planar_patch((3, 3), dim=2) if p.base != (1, 1))
    family = ComplexAnalysisLagrangian(random_complex_weights(rng, ring))
    with pytest.raises(MultiplyConnected):
        conjugate(dict.fromkeys(ring.vertices, 0.0), ring, family, ANCHORS)


@pytest.mark.parametrize("kind, factor", [("complex", -1.0), ("moutard", 1.0)])
def test_closure_is_laplace_residual(kind, factor, rng):
    family = ComplexAnalysisLagrangian(random_complex_weights(rng)) if kind == "complex" else moutard_family(rng)
    u = {v: complex(*rng.normal(size=2)) for v in PATCH.vertices}
    closure = closure_residuals(u, PATCH, family)
    el = el_residuals(PATCH, family, u)
    for n in el:
        assert closure[n] == pytest.approx(factor * el[n], rel=1e-10)


@pytest.mark.parametrize("kind", ["complex", "moutard"])
def test_double_conjugate_is_minus_u(kind, rng):
    family = ComplexAnalysisLagrangian(random_complex_weights(rng)) if kind == "complex" else moutard_family(rng)
    u = harmonic(family, rng)
    v = conjugate(u, PATCH, family, ANCHORS)
    w = conjugate(v, PATCH, dual_lagrangian(family), ANCHORS)
    gap = {n: w[n] + u[n] for n in PATCH.vertices}
    for colour in (1, -1):
        values = [gap[n] for n in PATCH.vertices if parity(n) == colour]
        assert np.ptp(np.abs(np.array(values) - values[0])) < 1e-10


def test_complex_family_is_self_dual(rng):
    family = ComplexAnalysisLagrangian(random_complex_weights(rng))
    assert dual_lagrangian(family) is family


def test_cauchy_riemann_basics(rng):
    p = Plaquette((0, 0), (1, 2))
    assert cauchy_riemann_residual(dict.fromkeys(p.vertices, 2 + 1j), p, 0.7 + 0.1j) == 0
    f = {(0, 0): 0, (1, 0): 1, (1, 1): 1j, (0, 1): 0}
    assert cauchy_riemann_residual(f, p, 1.0) == 0


def test_cauchy_riemann_locality(rng):
    weights = random_complex_weights(rng)
    f = ScalarField(holo_from_harmonic(harmonic(ComplexAnalysisLagrangian(weights), rng), PATCH, weights))
    f[(2, 2)] += 0.01j
    residuals = cauchy_riemann_residuals(f, PATCH, weights)
    touched = {k for k in residuals if (2, 2) in Plaquette(*k).vertices}
    assert len(touched) == 4
    assert all(abs(residuals[k]) > 1e-4 for k in touched)
    assert all(abs(residuals[k]) < 1e-12 for k in residuals.keys() - touched)


def test_holo_from_harmonic(rng):
    weights = WeightField("complex_p", dict.fromkeys(PATCH.keys(), 1.0))
    family = ComplexAnalysisLagrangian(weights)
    u = solve_dirichlet(DirichletProblem(PATCH, family, {v: v[0] - 2.0 * v[1] for v in PATCH.boundary_vertices}))
    f = holo_from_harmonic(u, PATCH, weights)
    assert all(f[n].real == u[n].real for n in PATCH.vertices)
    assert max(map(abs, cauchy_riemann_residuals(f, PATCH, weights).values())) < 1e-12

    zero = holo_from_harmonic(dict.fromkeys(PATCH.vertices, 0.0), PATCH, weights, anchors={(3, 3): 2.0, (3, 2): 1.0})
    assert zero == BiConstant(2j, 1j).as_field(PATCH.vertices)

    with pytest.raises(ValueError):
        holo_from_harmonic({n: 1j for n in PATCH.vertices}, PATCH, weights)


def test_moutard_zero_data():
    mats = [MoutardCoeffs(1, 0, 1)] * 3
    out = moutard_propagate(*(np.zeros(2),) * 4, mats)
    assert all(not np.any(w) for w in out.values())


def test_moutard_routes_agree(rng):
    mats = [MoutardCoeffs(1, 0, 1)] * 3
    for _ in range(20):
        w = [rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(4)]
        out = moutard_propagate(*w, mats, tol=1e-10)
        # each face satisfies the vector Moutard relation
        np.testing.assert_allclose(out["12"] - w[0], mats[0].matrix @ (w[1] - w[2]))


def test_moutard_inconsistent_matrices(rng):
    mats = [MoutardCoeffs(*(complex(*rng.normal(size=2)) for _ in range(3))) for _ in range(3)]
    w = [rng.normal(size=2) for _ in range(4)]
    with pytest.raises(InconsistentCoefficients) as info:
        moutard_propagate(*w, mats)
    assert info.value.disagreement > 1e-6
