import numpy as np
import pytest

from plurilatt.errors import MissingFieldValues, MultiplyConnected, NotFlippable, NotHarmonic, SingularSystem
from plurilatt.fields import ScalarField
from plurilatt.lagrangian import ComplexAnalysisLagrangian, family_for
from plurilatt.lattice import Cube, QuadSurface, enumerate_cubes, flip, planar_patch, room_corner
from plurilatt.variational import (
    DirichletProblem,
    assemble_laplacian,
    corner_residuals,
    el_residuals,
    energy_invariance,
    extend_across_flip,
    solve_dirichlet,
    verify_cube,
)
from plurilatt.weights import WeightField, propagate, random_initial_field

BOX = ((0, 2),) * 3
CUBE = Cube((0, 0, 0), (1, 2, 3))


def constant_weights(surface, p=1.0):
    return WeightField("complex_p", {key: p for key in surface.keys()})


def room(box, rng):
    surface = room_corner(box)
    values = {p.key: p.sign * complex(rng.uniform(0.5, 2), rng.uniform(-1, 1)) for p in surface}
    return surface, ComplexAnalysisLagrangian(propagate(WeightField("complex_p", values), box))


def solve(surface, family, boundary):
    return solve_dirichlet(DirichletProblem(surface, family, boundary))


def test_corner_residuals_trivial_fields():
    gram = family_for(propagate(random_initial_field("complex_p", BOX, 1), BOX)).cube_gram(CUBE)
    assert not corner_residuals(gram, np.zeros(8)).any()
    assert np.abs(corner_residuals(gram, np.full(8, 2.5))).max() < 1e-13


@pytest.mark.parametrize("kind", ["complex_p", "pair_pq", "three_point", "qnet"])
def test_corner_residuals_match_finite_differences(kind, rng):
    family = family_for(propagate(random_initial_field(kind, BOX, 2), BOX))
    gram = family.cube_gram(Cube((1, 0, 0), (1, 2, 3)))
    x = rng.normal(size=8) + 1j * rng.normal(size=8)
    h = 1e-5 * np.linalg.norm(x)
    fd = np.array([(gram.value(x + h * e) - gram.value(x - h * e)) / (2 * h) for e in np.eye(8)])
    exact = corner_residuals(gram, x)
    assert np.linalg.norm(fd - exact) <= 1e-6 * np.linalg.norm(exact)


def test_verify_cube_rank_and_perturbation(rng):
    weights = propagate(random_initial_field("complex_p", BOX, rng), BOX)
    family = ComplexAnalysisLagrangian(weights)
    assert verify_cube(family.cube_gram(CUBE)).rank == 2
    top = ((0, 0, 1), (1, 2))
    weights.values[top] *= 1.1
    verdict = verify_cube(family.cube_gram(CUBE))
    assert verdict.rank > 2
    assert verdict.status == "inconsistent"
    assert verdict.to_record()["rank"] == verdict.rank


def test_constant_boundary_gives_constant():
    patch = planar_patch((4, 4), dim=2)
    family = ComplexAnalysisLagrangian(constant_weights(patch, 1.3 + 0.4j))
    u = solve(patch, family, dict.fromkeys(patch.boundary_vertices, 2.0))
    assert max(abs(u[v] - 2.0) for v in patch.vertices) < 1e-12


@pytest.mark.parametrize("p", [1.0, 0.8 + 0.6j])
def test_linear_boundary_gives_linear_field(p):
    patch = planar_patch((5, 4), dim=2)
    family = ComplexAnalysisLagrangian(constant_weights(patch, p))
    u = solve(patch, family, {v: float(v[0]) for v in patch.boundary_vertices})
    assert max(abs(u[v] - v[0]) for v in patch.interior_vertices) < 1e-9


def test_hand_assembled_row():
    patch = planar_patch((2, 2), dim=2)
    system = assemble_laplacian(
        DirichletProblem(patch, ComplexAnalysisLagrangian(constant_weights(patch)), dict.fromkeys(patch.boundary_vertices, 0.0))
    )
    assert system.interior == [(1, 1)]
    assert system.matrix.toarray().ravel() == pytest.approx([4.0])
    # each plaquette couples the centre to its diagonal partner only
    boundary = {v: 0.0 for v in patch.boundary_vertices}
    for corner in [(0, 0), (2, 2), (2, 0), (0, 2)]:
        system = assemble_laplacian(DirichletProblem(patch, ComplexAnalysisLagrangian(constant_weights(patch)), {**boundary, corner: 1.0}))
        assert system.rhs == pytest.approx([1.0])
    for edge in [(1, 0), (0, 1), (2, 1), (1, 2)]:
        system = assemble_laplacian(DirichletProblem(patch, ComplexAnalysisLagrangian(constant_weights(patch)), {**boundary, edge: 1.0}))
        assert system.rhs == pytest.approx([0.0])


def test_single_corner_boundary():
    patch = planar_patch((2, 2), dim=2)
    boundary = dict.fromkeys(patch.boundary_vertices, 0.0)
    boundary[(0, 0)] = 1.0
    u = solve(patch, ComplexAnalysisLagrangian(constant_weights(patch)), boundary)
    assert u[(1, 1)] == pytest.approx(0.25)


def holomorphic_grid(size, p, rng):
    """Discrete holomorphic f on a grid, grown from random values on two axes."""
    f = {}
    for a in range(size[0] + 1):
        f[(a, 0)] = complex(*rng.normal(size=2))
    for b in range(1, size[1] + 1):
        f[(0, b)] = complex(*rng.normal(size=2))
    for a in range(size[0]):
        for b in range(size[1]):
            f[(a + 1, b + 1)] = f[(a, b)] + 1j * p * (f[(a + 1, b)] - f[(a, b + 1)])
    return f


@pytest.mark.parametrize("p", [1.0, 1.2 - 0.5j])
def test_recovers_real_part_of_holomorphic_function(p, rng):
    size = (5, 5)
    patch = planar_patch(size, dim=2)
    f = holomorphic_grid(size, p, rng)
    u = solve(patch, ComplexAnalysisLagrangian(constant_weights(patch, p)), {v: f[v].real for v in patch.boundary_vertices})
    assert max(abs(u[v] - f[v].real) for v in patch.interior_vertices) < 1e-8


def test_dirichlet_guards():
    patch = planar_patch((3, 3), dim=2)
    family = ComplexAnalysisLagrangian(constant_weights(patch))
    boundary = dict.fromkeys(patch.boundary_vertices, 0.0)
    del boundary[(0, 0)]
    with pytest.raises(MissingFieldValues) as info:
        solve(patch, family, boundary)
    assert info.value.point == (0, 0)

    with pytest.raises(SingularSystem):
        solve(patch, ComplexAnalysisLagrangian(constant_weights(patch, -1.0)), dict.fromkeys(patch.boundary_vertices, 0.0))

    ring = QuadSurface(p for p in planar_patch((3, 3), dim=2) if p.base != (1, 1))
    with pytest.raises(MultiplyConnected):
        solve(ring, family, dict.fromkeys(ring.vertices, 0.0))


def test_flower_decomposition(rng):
    surface, family = room(BOX, rng)
    u = {v: rng.normal() for cube in enumerate_cubes(BOX) for v in cube.vertices}
    centre = (1, 1, 0)
    el = el_residuals(surface, family, u, [centre])[centre]
    total = 0j
    for cube in enumerate_cubes(BOX):
        if centre in cube.vertices:
            x = np.array([u[v] for v in cube.vertices])
            total += corner_residuals(family.cube_gram(cube), x)[cube.vertex_index(centre)]
    # vertical faces cancel between neighbouring cubes; floor faces enter reversed
    assert abs(el + total) <= 1e-10 * max(1.0, abs(el))


def test_valence_three_vertex_is_one_corner_equation(rng):
    surface, family = room(BOX, rng)
    flipped = flip(surface, CUBE)
    u = {v: rng.normal() for v in CUBE.vertices}
    el = el_residuals(flipped, family, u, [(1, 1, 1)])[(1, 1, 1)]
    x = np.array([u[v] for v in CUBE.vertices])
    assert el == pytest.approx(corner_residuals(family.cube_gram(CUBE), x)[7], rel=1e-12)


def test_extension_of_zero_field(rng):
    surface, family = room(BOX, rng)
    u = ScalarField(dict.fromkeys(surface.vertices, 0.0))
    _, extended = extend_across_flip(u, surface, CUBE, family)
    assert extended[(1, 1, 1)] == 0


def test_extension_and_flip_back(rng):
    surface, family = room(BOX, rng)
    u = solve(surface, family, {v: rng.normal() for v in surface.boundary_vertices})
    new_surface, extended = extend_across_flip(u, surface, CUBE, family)
    x = np.array([extended[v] for v in CUBE.vertices])
    gram = family.cube_gram(CUBE)
    assert np.abs(corner_residuals(gram, x)).max() <= 1e-9 * gram.norm() * np.linalg.norm(x)
    assert el_residuals(new_surface, family, extended).keys() == new_surface.interior_vertices
    assert max(map(abs, el_residuals(new_surface, family, extended).values())) < 1e-9

    back_surface, back = extend_across_flip(extended, new_surface, CUBE, family)
    assert back_surface.keys() == surface.keys()
    assert back[(0, 0, 0)] == pytest.approx(u[(0, 0, 0)], rel=1e-9)


def test_extension_rejects_non_solutions(rng):
    surface, family = room(BOX, rng)
    u = ScalarField({v: rng.normal() for v in surface.vertices})
    with pytest.raises(NotHarmonic):
        extend_across_flip(u, surface, CUBE, family)


def test_extension_needs_flippable_corner(rng):
    _, family = room(BOX, rng)
    patch = planar_patch((2, 2))
    with pytest.raises(NotFlippable):
        extend_across_flip(ScalarField(dict.fromkeys(patch.vertices, 0.0)), patch, CUBE, family)


def test_energy_invariance_cases(rng):
    surface, family = room(BOX, rng)
    flipped = flip(surface, CUBE)
    zero = dict.fromkeys(surface.vertices | flipped.vertices, 0.0)
    cmp = energy_invariance(zero, surface, flipped, family)
    assert cmp.action_a == 0 and cmp.action_b == 0 and cmp.within

    u = solve(surface, family, {v: rng.normal() for v in surface.boundary_vertices})
    _, extended = extend_across_flip(u, surface, CUBE, family)
    assert energy_invariance(extended, surface, flipped, family).within

    noise = {v: rng.normal() for v in zero}
    cmp = energy_invariance(noise, surface, flipped, family)
    assert cmp.difference > 1e-6
    assert not cmp.within
