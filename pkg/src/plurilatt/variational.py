"""Corner equations, Dirichlet problems on quad-surfaces and flip extension."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import config
from .errors import (
    DanglingInterior,
    MissingFieldValues,
    MultiplyConnected,
    NotHarmonic,
    SingularSystem,
    UnsolvablePivot,
)
from .fields import ScalarField
from .lagrangian import ComplexAnalysisLagrangian, CubeGram, QuadraticLagrangian
from .lattice import VERTEX_OFFSETS, Cube, QuadSurface, canonicalize, find_flip_corner, flip


def _matrix(gram) -> np.ndarray:
    return gram.matrix if isinstance(gram, CubeGram) else np.asarray(gram, dtype=complex)


# --- single cube ---------------------------------------------------------------


@dataclass
class CornerVerdict:
    """Rank analysis of the eight corner equations of one cube.

    ``status`` is ``"consistent"`` for rank 2, ``"degenerate"`` for rank below 2
    and ``"inconsistent"`` otherwise.
    """

    cube: Optional[Cube]
    singular_values: np.ndarray
    rank: int
    consistent: bool
    degenerate: bool = False

    @property
    def status(self) -> str:
        if self.degenerate:
            return "degenerate"
        return "consistent" if self.consistent else "inconsistent"

    def to_record(self) -> dict:
        return {
            "cube": None if self.cube is None else {"base": list(self.cube.base), "dirs": list(self.cube.dirs)},
            "singular_values": [float(s) for s in self.singular_values],
            "rank": self.rank,
            "consistent": self.consistent,
            "status": self.status,
        }


def corner_residuals(gram, x) -> np.ndarray:
    """Gradient ``2 M x`` of ``S^ijk``; entry ``a`` is ``∂S^ijk/∂x_a``."""
    return 2 * _matrix(gram) @ np.asarray(x, dtype=complex)


def verify_cube(gram, rel_tol: float = None) -> CornerVerdict:
    """Numerical rank of the corner equations via singular values."""
    rel_tol = config.RANK_TOL if rel_tol is None else rel_tol
    m = _matrix(gram)
    s = np.linalg.svd(m, compute_uv=False)
    rank = int(np.sum(s > rel_tol * s[0])) if s[0] > 0 else 0
    return CornerVerdict(
        cube=getattr(gram, "cube", None),
        singular_values=s,
        rank=rank,
        consistent=rank == 2,
        degenerate=rank < 2,
    )


def solve_corner(gram, free_values: dict) -> np.ndarray:
    """Complete six prescribed vertex values to a solution of all corner equations.

    ``free_values`` maps six vertex indices to values; the remaining two are
    solved from the corner equations in the least-squares sense.
    """
    m = _matrix(gram)
    free = sorted(free_values)
    unknown = [a for a in range(8) if a not in free_values]
    x = np.zeros(8, dtype=complex)
    x[free] = [free_values[a] for a in free]
    y, *_ = np.linalg.lstsq(m[:, unknown], -m[:, free] @ x[free], rcond=None)
    x[unknown] = y
    return x


def best_unknown_pair(gram) -> tuple:
    """Pair of vertices best determined by the others through the corner equations."""
    m = _matrix(gram)
    best, best_pair = -1.0, None
    for pair in itertools.combinations(range(8), 2):
        smin = np.linalg.svd(m[:, pair], compute_uv=False)[-1]
        if smin > best:
            best, best_pair = smin, pair
    return best_pair


def corner_solutions(gram, count: int, rng) -> np.ndarray:
    """``count`` random solutions: six random values, two solved from the equations."""
    pair = best_unknown_pair(gram)
    free = [a for a in range(8) if a not in pair]
    out = np.empty((count, 8), dtype=complex)
    for t in range(count):
        values = rng.normal(size=6) + 1j * rng.normal(size=6)
        out[t] = solve_corner(gram, dict(zip(free, values)))
    return out


# --- surfaces -------------------------------------------------------------------


@dataclass
class DirichletProblem:
    surface: QuadSurface
    family: QuadraticLagrangian
    boundary_values: dict = field(default_factory=dict)


@dataclass
class LaplaceSystem:
    """``matrix @ u_interior = rhs`` with rows ``∂S_Σ/∂u(n) = 0``."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    interior: list
    boundary: list


def surface_hessian(surface: QuadSurface, family: QuadraticLagrangian, order: list) -> sp.csr_matrix:
    """Sparse symmetric ``H`` with ``S_Σ(x) = x^T H x`` over ``order``."""
    index = {v: a for a, v in enumerate(order)}
    rows, cols, data = [], [], []
    for p in surface:
        c = canonicalize(p)
        q = c.sign * family.local_form(c.key)
        idx = [index[v] for v in c.vertices]
        for r, a in enumerate(idx):
            for s, b in enumerate(idx):
                rows.append(a)
                cols.append(b)
                data.append(q[r, s])
    n = len(order)
    return sp.csr_matrix((np.array(data, dtype=complex), (rows, cols)), shape=(n, n))


def _check_coercive(problem: DirichletProblem) -> None:
    family = problem.family
    if not isinstance(family, ComplexAnalysisLagrangian):
        return
    for p in problem.surface:
        c = canonicalize(p)
        if (c.sign * family.weights.values[c.key]).real <= 0:
            raise SingularSystem(
                f"Re p <= 0 on oriented plaquette {c.key} (sign {c.sign}): Dirichlet energy is not coercive"
            )


def assemble_laplacian(problem: DirichletProblem) -> LaplaceSystem:
    """Euler-Lagrange system for the interior values of a disk-like surface."""
    surface = problem.surface
    if not surface.is_disk():
        raise MultiplyConnected("Dirichlet problems need a disk-like surface with one boundary cycle")
    interior = sorted(surface.interior_vertices)
    boundary = sorted(surface.boundary_vertices)
    stray = [v for v in problem.boundary_values if v in surface.interior_vertices]
    if stray:
        raise DanglingInterior(f"boundary value given at interior vertex {stray[0]}")
    missing = [v for v in boundary if v not in problem.boundary_values]
    if missing:
        raise MissingFieldValues(f"no boundary value at {missing[0]}", point=missing[0])
    h = surface_hessian(surface, problem.family, interior + boundary)
    ni = len(interior)
    h = h.tocsr()
    x_b = np.array([problem.boundary_values[v] for v in boundary], dtype=complex)
    matrix = 2 * h[:ni, :ni]
    rhs = -2 * (h[:ni, ni:] @ x_b) if boundary else np.zeros(ni, dtype=complex)
    return LaplaceSystem(matrix.tocsr(), np.asarray(rhs), interior, boundary)


def solve_dirichlet(problem: DirichletProblem, require_coercive: bool = True) -> ScalarField:
    """Interior values making ``u`` critical for ``S_Σ`` with the given boundary.

    For the complex-analysis family a non-coercive energy (some oriented
    ``Re p <= 0``) is rejected unless ``require_coercive`` is False.
    """
    if require_coercive:
        _check_coercive(problem)
    system = assemble_laplacian(problem)
    out = ScalarField((v, complex(problem.boundary_values[v])) for v in system.boundary)
    if not system.interior:
        return out
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            lu = spla.splu(system.matrix.tocsc())
            x = lu.solve(system.rhs)
    except (RuntimeError, Warning) as exc:
        raise SingularSystem(f"Dirichlet system is singular: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystem("Dirichlet solve produced non-finite values")
    residual = np.abs(system.matrix @ x - system.rhs).max()
    scale = max(np.abs(system.rhs).max(), abs(system.matrix).max() * np.abs(x).max(), 1e-300)
    if residual > 1e-6 * scale:
        raise SingularSystem(f"Dirichlet system is numerically singular (residual {residual:.3e})")
    out.update(zip(system.interior, (complex(v) for v in x)))
    return out


def el_residuals(surface: QuadSurface, family: QuadraticLagrangian, u, vertices=None) -> dict:
    """``∂S_Σ/∂u(n)`` at ``vertices`` (default: interior vertices)."""
    vertices = sorted(surface.interior_vertices) if vertices is None else list(vertices)
    out = {v: 0j for v in vertices}
    for v in vertices:
        for p in surface.incidence.get(v, ()):
            c = canonicalize(p)
            q = c.sign * family.local_form(c.key)
            verts = c.vertices
            try:
                y = np.array([u[w] for w in verts], dtype=complex)
            except KeyError as exc:
                raise MissingFieldValues(f"no field value at {exc.args[0]}", point=exc.args[0]) from None
            out[v] += complex(2 * (q @ y)[verts.index(v)])
    return out


def _cube_values(cube: Cube, u) -> np.ndarray:
    return np.array([u[v] for v in cube.vertices], dtype=complex)


def extend_across_flip(u, surface: QuadSurface, cube: Cube, family: QuadraticLagrangian, tol=None, check=True):
    """Flip ``surface`` across ``cube`` and extend ``u`` to the new vertex.

    The value at the vertex opposite the flipped corner is the least-squares
    solution of the eight corner equations given the other seven values.
    Returns ``(new_surface, new_field)``. With ``check`` the corner residuals
    must vanish to ``tol * |M| * |x|``, otherwise NotHarmonic is raised.
    """
    tol = config.consistency_tol() if tol is None else tol
    corner = find_flip_corner(surface, cube)
    new_surface = flip(surface, cube)
    target = VERTEX_OFFSETS.index(tuple(a for a in range(3) if a not in VERTEX_OFFSETS[corner]))
    m = family.cube_gram(cube).matrix
    vertices = cube.vertices
    known = [a for a in range(8) if a != target]
    x = np.zeros(8, dtype=complex)
    for a in known:
        x[a] = u[vertices[a]]
    column = m[:, target]
    if np.linalg.norm(column) <= config.DEGENERACY_TOL * max(np.linalg.norm(m), 1e-300):
        raise UnsolvablePivot(f"corner equations of {cube} do not involve vertex {vertices[target]}")
    r = m[:, known] @ x[known]
    x[target] = -np.vdot(column, r) / np.vdot(column, column)
    new_u = ScalarField(u)
    point = vertices[target]
    if check:
        residual = np.abs(corner_residuals(m, x)).max()
        bound = tol * np.linalg.norm(m, 2) * max(np.linalg.norm(x), 1e-300)
        if residual > bound:
            raise NotHarmonic(
                f"field does not solve the corner equations of {cube} (residual {residual:.3e})",
                point=point,
                residual=residual,
            )
        if point in u and abs(u[point] - x[target]) > tol * max(np.linalg.norm(x), 1e-300):
            raise NotHarmonic(f"existing value at {point} contradicts the corner equations", point=point)
    new_u[point] = complex(x[target])
    return new_surface, new_u


@dataclass
class EnergyComparison:
    action_a: complex
    action_b: complex
    difference: float
    tolerance: float

    @property
    def within(self) -> bool:
        return self.difference <= self.tolerance


def energy_invariance(u, surface_a: QuadSurface, surface_b: QuadSurface, family: QuadraticLagrangian, rel_tol=None) -> EnergyComparison:
    """Compare ``S_Σ`` and ``S_Σ'`` for one field on two surfaces."""
    rel_tol = config.consistency_tol() if rel_tol is None else rel_tol
    s_a = family.action(surface_a, u)
    s_b = family.action(surface_b, u)
    coeff_scale = 0.0
    for p in itertools.chain(surface_a, surface_b):
        c = canonicalize(p)
        coeff_scale = max(coeff_scale, float(np.abs(family.local_form(c.key)).max()))
    points = set(surface_a.vertices) | set(surface_b.vertices)
    u_norm2 = sum(abs(u[v]) ** 2 for v in points)
    tolerance = rel_tol * max(abs(s_a), u_norm2 * coeff_scale)
    return EnergyComparison(s_a, s_b, abs(s_a - s_b), tolerance)
