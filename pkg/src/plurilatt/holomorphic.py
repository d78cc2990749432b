"""Conjugate pluriharmonic functions, discrete holomorphic functions and the vector Moutard pair."""

from __future__ import annotations

from collections import deque

import numpy as np

from . import config
from .errors import InconsistentCoefficients, MissingFieldValues, MultiplyConnected, NotHarmonic, SingularMatrix
from .fields import BiConstant, ScalarField
from .lagrangian import ComplexAnalysisLagrangian, DiagonalLagrangian
from .lattice import Plaquette, QuadSurface, canonicalize, parity
from .weights import _as_moutard, _inv

__all__ = [
    "BiConstant",
    "ScalarField",
    "cauchy_riemann_residual",
    "cauchy_riemann_residuals",
    "closure_residuals",
    "conjugate",
    "diagonal_increments",
    "dual_lagrangian",
    "holo_from_harmonic",
    "moutard_propagate",
]


def _values(u, points):
    try:
        return [complex(u[v]) for v in points]
    except KeyError as exc:
        point = exc.args[0] if exc.args else None
        raise MissingFieldValues(f"no field value at {point}", point=point) from None


def diagonal_increments(u, key, family: DiagonalLagrangian) -> list:
    """Prescribed jumps of the conjugate along both diagonals of plaquette ``key``.

    Returns ``[(a, b, v_b - v_a), ...]`` for the diagonals ``n_i -> n_j`` and
    ``n -> n_ij``. The complex-analysis family uses the opposite sign so that
    ``u + i v`` is holomorphic.
    """
    n, n_i, n_ij, n_j = Plaquette(*key).vertices
    u0, u_i, u_ij, u_j = _values(u, (n, n_i, n_ij, n_j))
    alpha, beta, gamma = family.abg(key)
    d1, d2 = u_ij - u0, u_i - u_j
    s = -1 if isinstance(family, ComplexAnalysisLagrangian) else 1
    return [
        (n_i, n_j, -s * (alpha * d1 + beta * d2)),
        (n, n_ij, s * (-beta * d1 - gamma * d2)),
    ]


def _check_topology(surface: QuadSurface) -> None:
    if surface.euler_characteristic not in (1, 2):
        raise MultiplyConnected(
            f"conjugate needs a simply connected surface (Euler characteristic {surface.euler_characteristic})"
        )


def _scale(u, surface, family) -> float:
    umax = max((abs(complex(u[v])) for v in surface.vertices), default=0.0)
    cmax = 0.0
    for key in surface.keys():
        cmax = max(cmax, *(abs(x) for x in family.abg(key)))
    return max(1.0, umax * cmax)


def closure_residuals(u, surface: QuadSurface, family: DiagonalLagrangian) -> dict:
    """Sum of prescribed conjugate jumps around each interior vertex.

    The cycle around ``n`` runs over the diagonals that avoid ``n``. The result
    vanishes exactly when ``u`` satisfies the Euler-Lagrange equation at ``n``.
    """
    out = {}
    for n in sorted(surface.interior_vertices):
        total = 0j
        for p in surface.incidence[n]:
            cycle = [a for a, _ in p.oriented_edges()]
            k = cycle.index(n)
            start, end = cycle[(k + 1) % 4], cycle[(k - 1) % 4]
            for a, b, jump in diagonal_increments(u, canonicalize(p).key, family):
                if (a, b) == (start, end):
                    total += jump
                elif (b, a) == (start, end):
                    total -= jump
        out[n] = total
    return out


def conjugate(u, surface: QuadSurface, family: DiagonalLagrangian, anchors: dict, tol=None) -> ScalarField:
    """Conjugate pluriharmonic function of ``u`` on ``surface``.

    ``anchors`` maps one black (even) and one white (odd) vertex to their
    values of ``v``; together they fix the bi-constant. Raises NotHarmonic when
    the jumps fail to close, naming the worst vertex.
    """
    tol = config.consistency_tol() if tol is None else tol
    _check_topology(surface)
    by_parity = {}
    for point, value in anchors.items():
        point = tuple(point)
        if point not in surface.vertices:
            raise MissingFieldValues(f"anchor {point} is not a vertex of the surface", point=point)
        if parity(point) in by_parity:
            raise ValueError("conjugate needs exactly one black and one white anchor")
        by_parity[parity(point)] = (point, complex(value))
    if set(by_parity) != {1, -1}:
        raise ValueError("conjugate needs exactly one black and one white anchor")

    edges = []
    graph = {}
    for key in sorted(surface.keys()):
        for a, b, jump in diagonal_increments(u, key, family):
            edges.append((a, b, jump))
            graph.setdefault(a, []).append((b, jump))
            graph.setdefault(b, []).append((a, -jump))

    v = ScalarField()
    for point, value in by_parity.values():
        v[point] = value
        queue = deque([point])
        while queue:
            a = queue.popleft()
            for b, jump in graph.get(a, ()):
                if b not in v:
                    v[b] = v[a] + jump
                    queue.append(b)
    unreached = set(surface.vertices) - set(v)
    if unreached:
        raise MultiplyConnected(f"surface is disconnected; {min(unreached)} cannot be reached")

    scale = _scale(u, surface, family)
    worst, worst_edge = 0.0, None
    for a, b, jump in edges:
        r = abs(v[b] - v[a] - jump)
        if r > worst:
            worst, worst_edge = r, (a, b)
    if worst > tol * scale:
        residuals = closure_residuals(u, surface, family)
        point = max(residuals, key=lambda n: abs(residuals[n])) if residuals else worst_edge[0]
        raise NotHarmonic(
            f"conjugate 1-form does not close; worst vertex {point} (residual {worst:.3e})",
            point=point,
            residual=worst,
        )
    return v


def dual_lagrangian(family: DiagonalLagrangian) -> DiagonalLagrangian:
    """Diagonal family for which the conjugate ``v`` is harmonic.

    Coefficients are ``-(α, β, γ) / (β² - αγ)``; conjugating ``v`` with it gives
    ``-u`` up to a bi-constant. The complex-analysis family is self-dual.
    """
    if isinstance(family, ComplexAnalysisLagrangian):
        return family
    coeffs = {}
    for key in family.coefficients:
        alpha, beta, gamma = family.abg(key)
        delta = beta * beta - alpha * gamma
        if delta == 0:
            raise SingularMatrix(f"β² - αγ = 0 on plaquette {key}; no dual family")
        coeffs[key] = (-alpha / delta, -beta / delta, -gamma / delta)
    return DiagonalLagrangian(coeffs)


def cauchy_riemann_residual(f, plaquette, p) -> complex:
    """``f_ij - f - i p (f_i - f_j)`` in the plaquette's own vertex order."""
    f0, f_i, f_ij, f_j = _values(f, plaquette.vertices)
    return f_ij - f0 - 1j * p * (f_i - f_j)


def cauchy_riemann_residuals(f, surface: QuadSurface, weights) -> dict:
    """Cauchy-Riemann residual on every plaquette of ``surface``, keyed canonically."""
    return {key: cauchy_riemann_residual(f, Plaquette(*key), weights[key]) for key in surface.keys()}


def holo_from_harmonic(u, surface: QuadSurface, weights, anchors: dict = None, tol=None) -> ScalarField:
    """``f = u + i v`` for real harmonic ``u`` and complex weights ``p``.

    Without ``anchors`` the conjugate is pinned to zero at the smallest black
    and white vertices.
    """
    if any(abs(complex(u[v]).imag) > 0 for v in surface.vertices):
        raise ValueError("holo_from_harmonic needs a real-valued field")
    family = ComplexAnalysisLagrangian(weights)
    if anchors is None:
        anchors = {}
        for point in sorted(surface.vertices):
            anchors.setdefault(parity(point), (point, 0.0))
        anchors = dict(anchors.values())
    v = conjugate(u, surface, family, anchors, tol=tol)
    return ScalarField((n, complex(u[n]).real + 1j * v[n].real) for n in sorted(surface.vertices))


def _top_matrices(m12, m23, m31):
    # Non-commutative star-triangle without the commutation check or diagonal cleanup.
    mats = [m23, m31, m12]
    out = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        out.append(-_inv(mats[j] + mats[k] + mats[k] @ _inv(mats[i]) @ mats[j]))
    return out  # on σ^23(n+e1), σ^31(n+e2), σ^12(n+e3)


def moutard_propagate(w, w1, w2, w3, matrices, tol=None) -> dict:
    """Fill a cube with the vector Moutard pair ``(u, v)``.

    ``w, w1, w2, w3`` are pairs at the base and its three neighbours;
    ``matrices`` are the coefficients on ``(σ^12, σ^23, σ^31)`` at the base,
    as 2x2 arrays or :class:`MoutardCoeffs`. Returns the pairs keyed by the
    offsets ``"12", "23", "13", "123"``. The three routes to ``w_123`` must agree
    to ``tol``; otherwise InconsistentCoefficients carries the disagreement.
    """
    tol = config.consistency_tol() if tol is None else tol
    w, w1, w2, w3 = (np.asarray(x, dtype=complex) for x in (w, w1, w2, w3))
    m12, m23, m31 = (_as_moutard(x).matrix for x in matrices)
    w12 = w + m12 @ (w1 - w2)
    w23 = w + m23 @ (w2 - w3)
    w13 = w + m31 @ (w3 - w1)
    h23, h31, h12 = _top_matrices(m12, m23, m31)
    routes = np.array([
        w3 + h12 @ (w13 - w23),
        w1 + h23 @ (w12 - w13),
        w2 + h31 @ (w23 - w12),
    ])
    spread = max(np.abs(routes[a] - routes[b]).max() for a in range(3) for b in range(a))
    scale = max(np.abs(np.array([w, w1, w2, w3, w12, w23, w13])).max(), 1e-300)
    disagreement = spread / scale
    if disagreement > tol:
        raise InconsistentCoefficients(
            f"three routes to the far vertex disagree (relative {disagreement:.3e})",
            disagreement=disagreement,
        )
    return {"12": w12, "23": w23, "13": w13, "123": routes.mean(axis=0)}
