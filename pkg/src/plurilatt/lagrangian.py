"""Quadratic Lagrangian 2-forms and the cube action ``S^ijk``.

Each family turns a :class:`~plurilatt.weights.WeightField` into a symmetric
4x4 quadratic form per canonical plaquette, in the vertex order
``(u, u_i, u_ij, u_j)``. Everything else (evaluation on surfaces, the 8x8 cube
Gram matrix) is built on that one method, so the variational code never needs
to know which family it is working with.

Diagonal families depend on the diagonal differences ``d1 = u_ij - u`` and
``d2 = u_i - u_j`` only::

    L = 1/2 α d1^2 + β d1 d2 + 1/2 γ d2^2
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from . import config
from .errors import (
    ConservationViolated,
    MissingCoefficients,
    MissingFieldValues,
    SingularConversion,
)
from .lattice import Cube, Plaquette, box_plaquettes, canonicalize, enumerate_cubes, normalize_box, parity, shifted
from .weights import MoutardCoeffs, WeightField, abc_from_pq

_D1 = np.array([-1.0, 0.0, 1.0, 0.0])  # u_ij - u
_D2 = np.array([0.0, 1.0, 0.0, -1.0])  # u_i - u_j


_F_ALPHA = 0.5 * np.outer(_D1, _D1)
_F_BETA = 0.5 * (np.outer(_D1, _D2) + np.outer(_D2, _D1))
_F_GAMMA = 0.5 * np.outer(_D2, _D2)


def diagonal_form(alpha, beta, gamma) -> np.ndarray:
    return alpha * _F_ALPHA + beta * _F_BETA + gamma * _F_GAMMA + 0j


def to_moutard(alpha, beta, gamma) -> MoutardCoeffs:
    """``a = 1/α``, ``b = -β/α``, ``c = (β^2 - αγ)/α``."""
    if alpha == 0:
        raise SingularConversion("to_moutard needs α != 0")
    return MoutardCoeffs(1 / alpha, -beta / alpha, (beta * beta - alpha * gamma) / alpha)


def from_moutard(coeffs) -> tuple:
    """Inverse of :func:`to_moutard`: ``(α, β, γ) = (1/a, -b/a, b^2/a - c)``."""
    a, b, c = coeffs
    if a == 0:
        raise SingularConversion("from_moutard needs a != 0")
    return (1 / a, -b / a, b * b / a - c)


def _vertex_values(plaquette: Plaquette, values):
    """Values at ``plaquette.vertices`` from a mapping or a 4-sequence."""
    if isinstance(values, Mapping):
        out = []
        for v in plaquette.vertices:
            try:
                out.append(values[v])
            except KeyError:
                raise MissingFieldValues(f"no field value at {v}", point=v) from None
        return out
    values = list(values)
    if len(values) != 4:
        raise ValueError("expected four vertex values (u, u_i, u_ij, u_j)")
    return values


def _canonical_values(plaquette: Plaquette, values):
    """Reorder own-vertex values into the canonical plaquette's vertex order."""
    y = _vertex_values(plaquette, values)
    if plaquette.is_canonical:
        return np.asarray(y, dtype=complex)
    # σ^ji vertices (n, n+e_j, n+e_ij, n+e_i) -> σ^ij order
    return np.asarray([y[0], y[3], y[2], y[1]], dtype=complex)


@dataclass
class CubeGram:
    """``S^ijk(x) = x^T M x`` over the eight cube vertices (see lattice docs)."""

    matrix: np.ndarray
    cube: Cube = None

    def value(self, x) -> complex:
        x = np.asarray(x, dtype=complex)
        return complex(x @ self.matrix @ x)

    def gradient(self, x) -> np.ndarray:
        return 2 * self.matrix @ np.asarray(x, dtype=complex)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


class QuadraticLagrangian:
    """Common interface of every Lagrangian family."""

    name = "quadratic"
    kinds: tuple = ()

    def __init__(self, weights: WeightField):
        if self.kinds and weights.kind not in self.kinds:
            raise ValueError(f"{type(self).__name__} needs weights of kind {self.kinds}, got {weights.kind!r}")
        self.weights = weights

    def _coefficients(self, key):
        try:
            return self.weights.values[key]
        except KeyError:
            raise MissingCoefficients(f"no {self.name} coefficients on plaquette {key}") from None

    def local_form(self, key) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, plaquette: Plaquette, values) -> complex:
        """Orientation-signed value of ``L`` on ``plaquette``.

        ``values`` are ``(u, u_i, u_ij, u_j)`` in the plaquette's own vertex
        order, or a mapping from points to field values.
        """
        c = canonicalize(plaquette)
        y = _canonical_values(plaquette, values)
        return complex(c.sign * (y @ self.local_form(c.key) @ y))

    def evaluate_formula(self, plaquette: Plaquette, values) -> complex:
        """Same value computed from the family's closed-form expression."""
        c = canonicalize(plaquette)
        y = _canonical_values(plaquette, values)
        return complex(c.sign * self._formula(c.key, *y))

    def _formula(self, key, u, u_i, u_ij, u_j):
        raise NotImplementedError

    def action(self, surface, field) -> complex:
        """``S_Σ``: the sum of oriented plaquette values over ``surface``."""
        return complex(sum(self.evaluate(p, field) for p in surface))

    def cube_gram(self, cube: Cube) -> CubeGram:
        m = np.zeros((8, 8), dtype=complex)
        index = {v: a for a, v in enumerate(cube.vertices)}
        for face in cube.faces():
            c = canonicalize(face)
            q = self.local_form(c.key)
            idx = [index[v] for v in c.vertices]
            m[np.ix_(idx, idx)] += c.sign * q
        return CubeGram(m, cube)


class DiagonalLagrangian(QuadraticLagrangian):
    """General diagonal family with explicit ``(α, β, γ)`` per plaquette."""

    name = "diagonal"

    def __init__(self, coefficients: dict):
        self.coefficients = dict(coefficients)
        self.weights = None

    @classmethod
    def from_moutard_field(cls, weights: WeightField) -> "DiagonalLagrangian":
        """Lagrangian whose conjugate pair solves the vector Moutard equation."""
        if weights.kind == "moutard_abc":
            coeffs = {k: from_moutard(v) for k, v in weights.values.items()}
        elif weights.kind == "coupled_pq":
            coeffs = {
                k: from_moutard(abc_from_pq(p, q, weights.constraint, parity(k[0])))
                for k, (p, q) in weights.values.items()
            }
        else:
            raise ValueError(f"cannot build a diagonal Lagrangian from {weights.kind!r} weights")
        out = cls(coeffs)
        out.weights = weights
        return out

    def abg(self, key) -> tuple:
        try:
            return self.coefficients[key]
        except KeyError:
            raise MissingCoefficients(f"no diagonal coefficients on plaquette {key}") from None

    def oriented_abg(self, plaquette: Plaquette) -> tuple:
        """``(α, β, γ)`` as seen from ``plaquette``: α, γ are odd, β is even."""
        c = canonicalize(plaquette)
        alpha, beta, gamma = self.abg(c.key)
        return (c.sign * alpha, beta, c.sign * gamma)

    def local_form(self, key):
        return diagonal_form(*self.abg(key))

    def _formula(self, key, u, u_i, u_ij, u_j):
        alpha, beta, gamma = self.abg(key)
        d1, d2 = u_ij - u, u_i - u_j
        return 0.5 * alpha * d1 * d1 + beta * d1 * d2 + 0.5 * gamma * d2 * d2

    def moutard(self, key) -> MoutardCoeffs:
        return to_moutard(*self.abg(key))


class ComplexAnalysisLagrangian(DiagonalLagrangian):
    """Dirichlet energy of discrete complex analysis, ``α = 1/Re p`` etc."""

    name = "complex"
    kinds = ("complex_p",)

    def __init__(self, weights: WeightField):
        QuadraticLagrangian.__init__(self, weights)

    def abg(self, key):
        p = self._coefficients(key)
        if p.real == 0:
            raise SingularConversion(f"Re p = 0 on plaquette {key}")
        return (1 / p.real, p.imag / p.real, abs(p) ** 2 / p.real)

    @property
    def coefficients(self):
        return {k: self.abg(k) for k in self.weights.values}


class FactorizedLagrangian(DiagonalLagrangian):
    """``L = (d1 + p d2)(d1 - q d2) / (p + q)``."""

    name = "factorized"
    kinds = ("pair_pq",)

    def __init__(self, weights: WeightField):
        QuadraticLagrangian.__init__(self, weights)

    def abg(self, key):
        p, q = self._coefficients(key)
        if p + q == 0:
            raise SingularConversion(f"p + q = 0 on plaquette {key}")
        return (2 / (p + q), (p - q) / (p + q), -2 * p * q / (p + q))

    @property
    def coefficients(self):
        return {k: self.abg(k) for k in self.weights.values}

    def _formula(self, key, u, u_i, u_ij, u_j):
        p, q = self._coefficients(key)
        d1, d2 = u_ij - u, u_i - u_j
        return (d1 + p * d2) * (d1 - q * d2) / (p + q)


class DegenerateLagrangian(DiagonalLagrangian):
    """The two degenerate diagonal families.

    ``triangular`` weights ``(a, b)``: ``L = (d1 + b d2)^2 / a``.
    ``offdiagonal`` weights ``(a, c)``: ``L = d1^2 / a - c d2^2``.
    """

    kinds = ("triangular", "offdiagonal")

    def __init__(self, weights: WeightField):
        QuadraticLagrangian.__init__(self, weights)
        self.name = "ex3" if weights.kind == "triangular" else "ex4"

    def abg(self, key):
        a, x = self._coefficients(key)
        if a == 0:
            raise SingularConversion(f"a = 0 on plaquette {key}")
        if self.weights.kind == "triangular":
            return (2 / a, 2 * x / a, 2 * x * x / a)
        return (2 / a, 0j, -2 * x)

    @property
    def coefficients(self):
        return {k: self.abg(k) for k in self.weights.values}

    def _formula(self, key, u, u_i, u_ij, u_j):
        a, x = self._coefficients(key)
        d1, d2 = u_ij - u, u_i - u_j
        if self.weights.kind == "triangular":
            return (d1 + x * d2) ** 2 / a
        return d1 * d1 / a - x * d2 * d2


class ThreePointLagrangian(QuadraticLagrangian):
    """``L = (u_i - u)^2 - (u_j - u)^2 - p (u_i - u_j)^2``; no dependence on ``u_ij``."""

    name = "three-point"
    kinds = ("three_point",)

    _A = np.array([-1.0, 1.0, 0.0, 0.0])
    _B = np.array([-1.0, 0.0, 0.0, 1.0])

    def local_form(self, key):
        p = self._coefficients(key)
        return (np.outer(self._A, self._A) - np.outer(self._B, self._B) - p * np.outer(_D2, _D2)).astype(complex)

    def _formula(self, key, u, u_i, u_ij, u_j):
        p = self._coefficients(key)
        return (u_i - u) ** 2 - (u_j - u) ** 2 - p * (u_i - u_j) ** 2


class QNetLagrangian(QuadraticLagrangian):
    """``L = (u_ij - c^ji u_i - c^ij u_j - c^ij c^ji u)^2 / (2 s^ij c^ij c^ji)``."""

    name = "qnet"
    kinds = ("qnet",)

    def local_form(self, key):
        c_ij, c_ji, s = self._coefficients(key)
        den = 2 * s * c_ij * c_ji
        if den == 0:
            raise SingularConversion(f"s c^ij c^ji = 0 on plaquette {key}")
        row = np.array([-c_ij * c_ji, -c_ji, 1.0, -c_ij], dtype=complex)
        return np.outer(row, row) / den

    def _formula(self, key, u, u_i, u_ij, u_j):
        c_ij, c_ji, s = self._coefficients(key)
        return (u_ij - c_ji * u_i - c_ij * u_j - c_ij * c_ji * u) ** 2 / (2 * s * c_ij * c_ji)


FAMILIES = {
    "complex": ComplexAnalysisLagrangian,
    "factorized": FactorizedLagrangian,
    "ex3": DegenerateLagrangian,
    "ex4": DegenerateLagrangian,
    "three-point": ThreePointLagrangian,
    "qnet": QNetLagrangian,
    "diagonal": DiagonalLagrangian.from_moutard_field,
}

_DEFAULT_FAMILY = {
    "complex_p": "complex",
    "pair_pq": "factorized",
    "triangular": "ex3",
    "offdiagonal": "ex4",
    "three_point": "three-point",
    "qnet": "qnet",
    "moutard_abc": "diagonal",
    "coupled_pq": "diagonal",
}


def family_for(weights: WeightField, name: str = None) -> QuadraticLagrangian:
    """Lagrangian family for ``weights``; ``name`` defaults from the weight kind."""
    name = name or _DEFAULT_FAMILY[weights.kind]
    if name not in FAMILIES:
        raise ValueError(f"unknown family {name!r}; expected one of {sorted(FAMILIES)}")
    if name == "ex3" and weights.kind != "triangular" or name == "ex4" and weights.kind != "offdiagonal":
        raise ValueError(f"family {name!r} does not match weights of kind {weights.kind!r}")
    return FAMILIES[name](weights)


def lagrangian_constraint_check(dl: DiagonalLagrangian, triple) -> dict:
    """``λ - μ (-1)^|n| β + ν (β^2 - αγ)`` for every plaquette of ``dl``."""
    lam, mu, nu = triple.as_tuple() if hasattr(triple, "as_tuple") else triple
    out = {}
    for key in sorted(dl.coefficients):
        alpha, beta, gamma = dl.abg(key)
        out[key] = lam - mu * parity(key[0]) * beta + nu * (beta * beta - alpha * gamma)
    return out


# --- Q-net linear system and gauge ---------------------------------------------


def qnet_extend_cube(weights: WeightField, cube: Cube, u0, u_i, u_j, u_k):
    """Solve ``u_ij = c^ji u_i + c^ij u_j + c^ij c^ji u`` on one cube.

    Returns the eight values in cube vertex order together with the largest
    relative disagreement between the three routes to ``u_ijk``.
    """
    i, j, k = cube.dirs
    n = cube.base

    def face(base, a, b, ua, ub, u):
        c_ab, c_ba, _ = weights.oriented(Plaquette(base, (a, b)))
        return c_ba * ua + c_ab * ub + c_ab * c_ba * u

    u_ij = face(n, i, j, u_i, u_j, u0)
    u_jk = face(n, j, k, u_j, u_k, u0)
    u_ik = face(n, i, k, u_i, u_k, u0)
    routes = [
        face(shifted(n, k), i, j, u_ik, u_jk, u_k),
        face(shifted(n, i), j, k, u_ij, u_ik, u_i),
        face(shifted(n, j), k, i, u_jk, u_ij, u_j),
    ]
    spread = max(abs(a - b) for a, b in itertools.combinations(routes, 2))
    scale = max(max(abs(r) for r in routes), 1e-300)
    x = np.array([u0, u_i, u_j, u_k, u_ij, u_jk, u_ik, routes[0]], dtype=complex)
    return x, spread / scale


@dataclass
class GaugeResult:
    """Output of :func:`qnet_gauge_normalize`.

    ``coefficients`` maps each plaquette key to the gauged ``(c^ij, c^ji)``;
    in the gauged system ``d^ij = c^ij c^ji``.
    """

    gauge: dict
    coefficients: dict
    relation_residual: float
    normalization_residual: float
    conservation_defect: float


def qnet_gauge_normalize(data: dict, box, tol=None) -> GaugeResult:
    """Find ``g`` with ``c^ij c^ji / d^ij = g g_ij / (g_i g_j)`` on ``box``.

    ``data`` maps canonical keys to ``(c^ij, c^ji, d^ij)``. ``g`` is set to 1
    on the coordinate lines through the lower corner of the box (this fixes the
    separable gauge freedom) and recovered elsewhere from the relation.
    """
    tol = config.consistency_tol() if tol is None else tol
    box = normalize_box(box)
    keys = box_plaquettes(box)
    r = {}
    for key in keys:
        try:
            c_ij, c_ji, d = data[key]
        except KeyError:
            raise MissingCoefficients(f"no Q-net coefficients on plaquette {key}") from None
        if c_ij == 0 or c_ji == 0 or d == 0:
            raise SingularConversion(f"zero Q-net coefficient on plaquette {key}")
        r[key] = c_ij * c_ji / d

    def rr(base, a, b):
        return r[(base, (min(a, b), max(a, b)))]

    defect = 0.0
    for cube in enumerate_cubes(box):
        i, j, k = cube.dirs
        n = cube.base
        ratios = [
            rr(shifted(n, k), i, j) / rr(n, i, j),
            rr(shifted(n, i), j, k) / rr(n, j, k),
            rr(shifted(n, j), k, i) / rr(n, k, i),
        ]
        spread = max(abs(a - b) for a, b in itertools.combinations(ratios, 2))
        defect = max(defect, spread / max(abs(x) for x in ratios))
        if defect > tol:
            raise ConservationViolated(
                f"r^ij_k/r^ij differs across directions at cube {cube} (relative spread {defect:.3e})"
            )

    lows = [lo for lo, _ in box]
    points = sorted(
        itertools.product(*(range(lo, hi + 1) for lo, hi in box)),
        key=lambda m: (sum(m[a] - lows[a] for a in range(len(m))), m),
    )
    g = {}
    for m in points:
        raised = [a + 1 for a in range(len(m)) if m[a] > lows[a]]
        if len(raised) <= 1:
            g[m] = 1.0 + 0j
            continue
        i, j = raised[0], raised[1]
        n = list(m)
        n[i - 1] -= 1
        n[j - 1] -= 1
        n = tuple(n)
        g[m] = rr(n, i, j) * g[shifted(n, i)] * g[shifted(n, j)] / g[n]

    relation = 0.0
    normalization = 0.0
    gauged = {}
    for key in keys:
        base, (i, j) = key
        c_ij, c_ji, d = data[key]
        g0, gi, gj, gij = g[base], g[shifted(base, i)], g[shifted(base, j)], g[shifted(base, i, j)]
        relation = max(relation, abs(r[key] - g0 * gij / (gi * gj)) / abs(r[key]))
        new_ij, new_ji, new_d = c_ij * gj / gij, c_ji * gi / gij, d * g0 / gij
        normalization = max(normalization, abs(new_d - new_ij * new_ji) / abs(new_d))
        gauged[key] = (new_ij, new_ji)
    return GaugeResult(g, gauged, relation, normalization, defect)


def qnet_compatibility_defect(coefficients: dict, box) -> float:
    """Largest relative violation of the Q-net ``c`` map by gauged coefficients.

    ``coefficients`` maps canonical keys to ``(c^ij, c^ji)``, as in
    :attr:`GaugeResult.coefficients`.
    """
    from .weights import qnet_step

    worst = 0.0
    for cube in enumerate_cubes(box):
        c = {}
        for face, (x, y) in zip(cube.bottom_faces(), ((0, 1), (1, 2), (2, 0))):
            canon = canonicalize(face)
            c_ab, c_ba = coefficients[canon.key]
            if canon.sign < 0:
                c_ab, c_ba = c_ba, c_ab
            c[(x, y)], c[(y, x)] = c_ab, c_ba
        c_hat, _ = qnet_step(c, {(0, 1): 0, (1, 2): 0, (2, 0): 0})
        for face, (x, y) in zip(cube.top_faces(), ((0, 1), (1, 2), (2, 0))):
            canon = canonicalize(face)
            c_ab, c_ba = coefficients[canon.key]
            if canon.sign < 0:
                c_ab, c_ba = c_ba, c_ab
            for have, want in ((c_ab, c_hat[(x, y)]), (c_ba, c_hat[(y, x)])):
                worst = max(worst, abs(have - want) / max(abs(have), abs(want), 1e-300))
    return worst
