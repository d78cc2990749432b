"""Per-plaquette weight fields and the star-triangle-type maps that propagate them.

Every map here takes the values on the three faces ``σ^ij, σ^jk, σ^ki`` around
the base vertex of a cube and returns the values on the opposite faces
``σ^ij(n+e_k), σ^jk(n+e_i), σ^ki(n+e_j)``. Values are always read with the
orientation of the face they are used on: for the antisymmetric kinds a
reversed plaquette carries the negated value, for Q-nets the two ``c``
coefficients swap and ``s`` changes sign.

Weight kinds:

=============  =========================  ======================================
kind           data per plaquette         update
=============  =========================  ======================================
complex_p      p                          :func:`star_triangle`
three_point    p                          :func:`star_triangle_neg`
pair_pq        (p, q)                     :func:`star_triangle_neg` on each
coupled_pq     (p, q)                     :func:`coupled_star_triangle`
moutard_abc    (a, b, c)                  :func:`moutard_matrix_step`
triangular     (a, b)                     :func:`triangular_step`
offdiagonal    (a, c)                     :func:`offdiagonal_step`
qnet           (c_ij, c_ji, s_ij)         :func:`qnet_step`
=============  =========================  ======================================
"""

from __future__ import annotations

import cmath
import random
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import config
from .errors import (
    DegenerateWeights,
    InconsistentCoefficients,
    MissingCoefficients,
    MissingInitialData,
    SingularMatrix,
)
from .lattice import Plaquette, canonicalize, enumerate_cubes, initial_plaquettes, parity

KINDS = (
    "complex_p",
    "three_point",
    "pair_pq",
    "coupled_pq",
    "moutard_abc",
    "triangular",
    "offdiagonal",
    "qnet",
)
SCALAR_KINDS = ("complex_p", "three_point")


def _require(den, reference, what):
    # reference carries the same polynomial degree as den
    if not abs(den) >= config.DEGENERACY_TOL * max(reference, 1e-300):
        raise DegenerateWeights(f"vanishing denominator in {what}: {den!r}")


def _scale(*values) -> float:
    return max(abs(v) for v in values)


# --- scalar maps ---------------------------------------------------------------


def star_triangle(p_ij, p_jk, p_ki):
    """``p^ij_k = p^ij / (p^ij p^jk + p^jk p^ki + p^ki p^ij)``."""
    den = p_ij * p_jk + p_jk * p_ki + p_ki * p_ij
    _require(den, _scale(p_ij, p_jk, p_ki) ** 2, "star_triangle")
    return p_ij / den


def star_triangle_neg(p_ij, p_jk, p_ki):
    """Star-triangle map with the opposite sign, used by three-point weights."""
    return -star_triangle(p_ij, p_jk, p_ki)


def coupled_star_triangle(p, q, ratio):
    """Coupled pair update for the generic constraint with ``λ, ν != 0``.

    ``p`` and ``q`` are ``(x_ij, x_jk, x_ki)`` triples and ``ratio = λ/ν``::

        1/p^ij_k = ratio * (q^ij q^jk + q^jk q^ki + q^ki q^ij) / q^ij
        1/q^ij_k = ratio * (p^ij p^jk + p^jk p^ki + p^ki p^ij) / p^ij
    """

    def half(x):
        x_ij, x_jk, x_ki = x
        scale = _scale(*x)
        _require(x_ij, scale, "coupled_star_triangle")
        total = x_ij * x_jk + x_jk * x_ki + x_ki * x_ij
        _require(total, scale**2, "coupled_star_triangle")
        _require(ratio, 1.0, "coupled_star_triangle")
        return x_ij / (ratio * total)

    return half(q), half(p)


def triangular_step(a, b):
    """Update of upper-triangular coefficients (``c = 0``).

    ``a`` and ``b`` are ``(x_ij, x_jk, x_ki)`` triples. ``b`` follows a
    star-triangle relation, ``a`` its linearization::

        -1/b^ij_k = b^jk + b^ki + b^jk b^ki / b^ij
        a^ij_k / (b^ij_k)^2 = a^jk + a^ki + (b^ki a^jk + b^jk a^ki) / b^ij
                              - b^jk b^ki a^ij / (b^ij)^2
    """
    a_ij, a_jk, a_ki = a
    b_ij, b_jk, b_ki = b
    scale = _scale(*b)
    _require(b_ij, scale, "triangular_step")
    inv = b_jk + b_ki + b_jk * b_ki / b_ij
    _require(inv, scale, "triangular_step")
    b_hat = -1.0 / inv
    a_hat = b_hat**2 * (
        a_jk + a_ki + (b_ki * a_jk + b_jk * a_ki) / b_ij - b_jk * b_ki * a_ij / b_ij**2
    )
    return a_hat, b_hat


def offdiagonal_step(a, c):
    """Update of off-diagonal coefficients (``b = 0``)::

        -1/c^ij_k = a^jk + a^ki + a^jk a^ki / a^ij
        -1/a^ij_k = c^jk + c^ki + c^jk c^ki / c^ij
    """

    def half(x):
        x_ij, x_jk, x_ki = x
        scale = _scale(*x)
        _require(x_ij, scale, "offdiagonal_step")
        inv = x_jk + x_ki + x_jk * x_ki / x_ij
        _require(inv, scale, "offdiagonal_step")
        return -1.0 / inv

    return half(c), half(a)


def qnet_step(c, s):
    """Q-net coefficient map.

    ``c`` maps each ordered pair of the three labels to ``c^xy``; ``s`` maps
    ordered pairs to ``s^xy`` (one orientation per pair is enough, the other
    is filled in by antisymmetry). Returns ``(c_hat, s_hat)`` keyed the same
    way; ``c_hat[(x, y)]`` lives on ``σ^xy`` shifted along the third label::

        c^ij_k = (c^ik c^ki - c^ik c^kj - c^ki c^ij) / c^kj
        s^ij_k = c^ki c^kj s^ij + c^ki (c^ij - c^ik) s^jk + c^kj (c^ji - c^jk) s^ki
    """
    labels = sorted({x for pair in c for x in pair})
    if len(labels) != 3:
        raise ValueError("qnet_step needs coefficients for exactly three labels")
    s = dict(s)
    for (x, y), value in list(s.items()):
        s.setdefault((y, x), -value)
    scale = _scale(*c.values())
    c_hat, s_hat = {}, {}
    for i in labels:
        for j in labels:
            if i == j:
                continue
            (k,) = set(labels) - {i, j}
            _require(c[(k, j)], scale, "qnet_step")
            c_hat[(i, j)] = (c[(i, k)] * c[(k, i)] - c[(i, k)] * c[(k, j)] - c[(k, i)] * c[(i, j)]) / c[(k, j)]
            s_hat[(i, j)] = (
                c[(k, i)] * c[(k, j)] * s[(i, j)]
                + c[(k, i)] * (c[(i, j)] - c[(i, k)]) * s[(j, k)]
                + c[(k, j)] * (c[(j, i)] - c[(j, k)]) * s[(k, i)]
            )
    return c_hat, s_hat


# --- matrix (vector Moutard) coefficients ----------------------------------------


@dataclass(frozen=True)
class MoutardCoeffs:
    """Entries of ``A = [[b, a], [c, b]]`` on one oriented plaquette."""

    a: complex
    b: complex
    c: complex

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.b, self.a], [self.c, self.b]], dtype=complex)

    @property
    def delta(self):
        """Determinant ``b^2 - a c``."""
        return self.b * self.b - self.a * self.c

    @classmethod
    def from_matrix(cls, m, tol=None) -> "MoutardCoeffs":
        m = np.asarray(m, dtype=complex)
        tol = config.consistency_tol() if tol is None else tol
        if abs(m[0, 0] - m[1, 1]) > tol * max(np.abs(m).max(), 1e-300):
            raise InconsistentCoefficients("matrix does not have equal diagonal entries")
        return cls(complex(m[0, 1]), complex((m[0, 0] + m[1, 1]) / 2), complex(m[1, 0]))

    def __neg__(self):
        return MoutardCoeffs(-self.a, -self.b, -self.c)

    def __iter__(self):
        return iter((self.a, self.b, self.c))


def _as_moutard(x) -> MoutardCoeffs:
    if isinstance(x, MoutardCoeffs):
        return x
    x = np.asarray(x, dtype=complex)
    if x.shape == (2, 2):
        return MoutardCoeffs.from_matrix(x)
    return MoutardCoeffs(*x)


def _inv(m):
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    scale = np.abs(m).max()
    if not abs(det) >= config.DEGENERACY_TOL * max(scale, 1e-300) ** 2:
        raise SingularMatrix(f"singular 2x2 coefficient matrix (det={det!r})")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det


def moutard_commutation_residual(A1, A2, A3) -> float:
    """Relative size of ``A1 A2^-1 A3 - A3 A2^-1 A1``."""
    m1, m2, m3 = (_as_moutard(x).matrix for x in (A1, A2, A3))
    m2i = _inv(m2)
    diff = m1 @ m2i @ m3 - m3 @ m2i @ m1
    scale = np.linalg.norm(m1) * np.linalg.norm(m2i) * np.linalg.norm(m3)
    return float(np.linalg.norm(diff) / max(scale, 1e-300))


def moutard_matrix_step(A1, A2, A3, tol=None, check=True):
    """Non-commutative star-triangle map.

    ``A1, A2, A3`` sit on ``σ^jk, σ^ki, σ^ij`` at the base vertex; the results
    ``Â1, Â2, Â3`` sit on ``σ^jk(n+e_i), σ^ki(n+e_j), σ^ij(n+e_k)``. For each
    cyclic ``(i, j, k)``: ``-Â_i^-1 = A_j + A_k + A_k A_i^-1 A_j``.
    """
    tol = config.consistency_tol() if tol is None else tol
    coeffs = [_as_moutard(x) for x in (A1, A2, A3)]
    mats = [x.matrix for x in coeffs]
    if check:
        residual = moutard_commutation_residual(*coeffs)
        if residual > tol:
            raise InconsistentCoefficients(
                f"A1 A2^-1 A3 != A3 A2^-1 A1 (relative residual {residual:.3e})",
                disagreement=residual,
            )
    out = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        rhs = mats[j] + mats[k] + mats[k] @ _inv(mats[i]) @ mats[j]
        out.append(MoutardCoeffs.from_matrix(-_inv(rhs), tol=max(tol, 1e-6)))
    return tuple(out)


@dataclass(frozen=True)
class ConstraintTriple:
    """Fixed ``(λ, μ, ν)`` with ``λ a + μ (-1)^|n| b + ν c = 0`` on every plaquette.

    ``xi`` and ``eta`` are defined when ``λ != 0``: ``-xi`` and ``-eta`` are the
    roots of ``λ t^2 + μ t + ν``, so that ``μ = λ(xi + eta)`` and ``ν = λ xi eta``.
    """

    lam: complex
    mu: complex
    nu: complex

    def __post_init__(self):
        for name in ("lam", "mu", "nu"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.lam == 0 and self.mu == 0 and self.nu == 0:
            raise ValueError("constraint triple must be nonzero")

    @classmethod
    def from_roots(cls, xi, eta, lam=1.0) -> "ConstraintTriple":
        return cls(lam, lam * (xi + eta), lam * xi * eta)

    def _roots(self):
        if self.lam == 0:
            return None
        disc = cmath.sqrt(self.mu * self.mu - 4 * self.lam * self.nu)
        return (-(-self.mu + disc) / (2 * self.lam), -(-self.mu - disc) / (2 * self.lam))

    @property
    def xi(self) -> Optional[complex]:
        roots = self._roots()
        return None if roots is None else roots[0]

    @property
    def eta(self) -> Optional[complex]:
        roots = self._roots()
        return None if roots is None else roots[1]

    @property
    def ratio(self):
        """``λ/ν``, the constant in the coupled star-triangle relations."""
        if self.nu == 0:
            raise ZeroDivisionError("λ/ν is undefined for ν = 0")
        return self.lam / self.nu

    def residual(self, a, b, c, sign=1):
        """``λ a + μ sign b + ν c`` where ``sign = (-1)^|n|`` of the plaquette base."""
        return self.lam * a + self.mu * sign * b + self.nu * c

    def as_tuple(self):
        return (self.lam, self.mu, self.nu)


def check_dependence(A1, A2, A3, tol=1e-9) -> Optional[ConstraintTriple]:
    """Nonzero ``(λ, μ, ν)`` with ``λ a_i + μ b_i + ν c_i = 0`` for all three, if any.

    The triple exists iff ``det[[a_i, b_i, c_i]]`` vanishes, judged by the
    smallest singular value relative to the largest. It is scaled so its
    largest-magnitude entry equals 1.
    """
    rows = np.array([list(_as_moutard(x)) for x in (A1, A2, A3)], dtype=complex)
    _, s, vh = np.linalg.svd(rows)
    if s[0] == 0:
        return ConstraintTriple(1, 0, 0)
    if s[-1] > tol * s[0]:
        return None
    v = vh[-1].conj()
    v = v / v[np.argmax(np.abs(v))]
    v = np.where(np.abs(v) < 1e-14, 0, v)
    return ConstraintTriple(*v)


def delta_factorized(a, b, constraint: ConstraintTriple):
    """``(λ/ν)(a + xi b)(a + eta b)``, equal to ``b^2 - a c`` under the constraint."""
    return constraint.ratio * (a + constraint.xi * b) * (a + constraint.eta * b)


def pq_from_abc(a, b, constraint: ConstraintTriple, sign=1):
    """Coupled-pair parameters ``p = a + xi σ b``, ``q = a + eta σ b`` with ``σ = (-1)^|n|``.

    On the base faces of a cube with even base this is ``p = a + xi b``; on its
    top faces (odd base) it becomes ``p = a - xi b``.
    """
    xi, eta = constraint.xi, constraint.eta
    return a + xi * sign * b, a + eta * sign * b


def abc_from_pq(p, q, constraint: ConstraintTriple, sign=1) -> MoutardCoeffs:
    """Inverse of :func:`pq_from_abc`, with ``c`` recovered from the constraint."""
    xi, eta = constraint.xi, constraint.eta
    if xi == eta:
        raise SingularMatrix("coupled parametrization needs distinct roots xi != eta")
    b = (p - q) / (sign * (xi - eta))
    a = p - xi * sign * b
    if constraint.nu == 0:
        raise SingularMatrix("coupled parametrization needs ν != 0")
    c = -(constraint.lam * a + constraint.mu * sign * b) / constraint.nu
    return MoutardCoeffs(a, b, c)


# --- weight fields -------------------------------------------------------------


def orient(kind: str, data, sign: int):
    """Value of a plaquette datum read with orientation ``sign``."""
    if sign == 1:
        return data
    if kind in SCALAR_KINDS:
        return -data
    if kind == "qnet":
        c_ij, c_ji, s_ij = data
        return (c_ji, c_ij, -s_ij)
    if kind == "moutard_abc":
        return -_as_moutard(data)
    return tuple(-x for x in data)


def cube_step(kind: str, bottom, constraint: Optional[ConstraintTriple] = None):
    """Apply the kind's map to oriented data on ``(σ^ij, σ^jk, σ^ki)``.

    Returns oriented data on ``(σ^ij(n+e_k), σ^jk(n+e_i), σ^ki(n+e_j))``.
    """
    x_ij, x_jk, x_ki = bottom
    cyclic = ((x_ij, x_jk, x_ki), (x_jk, x_ki, x_ij), (x_ki, x_ij, x_jk))
    if kind == "complex_p":
        return tuple(star_triangle(*t) for t in cyclic)
    if kind == "three_point":
        return tuple(star_triangle_neg(*t) for t in cyclic)
    if kind == "pair_pq":
        return tuple(
            (star_triangle_neg(*(x[0] for x in t)), star_triangle_neg(*(x[1] for x in t)))
            for t in cyclic
        )
    if kind == "coupled_pq":
        if constraint is None:
            raise MissingCoefficients("coupled_pq fields need a constraint triple")
        ratio = constraint.ratio
        return tuple(
            coupled_star_triangle(tuple(x[0] for x in t), tuple(x[1] for x in t), ratio)
            for t in cyclic
        )
    if kind == "triangular":
        return tuple(triangular_step(tuple(x[0] for x in t), tuple(x[1] for x in t)) for t in cyclic)
    if kind == "offdiagonal":
        return tuple(offdiagonal_step(tuple(x[0] for x in t), tuple(x[1] for x in t)) for t in cyclic)
    if kind == "moutard_abc":
        h_jk, h_ki, h_ij = moutard_matrix_step(x_jk, x_ki, x_ij)
        return (h_ij, h_jk, h_ki)
    if kind == "qnet":
        c, s = {}, {}
        for (x, y), (c_xy, c_yx, s_xy) in zip(((0, 1), (1, 2), (2, 0)), bottom):
            c[(x, y)], c[(y, x)], s[(x, y)] = c_xy, c_yx, s_xy
        c_hat, s_hat = qnet_step(c, s)
        return tuple(
            (c_hat[(x, y)], c_hat[(y, x)], s_hat[(x, y)]) for x, y in ((0, 1), (1, 2), (2, 0))
        )
    raise ValueError(f"unknown weight kind {kind!r}")


def _flat(kind, data) -> np.ndarray:
    if kind in SCALAR_KINDS:
        return np.array([data], dtype=complex)
    return np.array(list(data), dtype=complex)


def relative_difference(kind, x, y) -> float:
    fx, fy = _flat(kind, x), _flat(kind, y)
    scale = max(np.abs(fx).max(), np.abs(fy).max(), 1e-300)
    return float(np.abs(fx - fy).max() / scale)


@dataclass
class WeightField:
    """Coefficients keyed by canonical plaquette ``(base, (i, j))``, ``i < j``."""

    kind: str
    values: dict = field(default_factory=dict)
    constraint: Optional[ConstraintTriple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "moutard_abc":
            self.values = {k: _as_moutard(v) for k, v in self.values.items()}

    def __len__(self):
        return len(self.values)

    def __contains__(self, key):
        return key in self.values

    def copy(self) -> "WeightField":
        return WeightField(self.kind, dict(self.values), self.constraint)

    @property
    def dim(self):
        for base, _ in self.values:
            return len(base)
        return None

    def __getitem__(self, key):
        try:
            return self.values[key]
        except KeyError:
            raise MissingCoefficients(f"no {self.kind} coefficients on plaquette {key}") from None

    def oriented(self, plaquette: Plaquette):
        """Datum as seen from ``plaquette`` (orientation applied)."""
        p = canonicalize(plaquette)
        return orient(self.kind, self[p.key], p.sign)

    def constraint_residuals(self) -> dict:
        """``λ a + μ (-1)^|n| b + ν c`` per plaquette of a moutard_abc field."""
        if self.kind != "moutard_abc" or self.constraint is None:
            return {}
        return {
            key: self.constraint.residual(v.a, v.b, v.c, parity(key[0]))
            for key, v in self.values.items()
        }

    def check_constraint(self, tol=1e-12) -> None:
        for key, r in self.constraint_residuals().items():
            v = self.values[key]
            scale = max(abs(v.a), abs(v.b), abs(v.c)) * max(map(abs, self.constraint.as_tuple()))
            if abs(r) > tol * max(scale, 1e-300):
                raise InconsistentCoefficients(
                    f"constraint violated on {key}: residual {abs(r):.3e}", disagreement=abs(r)
                )


def propagate(field: WeightField, box, order: str = "lex", seed=None, tol=None, return_defect=False):
    """Extend ``field`` to every plaquette of ``box`` by firing cubes.

    A cube fires once its three base faces carry data. When a top face is
    already known (from the initial data or another cube) the two values are
    compared; a disagreement above ``tol`` raises InconsistentCoefficients.
    ``order`` is ``"lex"``, ``"reverse"`` or ``"random"`` (seeded by ``seed``)
    and only changes the schedule within each wave of ready cubes.

    With ``return_defect=True`` the largest relative disagreement seen is
    returned alongside the field.
    """
    tol = config.consistency_tol() if tol is None else tol
    if field.kind == "moutard_abc" and field.constraint is not None:
        field.check_constraint(max(tol, 1e-12))
    values = dict(field.values)
    rng = random.Random(seed)
    remaining = enumerate_cubes(box)
    defect = 0.0
    while remaining:
        ready = [c for c in remaining if all(f.key in values for f in c.bottom_faces())]
        if not ready:
            missing = sorted(
                {f.key for c in remaining for f in c.bottom_faces() if f.key not in values}
            )
            raise MissingInitialData(f"cannot reach {len(remaining)} cubes; e.g. no data on {missing[0]}")
        if order == "reverse":
            ready.reverse()
        elif order == "random":
            rng.shuffle(ready)
        elif order != "lex":
            raise ValueError(f"unknown propagation order {order!r}")
        for cube in ready:
            bottom = []
            for f in cube.bottom_faces():
                c = canonicalize(f)
                bottom.append(orient(field.kind, values[c.key], c.sign))
            try:
                top = cube_step(field.kind, bottom, field.constraint)
            except (DegenerateWeights, SingularMatrix) as exc:
                raise DegenerateWeights(f"{exc} at cube {cube}", cube=cube) from exc
            except InconsistentCoefficients as exc:
                exc.cube = cube
                raise
            for face, datum in zip(cube.top_faces(), top):
                c = canonicalize(face)
                datum = orient(field.kind, datum, c.sign)
                if c.key in values:
                    diff = relative_difference(field.kind, values[c.key], datum)
                    defect = max(defect, diff)
                    if diff > tol:
                        raise InconsistentCoefficients(
                            f"cube {cube} disagrees with existing data on {c.key} "
                            f"(relative difference {diff:.3e})",
                            disagreement=diff,
                            cube=cube,
                        )
                else:
                    values[c.key] = datum
        fired = set(ready)
        remaining = [c for c in remaining if c not in fired]
    out = WeightField(field.kind, values, field.constraint)
    return (out, defect) if return_defect else out


# --- random admissible initial data ------------------------------------------------


def _rc(rng, scale=1.0):
    return complex(rng.normal(0, scale), rng.normal(0, scale))


def random_datum(kind: str, rng: np.random.Generator, base=None, constraint=None):
    """One random admissible datum of ``kind`` for a plaquette based at ``base``."""
    if kind == "complex_p":
        return complex(rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))
    if kind == "three_point":
        return complex(rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))
    if kind in ("pair_pq", "coupled_pq", "triangular", "offdiagonal"):
        return (complex(rng.uniform(0.5, 2.0), rng.uniform(-1, 1)), complex(rng.uniform(0.5, 2.0), rng.uniform(-1, 1)))
    if kind == "qnet":
        return (
            complex(rng.uniform(0.5, 2.0), rng.uniform(-1, 1)),
            complex(rng.uniform(0.5, 2.0), rng.uniform(-1, 1)),
            complex(rng.uniform(0.5, 2.0), rng.uniform(-1, 1)),
        )
    if kind == "moutard_abc":
        sign = parity(base) if base is not None else 1
        if constraint is None:
            raise ValueError("moutard_abc data needs a constraint triple")
        lam, mu, nu = constraint.as_tuple()
        a, b, c = _rc(rng), _rc(rng), _rc(rng)
        if nu != 0:
            c = -(lam * a + mu * sign * b) / nu
        elif lam != 0:
            a = -(mu * sign * b) / lam
        else:
            b = 0j
        return MoutardCoeffs(a, b, c)
    raise ValueError(f"unknown weight kind {kind!r}")


def random_initial_field(kind: str, box, rng, constraint=None) -> WeightField:
    """Random Cauchy data for :func:`propagate` over ``box``."""
    if isinstance(rng, (int, type(None))):
        rng = np.random.default_rng(rng)
    values = {
        key: random_datum(kind, rng, key[0], constraint) for key in initial_plaquettes(box)
    }
    return WeightField(kind, values, constraint)
