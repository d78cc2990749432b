"""Integer-lattice geometry: points, oriented plaquettes, cubes and quad-surfaces.

Points of Z^N are plain tuples of ints. Axis indices are 1-based everywhere,
matching the file formats.

Plaquette ``σ^ij(n)`` has the vertex cycle ``(n, n+e_i, n+e_i+e_j, n+e_j)``;
swapping the directions reverses the cycle, so ``σ^ji`` is stored as the
canonical ``σ^ij`` with the opposite sign.

Cube vertex order (used by every 8x8 Gram matrix)::

    0: u      1: u_i    2: u_j    3: u_k
    4: u_ij   5: u_jk   6: u_ik   7: u_ijk
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import InvalidAxes, InvalidSurface, NotFlippable

Point = tuple

VERTEX_LABELS = ("u", "u_i", "u_j", "u_k", "u_ij", "u_jk", "u_ik", "u_ijk")
# positions into Cube.dirs that are shifted by one for each vertex
VERTEX_OFFSETS = ((), (0,), (1,), (2,), (0, 1), (1, 2), (0, 2), (0, 1, 2))


def parity(n) -> int:
    """(-1)^(n_1 + ... + n_N): +1 on black points, -1 on white points."""
    return -1 if sum(n) % 2 else 1


def shifted(n, *axes: int) -> tuple:
    """``n`` shifted by ``e_a`` for every (1-based) axis ``a`` in ``axes``."""
    out = list(n)
    for a in axes:
        out[a - 1] += 1
    return tuple(out)


def _check_axes(axes: Sequence[int], dim: int) -> None:
    if len(set(axes)) != len(axes):
        raise InvalidAxes(f"directions {tuple(axes)} are not distinct")
    for a in axes:
        if not 1 <= a <= dim:
            raise InvalidAxes(f"axis {a} out of range 1..{dim}")


@dataclass(frozen=True, order=True)
class Plaquette:
    """Oriented elementary square ``sign * σ^{dirs}(base)``."""

    base: tuple
    dirs: tuple
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(int(x) for x in self.base))
        object.__setattr__(self, "dirs", tuple(int(x) for x in self.dirs))
        if len(self.dirs) != 2:
            raise InvalidAxes(f"plaquette needs two directions, got {self.dirs}")
        if len(self.base) < 2:
            raise InvalidAxes("lattice dimension must be at least 2")
        _check_axes(self.dirs, len(self.base))
        if self.sign not in (1, -1):
            raise InvalidAxes(f"orientation sign must be +1 or -1, got {self.sign}")

    @property
    def dim(self) -> int:
        return len(self.base)

    @property
    def key(self) -> tuple:
        """Orientation-free identity ``(base, (i, j))`` with ``i < j``."""
        i, j = self.dirs
        return (self.base, (min(i, j), max(i, j)))

    @property
    def is_canonical(self) -> bool:
        return self.dirs[0] < self.dirs[1]

    def canonical(self) -> "Plaquette":
        return canonicalize(self)

    def reversed(self) -> "Plaquette":
        return Plaquette(self.base, self.dirs, -self.sign)

    @property
    def vertices(self) -> tuple:
        """``(n, n+e_i, n+e_i+e_j, n+e_j)`` for the stored direction order."""
        i, j = self.dirs
        n = self.base
        return (n, shifted(n, i), shifted(n, i, j), shifted(n, j))

    def oriented_edges(self) -> list:
        """Directed boundary edges following the plaquette orientation."""
        v = self.vertices
        cycle = [(v[a], v[(a + 1) % 4]) for a in range(4)]
        if self.sign < 0:
            cycle = [(b, a) for a, b in reversed(cycle)]
        return cycle


def canonicalize(p: Plaquette) -> Plaquette:
    """Return the same oriented square written with ``i < j``."""
    i, j = p.dirs
    if i < j:
        return p
    return Plaquette(p.base, (j, i), -p.sign)


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                sign = -sign
    return sign


@dataclass(frozen=True, order=True)
class Cube:
    """Elementary cube ``σ^{ijk}(base)``."""

    base: tuple
    dirs: tuple

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(int(x) for x in self.base))
        object.__setattr__(self, "dirs", tuple(int(x) for x in self.dirs))
        if len(self.dirs) != 3:
            raise InvalidAxes(f"cube needs three directions, got {self.dirs}")
        _check_axes(self.dirs, len(self.base))

    @property
    def dim(self) -> int:
        return len(self.base)

    def vertex(self, index: int) -> tuple:
        return shifted(self.base, *(self.dirs[a] for a in VERTEX_OFFSETS[index]))

    @property
    def vertices(self) -> tuple:
        return tuple(self.vertex(a) for a in range(8))

    def vertex_index(self, point) -> int:
        return self.vertices.index(tuple(point))

    def bottom_faces(self) -> tuple:
        """``(σ^ij, σ^jk, σ^ki)`` at the base point, positively oriented."""
        i, j, k = self.dirs
        n = self.base
        return (Plaquette(n, (i, j)), Plaquette(n, (j, k)), Plaquette(n, (k, i)))

    def top_faces(self) -> tuple:
        """``(σ^ij(n+e_k), σ^jk(n+e_i), σ^ki(n+e_j))``, aligned with bottom_faces."""
        i, j, k = self.dirs
        n = self.base
        return (
            Plaquette(shifted(n, k), (i, j)),
            Plaquette(shifted(n, i), (j, k)),
            Plaquette(shifted(n, j), (k, i)),
        )

    def faces(self) -> list:
        """The six oriented faces whose sum is the cube action ``S^ijk``.

        Top faces enter with ``+``, bottom faces with ``-``.
        """
        out = []
        for top, bottom in zip(self.top_faces(), self.bottom_faces()):
            out.append(top)
            out.append(bottom.reversed())
        return out

    def _corner(self, index: int) -> list:
        """Faces at vertex ``index`` as ``(canonical key, eps, opposite key)``.

        ``eps`` is the sign of the face in the outward boundary of the cube.
        """
        shifted_axes = {self.dirs[a] for a in VERTEX_OFFSETS[index]}
        out = []
        for a, b in itertools.combinations(self.dirs, 2):
            (c,) = set(self.dirs) - {a, b}
            perm = _perm_sign((a, b, c))
            near = shifted(self.base, c) if c in shifted_axes else self.base
            far = self.base if c in shifted_axes else shifted(self.base, c)
            eps = perm if c in shifted_axes else -perm
            out.append(((near, (a, b)), eps, (far, (a, b))))
        return out


def enumerate_cubes(box) -> list:
    """Every elementary cube with all eight vertices inside ``box``.

    ``box`` is a sequence of inclusive ``(lo, hi)`` pairs, one per axis.
    Cubes are returned sorted by ``(base, dirs)``.
    """
    box = normalize_box(box)
    dim = len(box)
    cubes = []
    for dirs in itertools.combinations(range(1, dim + 1), 3):
        ranges = [
            range(lo, hi) if axis + 1 in dirs else range(lo, hi + 1)
            for axis, (lo, hi) in enumerate(box)
        ]
        for base in itertools.product(*ranges):
            cubes.append(Cube(base, dirs))
    cubes.sort()
    return cubes


def normalize_box(box) -> tuple:
    out = tuple((int(lo), int(hi)) for lo, hi in box)
    for lo, hi in out:
        if lo > hi:
            raise ValueError(f"box bound {lo}:{hi} has lower > upper")
    return out


def parse_box(text: str) -> tuple:
    """Parse ``"0:2,0:2,0:1"`` into ``((0, 2), (0, 2), (0, 1))``."""
    pairs = []
    for part in text.split(","):
        lo, _, hi = part.strip().partition(":")
        pairs.append((int(lo), int(hi)))
    return normalize_box(pairs)


def box_plaquettes(box) -> list:
    """Canonical keys of all plaquettes with every vertex inside ``box``."""
    box = normalize_box(box)
    dim = len(box)
    keys = []
    for dirs in itertools.combinations(range(1, dim + 1), 2):
        ranges = [
            range(lo, hi) if axis + 1 in dirs else range(lo, hi + 1)
            for axis, (lo, hi) in enumerate(box)
        ]
        keys.extend((base, dirs) for base in itertools.product(*ranges))
    keys.sort()
    return keys


def initial_plaquettes(box) -> list:
    """Keys of the Cauchy data for forward propagation over ``box``.

    For each pair ``i < j`` these are the plaquettes ``σ^ij(n)`` whose base has
    every other coordinate at the lower bound of the box.
    """
    box = normalize_box(box)
    lows = [lo for lo, _ in box]
    keys = []
    for base, (i, j) in box_plaquettes(box):
        if all(base[a] == lows[a] for a in range(len(box)) if a + 1 not in (i, j)):
            keys.append((base, (i, j)))
    return keys


class QuadSurface:
    """An oriented set of plaquettes forming a valid quad-surface.

    Every edge may lie on at most two plaquettes, and an edge shared by two of
    them is traversed in opposite directions. Instances are immutable.
    """

    def __init__(self, plaquettes: Iterable[Plaquette], validate: bool = True):
        signs = {}
        dim = None
        for p in plaquettes:
            p = canonicalize(p)
            if dim is None:
                dim = p.dim
            elif p.dim != dim:
                raise InvalidSurface("plaquettes live in lattices of different dimension")
            if p.key in signs and signs[p.key] != p.sign:
                raise InvalidSurface(f"plaquette {p.key} given with both orientations")
            signs[p.key] = p.sign
        self._signs = signs
        self._dim = dim
        if validate:
            self.validate()

    def validate(self) -> None:
        for edge, uses in self._edge_uses.items():
            if len(uses) > 2:
                raise InvalidSurface(f"edge {edge} lies on {len(uses)} plaquettes")
            if len(uses) == 2 and uses[0] == uses[1]:
                raise InvalidSurface(f"incompatible orientations along edge {edge}")

    @property
    def dim(self):
        return self._dim

    @cached_property
    def plaquettes(self) -> tuple:
        return tuple(Plaquette(b, d, s) for (b, d), s in sorted(self._signs.items()))

    def keys(self):
        return sorted(self._signs)

    def sign(self, key) -> int:
        return self._signs[key]

    def __contains__(self, item) -> bool:
        if isinstance(item, Plaquette):
            return self._signs.get(item.key) == canonicalize(item).sign
        return item in self._signs

    def __iter__(self) -> Iterator[Plaquette]:
        return iter(self.plaquettes)

    def __len__(self) -> int:
        return len(self._signs)

    def __eq__(self, other) -> bool:
        return isinstance(other, QuadSurface) and self._signs == other._signs

    def __hash__(self):
        return hash(frozenset(self._signs.items()))

    def __repr__(self):
        return f"QuadSurface({len(self)} plaquettes, dim={self._dim})"

    @cached_property
    def _edge_uses(self) -> dict:
        uses = {}
        for p in self.plaquettes:
            for a, b in p.oriented_edges():
                edge = (a, b) if a < b else (b, a)
                uses.setdefault(edge, []).append(a < b)
        return uses

    @cached_property
    def boundary_edges(self) -> frozenset:
        """Undirected edges (sorted point pairs) lying on exactly one plaquette."""
        return frozenset(e for e, uses in self._edge_uses.items() if len(uses) == 1)

    @cached_property
    def vertices(self) -> frozenset:
        return frozenset(v for p in self.plaquettes for v in p.vertices)

    @cached_property
    def boundary_vertices(self) -> frozenset:
        return frozenset(v for e in self.boundary_edges for v in e)

    @cached_property
    def interior_vertices(self) -> frozenset:
        return self.vertices - self.boundary_vertices

    @cached_property
    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self._edge_uses) + len(self)

    def is_disk(self) -> bool:
        """True for a connected surface with one boundary cycle and χ = 1."""
        if not self._signs or self.euler_characteristic != 1:
            return False
        adjacency = {}
        for a, b in self.boundary_edges:
            adjacency.setdefault(a, []).append(b)
            adjacency.setdefault(b, []).append(a)
        if any(len(nb) != 2 for nb in adjacency.values()):
            return False
        start = next(iter(adjacency))
        seen, stack = {start}, [start]
        while stack:
            for nb in adjacency[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == len(adjacency)

    @cached_property
    def incidence(self) -> dict:
        """Vertex -> list of plaquettes containing it."""
        inc = {}
        for p in self.plaquettes:
            for v in p.vertices:
                inc.setdefault(v, []).append(p)
        return inc

    def with_changes(self, remove=(), add=()) -> "QuadSurface":
        signs = dict(self._signs)
        for key in remove:
            del signs[key]
        for p in add:
            p = canonicalize(p)
            signs[p.key] = p.sign
        return QuadSurface(Plaquette(b, d, s) for (b, d), s in signs.items())


def find_flip_corner(surface: QuadSurface, cube: Cube) -> int:
    """Index of the cube vertex whose three faces lie in ``surface``.

    Raises NotFlippable unless exactly the three faces around one vertex are
    present, consistently oriented, and none of the opposite faces is.
    """
    if surface.dim != cube.dim:
        raise NotFlippable(f"cube {cube} and surface live in different dimensions")
    for index in range(8):
        corner = cube._corner(index)
        if not all(near in surface for near, _, _ in corner):
            continue
        if any(far in surface for _, _, far in corner):
            continue
        ratios = {surface.sign(near) * eps for near, eps, _ in corner}
        if len(ratios) == 1:
            return index
    raise NotFlippable(f"no flippable 3D corner of {cube} in the surface")


def flip(surface: QuadSurface, cube: Cube) -> QuadSurface:
    """Replace the three faces of ``cube`` around one vertex by the opposite three."""
    index = find_flip_corner(surface, cube)
    corner = cube._corner(index)
    remove = [near for near, _, _ in corner]
    add = [Plaquette(far[0], far[1], surface.sign(near)) for near, _, far in corner]
    try:
        result = surface.with_changes(remove, add)
    except InvalidSurface as exc:
        raise NotFlippable(f"flipping {cube} does not give a valid surface: {exc}") from exc
    if result.boundary_edges != surface.boundary_edges:
        raise NotFlippable(f"flipping {cube} would change the surface boundary")
    return result


def planar_patch(size: Sequence[int], dim: int = 3, dirs=(1, 2), base=None) -> QuadSurface:
    """Flat ``size[0] x size[1]`` patch of positively oriented ``σ^{dirs}``."""
    base = tuple(base) if base is not None else (0,) * dim
    i, j = dirs
    out = []
    for a in range(size[0]):
        for b in range(size[1]):
            n = list(base)
            n[i - 1] += a
            n[j - 1] += b
            out.append(Plaquette(n, dirs))
    return QuadSurface(out)


def room_corner(box) -> QuadSurface:
    """Floor and two walls of a 3D box, seen from inside.

    This is the lower boundary of the box: ``σ^12`` at ``n_3 = lo``, ``σ^23`` at
    ``n_1 = lo`` and ``σ^31`` at ``n_2 = lo``, all oriented like the corner at the
    lower vertex. It is a disk whose cube flips sweep through the box.
    """
    box = normalize_box(box)
    if len(box) != 3:
        raise InvalidAxes("room_corner is defined for three-dimensional boxes")
    orientation = {(1, 2): 1, (2, 3): 1, (1, 3): -1}
    return QuadSurface(
        Plaquette(base, dirs, orientation[dirs]) for base, dirs in initial_plaquettes(box)
    )
