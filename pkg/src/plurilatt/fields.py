"""Vertex fields and bi-constants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingFieldValues
from .lattice import parity


class ScalarField(dict):
    """Complex values on lattice points; a lookup outside the domain raises."""

    def __missing__(self, point):
        raise MissingFieldValues(f"no field value at {point}", point=point)

    @property
    def domain(self) -> frozenset:
        return frozenset(self)

    @property
    def dim(self):
        for point in self:
            return len(point)
        return None

    def restrict(self, points) -> "ScalarField":
        return ScalarField((p, self[p]) for p in points)

    def norm(self) -> float:
        if not self:
            return 0.0
        return float(np.linalg.norm(np.fromiter(self.values(), dtype=complex)))

    def is_real(self, tol=0.0) -> bool:
        return all(abs(complex(v).imag) <= tol for v in self.values())

    def map(self, fn) -> "ScalarField":
        return ScalarField((p, fn(v)) for p, v in self.items())


@dataclass(frozen=True)
class BiConstant:
    """One constant on black (even) points and another on white (odd) points."""

    black: complex = 0j
    white: complex = 0j

    def value_at(self, point) -> complex:
        return self.black if parity(point) == 1 else self.white

    def as_field(self, points) -> ScalarField:
        return ScalarField((p, self.value_at(p)) for p in points)

    def apply(self, field) -> ScalarField:
        return ScalarField((p, v + self.value_at(p)) for p, v in field.items())
