"""Finite-dimensional complex Grassmann algebra.

Generators come in conjugate pairs (g, g*) stored at indices (2k, 2k+1).
Elements are dense complex coefficient vectors over the 2^(2m) basis
monomials, each monomial a bitmask with generators in ascending index
order. All operations are pure; values are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Iterable, Mapping

import numpy as np

from . import kernel
from .errors import MismatchedGenerators, NotInvertible, NotOddLinear, UnknownPair
from .kernel import tables

#: Coefficients at or below this magnitude are dropped from term views.
PRUNE_TOL = 1e-15

#: Absolute tolerance for the algebra's exact polynomial identities.
IDENTITY_TOL = 1e-13


@dataclass(frozen=True)
class GeneratorSet:
    """Labels for 2m generators, conjugate pairs adjacent."""

    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.names) % 2:
            raise ValueError("generators must come in conjugate pairs")
        if len(self.names) > tables.MAX_GENERATORS:
            raise ValueError(f"at most {tables.MAX_GENERATORS} generators supported")
        if len(set(self.names)) != len(self.names):
            raise ValueError("generator names must be distinct")

    @classmethod
    def from_pairs(cls, labels: Iterable[str]) -> "GeneratorSet":
        names: list[str] = []
        for label in labels:
            names.extend((label, label + "*"))
        return cls(tuple(names))

    @property
    def m(self) -> int:
        return len(self.names) // 2

    @property
    def n_generators(self) -> int:
        return len(self.names)

    @property
    def dim(self) -> int:
        return 1 << self.n_generators

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown generator {name!r}") from None

    def conjugate_index(self, i: int) -> int:
        return i ^ 1

    def monomial_label(self, mask: int) -> str:
        if mask == 0:
            return "1"
        return " ".join(n for i, n in enumerate(self.names) if mask >> i & 1)

    def gen(self, which: int | str) -> "Multivector":
        """The generator as a Multivector; accepts an index or a name."""
        i = self.index(which) if isinstance(which, str) else which
        if not 0 <= i < self.n_generators:
            raise KeyError(f"generator index {i} out of range")
        coeffs = np.zeros(self.dim, dtype=np.complex128)
        coeffs[1 << i] = 1.0
        return Multivector(self, coeffs)

    def scalar(self, value: complex) -> "Multivector":
        coeffs = np.zeros(self.dim, dtype=np.complex128)
        coeffs[0] = value
        return Multivector(self, coeffs)

    def zero(self) -> "Multivector":
        return Multivector(self, np.zeros(self.dim, dtype=np.complex128))

    def one(self) -> "Multivector":
        return self.scalar(1.0)


class Multivector:
    """Element of the Grassmann algebra over a fixed GeneratorSet."""

    __slots__ = ("gens", "coeffs")

    def __init__(self, gens: GeneratorSet, coeffs: np.ndarray, _copy: bool = True):
        arr = np.array(coeffs, dtype=np.complex128, copy=_copy)
        if arr.shape != (gens.dim,):
            raise ValueError(f"expected {gens.dim} coefficients, got {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "gens", gens)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    @classmethod
    def from_terms(cls, gens: GeneratorSet, terms: Mapping[int, complex]) -> "Multivector":
        coeffs = np.zeros(gens.dim, dtype=np.complex128)
        for mask, value in terms.items():
            if not 0 <= mask < gens.dim:
                raise ValueError(f"monomial mask {mask} out of range")
            coeffs[mask] = value
        return cls(gens, coeffs, _copy=False)

    # -- views -----------------------------------------------------------

    @property
    def terms(self) -> dict[int, complex]:
        """Nonzero monomial coefficients (pruned at PRUNE_TOL)."""
        return {
            int(mask): complex(c)
            for mask, c in enumerate(self.coeffs)
            if abs(c) > PRUNE_TOL
        }

    @property
    def body(self) -> complex:
        return complex(self.coeffs[0])

    def soul(self) -> "Multivector":
        coeffs = self.coeffs.copy()
        coeffs[0] = 0.0
        return Multivector(self.gens, coeffs, _copy=False)

    def even_part(self) -> "Multivector":
        keep = (tables.degrees(self.gens.n_generators) & 1) == 0
        return Multivector(self.gens, np.where(keep, self.coeffs, 0.0), _copy=False)

    def odd_part(self) -> "Multivector":
        keep = (tables.degrees(self.gens.n_generators) & 1) == 1
        return Multivector(self.gens, np.where(keep, self.coeffs, 0.0), _copy=False)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.sup_norm() <= tol

    def is_odd_degree_one(self, tol: float = PRUNE_TOL) -> bool:
        deg = tables.degrees(self.gens.n_generators)
        off = np.abs(self.coeffs[deg != 1])
        return bool(off.size == 0 or np.max(off) <= tol)

    def max_degree(self) -> int:
        nz = np.abs(self.coeffs) > PRUNE_TOL
        if not nz.any():
            return 0
        return int(np.max(tables.degrees(self.gens.n_generators)[nz]))

    # -- algebra ---------------------------------------------------------

    def _check_gens(self, other: "Multivector") -> None:
        if self.gens != other.gens:
            raise MismatchedGenerators(
                f"operands over {self.gens.names} vs {other.gens.names}"
            )

    def __add__(self, other):
        if isinstance(other, Multivector):
            self._check_gens(other)
            return Multivector(self.gens, self.coeffs + other.coeffs, _copy=False)
        if isinstance(other, Number):
            coeffs = self.coeffs.copy()
            coeffs[0] += other
            return Multivector(self.gens, coeffs, _copy=False)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Multivector):
            self._check_gens(other)
            return Multivector(self.gens, self.coeffs - other.coeffs, _copy=False)
        if isinstance(other, Number):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Multivector(self.gens, -self.coeffs, _copy=False)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            self._check_gens(other)
            out = kernel.multiply(self.coeffs, other.coeffs, self.gens.n_generators)
            return Multivector(self.gens, out, _copy=False)
        if isinstance(other, Number):
            return Multivector(self.gens, self.coeffs * other, _copy=False)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return Multivector(self.gens, other * self.coeffs, _copy=False)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            return Multivector(self.gens, self.coeffs / other, _copy=False)
        return NotImplemented

    def conjugate(self) -> "Multivector":
        out = kernel.conjugate(self.coeffs, self.gens.n_generators)
        return Multivector(self.gens, out, _copy=False)

    def grade_involution(self) -> "Multivector":
        signs = tables.parity_signs(self.gens.n_generators)
        return Multivector(self.gens, signs * self.coeffs, _copy=False)

    def is_self_conjugate(self, tol: float = IDENTITY_TOL) -> bool:
        return (self.conjugate() - self).sup_norm() <= tol

    # -- comparison / display ---------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.gens == other.gens and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def isclose(self, other: "Multivector", tol: float = IDENTITY_TOL) -> bool:
        self._check_gens(other)
        return (self - other).sup_norm() <= tol

    def __repr__(self):
        parts = []
        for mask, c in self.terms.items():
            label = self.gens.monomial_label(mask)
            parts.append(f"({c})" if mask == 0 else f"({c})*[{label}]")
        return " + ".join(parts) if parts else "0"


# -- module-level operations --------------------------------------------


def multiply(x: Multivector, y: Multivector) -> Multivector:
    """Graded product; zero whenever monomial masks intersect."""
    return x * y


def conjugate(x: Multivector) -> Multivector:
    """Antilinear involution: reverse each monomial and star each generator."""
    return x.conjugate()


def grade_involution(x: Multivector) -> Multivector:
    """even(x) - odd(x); the sign an odd operator picks passing a coefficient."""
    return x.grade_involution()


def exponential(x: Multivector) -> Multivector:
    """exp(x) = exp(body) * (terminating series in the nilpotent soul)."""
    n_gen = x.gens.n_generators
    soul = x.soul()
    acc = x.gens.one()
    term = x.gens.one()
    for k in range(1, n_gen + 1):
        term = term * soul / k
        if term.is_zero():
            break
        acc = acc + term
    return acc * complex(np.exp(x.body))


def invert(x: Multivector) -> Multivector:
    """Exact inverse via the geometric series on the nilpotent soul."""
    b = x.body
    if abs(b) == 0.0:
        raise NotInvertible("element has zero body")
    u = x.soul() / b
    acc = x.gens.one()
    term = x.gens.one()
    for k in range(1, x.gens.n_generators + 1):
        term = term * u * (-1.0)
        if term.is_zero():
            break
        acc = acc + term
    return acc / b


def left_derivative(x: Multivector, gen_index: int) -> Multivector:
    """Delete one generator from each monomial containing it, left-to-right sign."""
    source, target, sign = tables.derivative_table(x.gens.n_generators, gen_index)
    out = np.zeros_like(x.coeffs)
    out[target] = sign * x.coeffs[source]
    return Multivector(x.gens, out, _copy=False)


def berezin_pair(x: Multivector, pair: int | str) -> Multivector:
    """Integrate over one conjugate pair: innermost dg, then dg*."""
    if isinstance(pair, str):
        k = x.gens.index(pair) // 2
    else:
        k = pair
    if not 0 <= k < x.gens.m:
        raise UnknownPair(f"pair index {k} out of range for m={x.gens.m}")
    return left_derivative(left_derivative(x, 2 * k), 2 * k + 1)


def require_odd_degree_one(x: Multivector, what: str = "element") -> None:
    if not x.is_odd_degree_one():
        raise NotOddLinear(f"{what} must be odd of degree one, got {x!r}")


def soul_nilpotency_order(x: Multivector) -> int:
    """Smallest k with soul(x)^k = 0 (at most 2m+1)."""
    s = x.soul()
    power = x.gens.one()
    for k in range(1, x.gens.n_generators + 2):
        power = power * s
        if power.is_zero():
            return k
    return x.gens.n_generators + 1


def random_multivector(gens: GeneratorSet, rng: np.random.Generator,
                       scale: float = 1.0) -> Multivector:
    """Uniform random coefficients in a box; test helper, not physics."""
    re = rng.uniform(-scale, scale, gens.dim)
    im = rng.uniform(-scale, scale, gens.dim)
    return Multivector(gens, re + 1j * im, _copy=False)
