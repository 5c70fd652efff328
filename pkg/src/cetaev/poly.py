"""Exact sparse multivariate polynomials over the rationals.

Coefficients are :class:`fractions.Fraction`; monomials are exponent tuples of
length ``dimension``.  The float path (``mode="float"`` / :meth:`Polynomial.evaluate_many`)
exists for sampling and dynamics only and is never mixed into exact results.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

Monomial = tuple[int, ...]

DEFAULT_NAMES = ("x", "y", "z", "w")


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        # exact binary value of the float, never a decimal guess
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")


def default_variable_names(n: int) -> tuple[str, ...]:
    if n <= len(DEFAULT_NAMES):
        return DEFAULT_NAMES[:n]
    return tuple(f"q{i + 1}" for i in range(n))


class Polynomial:
    """Immutable sparse polynomial in ``dimension`` variables.

    >>> x, y = Polynomial.variables(2)
    >>> (x + y) * (x - y) == x**2 - y**2
    True
    """

    __slots__ = ("dimension", "_terms", "_hash", "_plan")

    def __init__(self, dimension: int, terms: Mapping[Sequence[int], object] | None = None):
        if dimension < 1:
            raise ValueError("dimension must be a positive integer")
        clean: dict[Monomial, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            mono = tuple(int(e) for e in exps)
            if len(mono) != dimension:
                raise ValueError(f"monomial {mono} does not have length {dimension}")
            if any(e < 0 for e in mono):
                raise ValueError(f"negative exponent in {mono}")
            c = _as_fraction(coeff)
            if c:
                clean[mono] = clean.get(mono, Fraction(0)) + c
                if not clean[mono]:
                    del clean[mono]
        self.dimension = dimension
        self._terms = clean
        self._hash = None
        self._plan = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, dimension: int) -> Polynomial:
        return cls(dimension)

    @classmethod
    def constant(cls, dimension: int, value) -> Polynomial:
        return cls(dimension, {(0,) * dimension: value})

    @classmethod
    def variable(cls, dimension: int, index: int) -> Polynomial:
        exps = [0] * dimension
        exps[index] = 1
        return cls(dimension, {tuple(exps): 1})

    @classmethod
    def variables(cls, dimension: int) -> tuple[Polynomial, ...]:
        return tuple(cls.variable(dimension, i) for i in range(dimension))

    @classmethod
    def _raw(cls, dimension: int, terms: dict[Monomial, Fraction]) -> Polynomial:
        # trusted fast path: terms already normalized
        obj = cls.__new__(cls)
        obj.dimension = dimension
        obj._terms = terms
        obj._hash = None
        obj._plan = None
        return obj

    # -- basic properties ---------------------------------------------------

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(m) for m in self._terms), default=-1)

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degrees = {sum(m) for m in self._terms}
        if not degrees:
            return True
        if len(degrees) != 1:
            return False
        return degree is None or degrees == {degree}

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    def __len__(self) -> int:
        return len(self._terms)

    # -- ring operations ----------------------------------------------------

    def _check(self, other: Polynomial) -> None:
        if other.dimension != self.dimension:
            raise ValueError(
                f"dimension mismatch: {self.dimension} vs {other.dimension}"
            )

    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.constant(self.dimension, _as_fraction(other))

    def __add__(self, other) -> Polynomial:
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(self.dimension, out)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial._raw(self.dimension, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> Polynomial:
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> Polynomial:
        return (-self) + other

    def scale(self, factor) -> Polynomial:
        f = _as_fraction(factor)
        if not f:
            return Polynomial.zero(self.dimension)
        return Polynomial._raw(self.dimension, {m: c * f for m, c in self._terms.items()})

    def __mul__(self, other) -> Polynomial:
        if not isinstance(other, Polynomial):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self._check(other)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial._raw(self.dimension, {m: c for m, c in out.items() if c})

    def __rmul__(self, other) -> Polynomial:
        return self.__mul__(other)

    def __truediv__(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            return NotImplemented
        return self.scale(1 / _as_fraction(other))

    def __pow__(self, exponent: int) -> Polynomial:
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = Polynomial.constant(self.dimension, 1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.dimension == other.dimension and self._terms == other._terms
        try:
            c = _as_fraction(other)
        except TypeError:
            return NotImplemented
        return self._terms == ({(0,) * self.dimension: c} if c else {})

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dimension, frozenset(self._terms.items())))
        return self._hash

    # -- calculus and jets --------------------------------------------------

    def homogeneous_part(self, degree: int) -> Polynomial:
        return Polynomial._raw(
            self.dimension, {m: c for m, c in self._terms.items() if sum(m) == degree}
        )

    def truncate(self, degree: int) -> Polynomial:
        return Polynomial._raw(
            self.dimension, {m: c for m, c in self._terms.items() if sum(m) <= degree}
        )

    def derivative(self, index: int) -> Polynomial:
        out = {}
        for m, c in self._terms.items():
            e = m[index]
            if e:
                mm = list(m)
                mm[index] = e - 1
                out[tuple(mm)] = c * e
        return Polynomial._raw(self.dimension, out)

    def gradient(self) -> tuple[Polynomial, ...]:
        return tuple(self.derivative(i) for i in range(self.dimension))

    def radial_derivative(self) -> Polynomial:
        # sum_i q_i dp/dq_i multiplies each monomial by its total degree
        return Polynomial._raw(
            self.dimension,
            {m: c * sum(m) for m, c in self._terms.items() if sum(m)},
        )

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, point: Sequence, mode: str = "exact"):
        if len(point) != self.dimension:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.dimension}")
        if mode == "exact":
            q = [_as_fraction(v) for v in point]
            total = Fraction(0)
            for m, c in self._terms.items():
                term = c
                for qi, e in zip(q, m):
                    if e:
                        term *= qi**e
                total += term
            return total
        if mode == "float":
            return float(self.evaluate_many(np.asarray(point, dtype=float)[None, :])[0])
        raise ValueError(f"unknown evaluation mode {mode!r}")

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Float evaluation at each row of ``points`` by nested Horner schemes."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dimension:
            raise ValueError(f"expected an (m, {self.dimension}) array of points")
        if self._plan is None:
            self._plan = _horner_plan(
                {m: float(c) for m, c in self._terms.items()}, 0, self.dimension
            )
        out = _horner_eval(self._plan, pts, 0)
        if np.isscalar(out) or np.ndim(out) == 0:
            out = np.full(pts.shape[0], float(out))
        return out

    # -- composition --------------------------------------------------------

    def compose(self, substitutions: Sequence[Polynomial]) -> Polynomial:
        """Substitute ``substitutions[i]`` for variable ``i``; all share one dimension."""
        if len(substitutions) != self.dimension:
            raise ValueError(
                f"need {self.dimension} substitutions, got {len(substitutions)}"
            )
        target = substitutions[0].dimension
        for s in substitutions:
            if s.dimension != target:
                raise ValueError("substitutions must share a dimension")
        powers: list[dict[int, Polynomial]] = [{} for _ in substitutions]

        def power(i: int, e: int) -> Polynomial:
            cache = powers[i]
            if e not in cache:
                cache[e] = substitutions[i] ** e
            return cache[e]

        result = Polynomial.zero(target)
        for m, c in self._terms.items():
            term = Polynomial.constant(target, c)
            for i, e in enumerate(m):
                if e:
                    term = term * power(i, e)
            result = result + term
        return result

    # -- display ------------------------------------------------------------

    def to_string(self, names: Sequence[str] | None = None) -> str:
        names = tuple(names) if names else default_variable_names(self.dimension)
        if not self._terms:
            return "0"
        pieces = []
        for m in sorted(self._terms, key=lambda m: (sum(m), tuple(-e for e in m))):
            c = self._terms[m]
            factors = [
                (n if e == 1 else f"{n}^{e}") for n, e in zip(names, m) if e
            ]
            mag = abs(c)
            if factors:
                body = "*".join(factors) if mag == 1 else f"{mag}*" + "*".join(factors)
            else:
                body = str(mag)
            sign = "-" if c < 0 else "+"
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"Polynomial({self.dimension}, {self.to_string()!r})"


def _horner_plan(terms: dict[Monomial, float], var: int, n: int):
    if var == n:
        return sum(terms.values())
    groups: dict[int, dict[Monomial, float]] = {}
    for m, c in terms.items():
        groups.setdefault(m[var], {})[m] = c
    return [(e, _horner_plan(groups[e], var + 1, n)) for e in sorted(groups, reverse=True)]


def _horner_eval(plan, pts: np.ndarray, var: int):
    if not isinstance(plan, list):
        return plan
    if not plan:
        return 0.0
    x = pts[:, var]
    acc = None
    prev = None
    for e, sub in plan:
        val = _horner_eval(sub, pts, var + 1)
        if acc is None:
            acc = val
        else:
            acc = acc * x ** (prev - e) + val
        prev = e
    return acc * x**prev if prev else acc


@dataclass(frozen=True)
class JetDecomposition:
    """Homogeneous parts ``parts[l]`` for ``l = 0..order`` of a truncated polynomial."""

    parts: tuple[Polynomial, ...]
    order: int

    def __post_init__(self):
        if len(self.parts) != self.order + 1:
            raise ValueError("need exactly order + 1 homogeneous parts")
        for degree, part in enumerate(self.parts):
            if not part.is_homogeneous(degree):
                raise ValueError(f"part {degree} is not homogeneous of degree {degree}")

    @property
    def dimension(self) -> int:
        return self.parts[0].dimension

    def part(self, degree: int) -> Polynomial:
        if 0 <= degree <= self.order:
            return self.parts[degree]
        return Polynomial.zero(self.dimension)

    def jet(self, degree: int) -> Polynomial:
        out = Polynomial.zero(self.dimension)
        for part in self.parts[: max(0, min(degree, self.order) + 1)]:
            out = out + part
        return out

    def total(self) -> Polynomial:
        return self.jet(self.order)

    def as_dict(self) -> dict[int, Polynomial]:
        return {d: p for d, p in enumerate(self.parts) if not p.is_zero()}


def homogeneous_parts(p: Polynomial, s: int) -> JetDecomposition:
    if s < 0:
        raise ValueError("jet order must be non-negative")
    return JetDecomposition(tuple(p.homogeneous_part(d) for d in range(s + 1)), s)


def jet(p: Polynomial, degree: int) -> Polynomial:
    if degree < 0:
        raise ValueError("jet order must be non-negative")
    return p.truncate(degree)


def gradient(p: Polynomial) -> tuple[Polynomial, ...]:
    return p.gradient()


def radial_derivative(p: Polynomial) -> Polynomial:
    return p.radial_derivative()


def euler_identity_rhs(jets: JetDecomposition, s: int) -> Polynomial:
    """``(s-1) j^s - sum_{l=2}^{s-2} j^l + part_s``; equals the radial derivative of ``j^s``
    whenever the parts of degree 0 and 1 vanish."""
    if s < 2:
        raise ValueError("Euler identity needs s >= 2")
    if jets.order < s:
        raise ValueError(f"decomposition of order {jets.order} cannot supply s={s}")
    out = jets.jet(s).scale(s - 1) + jets.part(s)
    for ell in range(2, s - 1):
        out = out - jets.jet(ell)
    return out


def restrict_to_ray(p: Polynomial, direction: Sequence) -> Polynomial:
    """Univariate polynomial ``t -> p(t * direction)``."""
    u = [_as_fraction(v) for v in direction]
    if len(u) != p.dimension:
        raise ValueError("direction has the wrong dimension")
    if not any(u):
        raise ValueError("direction must be nonzero")
    (t,) = Polynomial.variables(1)
    return p.compose([t.scale(ui) for ui in u])


def substitute_curve(p: Polynomial, curve: Sequence[Polynomial]) -> Polynomial:
    """Compose ``p`` with a curve given as one univariate polynomial per variable."""
    for c in curve:
        if c.dimension != 1:
            raise ValueError("curve components must be univariate polynomials")
    return p.compose(list(curve))


def univariate(coefficients: Iterable) -> Polynomial:
    """Univariate polynomial from ascending coefficients."""
    return Polynomial(1, {(k,): c for k, c in enumerate(coefficients)})


def evaluate(p: Polynomial, point: Sequence, mode: str = "exact"):
    return p.evaluate(point, mode)
