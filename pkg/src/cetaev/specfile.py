"""Line-oriented text format for polynomial potentials.

Example::

    # y^2 - x^2 + x^3
    dimension 2
    variables x y
    term 1 1 0 2
    term -1 1 2 0
    term 1 1 3 0
    kinetic 2 0
    kinetic 0 1

``term NUM DEN E1 .. En`` gives a coefficient NUM/DEN and an exponent vector.
``kinetic`` lines are the rows of the constant kinetic matrix B (rationals or
decimals); omitted means the identity.  ``#`` starts a comment.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .poly import Polynomial, default_variable_names

FORMAT_TAG = "potential-spec 1"


class PotentialSpecError(ValueError):
    """Malformed potential-spec text; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class PotentialSpec:
    polynomial: Polynomial
    variables: tuple[str, ...]
    kinetic: np.ndarray | None = None

    @property
    def dimension(self) -> int:
        return self.polynomial.dimension


def check_kinetic_matrix(B, n: int, line: int | None = None) -> np.ndarray:
    B = np.asarray(B, dtype=float)
    if B.shape != (n, n):
        raise PotentialSpecError(f"kinetic matrix must be {n}x{n}, got {B.shape}", line)
    if not np.all(np.isfinite(B)):
        raise PotentialSpecError("kinetic matrix has non-finite entries", line)
    if np.max(np.abs(B - B.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(B))):
        raise PotentialSpecError("kinetic matrix is not symmetric", line)
    try:
        np.linalg.cholesky(B)
    except np.linalg.LinAlgError:
        raise PotentialSpecError("kinetic matrix is not positive definite", line) from None
    return B


def loads(text: str) -> PotentialSpec:
    dimension: int | None = None
    names: tuple[str, ...] | None = None
    terms: dict[tuple[int, ...], Fraction] = {}
    rows: list[list[float]] = []
    kinetic_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *fields = line.split()
        if key == "potential-spec":
            if fields != ["1"]:
                raise PotentialSpecError(f"unsupported format version {' '.join(fields)!r}", lineno)
        elif key == "dimension":
            if dimension is not None:
                raise PotentialSpecError("dimension given twice", lineno)
            if len(fields) != 1 or not fields[0].isdigit() or int(fields[0]) < 1:
                raise PotentialSpecError("dimension must be one positive integer", lineno)
            dimension = int(fields[0])
        elif key == "variables":
            if dimension is None:
                raise PotentialSpecError("variables before dimension", lineno)
            if len(fields) != dimension:
                raise PotentialSpecError(
                    f"expected {dimension} variable names, got {len(fields)}", lineno
                )
            names = tuple(fields)
        elif key == "term":
            if dimension is None:
                raise PotentialSpecError("term before dimension", lineno)
            if len(fields) != dimension + 2:
                raise PotentialSpecError(
                    f"term needs numerator, denominator and {dimension} exponents, "
                    f"got {len(fields)} fields",
                    lineno,
                )
            try:
                num, den = int(fields[0]), int(fields[1])
                exps = tuple(int(f) for f in fields[2:])
            except ValueError:
                raise PotentialSpecError(f"malformed term {' '.join(fields)!r}", lineno) from None
            if den <= 0:
                raise PotentialSpecError("denominator must be positive", lineno)
            if any(e < 0 for e in exps):
                raise PotentialSpecError("exponents must be non-negative", lineno)
            if exps in terms:
                raise PotentialSpecError(f"monomial {exps} listed twice", lineno)
            terms[exps] = Fraction(num, den)
        elif key == "kinetic":
            if dimension is None:
                raise PotentialSpecError("kinetic row before dimension", lineno)
            if len(fields) != dimension:
                raise PotentialSpecError(
                    f"kinetic row needs {dimension} entries, got {len(fields)}", lineno
                )
            try:
                rows.append([float(Fraction(f)) for f in fields])
            except (ValueError, ZeroDivisionError):
                raise PotentialSpecError(f"malformed kinetic entry in {fields}", lineno) from None
            kinetic_line = lineno
        else:
            raise PotentialSpecError(f"unknown keyword {key!r}", lineno)
    if dimension is None:
        raise PotentialSpecError("missing 'dimension' line")
    kinetic = None
    if rows:
        if len(rows) != dimension:
            raise PotentialSpecError(
                f"kinetic matrix has {len(rows)} rows, expected {dimension}", kinetic_line
            )
        kinetic = check_kinetic_matrix(rows, dimension, kinetic_line)
    return PotentialSpec(
        Polynomial(dimension, terms),
        names or default_variable_names(dimension),
        kinetic,
    )


def load(path) -> PotentialSpec:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(polynomial: Polynomial, variables=None, kinetic=None, comment: str | None = None) -> str:
    n = polynomial.dimension
    names = tuple(variables) if variables else default_variable_names(n)
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines += [FORMAT_TAG, f"dimension {n}", "variables " + " ".join(names)]
    for exps in sorted(polynomial.terms, key=lambda m: (sum(m), m)):
        c = polynomial.terms[exps]
        lines.append(f"term {c.numerator} {c.denominator} " + " ".join(map(str, exps)))
    if kinetic is not None:
        for row in np.asarray(kinetic, dtype=float):
            lines.append("kinetic " + " ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
