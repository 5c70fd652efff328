"""Built-in potentials with expected verdicts, and exact checks of the worked example
``pi = f + x^14``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .field import PotentialField
from .poly import Polynomial, homogeneous_parts, radial_derivative, substitute_curve, univariate

VERDICT_KEYS = ("H1", "H2", "H3", "strictCetaev", "trajectory")


@dataclass(frozen=True, eq=False)
class CorpusEntry:
    name: str
    field: PotentialField
    s: int | None
    eps: float
    expected: dict[str, str]
    provenance: str
    variables: tuple[str, ...] = ()
    kinetic: np.ndarray | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def polynomial(self) -> Polynomial | None:
        return self.field.polynomial

    @property
    def demonstration_only(self) -> bool:
        return all(v == "Demonstration-only" for v in self.expected.values())

    def to_dict(self) -> dict:
        p = self.polynomial
        return {
            "name": self.name,
            "dimension": self.field.dimension,
            "potential": p.to_string(self.variables or None) if p is not None else self.field.name,
            "s": self.s,
            "eps": self.eps,
            "expected": {k: self.expected[k] for k in VERDICT_KEYS},
            "provenance": self.provenance,
            "notes": list(self.notes),
        }


def example_f() -> Polynomial:
    x, y = Polynomial.variables(2)
    return (Fraction(8, 3) * y**6 - 3 * y**4 * x**4 + Fraction(9, 10) * y**2 * x**8
            - Fraction(1, 12) * x**12 - y**12)


def example_pi() -> Polynomial:
    x, _ = Polynomial.variables(2)
    return example_f() + x**14


def painleve_field() -> PotentialField:
    """``exp(-1/q^2) sin(1/q)`` with its chain-rule gradient; flat at 0."""

    def value(points):
        q = np.asarray(points, dtype=float)[:, 0]
        out = np.zeros_like(q)
        nz = np.abs(q) > 1e-3  # exp(-1e6) underflows to 0 anyway
        inv = 1.0 / q[nz]
        out[nz] = np.exp(-inv**2) * np.sin(inv)
        return out

    def gradient(points):
        q = np.asarray(points, dtype=float)[:, 0]
        out = np.zeros_like(q)
        nz = np.abs(q) > 1e-3
        inv = 1.0 / q[nz]
        out[nz] = np.exp(-inv**2) * (2 * inv**3 * np.sin(inv) - inv**2 * np.cos(inv))
        return out[:, None]

    return PotentialField.from_callables(1, value, gradient, "exp(-1/q^2)*sin(1/q)")


def _poly_entry(name, p, s, eps, expected, provenance, variables=("x", "y"), notes=()):
    fld = PotentialField.from_polynomial(p, s, name)
    return CorpusEntry(name, fld, s, eps, expected, provenance, tuple(variables[: p.dimension]),
                       None, tuple(notes))


def _expect(h1, h2, h3, strict, traj):
    return dict(zip(VERDICT_KEYS, (h1, h2, h3, strict, traj)))


def catalog() -> list[CorpusEntry]:
    x, y = Polynomial.variables(2)
    (q,) = Polynomial.variables(1)
    c, r, i = "Certified", "Refuted", "Inconclusive"
    demo = "Demonstration-only"
    return [
        _poly_entry(
            "paper-example", example_pi(), 12, (29 / 60) ** (1 / 12),
            _expect(r, c, c, r, i),
            "worked example pi = f + x^14 with f = 8/3 y^6 - 3 y^4 x^4 + 9/10 y^2 x^8 - x^12/12 - y^12; "
            "eps = (29/60)^(1/12)",
            notes=("trajectory search is refused: strict Cetaev condition is refuted",),
        ),
        _poly_entry(
            "cubic-saddle", y**2 - x**2 + x**3, 2, 0.5,
            _expect(c, c, r, c, c),
            "pi = y^2 - x^2 + x^3: the jet j^2 has the Cetaev condition but H3 fails",
            notes=(
                "strictCetaev: on the component around the negative x axis R = 2 pi + x^3 < 0 "
                "on the punctured closure, so the condition holds there; the component around "
                "the positive x axis is refuted (R = x^3 > 0 on its boundary)",
            ),
        ),
        CorpusEntry(
            "painleve", painleve_field(), None, 0.5,
            {k: demo for k in VERDICT_KEYS},
            "Painleve's flat potential exp(-1/q^2) sin(1/q): stable without a strict minimum",
            ("q",), None,
            ("simulation-level demonstration only; no verdict is claimed",),
        ),
        _poly_entry("quartic-well", -(x**4 + y**4), 4, 0.5, _expect(c, c, c, c, c),
                    "pi = -(x^4 + y^4): homogeneous, negative definite top part"),
        _poly_entry("saddle-quartic", y**2 - x**4, 4, 0.5, _expect(c, c, c, c, c),
                    "pi = y^2 - x^4: degenerate saddle, H1 holds at orders 2 and 3"),
        _poly_entry(
            "quartic-sextic", x**4 - y**4 + y**6, 4, 0.5, _expect(c, c, r, r, i),
            "pi = x^4 - y^4 + y^6 (verdicts fixed by brute-force sampling)",
            notes=(
                "j^4 is homogeneous, so R^4 = 4 j^4 vanishes on the boundary of A_4 and H3 fails; "
                "on the boundary of {pi < 0}, R = 2 y^6 > 0",
            ),
        ),
        _poly_entry("cubic-1d", -Fraction(1, 4) * q**4, 4, 0.5, _expect(c, c, c, c, c),
                    "pi = -x^4/4 in one degree of freedom; x(t) = sqrt(2)/(c - t) solves x'' = x^3",
                    variables=("x",)),
    ]


def entry(name: str) -> CorpusEntry:
    for e in catalog():
        if e.name == name:
            return e
    names = ", ".join(e.name for e in catalog())
    raise KeyError(f"unknown corpus entry {name!r}; available: {names}")


# -- exact checks of the worked example ---------------------------------------------

@dataclass
class CheckItem:
    id: str
    title: str
    passed: bool
    method: str
    values: dict
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"id": self.id, "title": self.title, "passed": self.passed,
                "method": self.method, "values": self.values, "notes": list(self.notes)}


def _s(p: Polynomial, names=("x", "y")) -> str:
    return p.to_string(names)


def _item_a() -> CheckItem:
    x, y = Polynomial.variables(2)
    product = (y - x**2) * (y + x**2) * (2 * y - x**2) ** 2 * (2 * y + x**2) ** 2
    expanded = 16 * y**6 - 24 * y**4 * x**4 + 9 * y**2 * x**8 - x**12
    return CheckItem("a", "Q = (y-x^2)(y+x^2)(2y-x^2)^2(2y+x^2)^2 expands as stated",
                     product == expanded, "exact",
                     {"product": _s(product), "stated": _s(expanded)})


def q_polynomial() -> Polynomial:
    x, y = Polynomial.variables(2)
    return (y - x**2) * (y + x**2) * (2 * y - x**2) ** 2 * (2 * y + x**2) ** 2


def _item_b() -> CheckItem:
    x, y = Polynomial.variables(2)
    rf = radial_derivative(example_f())
    diff = rf - q_polynomial()
    expected = -12 * y**12
    printed_rf = y**6 - 24 * y**4 * x**4 + 9 * y**2 * x**8 - x**12 - 12 * y**12
    return CheckItem(
        "b", "R_f - Q, with R_f = <grad f, q> computed from the definition",
        diff == expected, "exact",
        {"R_f": _s(rf), "difference": _s(diff), "expected_difference": _s(expected),
         "printed_difference": "-y^12", "printed_R_f": _s(printed_rf),
         "printed_R_f_matches": printed_rf == rf},
        ["the printed relation R_f = Q - y^12 disagrees with the definition; the coefficient "
         "of y^12 in R_f is 12 * (-1) = -12",
         "the printed expansion of R_f has leading term y^6, the Euler weighting gives 16 y^6"],
    )


def _item_c() -> CheckItem:
    f = example_f()
    x1 = univariate([0, 1])
    sq = univariate([0, 0, 1])
    stated = univariate([0] * 12 + [Fraction(29, 60)] + [0] * 11 + [-1])
    plus = substitute_curve(f, [x1, sq])
    minus = substitute_curve(f, [x1, -sq])
    return CheckItem("c", "f(x, +-x^2) = (29/60 - x^12) x^12",
                     plus == stated and minus == stated, "exact",
                     {"f(x, x^2)": _s(plus, ("x",)), "f(x, -x^2)": _s(minus, ("x",)),
                      "stated": _s(stated, ("x",))})


def h_polynomial() -> Polynomial:
    return univariate([Fraction(-1, 12), 0, Fraction(9, 10), 0, -3, 0, Fraction(8, 3)])


def _item_d(points: int = 10_000) -> CheckItem:
    h = h_polynomial()
    lo, hi = Fraction(-3, 4), Fraction(3, 4)
    step = (hi - lo) / (points - 1)
    worst = None
    worst_at = None
    positives = 0
    for k in range(points):
        lam = lo + k * step
        v = h.evaluate([lam])
        if v >= 0:
            positives += 1
        if worst is None or v > worst:
            worst, worst_at = v, lam
    ends = {"h(-3/4)": str(h.evaluate([lo])), "h(3/4)": str(h.evaluate([hi])),
            "h(0)": str(h.evaluate([Fraction(0)]))}
    return CheckItem(
        "d", "h(lambda) < 0 on [-3/4, 3/4]", positives == 0, "sampled",
        {"h": _s(h, ("lambda",)), "points": points, "nonnegative_count": positives,
         "max_value": str(worst), "max_at": str(worst_at), **ends},
        ["sign evaluated exactly at equally spaced rational points including both endpoints"],
    )


def _item_e() -> CheckItem:
    x, y = Polynomial.variables(2)
    j11 = homogeneous_parts(example_pi(), 11).jet(11)
    inner = Fraction(8, 3) * y**4 - 3 * y**2 * x**4 + Fraction(9, 10) * x**8
    factored = y**2 * inner == j11
    # inner = a Y^2 + b x^4 Y + c x^8 with Y = y^2; discriminant (b^2 - 4 a c) x^8
    a = inner.coefficient((0, 4))
    b = inner.coefficient((4, 2))
    c = inner.coefficient((8, 0))
    disc_coef = b * b - 4 * a * c
    disc = Polynomial(2, {(8, 0): disc_coef})
    # a > 0 and negative discriminant: inner > 0 off the origin, so j^11 = 0 only on y = 0
    ok = factored and len(inner) == 3 and disc_coef < 0 and a > 0
    return CheckItem(
        "e", "j^11 pi >= 0 with zero set {y = 0}", ok, "exact",
        {"j11": _s(j11), "factor": "y^2 * (" + _s(inner) + ")", "factorization_holds": factored,
         "discriminant_in_y2": _s(disc), "leading_coefficient": str(a)},
        ["inner quadratic in y^2 has positive leading coefficient and discriminant "
         f"{disc_coef} x^8 < 0 for x != 0; at x = 0 it reduces to (8/3) y^4 > 0 for y != 0"],
    )


def _item_f() -> CheckItem:
    j8 = homogeneous_parts(example_pi(), 8).jet(8)
    pt = [Fraction(1), Fraction(3, 10)]
    v = j8.evaluate(pt)
    return CheckItem("f", "j^8 pi takes negative values", v < 0, "exact",
                     {"j8": _s(j8), "point": ["1", "3/10"], "value": str(v)})


def _item_g() -> CheckItem:
    r = radial_derivative(example_pi())
    curve = substitute_curve(r, [univariate([0, 1]), univariate([0, 0, Fraction(1, 2)])])
    expected = univariate([0] * 14 + [14] + [0] * 9 + [Fraction(-12, 4096)])
    low = min(m[0] for m in curve.terms)
    low_coef = curve.coefficient((low,))
    # lowest-order term dominates near 0: positive coefficient => positive for small x != 0
    ok = curve == expected and low_coef > 0 and low % 2 == 0
    bound = float(14 * Fraction(4096, 12)) ** (1 / 10) if ok else None
    return CheckItem(
        "g", "R_pi(x, x^2/2) is positive for small x != 0", ok, "exact",
        {"R_pi(x, x^2/2)": _s(curve, ("x",)), "expected": _s(expected, ("x",)),
         "printed": "-2/2^12 x^24 + 14 x^14", "lowest_degree": low,
         "lowest_coefficient": str(low_coef),
         "positive_for_abs_x_below": bound},
        ["the factor (2y - x^2)^2 of Q vanishes on y = x^2/2, leaving -12 (x^2/2)^12 from R_f; "
         "the printed coefficient -2/2^12 differs from the computed -12/2^12"],
    )


PAPER_ITEMS = {"a": _item_a, "b": _item_b, "c": _item_c, "d": _item_d,
               "e": _item_e, "f": _item_f, "g": _item_g}


def verify_paper_example(items=None) -> list[CheckItem]:
    """Run the selected checks (all by default) in exact arithmetic."""
    ids = list(PAPER_ITEMS) if not items else list(items)
    unknown = [i for i in ids if i not in PAPER_ITEMS]
    if unknown:
        raise KeyError(f"unknown item(s) {unknown}; available: {', '.join(PAPER_ITEMS)}")
    return [PAPER_ITEMS[i]() for i in ids]


def demonstrate_bounded_orbits(entry_: CorpusEntry, starts=(0.2, 0.25, 0.3),
                               duration: float = 100.0) -> dict:
    """Integrate from rest at a few positions in both time directions and record the
    extent of each orbit.  Used for entries with no verdict to claim."""
    from .dynamics import HamiltonianSystem, State, integrate

    system = HamiltonianSystem(entry_.field, entry_.kinetic)
    n = system.dimension
    runs = []
    for q0 in starts:
        start = State(np.full(n, q0) / math.sqrt(n), np.zeros(n))
        extent = {}
        for direction in ("forward", "backward"):
            tr = integrate(system, start, duration, direction)
            extent[direction] = {
                "status": tr.status,
                "max_abs_q": float(tr.q_norm.max()),
                "min_abs_q": float(tr.q_norm.min()),
                "max_abs_p": float(tr.p_norm.max()),
                "energy_drift": float(np.max(np.abs(tr.H - tr.H[0]))),
            }
        runs.append({"start_q": float(q0), "start_energy": system.energy(start.q, start.p),
                     **extent})
    bounded = all(r[d]["status"] == "ok" for r in runs for d in ("forward", "backward"))
    return {"verdict": "Demonstration-only", "duration": duration, "orbits": runs,
            "all_orbits_stayed_in_domain": bounded,
            "notes": ["orbits started at rest are observed to stay bounded; no claim is certified"]}
