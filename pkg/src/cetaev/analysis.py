"""Sampling-based checks of the jet hypotheses H1-H3 and of the strict Cetaev condition.

Every check returns a three-valued verdict.  Sampling can refute with an explicit
witness point; it can only certify up to the stated margin and sample density.
Values of degree-``d`` quantities at radius ``r`` are compared against
``tol * r**d`` so that thresholds are scale free on homogeneous parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .field import PotentialField
from .poly import JetDecomposition, Polynomial, homogeneous_parts
from .sampling import SphereSample, closure, components, sphere_sample

ZERO_TOL = 1e-9
NEG_MARGIN = 1e-6
ETA = 1e-6
H1_RADII = (1.0, 0.5, 0.25)
LABEL_RADII = (1.0, 0.5, 0.25, 0.125)
DESCENT_STEPS = 200
SANDWICH_HALVINGS = 8
MAX_WITNESSES = 16


class Verdict(str, Enum):
    CERTIFIED = "Certified"
    REFUTED = "Refuted"
    INCONCLUSIVE = "Inconclusive"
    DEMONSTRATION = "Demonstration-only"

    def __str__(self) -> str:
        return self.value


@dataclass
class Witness:
    point: tuple[float, ...]
    quantity: str
    value: float
    note: str = ""

    def to_dict(self) -> dict:
        out = {"point": [float(v) for v in self.point], "quantity": self.quantity,
               "value": float(self.value)}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class HypothesisResult:
    verdict: Verdict
    witnesses: list[Witness] = field(default_factory=list)
    margin: float | None = None
    notes: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "margin": None if self.margin is None else float(self.margin),
            "witnesses": [w.to_dict() for w in self.witnesses],
            "notes": list(self.notes),
            "details": self.details,
        }


REPORT_KEYS = ("H1", "H2", "H3", "strictCetaev", "sandwich")


@dataclass
class HypothesisReport:
    potential: str
    parameters: dict
    results: dict[str, HypothesisResult]

    def verdict(self, key: str) -> Verdict:
        return self.results[key].verdict

    def to_dict(self) -> dict:
        ordered = [k for k in REPORT_KEYS if k in self.results]
        ordered += sorted(k for k in self.results if k not in REPORT_KEYS)
        return {
            "potential": self.potential,
            "parameters": self.parameters,
            "results": {k: self.results[k].to_dict() for k in ordered},
        }


# -- H1 -------------------------------------------------------------------------

def check_h1(jets: JetDecomposition, s: int, sample: SphereSample,
             zero_tol: float = ZERO_TOL) -> HypothesisResult:
    """Lower jets ``j^l`` for ``l <= s-1`` must be non-negative near the origin."""
    if s < 2:
        raise ValueError("H1 needs s >= 2")
    if len(sample) == 0:
        raise ValueError("empty sphere sample")
    margin = math.inf
    witnesses = []
    per_order = {}
    for ell in range(0, s):
        p = jets.jet(ell)
        if p.is_zero():
            per_order[ell] = 0.0
            margin = min(margin, 0.0)
            continue
        worst_scaled, worst_point, worst_value = math.inf, None, None
        for r in H1_RADII:
            pts = sample.points(r)
            vals = p.evaluate_many(pts)
            scaled = vals / r**ell
            i = int(np.argmin(scaled))
            if scaled[i] < worst_scaled:
                worst_scaled, worst_point, worst_value = float(scaled[i]), pts[i], float(vals[i])
        per_order[ell] = worst_scaled
        margin = min(margin, worst_scaled)
        if worst_scaled < -zero_tol:
            witnesses.append(Witness(tuple(worst_point), f"j^{ell}", worst_value))
    details = {"min_scaled_value_by_order": {str(k): v for k, v in per_order.items()},
               "radii": list(H1_RADII)}
    if witnesses:
        return HypothesisResult(Verdict.REFUTED, witnesses, margin, details=details)
    if margin < 0:
        return HypothesisResult(
            Verdict.INCONCLUSIVE, [], margin,
            ["minimum lies within the zero tolerance below 0"], details)
    return HypothesisResult(Verdict.CERTIFIED, [], margin, ["certified by sampling"], details)


# -- tangent cone -----------------------------------------------------------------

@dataclass
class TangentDirectionSet:
    directions: np.ndarray
    residuals: np.ndarray
    values: np.ndarray
    exact: np.ndarray

    def __len__(self) -> int:
        return self.directions.shape[0]

    def best(self) -> np.ndarray:
        return self.directions[int(np.argmin(self.values))]

    def to_dict(self, limit: int = 8) -> dict:
        order = np.argsort(self.values, kind="stable")[:limit]
        return {
            "count": len(self),
            "directions": [
                {"u": [float(v) for v in self.directions[i]],
                 "residual": float(self.residuals[i]),
                 "top_part_value": float(self.values[i]),
                 "exact_zero_lower_parts": bool(self.exact[i])}
                for i in order
            ],
        }


def _stacked_gradients(parts: Sequence[Polynomial]):
    grads = [p.gradient() for p in parts]

    def f(U):
        return np.stack([p.evaluate_many(U) for p in parts], axis=1)

    def jac(U):
        return np.stack(
            [np.stack([g.evaluate_many(U) for g in gs], axis=1) for gs in grads], axis=1
        )

    return f, jac


def _rational_direction(u: np.ndarray) -> list[Fraction]:
    return [Fraction(float(v)).limit_denominator(10**6) for v in u]


def find_tangent_directions(jets: JetDecomposition, s: int, sample: SphereSample,
                            zero_tol: float = ZERO_TOL, neg_margin: float = NEG_MARGIN,
                            steps: int = DESCENT_STEPS) -> TangentDirectionSet:
    """Directions on which every part of degree 2..s-1 vanishes while part ``s`` is negative.

    Each sample direction is pulled towards the common zero set of the lower parts
    by projected Gauss-Newton steps on the unit sphere (a descent method for the
    sum of squared parts), then filtered.
    """
    if s < 2:
        raise ValueError("tangent directions need s >= 2")
    lower = [jets.part(ell) for ell in range(2, s) if not jets.part(ell).is_zero()]
    top = jets.part(s)
    U = sample.directions.copy()
    n = U.shape[1]
    if lower:
        f, jac = _stacked_gradients(lower)
        res = f(U)
        obj = np.sum(res**2, axis=1)
        for _ in range(steps):
            active = obj > (0.01 * zero_tol) ** 2
            if not active.any():
                break
            Ua = U[active]
            J = jac(Ua)
            P = np.eye(n)[None, :, :] - Ua[:, :, None] * Ua[:, None, :]
            Jt = J @ P
            delta = -np.einsum("mij,mj->mi", np.linalg.pinv(Jt, rcond=1e-12), res[active])
            step = np.ones(Ua.shape[0])
            improved = np.zeros(Ua.shape[0], dtype=bool)
            new_U = Ua.copy()
            new_obj = obj[active].copy()
            for _half in range(12):
                trial = Ua + step[:, None] * delta
                trial /= np.linalg.norm(trial, axis=1, keepdims=True)
                t_obj = np.sum(f(trial) ** 2, axis=1)
                ok = (~improved) & (t_obj < obj[active])
                new_U[ok] = trial[ok]
                new_obj[ok] = t_obj[ok]
                improved |= ok
                if improved.all():
                    break
                step = np.where(improved, step, step * 0.5)
            if not improved.any():
                break
            U[active] = new_U
            obj[active] = new_obj
            res = f(U)
        residual = np.max(np.abs(f(U)), axis=1)
    else:
        residual = np.zeros(U.shape[0])
    top_vals = top.evaluate_many(U) if not top.is_zero() else np.zeros(U.shape[0])
    keep = (residual <= zero_tol) & (top_vals <= -neg_margin)
    idx = np.flatnonzero(keep)
    if idx.size:
        _, first = np.unique(np.round(U[idx], 8), axis=0, return_index=True)
        idx = idx[np.sort(first)]
    exact = []
    for i in idx:
        q = _rational_direction(U[i])
        exact.append(all(p.evaluate(q) == 0 for p in lower) and top.evaluate(q) < 0)
    return TangentDirectionSet(U[idx], residual[idx], top_vals[idx], np.array(exact, dtype=bool))


def check_h2(jets: JetDecomposition, s: int, tangent: TangentDirectionSet,
             sample: SphereSample, margin: float = NEG_MARGIN) -> HypothesisResult:
    """The jet shows there is no minimum.

    A direction with vanishing lower parts and negative top part gives a ray on
    which the jet is ``t**s * part_s(u) < 0``; any remainder of order ``o(t**s)``
    keeps the potential negative there.  That argument does not use H1.
    """
    details = {"tangent_directions": tangent.to_dict()}
    if len(tangent):
        u = tangent.best()
        w = Witness(tuple(u), f"Pi_{s}", float(jets.part(s).evaluate(u, "float")),
                    "ray direction with j^s(t u) = t^s Pi_s(u) < 0")
        return HypothesisResult(Verdict.CERTIFIED, [w], float(np.max(-tangent.values)),
                                ["certified via the tangent cone"], details)
    js = jets.jet(s)
    worst = math.inf
    for r in H1_RADII:
        vals = js.evaluate_many(sample.points(r)) / r**s
        worst = min(worst, float(vals.min()))
    details["min_scaled_jet"] = worst
    if worst >= margin:
        return HypothesisResult(Verdict.REFUTED, [], worst,
                                [f"j^{s} has a strict minimum at the origin on the sample"], details)
    return HypothesisResult(Verdict.INCONCLUSIVE, [], None,
                            ["no tangent direction found; sampling may miss thin cones"], details)


# -- region labelling -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RegionComponent:
    """A negative component linked across radii; ``members[k]`` are indices at layer ``k``."""

    id: int
    members: tuple[np.ndarray, ...]

    @property
    def adherent(self) -> bool:
        # present at the innermost radius: the best sampled proxy for touching 0
        return self.members[-1].size > 0

    def contains_direction(self, sample: SphereSample, u) -> bool:
        i = int(sample.nearest(np.asarray(u, dtype=float))[0])
        return any(i in set(m.tolist()) for m in self.members)


@dataclass(frozen=True, eq=False)
class RegionLabeling:
    sample: SphereSample
    radii: tuple[float, ...]
    degree: int
    zero_tol: float
    values: np.ndarray
    radial: np.ndarray
    layer_labels: np.ndarray
    groups: tuple[RegionComponent, ...]
    quantity: str = "j^s"

    def signs(self, which: str = "values") -> np.ndarray:
        arr = self.values if which == "values" else self.radial
        tol = self.zero_tol * np.asarray(self.radii)[:, None] ** self.degree
        out = np.zeros(arr.shape, dtype=np.int8)
        out[arr < -tol] = -1
        out[arr > tol] = 1
        return out

    def points(self, layer: int) -> np.ndarray:
        return self.sample.points(self.radii[layer])

    def closure(self, group: RegionComponent) -> list[np.ndarray]:
        return [closure(self.sample.adjacency, m) for m in group.members]

    def component_of(self, u) -> RegionComponent | None:
        for g in self.groups:
            if g.contains_direction(self.sample, u):
                return g
        return None

    def summary(self) -> list[dict]:
        out = []
        for g in self.groups:
            out.append({
                "id": g.id,
                "adherent": g.adherent,
                "points_per_radius": [int(m.size) for m in g.members],
                "representative": [float(v) for v in self.sample.directions[
                    next(m for m in g.members if m.size)[0]]],
            })
        return out


def _link_layers(labels: np.ndarray) -> list[RegionComponent]:
    L = labels.shape[0]
    counts = [int(labels[k].max()) + 1 for k in range(L)]
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(int)
    parent = list(range(int(offsets[-1])))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for k in range(L - 1):
        both = (labels[k] >= 0) & (labels[k + 1] >= 0)
        pairs = np.unique(np.stack([labels[k][both], labels[k + 1][both]], axis=1), axis=0)
        for a, b in pairs:
            ra, rb = find(offsets[k] + a), find(offsets[k + 1] + b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    roots = sorted({find(i) for i in range(int(offsets[-1]))})
    groups = []
    for gid, root in enumerate(roots):
        members = []
        for k in range(L):
            ids = [c for c in range(counts[k]) if find(offsets[k] + c) == root]
            members.append(np.flatnonzero(np.isin(labels[k], ids)))
        groups.append(RegionComponent(gid, tuple(members)))
    return groups


def label_regions(source, s: int, sample: SphereSample, eps: float,
                  zero_tol: float = ZERO_TOL, radii_factors=LABEL_RADII) -> RegionLabeling:
    """Sign labels and negative components of ``j^s`` and ``R^s`` (jets) or of ``Pi``
    and ``R_Pi`` (a :class:`PotentialField`) on spheres of radius ``eps * factor``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    radii = tuple(eps * f for f in radii_factors)
    if isinstance(source, JetDecomposition):
        js = source.jet(s)
        rs = js.radial_derivative()
        value_fn, radial_fn, quantity = js.evaluate_many, rs.evaluate_many, "j^s"
    elif isinstance(source, PotentialField):
        value_fn, radial_fn, quantity = source.values, source.radial, "Pi"
    else:
        raise TypeError("source must be a JetDecomposition or a PotentialField")
    values = np.stack([value_fn(sample.points(r)) for r in radii])
    radial = np.stack([radial_fn(sample.points(r)) for r in radii])
    tol = zero_tol * np.asarray(radii)[:, None] ** s
    neg = values < -tol
    labels = np.stack([components(sample.adjacency, neg[k]) for k in range(len(radii))])
    groups = _link_layers(labels)
    return RegionLabeling(sample, radii, s, zero_tol, values, radial, labels, tuple(groups), quantity)


def _group_scores(labeling: RegionLabeling, group: RegionComponent):
    """Per layer: closure indices and the radial quantity scaled by ``r**degree``."""
    out = []
    for k, idx in enumerate(labeling.closure(group)):
        r = labeling.radii[k]
        out.append((k, idx, labeling.radial[k, idx] / r**labeling.degree))
    return out


def _violation_witnesses(labeling: RegionLabeling, group: RegionComponent,
                         threshold: float, quantity: str, limit: int = MAX_WITNESSES) -> list[Witness]:
    """One witness (largest scaled radial value) per connected run of violating closure points."""
    found = []
    for k, idx, scores in _group_scores(labeling, group):
        bad = idx[scores >= threshold]
        if bad.size == 0:
            continue
        mask = np.zeros(len(labeling.sample), dtype=bool)
        mask[bad] = True
        runs = components(labeling.sample.adjacency, mask)
        scaled = labeling.radial[k] / labeling.radii[k] ** labeling.degree
        pts = labeling.points(k)
        for run in range(int(runs.max()) + 1):
            members = np.flatnonzero(runs == run)
            i = members[int(np.argmax(scaled[members]))]
            found.append(Witness(tuple(pts[i]), quantity, float(labeling.radial[k, i]),
                                 f"component {group.id}, radius {labeling.radii[k]:.6g}"))
    return found[:limit]


def _group_worst(labeling: RegionLabeling, group: RegionComponent) -> float:
    return max(float(sc.max()) for _, idx, sc in _group_scores(labeling, group) if idx.size)


def check_h3(labeling: RegionLabeling, jets: JetDecomposition, s: int, eps: float,
             eta: float = ETA, zero_tol: float | None = None) -> HypothesisResult:
    """Closure of some negative component of ``j^s`` must lie in ``{R^s < 0}``.

    A component is certified when ``R^s < -zero_tol |q|^s`` on every closure
    point at every radius; whether the uniform margin ``R^s <= -eta |q|^s`` is also
    met is reported separately.  It is refuted by a closure point with
    ``R^s >= eta |q|^s``.
    """
    floor = labeling.zero_tol if zero_tol is None else zero_tol
    candidates = [g for g in labeling.groups if g.adherent]
    notes = ["interiority of C_s is approximated by strict negativity above the zero tolerance"]
    per = []
    certified, refuted, witnesses = [], [], []
    for g in candidates:
        worst = _group_worst(labeling, g)
        if worst < -floor:
            status = Verdict.CERTIFIED
            certified.append((g, worst))
        elif worst >= eta:
            status = Verdict.REFUTED
            refuted.append(g)
            witnesses += _violation_witnesses(labeling, g, eta, f"R^{s}")
        else:
            status = Verdict.INCONCLUSIVE
        per.append({"component": g.id, "verdict": status.value, "max_scaled_radial": worst,
                    "uniform_margin_met": bool(worst <= -eta)})
    details = {"components": labeling.summary(), "per_component": per, "eps": eps}
    if certified:
        g, best = min(certified, key=lambda t: t[1])
        details["certified_components"] = [c.id for c, _ in certified]
        if best > -eta:
            notes.append("R^s/|q|^s approaches 0 inside the closure: uniform margin eta not met")
        return HypothesisResult(Verdict.CERTIFIED, [], best, notes, details)
    if not candidates:
        notes.append("no negative component of the jet reaches the innermost radius")
        return HypothesisResult(Verdict.INCONCLUSIVE, [], None, notes, details)
    if len(refuted) == len(candidates):
        return HypothesisResult(Verdict.REFUTED, witnesses[:MAX_WITNESSES], None, notes, details)
    return HypothesisResult(Verdict.INCONCLUSIVE, witnesses[:MAX_WITNESSES], None, notes, details)


def check_strict_cetaev(field: PotentialField, eps: float, sample: SphereSample,
                        margin: float = ETA, degree: int | None = None,
                        zero_tol: float = ZERO_TOL) -> HypothesisResult:
    """``R_Pi < 0`` on the punctured closure of some negative component of ``Pi``."""
    deg = degree or field.jet_order or 2
    labeling = label_regions(field, deg, sample, eps, zero_tol)
    candidates = [g for g in labeling.groups if g.adherent]
    per, certified, witnesses = [], [], []
    all_refuted = bool(candidates)
    for g in candidates:
        worst = _group_worst(labeling, g)
        if worst < -margin:
            status = Verdict.CERTIFIED
            certified.append((g, worst))
        elif worst >= 0:
            status = Verdict.REFUTED
            witnesses += _violation_witnesses(labeling, g, 0.0, "R")
        else:
            status = Verdict.INCONCLUSIVE
        if status is not Verdict.REFUTED:
            all_refuted = False
        per.append({"component": g.id, "verdict": status.value, "max_scaled_radial": worst})
    details = {"components": labeling.summary(), "per_component": per, "eps": eps,
               "scaling_degree": deg}
    if certified:
        g, worst = min(certified, key=lambda t: t[1])
        details["certified_component"] = g.id
        return HypothesisResult(Verdict.CERTIFIED, [], worst, [], details)
    if all_refuted:
        return HypothesisResult(Verdict.REFUTED, witnesses[:MAX_WITNESSES], None, [], details)
    notes = [] if candidates else ["no negative component reaches the innermost radius"]
    return HypothesisResult(Verdict.INCONCLUSIVE, witnesses[:MAX_WITNESSES], None, notes, details)


# -- the region W -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WRegion:
    polynomial: Polynomial
    s: int

    def contains(self, points, eps: float | None = None) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = self.polynomial.evaluate_many(pts) < 0
        if eps is not None:
            inside &= np.linalg.norm(pts, axis=1) < eps
        return inside


def w_polynomial(jets: JetDecomposition, s: int) -> Polynomial:
    """``(s-1) j^s + (1/2)(part_s - sum_{l=2}^{s-2} j^l)``."""
    if s < 2:
        raise ValueError("W needs s >= 2")
    tail = jets.part(s)
    for ell in range(2, s - 1):
        tail = tail - jets.jet(ell)
    return jets.jet(s).scale(s - 1) + tail.scale(Fraction(1, 2))


def build_w_region(jets: JetDecomposition, s: int) -> WRegion:
    return WRegion(w_polynomial(jets, s), s)


def _boundary_points(q: Polynomial, sample: SphereSample, r: float, iters: int = 48) -> np.ndarray:
    """Points of ``{Q = 0}`` on the sphere of radius ``r``, one per sign-changing edge."""
    edges = sample.edges
    if edges.size == 0:
        return np.zeros((0, sample.dimension))
    vals = q.evaluate_many(sample.points(r))
    a, b = edges[:, 0], edges[:, 1]
    cross = (vals[a] < 0) != (vals[b] < 0)
    a, b = a[cross], b[cross]
    if a.size == 0:
        return np.zeros((0, sample.dimension))
    inside_first = vals[a] < 0
    lo_dir = np.where(inside_first[:, None], sample.directions[a], sample.directions[b])
    hi_dir = np.where(inside_first[:, None], sample.directions[b], sample.directions[a])
    lo = np.zeros(a.size)
    hi = np.ones(a.size)

    def at(t):
        d = (1 - t)[:, None] * lo_dir + t[:, None] * hi_dir
        return r * d / np.linalg.norm(d, axis=1, keepdims=True)

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        neg = q.evaluate_many(at(mid)) < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    return at(hi)


def verify_sandwich(field: PotentialField, jets: JetDecomposition, s: int, eps: float,
                    sample: SphereSample, halvings: int = SANDWICH_HALVINGS) -> HypothesisResult:
    """Largest ``eps1`` in ``eps, eps/2, ..., eps/2**halvings`` with ``Pi > 0`` on sampled
    ``dW`` and ``R_Pi < 0`` on sampled closure of ``W``."""
    region = build_w_region(jets, s)
    q = region.polynomial
    schedule = []
    found = None
    failing: list[Witness] = []
    for h in range(halvings + 1):
        eps1 = eps / 2**h
        ok = True
        bad: list[Witness] = []
        counts = {"boundary": 0, "closure": 0}
        for f in LABEL_RADII:
            r = eps1 * f
            pts = sample.points(r)
            inside = pts[q.evaluate_many(pts) < 0]
            bnd = _boundary_points(q, sample, r)
            counts["boundary"] += len(bnd)
            counts["closure"] += len(inside) + len(bnd)
            if len(bnd):
                pv = field.values(bnd)
                if (pv <= 0).any():
                    ok = False
                    i = int(np.argmin(pv))
                    bad.append(Witness(tuple(bnd[i]), "Pi on dW", float(pv[i])))
            closure_pts = np.concatenate([inside, bnd]) if len(bnd) else inside
            if len(closure_pts):
                rv = field.radial(closure_pts)
                if (rv >= 0).any():
                    ok = False
                    i = int(np.argmax(rv))
                    bad.append(Witness(tuple(closure_pts[i]), "R on closure(W)", float(rv[i])))
        schedule.append({"eps1": eps1, "holds": ok, **counts})
        if ok:
            found = eps1
            break
        if not failing:
            failing = bad
    details = {"schedule": schedule, "W_polynomial": q.to_string()}
    if found is not None:
        details["eps1"] = found
        return HypothesisResult(Verdict.CERTIFIED, [], found, [], details)
    return HypothesisResult(Verdict.INCONCLUSIVE, failing[:MAX_WITNESSES], None,
                            ["no radius in the halving schedule satisfies both inclusions"], details)


# -- full analysis ----------------------------------------------------------------

@dataclass
class AnalysisSettings:
    s: int | None = None
    eps: float = 0.5
    samples: int | None = None
    neighbors: int = 8
    zero_tol: float = ZERO_TOL
    neg_margin: float = NEG_MARGIN
    eta: float = ETA

    def __post_init__(self):
        for name in ("zero_tol", "neg_margin", "eta", "eps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.s is not None and self.s < 2:
            raise ValueError("s must be at least 2")


def analyze(field: PotentialField, settings: AnalysisSettings | None = None) -> HypothesisReport:
    """Run H1, H2 (through tangent directions), H3, strict Cetaev and the W sandwich."""
    st = settings or AnalysisSettings()
    sample = sphere_sample(field.dimension, st.samples, st.neighbors)
    s = st.s or field.jet_order
    params = {
        "s": s,
        "eps": st.eps,
        "dimension": field.dimension,
        "sample_points": len(sample),
        "neighbors": sample.neighbors,
        "zero_tol": st.zero_tol,
        "neg_margin": st.neg_margin,
        "eta": st.eta,
        "h1_radii": list(H1_RADII),
        "label_radii_factors": list(LABEL_RADII),
        "descent_steps": DESCENT_STEPS,
        "sandwich_halvings": SANDWICH_HALVINGS,
    }
    results: dict[str, HypothesisResult] = {}
    if field.polynomial is None or s is None:
        note = "no polynomial jet available for this potential"
        for key in ("H1", "H2", "H3", "sandwich"):
            results[key] = HypothesisResult(Verdict.INCONCLUSIVE, notes=[note])
        results["strictCetaev"] = check_strict_cetaev(field, st.eps, sample, st.eta,
                                                      degree=s or 2, zero_tol=st.zero_tol)
        return HypothesisReport(field.name, params, results)
    jets = homogeneous_parts(field.polynomial, s)
    results["H1"] = check_h1(jets, s, sample, st.zero_tol)
    tangent = find_tangent_directions(jets, s, sample, st.zero_tol, st.neg_margin)
    results["H2"] = check_h2(jets, s, tangent, sample, st.neg_margin)
    labeling = label_regions(jets, s, sample, st.eps, st.zero_tol)
    results["H3"] = check_h3(labeling, jets, s, st.eps, st.eta)
    results["strictCetaev"] = check_strict_cetaev(field, st.eps, sample, st.eta, s, st.zero_tol)
    results["sandwich"] = verify_sandwich(field, jets, s, st.eps, sample)
    if all(results[k].verdict is Verdict.CERTIFIED for k in ("H1", "H2", "H3")):
        results["sandwich"].notes.append("H1-H3 certified: preconditions met")
    else:
        results["sandwich"].notes.append("run without certified H1-H3 preconditions")
    return HypothesisReport(field.name, params, results)
