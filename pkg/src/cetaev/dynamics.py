"""Hamiltonian flow with constant kinetic matrix and the shooting search for
trajectories that tend to the equilibrium as time goes to minus infinity.

With ``H(q, p) = <B p, p>/2 + Pi(q)`` the auxiliary functions are
``V = -<q, p>`` and ``W = <q, p> H``; on the region
``U = {q in C, <q, p> > 0, |(q, p)| < eps, H < 0}`` the flow has ``V' < 0``,
``W < 0`` and ``W' <= 0``, so every orbit started in ``U`` leaves through the
sphere ``|(q, p)| = eps``.  Exit points of seeds shrinking to 0 accumulate at a
point whose backward orbit stays in ``U`` and converges to 0.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .analysis import (
    ETA,
    ZERO_TOL,
    HypothesisResult,
    RegionComponent,
    SphereSample,
    Verdict,
    check_strict_cetaev,
    find_tangent_directions,
    label_regions,
)
from .sampling import sphere_sample
from .field import PotentialField
from .specfile import check_kinetic_matrix

RTOL = 1e-10
ATOL = 1e-12
DOMAIN_BOUND = 10.0
SEED_ENERGY_FRACTION = 1e-8
BACKWARD_FACTOR = 10.0
CAUCHY_FACTOR = 1e-3
FINAL_NORM_FACTOR = 1e-4
ENERGY_RESOLUTION = 10 * RTOL


class IntegrationError(RuntimeError):
    pass


class EscapeError(RuntimeError):
    pass


def worker_count() -> int:
    env = os.environ.get("CETAEV_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


@dataclass(frozen=True)
class State:
    q: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float).reshape(-1))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).reshape(-1))
        if self.q.shape != self.p.shape:
            raise ValueError("q and p must have the same length")
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.p))):
            raise ValueError("state has non-finite components")

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True, eq=False)
class HamiltonianSystem:
    potential: PotentialField
    kinetic: np.ndarray | None = None

    def __post_init__(self):
        n = self.potential.dimension
        B = np.eye(n) if self.kinetic is None else self.kinetic
        object.__setattr__(self, "kinetic", check_kinetic_matrix(B, n))

    @property
    def dimension(self) -> int:
        return self.potential.dimension

    def kinetic_energy(self, q, p) -> float:
        p = np.asarray(p, dtype=float)
        return 0.5 * float(p @ self.kinetic @ p)

    def energy(self, q, p) -> float:
        return self.kinetic_energy(q, p) + self.potential.value(q)

    def vector_field(self, state: State) -> tuple[np.ndarray, np.ndarray]:
        """``(dq/dt, dp/dt) = (B p, -grad Pi(q))``; constant B has no q-derivative."""
        return self.kinetic @ state.p, -self.potential.gradient(state.q)

    def rhs(self, sign: float = 1.0):
        n = self.dimension
        B = self.kinetic
        grad = self.potential.gradients

        def f(_t, y):
            q, p = y[:n], y[n:]
            return sign * np.concatenate([B @ p, -grad(q[None, :])[0]])

        return f

    def auxiliary(self, q, p) -> tuple[float, float]:
        """``(V, W) = (-<q, p>, <q, p> H)``."""
        qp = float(np.dot(q, p))
        return -qp, qp * self.energy(q, p)

    def auxiliary_derivatives(self, state: State) -> tuple[float, float]:
        """Analytic ``(V', W')`` along the flow: ``V' = -(2T - R_Pi)``, ``W' = (2T - R_Pi) H``."""
        two_t = 2.0 * self.kinetic_energy(state.q, state.p)
        radial = float(self.potential.radial(state.q[None, :])[0])
        growth = two_t - radial
        return -growth, growth * self.energy(state.q, state.p)


@dataclass
class Trajectory:
    """Time-ordered states with per-state logs; backward runs have decreasing ``t``."""

    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    H: np.ndarray
    V: np.ndarray
    W: np.ndarray
    status: str = "ok"
    message: str = ""

    @classmethod
    def from_arrays(cls, system: HamiltonianSystem, t, y, status="ok", message="") -> Trajectory:
        n = system.dimension
        q, p = y[:n].T.copy(), y[n:].T.copy()
        pot = system.potential.values(q)
        kin = 0.5 * np.einsum("ij,jk,ik->i", p, system.kinetic, p)
        H = kin + pot
        qp = np.einsum("ij,ij->i", q, p)
        return cls(np.asarray(t, dtype=float), q, p, H, -qp, qp * H, status, message)

    def __len__(self) -> int:
        return self.t.size

    @property
    def q_norm(self) -> np.ndarray:
        return np.linalg.norm(self.q, axis=1)

    @property
    def p_norm(self) -> np.ndarray:
        return np.linalg.norm(self.p, axis=1)

    @property
    def state_norm(self) -> np.ndarray:
        return np.sqrt(self.q_norm**2 + self.p_norm**2)

    def state(self, i: int) -> State:
        return State(self.q[i], self.p[i], float(self.t[i]))

    @property
    def start(self) -> State:
        return self.state(0)

    @property
    def end(self) -> State:
        return self.state(len(self) - 1)

    def reversed(self) -> Trajectory:
        """Same states in the opposite order (e.g. a backward run in increasing time)."""
        return Trajectory(self.t[::-1].copy(), self.q[::-1].copy(), self.p[::-1].copy(),
                          self.H[::-1].copy(), self.V[::-1].copy(), self.W[::-1].copy(),
                          self.status, self.message)

    def csv_text(self) -> str:
        n = self.q.shape[1]
        header = ["t"] + [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)] + ["H", "V", "W"]
        lines = [",".join(header)]
        cols = np.column_stack([self.t, self.q, self.p, self.H, self.V, self.W])
        for row in cols:
            lines.append(",".join(f"{v:.17g}" for v in row))
        return "\n".join(lines) + "\n"


def integrate(system: HamiltonianSystem, start: State, T: float, direction: str = "forward",
              rtol: float = RTOL, atol: float = ATOL, domain_bound: float = DOMAIN_BOUND,
              events=None, t_eval=None) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) run over duration ``T``.

    ``direction="backward"`` integrates the negated field forward in its own time
    and stamps states with ``start.t - tau``.  The run stops early when ``|q|``
    reaches ``domain_bound`` (status ``"domain"``) or the step size underflows
    (status ``"underflow"``, partial trajectory returned).
    """
    if not T > 0:
        raise ValueError("duration must be positive")
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    sign = 1.0 if direction == "forward" else -1.0
    n = system.dimension
    f = system.rhs(sign)

    def bound(_t, y):
        return float(np.linalg.norm(y[:n])) - domain_bound

    bound.terminal = True
    bound.direction = 1
    all_events = [bound] + list(events or [])
    with np.errstate(over="raise", invalid="raise"):
        try:
            sol = solve_ivp(f, (0.0, T), start.vector, method="RK45", rtol=rtol, atol=atol,
                            events=all_events, t_eval=t_eval, dense_output=False)
        except (FloatingPointError, OverflowError) as exc:
            raise IntegrationError(f"non-finite state during integration: {exc}") from exc
    if not np.all(np.isfinite(sol.y)):
        raise IntegrationError("non-finite state during integration")
    status, message = "ok", ""
    if sol.status == -1:
        status, message = "underflow", sol.message
    elif sol.status == 1:
        if sol.t_events[0].size:
            status, message = "domain", f"|q| reached {domain_bound}"
        else:
            status, message = "event", "terminal event"
    times = start.t + sign * sol.t
    traj = Trajectory.from_arrays(system, times, sol.y, status, message)
    traj.events = sol  # raw solver output for event inspection
    return traj


# -- the region U ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KrasovskiiRegion:
    """``U = {(q, p): q in C, <q, p> > 0, |(q, p)| < eps, H(q, p) < 0}``.

    ``component`` and ``sample`` identify ``C`` by nearest sampled direction;
    without them every point with ``Pi(q) < 0`` counts.
    """

    system: HamiltonianSystem
    eps: float
    component: RegionComponent | None = None
    sample: SphereSample | None = None

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    def in_component(self, q) -> bool:
        q = np.asarray(q, dtype=float)
        if not self.system.potential.value(q) < 0:
            return False
        if self.component is None or self.sample is None:
            return True
        i = int(self.sample.nearest(q)[0])
        return any(i in set(m.tolist()) for m in self.component.members)

    def contains(self, state: State) -> bool:
        return (
            float(np.dot(state.q, state.p)) > 0
            and state.norm < self.eps
            and self.system.energy(state.q, state.p) < 0
            and self.in_component(state.q)
        )


@dataclass
class Escape:
    exit: State
    time: float
    trajectory: Trajectory
    v_monotone: bool
    w_negative: bool


def escape_time(system: HamiltonianSystem, region: KrasovskiiRegion, start: State,
                max_time: float = 1e7, rtol: float = RTOL, atol: float = ATOL) -> Escape:
    """Integrate forward from a point of ``U`` until ``|(q, p)| = eps``."""
    if not region.contains(start):
        raise EscapeError("start point is not in U")
    eps = region.eps

    def sphere(_t, y):
        return float(np.dot(y, y)) - eps**2

    sphere.terminal = True
    sphere.direction = 1

    n = system.dimension

    def boundary(_t, y):
        # W minus its resolution slack; a crossing means the orbit really reached W = 0
        q, p = y[:n], y[n:]
        kin = system.kinetic_energy(q, p)
        pot = system.potential.value(q)
        return float(np.dot(q, p)) * (kin + pot - ENERGY_RESOLUTION * (kin + abs(pot)))

    boundary.terminal = True
    boundary.direction = 1
    traj = integrate(system, start, max_time, "forward", rtol, atol,
                     domain_bound=max(DOMAIN_BOUND, 2 * eps), events=[sphere, boundary])
    sol = traj.events
    if sol.t_events[2].size:
        raise EscapeError("orbit reached the boundary W = 0 of U")
    if not sol.t_events[1].size:
        raise EscapeError(f"no exit through the sphere within time {max_time} ({traj.status})")
    t_exit = float(sol.t_events[1][0])
    y_exit = sol.y_events[1][0]
    exit_state = State(y_exit[:n], y_exit[n:], start.t + t_exit)
    if abs(exit_state.norm - eps) > 1e-10 * max(1.0, eps):
        raise EscapeError(f"exit point off the sphere by {abs(exit_state.norm - eps):.3g}")
    inside = traj.state_norm <= eps * (1 + 1e-12)
    v_monotone = bool(np.all(np.diff(traj.V[inside]) < 0))
    qp = np.einsum("ij,ij->i", traj.q, traj.p)
    slack = qp * energy_resolution(system, traj)
    w_negative = bool(np.all(traj.W[inside] <= slack[inside]))
    return Escape(exit_state, t_exit, traj, v_monotone, w_negative)


# -- seeds and the asymptotic search ------------------------------------------------

def seed_state(system: HamiltonianSystem, direction, norm: float,
               energy_fraction: float = SEED_ENERGY_FRACTION) -> State:
    """State ``(a u, lam a u)`` of the given norm with ``H = energy_fraction * Pi(a u)``.

    ``lam`` is the largest multiplier keeping ``H < 0`` shrunk by the factor
    ``sqrt(1 - energy_fraction)``; ``<q, p> > 0`` holds by construction.
    """
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    B = system.kinetic
    buu = float(u @ B @ u)
    a = norm
    lam = 0.0
    for _ in range(100):
        pot = system.potential.value(a * u)
        if not pot < 0:
            raise EscapeError(f"Pi is not negative along the seed direction at |q| = {a:.3g}")
        lam = math.sqrt((1.0 - energy_fraction) * (-2.0 * pot) / (a * a * buu))
        a_new = norm / math.sqrt(1.0 + lam * lam)
        if abs(a_new - a) <= 1e-15 * norm:
            a = a_new
            break
        a = a_new
    return State(a * u, lam * a * u)


def restore_energy(system: HamiltonianSystem, state: State, energy: float) -> State:
    """Rescale ``p`` so that ``H = energy``; removes integrator drift from an exit point."""
    kin = energy - system.potential.value(state.q)
    current = system.kinetic_energy(state.q, state.p)
    if not (kin > 0 and current > 0):
        raise EscapeError("cannot restore the seed energy at this state")
    return State(state.q, state.p * math.sqrt(kin / current), state.t)


def scaled_atol(atol: float, state: State, scale: float) -> float:
    """``atol`` shrunk in proportion to ``|state| / scale`` (never enlarged).

    A fixed absolute tolerance is coarse for states far below the scale it was
    chosen for and lets error feed modes whose energy is below the seed energy.
    """
    return atol * min(1.0, state.norm / scale)


def energy_resolution(system: HamiltonianSystem, traj: Trajectory) -> np.ndarray:
    """Per-state size below which ``H`` is indistinguishable from 0: ``10 rtol (T + |Pi|)``.

    Seed energies shrink like ``|q_k|^s`` and fall far below what the integrator
    resolves, so sign tests on ``H`` and ``W`` are made up to this slack.
    """
    kin = 0.5 * np.einsum("ij,jk,ik->i", traj.p, system.kinetic, traj.p)
    pot = system.potential.values(traj.q)
    return ENERGY_RESOLUTION * (kin + np.abs(pot))


def integrate_on_level(system: HamiltonianSystem, start: State, T: float, energy: float,
                       target: float, rtol: float = RTOL, atol: float = ATOL,
                       domain_bound: float = DOMAIN_BOUND, scale: float | None = None) -> Trajectory:
    """Backward run toward the origin, restarted each time ``|(q, p)|`` halves.

    At every restart ``p`` is rescaled back onto ``{H = energy}``, so energy error
    stays relative to the current scale instead of accumulating from the start;
    this matters because the approach to a degenerate equilibrium is sensitive to
    ``H``.  Stops with status ``"arrived"`` once ``|(q, p)| <= target``.  With
    ``scale`` given, each chunk uses ``scaled_atol(atol, state, scale)``.
    """
    pieces = []
    state = start
    remaining = T
    status, message = "ok", ""
    while remaining > 0:
        level = max(0.5 * state.norm, target)

        def shrink(_t, y, level=level):
            return float(np.dot(y, y)) - level**2

        shrink.terminal = True
        shrink.direction = -1
        chunk_atol = atol if scale is None else scaled_atol(atol, state, scale)
        piece = integrate(system, state, remaining, "backward", rtol, chunk_atol, domain_bound,
                          events=[shrink])
        pieces.append(piece if not pieces else _drop_first(piece))
        remaining = T - (start.t - float(piece.t[-1]))
        if piece.status != "event":
            status, message = piece.status, piece.message
            break
        end = piece.end
        if end.norm <= target * (1 + 1e-9):
            status, message = "arrived", f"|(q, p)| reached {target:.6g}"
            break
        try:
            state = restore_energy(system, end, energy)
        except EscapeError:
            state = end
    t = np.concatenate([p.t for p in pieces])
    y = np.concatenate([np.column_stack([p.q, p.p]) for p in pieces]).T
    return Trajectory.from_arrays(system, t, y, status, message)


def _drop_first(traj: Trajectory) -> Trajectory:
    return Trajectory(traj.t[1:], traj.q[1:], traj.p[1:], traj.H[1:], traj.V[1:], traj.W[1:],
                      traj.status, traj.message)


def loglog_slope(t: np.ndarray, values: np.ndarray) -> float:
    """Least-squares slope of ``log values`` against ``log |t|``."""
    x = np.log(np.abs(t))
    y = np.log(values)
    A = np.column_stack([x, np.ones_like(x)])
    return float(np.linalg.lstsq(A, y, rcond=None)[0][0])


@dataclass
class AsymptoticResult:
    success: bool
    verdict: str
    seeds: list[dict]
    exit_spread: float
    cauchy: bool
    limit_point: State | None
    backward: Trajectory | None
    checks: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "success": self.success,
            "verdict": self.verdict,
            "cauchy": self.cauchy,
            "exit_spread": self.exit_spread,
            "seeds": self.seeds,
            "checks": self.checks,
            "notes": list(self.notes),
        }
        if self.limit_point is not None:
            out["limit_point"] = {"q": [float(v) for v in self.limit_point.q],
                                  "p": [float(v) for v in self.limit_point.p]}
        return out


def find_asymptotic_trajectory(system: HamiltonianSystem, region: KrasovskiiRegion, direction,
                               k_min: int = 2, k_max: int = 10,
                               backward_factor: float = BACKWARD_FACTOR,
                               energy_fraction: float = SEED_ENERGY_FRACTION,
                               rtol: float = RTOL, atol: float = ATOL) -> AsymptoticResult:
    """Shoot from seeds of norm ``eps 2^-k`` along ``direction`` and integrate backward
    from the last exit point.

    Success needs a Cauchy tail of exit points (spread of the last three within
    ``1e-3 eps``), a backward orbit that stays in the closure of ``U``, ``|q|``
    decreasing over the last half of the backward time, a final norm at most
    ``1e-4 eps`` and ``V`` strictly decreasing in forward time.
    """
    eps = region.eps
    ks = list(range(k_min, k_max + 1))

    def shoot(k):
        seed = seed_state(system, direction, eps * 2.0**-k, energy_fraction)
        esc = escape_time(system, region, seed, rtol=rtol, atol=scaled_atol(atol, seed, eps))
        return k, seed, esc

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        shots = list(pool.map(shoot, ks))
    seeds = []
    exits = []
    for k, seed, esc in shots:
        exits.append(esc.exit.vector)
        seeds.append({
            "k": k,
            "seed_norm": seed.norm,
            "seed_energy": system.energy(seed.q, seed.p),
            "exit_time": esc.time,
            "exit_point": [float(v) for v in esc.exit.vector],
            "steps": len(esc.trajectory),
            "V_strictly_decreasing": esc.v_monotone,
            "W_negative": esc.w_negative,
        })
    exits = np.array(exits)
    tail = exits[-3:]
    spread = float(max(np.linalg.norm(a - b) for a in tail for b in tail))
    cauchy = spread <= CAUCHY_FACTOR * eps
    times = [s["exit_time"] for s in seeds]
    checks = {
        "exit_times_increasing": bool(np.all(np.diff(times) > 0)),
        "V_strictly_decreasing_on_escapes": all(s["V_strictly_decreasing"] for s in seeds),
        "W_negative_on_escapes": all(s["W_negative"] for s in seeds),
    }
    _, last_seed, last = shots[-1]
    seed_energy = system.energy(last_seed.q, last_seed.p)
    raw = State(last.exit.q, last.exit.p, 0.0)
    limit = restore_energy(system, raw, seed_energy)
    checks["exit_energy_drift"] = system.energy(raw.q, raw.p) - seed_energy
    if not cauchy:
        return AsymptoticResult(False, "Inconclusive", seeds, spread, False, limit, None, checks,
                                ["exit points are not Cauchy within 1e-3 eps"])
    t_back = backward_factor * last.time
    back = integrate_on_level(system, limit, t_back, seed_energy, FINAL_NORM_FACTOR * eps,
                              rtol, atol, domain_bound=max(DOMAIN_BOUND, 2 * eps), scale=eps)
    norms = back.state_norm
    tau = -back.t
    elapsed = float(tau[-1])
    late = tau >= 0.5 * elapsed
    qn = back.q_norm
    decay = bool(np.all(np.diff(qn[late]) < 0)) if late.sum() > 1 else False
    slack = energy_resolution(system, back)
    qp = np.einsum("ij,ij->i", back.q, back.p)
    in_closure = bool(
        np.all(norms <= eps * (1 + 1e-9))
        and np.all(back.H <= slack)
        and np.all(qp > 0)
    )
    v_forward = back.V[::-1]
    v_monotone = bool(np.all(np.diff(v_forward) < 0))
    w_negative = bool(np.all(back.W <= qp * slack))
    final_ok = bool(norms[-1] <= FINAL_NORM_FACTOR * eps)
    use = late & (tau > 0) & (qn > 0)
    slope = loglog_slope(tau[use], qn[use]) if use.sum() >= 2 else float("nan")
    checks.update({
        "backward_time_budget": t_back,
        "backward_time_elapsed": elapsed,
        "backward_status": back.status,
        "energy_level": seed_energy,
        "stays_in_closure_of_U": in_closure,
        "q_norm_decreasing_late": decay,
        "final_state_norm": float(norms[-1]),
        "final_norm_threshold": FINAL_NORM_FACTOR * eps,
        "final_norm_ok": final_ok,
        "V_strictly_decreasing_forward": v_monotone,
        "W_nonpositive_backward": w_negative,
        "loglog_slope": slope,
        "energy_drift": float(np.max(np.abs(back.H - back.H[0]))),
    })
    notes = []
    if not in_closure:
        notes.append("backward orbit left the closure of U")
    success = in_closure and decay and final_ok and v_monotone and back.status in ("ok", "arrived")
    return AsymptoticResult(success, "Certified" if success else "Inconclusive", seeds, spread,
                            cauchy, limit, back, checks, notes)


@dataclass
class SearchPlan:
    """Strict-Cetaev outcome plus, when certified, the region ``U`` and a seed direction."""

    strict: HypothesisResult
    region: KrasovskiiRegion | None
    direction: np.ndarray | None
    source: str = ""


def plan_search(system: HamiltonianSystem, eps: float, s: int | None = None,
                sample: SphereSample | None = None, zero_tol: float = ZERO_TOL,
                margin: float = ETA) -> SearchPlan:
    """Pick the certified component ``C`` and a seed direction inside it.

    Tangent-cone directions of the jet are preferred; otherwise the sampled
    direction with the most negative ``Pi`` at the innermost radius is used.
    """
    field_ = system.potential
    sample = sample or sphere_sample(field_.dimension)
    deg = s or field_.jet_order or 2
    strict = check_strict_cetaev(field_, eps, sample, margin, deg, zero_tol)
    if strict.verdict is not Verdict.CERTIFIED:
        return SearchPlan(strict, None, None)
    labeling = label_regions(field_, deg, sample, eps, zero_tol)
    comp = labeling.groups[strict.details["certified_component"]]
    region = KrasovskiiRegion(system, eps, comp, sample)
    jets = field_.jets
    if jets is not None and deg >= 2:
        tangent = find_tangent_directions(jets, deg, sample, zero_tol)
        inside = [i for i in np.argsort(tangent.values, kind="stable")
                  if comp.contains_direction(sample, tangent.directions[i])]
        if inside:
            return SearchPlan(strict, region, tangent.directions[inside[0]], "tangent cone")
    inner = comp.members[-1]
    vals = labeling.values[-1, inner]
    u = sample.directions[inner[int(np.argmin(vals))]]
    return SearchPlan(strict, region, u, "most negative sampled direction")
