"""Acceptance criteria 1-8; each test prints one PASS/FAIL line."""

import json
import math
import time
from fractions import Fraction

import numpy as np

from cetaev.analysis import AnalysisSettings, Verdict, analyze, check_strict_cetaev, verify_sandwich
from cetaev.cli import main
from cetaev.corpus import catalog, entry, example_f, example_pi, q_polynomial, verify_paper_example
from cetaev.dynamics import (
    HamiltonianSystem,
    KrasovskiiRegion,
    State,
    find_asymptotic_trajectory,
    integrate,
    plan_search,
)
from cetaev.field import PotentialField
from cetaev.poly import Polynomial, euler_identity_rhs, homogeneous_parts, radial_derivative
from cetaev.sampling import sphere_sample

from oracles import quartic_escape_solution

EPS_EXAMPLE = (29 / 60) ** (1 / 12)


class Criterion:
    """Collects named sub-checks and reports them on one line."""

    def __init__(self, number, title, capsys, budget=None):
        self.number, self.title, self.capsys, self.budget = number, title, capsys, budget
        self.checks = []
        self.start = time.perf_counter()

    def check(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail))

    def finish(self):
        elapsed = time.perf_counter() - self.start
        if self.budget is not None:
            self.check(f"runtime < {self.budget:g} s", elapsed < self.budget, f"{elapsed:.2f} s")
        failed = [c for c in self.checks if not c[1]]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {self.number} [{status}] {self.title} ({elapsed:.2f} s)"
        if failed:
            line += "; failed: " + "; ".join(f"{n} {d}".strip() for n, _, d in failed)
        with self.capsys.disabled():
            print("\n" + line)
        assert not failed, line


def system_of(e):
    return HamiltonianSystem(e.field, e.kinetic)


# 1 -----------------------------------------------------------------------------------

def test_criterion_1_exact_suite(capsys):
    c = Criterion(1, "exact checks of the worked example", capsys, budget=5)
    items = {it.id: it for it in verify_paper_example()}
    for key in "aceg":
        c.check(f"item {key}", items[key].passed and items[key].method == "exact")
    x, y = Polynomial.variables(2)
    b = items["b"]
    diff = radial_derivative(example_f()) - q_polynomial()
    c.check("item b difference is -12 y^12", b.passed and diff == -12 * y**12, b.values["difference"])
    c.check("item b printed variant logged", b.values["printed_difference"] == "-y^12" and bool(b.notes))
    d = items["d"]
    c.check("item d 10^4 samples negative", d.passed and d.values["points"] == 10_000
            and d.values["nonnegative_count"] == 0)
    c.check("item d endpoints negative", Fraction(d.values["h(-3/4)"]) < 0 and Fraction(d.values["h(3/4)"]) < 0)
    c.finish()


# 2 -----------------------------------------------------------------------------------

def test_criterion_2_euler_identity(capsys):
    c = Criterion(2, "Euler identity for every corpus polynomial and order", capsys, budget=1)
    count = 0
    for e in catalog():
        p = e.polynomial
        if p is None:
            continue
        for s in range(2, p.degree + 1):
            jets = homogeneous_parts(p, s)
            ok = (radial_derivative(jets.jet(s)) - euler_identity_rhs(jets, s)).is_zero()
            c.check(f"{e.name} s={s}", ok)
            count += 1
    c.check("orders checked", count > 0, str(count))
    c.finish()


# 3 -----------------------------------------------------------------------------------

def test_criterion_3_verdicts(capsys):
    c = Criterion(3, "hypothesis verdicts of the worked example and the counterexample", capsys, budget=60)
    pi = example_pi()
    rep = analyze(PotentialField.from_polynomial(pi, 12), AnalysisSettings(s=12, eps=EPS_EXAMPLE))
    c.check("example H1 Refuted", rep.verdict("H1") is Verdict.REFUTED)
    c.check("example H2 Certified", rep.verdict("H2") is Verdict.CERTIFIED)
    c.check("example H3 Certified", rep.verdict("H3") is Verdict.CERTIFIED)
    strict = rep.results["strictCetaev"]
    c.check("example strictCetaev Refuted", strict.verdict is Verdict.REFUTED)
    on_curve = False
    if strict.witnesses:
        w = min(strict.witnesses, key=lambda w: abs(abs(w.point[1] / w.point[0] ** 2) - 0.5))
        ratio = abs(w.point[1] / w.point[0] ** 2)
        t = Fraction(float(abs(w.point[0])))
        r = radial_derivative(pi)
        half = [t, t * t / 2]
        # R is positive on the half parabola and on nearby interior points of {pi < 0}
        interior = [k for k in (Fraction(i, 400) for i in range(180, 261))
                    if pi.evaluate([t, k * t * t]) < 0 <= r.evaluate([t, k * t * t])]
        on_curve = abs(ratio - 0.5) <= 0.05 and r.evaluate(half) > 0 and bool(interior)
        c.check("witness on y = x^2/2", on_curve, f"y/x^2 = {ratio:.3f}")
    else:
        c.check("witness on y = x^2/2", False, "no witness")
    x, y = Polynomial.variables(2)
    saddle = PotentialField.from_polynomial(y**2 - x**2 + x**3, 2)
    rep2 = analyze(saddle, AnalysisSettings(s=2, eps=0.5))
    c.check("counterexample H3 Refuted", rep2.verdict("H3") is Verdict.REFUTED)
    c.check("counterexample strictCetaev Refuted", rep2.verdict("strictCetaev") is Verdict.REFUTED,
            f"got {rep2.verdict('strictCetaev').value}")
    c.finish()


# 4 -----------------------------------------------------------------------------------

def test_criterion_4_class_h_consistency(capsys):
    c = Criterion(4, "class-H entries are not strict-Cetaev refuted and the sandwich holds", capsys)
    sample = sphere_sample(2)
    seen = 0
    for e in catalog():
        if e.polynomial is None:
            continue
        sample_e = sample if e.field.dimension == 2 else sphere_sample(1)
        rep = analyze(e.field, AnalysisSettings(s=e.s, eps=e.eps))
        if not all(rep.verdict(k) is Verdict.CERTIFIED for k in ("H1", "H2", "H3")):
            continue
        seen += 1
        strict = check_strict_cetaev(e.field, e.eps, sample_e, degree=e.s)
        c.check(f"{e.name} strict not Refuted", strict.verdict is not Verdict.REFUTED)
        sw = verify_sandwich(e.field, homogeneous_parts(e.polynomial, e.s), e.s, e.eps, sample_e)
        c.check(f"{e.name} sandwich eps1 found", sw.verdict is Verdict.CERTIFIED and sw.margin is not None)
    c.check("class-H entries present", seen >= 3, str(seen))
    c.finish()


# 5 -----------------------------------------------------------------------------------

def test_criterion_5_analytic_oracle(capsys):
    c = Criterion(5, "asymptotic trajectory against x(t) = sqrt(2)/(c - t)", capsys, budget=5)
    e = entry("cubic-1d")
    sys_ = system_of(e)
    x0, p0 = quartic_escape_solution(10.0, 0.0)
    traj = integrate(sys_, State([x0], [p0]), 90.0, "backward")
    exact = quartic_escape_solution(10.0, -90.0)[0]
    err = abs(traj.q[-1, 0] / exact - 1)
    c.check("closed-form run at t = -90", err <= 1e-3, f"rel err {err:.2e}")
    res = find_asymptotic_trajectory(sys_, KrasovskiiRegion(sys_, e.eps), [1.0])
    c.check("search succeeded", res.success)
    back = res.backward
    cc = math.sqrt(2) / back.q[0, 0]
    x90 = np.interp(90.0, -back.t, back.q[:, 0])
    err2 = abs(x90 / quartic_escape_solution(cc, -90.0)[0] - 1)
    c.check("recovered orbit at t = -90", err2 <= 1e-3, f"rel err {err2:.2e}")
    slope = res.checks.get("loglog_slope", float("nan"))
    c.check("log-log slope -1 +- 0.05", abs(slope + 1) <= 0.05, f"slope {slope:.4f}")
    c.finish()


# 6 -----------------------------------------------------------------------------------

def test_criterion_6_krasovskii(capsys):
    c = Criterion(6, "Krasovskii construction on -(x^4 + y^4)", capsys, budget=30)
    e = entry("quartic-well")
    sys_ = system_of(e)
    plan = plan_search(sys_, e.eps, e.s)
    res = find_asymptotic_trajectory(sys_, plan.region, plan.direction, k_min=2, k_max=10)
    ch = res.checks
    times = [s["exit_time"] for s in res.seeds]
    c.check("k = 2..10", [s["k"] for s in res.seeds] == list(range(2, 11)))
    c.check("exit times increase", ch["exit_times_increasing"] and np.all(np.diff(times) > 0))
    c.check("exits Cauchy within 1e-3 eps", res.cauchy and res.exit_spread <= 1e-3 * e.eps,
            f"spread {res.exit_spread:.2e}")
    c.check("final |state| <= 1e-4 eps", ch.get("final_state_norm", math.inf) <= 1e-4 * e.eps)
    c.check("V strictly monotone", ch.get("V_strictly_decreasing_forward", False)
            and ch["V_strictly_decreasing_on_escapes"])
    c.check("W < 0 in U", ch.get("W_nonpositive_backward", False) and ch["W_negative_on_escapes"])
    c.check("success", res.success)
    c.finish()


# 7 -----------------------------------------------------------------------------------

def _bounded_states(sys_, rng, count, T):
    out = []
    while len(out) < count:
        n = sys_.dimension
        v = rng.normal(size=2 * n)
        v *= 10 ** rng.uniform(-3, math.log10(0.2)) / np.linalg.norm(v)
        st_ = State(v[:n], v[n:])
        if integrate(sys_, st_, T, domain_bound=1.0).status == "ok":
            out.append(st_)
    return out


def test_criterion_7_numerical_hygiene(capsys):
    c = Criterion(7, "energy drift, round trip and V-dot", capsys)
    systems = [(e.name, system_of(e)) for e in catalog()]
    rng = np.random.default_rng(2024)
    worst_drift, worst_trip = 0.0, 0.0
    for name, sys_ in systems:
        for st_ in _bounded_states(sys_, rng, 2, 50.0):
            traj = integrate(sys_, st_, 50.0)
            drift = np.max(np.abs(traj.H - traj.H[0])) / max(1.0, abs(traj.H[0]))
            worst_drift = max(worst_drift, drift)
        for st_ in _bounded_states(sys_, rng, 2, 10.0):
            fwd = integrate(sys_, st_, 10.0)
            back = integrate(sys_, fwd.end, 10.0, "backward")
            worst_trip = max(worst_trip, float(np.linalg.norm(back.end.vector - st_.vector)))
    c.check("energy drift <= 1e-8 over T = 50", worst_drift <= 1e-8, f"{worst_drift:.2e}")
    c.check("round trip <= 1e-6 over T = 10", worst_trip <= 1e-6, f"{worst_trip:.2e}")
    h = 1e-4
    worst = 0.0
    for i in range(100):
        name, sys_ = systems[i % len(systems)]
        n = sys_.dimension
        v = rng.normal(size=2 * n)
        v *= 0.3 / np.linalg.norm(v)
        traj = integrate(sys_, State(v[:n], v[n:]), 2 * h, t_eval=[0.0, h, 2 * h])
        fd = (traj.V[2] - traj.V[0]) / (2 * h)
        analytic = sys_.auxiliary_derivatives(traj.state(1))[0]
        q = traj.q[1]
        scale = 2 * sys_.kinetic_energy(q, traj.p[1]) + abs(float(sys_.potential.radial(q[None, :])[0]))
        worst = max(worst, abs(fd - analytic) / max(abs(analytic), scale, 1e-3))
    c.check("V-dot matches finite differences on 100 arcs", worst <= 1e-6, f"{worst:.2e}")
    c.finish()


# 8 -----------------------------------------------------------------------------------

DETERMINISM_RUNS = [
    ["verify-paper"],
    ["analyze", "--corpus", "paper-example", "--s", "12"],
    ["analyze", "--corpus", "cubic-saddle"],
    ["analyze", "--corpus", "quartic-well"],
    ["trajectory", "--corpus", "cubic-1d"],
    ["trajectory", "--corpus", "quartic-well"],
]


def _criterion_2_fingerprint():
    parts = []
    for e in catalog():
        if e.polynomial is not None:
            for s in range(2, e.polynomial.degree + 1):
                jets = homogeneous_parts(e.polynomial, s)
                parts.append(euler_identity_rhs(jets, s).to_string())
    return "\n".join(parts)


def test_criterion_8_determinism(tmp_path, capsys):
    c = Criterion(8, "byte-identical reports with --no-timestamp", capsys)
    for argv in DETERMINISM_RUNS:
        outputs = []
        for run_id in range(2):
            out_dir = tmp_path / f"{argv[0]}-{argv[-1]}-{run_id}"
            code = main([*argv, "--json", "--no-timestamp", "--out", str(out_dir)])
            out, _ = capsys.readouterr()
            files = {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}
            outputs.append((code, out, files))
        c.check(" ".join(argv), outputs[0] == outputs[1] and outputs[0][0] == 0)
        c.check(" ".join(argv) + " has no timestamp", "generated" not in json.loads(outputs[0][1]))
    c.check("Euler identity rerun", _criterion_2_fingerprint() == _criterion_2_fingerprint())
    c.finish()
