"""Command-line interface: ``cetaev analyze | trajectory | verify-paper | catalog``.

Exit status: 0 on completion (verdicts are data), 1 when a verify-paper item
fails, 2 on usage or input errors, 3 when a trajectory search is refused
because its precondition is not met.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import ETA, NEG_MARGIN, ZERO_TOL, AnalysisSettings, Verdict, analyze
from .corpus import CorpusEntry, catalog, demonstrate_bounded_orbits, entry, verify_paper_example
from .dynamics import (
    CAUCHY_FACTOR,
    FINAL_NORM_FACTOR,
    RTOL,
    ATOL,
    SEED_ENERGY_FRACTION,
    BACKWARD_FACTOR,
    EscapeError,
    HamiltonianSystem,
    IntegrationError,
    KrasovskiiRegion,
    find_asymptotic_trajectory,
    plan_search,
)
from .field import PotentialField, PotentialFieldError
from .sampling import sphere_sample
from .specfile import PotentialSpecError, dumps, load

EXIT_OK = 0
EXIT_ITEM_FAILED = 1
EXIT_INPUT = 2
EXIT_REFUSED = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    command: str
    corpus: str | None = None
    input: str | None = None
    s: int | None = None
    eps: float | None = None
    samples: int | None = None
    zero_tol: float = ZERO_TOL
    margin: float | None = None
    seeds: int = 10
    out: str | None = None
    json: bool = False
    force: bool = False
    timestamp: bool = True
    items: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("zero_tol", "margin", "eps"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise CliError(f"--{name.replace('_', '-')} must be a positive number")
        if self.s is not None and self.s < 2:
            raise CliError("--s must be at least 2")
        if self.samples is not None and self.samples < 2:
            raise CliError("--samples must be at least 2")
        if self.seeds < 2:
            raise CliError("--seeds must be at least 2")
        if self.command in ("analyze", "trajectory") and (self.corpus is None) == (self.input is None):
            raise CliError("give exactly one of --corpus NAME or --input PATH")


# -- inputs -------------------------------------------------------------------------

@dataclass
class Subject:
    name: str
    field: PotentialField
    s: int | None
    eps: float
    kinetic: np.ndarray | None
    entry: CorpusEntry | None = None


def load_subject(cfg: RunConfig) -> Subject:
    if cfg.corpus is not None:
        try:
            e = entry(cfg.corpus)
        except KeyError as exc:
            raise CliError(str(exc.args[0])) from None
        s = cfg.s or e.s
        fld = e.field
        if e.polynomial is not None and s != fld.jet_order:
            fld = PotentialField.from_polynomial(e.polynomial, s, e.name)
        return Subject(e.name, fld, s, cfg.eps or e.eps, e.kinetic, e)
    path = Path(cfg.input)
    try:
        spec = load(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except PotentialSpecError as exc:
        raise CliError(f"{path}: {exc}") from None
    s = cfg.s or max(spec.polynomial.degree, 2)
    try:
        fld = PotentialField.from_polynomial(spec.polynomial, s, path.stem)
    except PotentialFieldError as exc:
        raise CliError(f"{path}: {exc}") from None
    return Subject(path.stem, fld, s, cfg.eps or 0.5, spec.kinetic)


# -- output -------------------------------------------------------------------------

def jsonable(obj):
    """Plain JSON types; non-finite floats become ``null``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    return obj


def render_json(doc: dict) -> str:
    return json.dumps(jsonable(doc), indent=2, allow_nan=False) + "\n"


def envelope(cfg: RunConfig, body: dict) -> dict:
    doc = {"tool": "cetaev", "version": __version__, "command": cfg.command}
    if cfg.timestamp:
        doc["generated"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    doc.update(body)
    return doc


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(cfg: RunConfig, doc: dict, summary: list[str], files: dict[str, str]) -> None:
    """Write ``files`` under ``--out`` and print either the JSON document or the summary."""
    if cfg.out is not None:
        for name, text in files.items():
            write_atomic(Path(cfg.out) / name, text)
    if cfg.json:
        sys.stdout.write(render_json(doc))
    else:
        sys.stdout.write("\n".join(summary) + "\n")


# -- commands -----------------------------------------------------------------------

def settings_for(cfg: RunConfig, subject: Subject) -> AnalysisSettings:
    margin = cfg.margin
    return AnalysisSettings(
        s=subject.s, eps=subject.eps, samples=cfg.samples, zero_tol=cfg.zero_tol,
        neg_margin=margin if margin is not None else NEG_MARGIN,
        eta=margin if margin is not None else ETA,
    )


def cmd_analyze(cfg: RunConfig) -> int:
    subject = load_subject(cfg)
    report = analyze(subject.field, settings_for(cfg, subject))
    body = report.to_dict()
    if subject.entry is not None:
        body["expected"] = dict(subject.entry.expected)
    doc = envelope(cfg, body)
    lines = [f"potential: {subject.name}  (s={report.parameters['s']}, eps={subject.eps:.6g})"]
    for key, res in report.results.items():
        extra = f"  margin={res.margin:.3g}" if res.margin is not None else ""
        if res.witnesses:
            w = res.witnesses[0]
            extra += "  witness=(" + ", ".join(f"{v:.6g}" for v in w.point) + ")"
        lines.append(f"  {key:<13} {res.verdict.value}{extra}")
    emit(cfg, doc, lines, {f"{subject.name}-analysis.json": render_json(doc)})
    return EXIT_OK


def cmd_trajectory(cfg: RunConfig) -> int:
    subject = load_subject(cfg)
    if subject.entry is not None and subject.entry.demonstration_only:
        demo = demonstrate_bounded_orbits(subject.entry)
        doc = envelope(cfg, {"potential": subject.name, "demonstration": demo})
        lines = [f"potential: {subject.name}",
                 "  Demonstration-only: bounded orbits observed, no claim certified"]
        emit(cfg, doc, lines, {f"{subject.name}-trajectory.json": render_json(doc)})
        return EXIT_OK
    system = HamiltonianSystem(subject.field, subject.kinetic)
    sample = sphere_sample(system.dimension, cfg.samples)
    margin = cfg.margin if cfg.margin is not None else ETA
    plan = plan_search(system, subject.eps, subject.s, sample, cfg.zero_tol, margin)
    certified = plan.strict.verdict is Verdict.CERTIFIED
    if not certified and not cfg.force:
        raise CliError(
            f"strict Cetaev condition is {plan.strict.verdict.value} for {subject.name}; "
            "the asymptotic-trajectory search needs it Certified (use --force to run anyway)",
            EXIT_REFUSED,
        )
    region, direction, source = plan.region, plan.direction, plan.source
    if region is None:
        region = KrasovskiiRegion(system, subject.eps)
        pts = sample.points(subject.eps * 2.0**-3)
        vals = system.potential.values(pts)
        if not (vals < 0).any():
            raise CliError("Pi has no negative sampled direction: the region U is empty")
        direction = sample.directions[int(np.argmin(vals))]
        source = "forced: most negative sampled direction"
    try:
        result = find_asymptotic_trajectory(system, region, direction, k_max=cfg.seeds)
    except (EscapeError, IntegrationError) as exc:
        raise CliError(f"trajectory search failed: {exc}") from None
    params = {
        "eps": subject.eps, "s": subject.s, "seeds_k": [2, cfg.seeds],
        "seed_energy_fraction": SEED_ENERGY_FRACTION, "backward_factor": BACKWARD_FACTOR,
        "cauchy_tolerance": CAUCHY_FACTOR * subject.eps,
        "final_norm_threshold": FINAL_NORM_FACTOR * subject.eps,
        "rtol": RTOL, "atol": ATOL, "zero_tol": cfg.zero_tol, "margin": margin,
        "sample_points": len(sample), "forced": bool(cfg.force and not certified),
    }
    body = {
        "potential": subject.name,
        "parameters": params,
        "strictCetaev": plan.strict.verdict.value,
        "seed_direction": [float(v) for v in direction],
        "seed_direction_source": source,
        "result": result.to_dict(),
    }
    if subject.entry is not None:
        body["expected"] = subject.entry.expected.get("trajectory")
    doc = envelope(cfg, body)
    files = {f"{subject.name}-trajectory.json": render_json(doc)}
    if result.backward is not None:
        files[f"{subject.name}-trajectory.csv"] = result.backward.reversed().csv_text()
    ch = result.checks
    lines = [
        f"potential: {subject.name}  (eps={subject.eps:.6g}, seeds k=2..{cfg.seeds})",
        f"  strictCetaev      {plan.strict.verdict.value}",
        f"  seed direction    ({', '.join(f'{v:.6g}' for v in direction)})  [{source}]",
        f"  exit spread       {result.exit_spread:.3g}  cauchy={result.cauchy}",
        f"  verdict           {result.verdict}",
    ]
    if "final_state_norm" in ch:
        lines.append(f"  final |(q,p)|     {ch['final_state_norm']:.3g}"
                     f"  (threshold {ch['final_norm_threshold']:.3g})")
        lines.append(f"  log-log slope     {ch['loglog_slope']:.4f}")
    emit(cfg, doc, lines, files)
    return EXIT_OK


def cmd_verify_paper(cfg: RunConfig) -> int:
    items_arg = [i for chunk in cfg.items for i in chunk.split(",") if i]
    try:
        items = verify_paper_example(items_arg or None)
    except KeyError as exc:
        raise CliError(str(exc.args[0])) from None
    passed = all(it.passed for it in items)
    doc = envelope(cfg, {"items": [it.to_dict() for it in items], "all_passed": passed})
    lines = []
    for it in items:
        lines.append(f"  ({it.id}) {'pass' if it.passed else 'FAIL'}  [{it.method}] {it.title}")
        for note in it.notes:
            lines.append(f"        note: {note}")
    lines.append("all items passed" if passed else "some items FAILED")
    emit(cfg, doc, lines, {"verify-paper.json": render_json(doc)})
    return EXIT_OK if passed else EXIT_ITEM_FAILED


def cmd_catalog(cfg: RunConfig) -> int:
    entries = catalog()
    if cfg.corpus is not None:
        try:
            entries = [entry(cfg.corpus)]
        except KeyError as exc:
            raise CliError(str(exc.args[0])) from None
    doc = envelope(cfg, {"entries": [e.to_dict() for e in entries]})
    lines = []
    files = {"catalog.json": render_json(doc)}
    for e in entries:
        d = e.to_dict()
        lines.append(f"{e.name:<15} s={e.s}  eps={e.eps:.6g}  {d['potential']}")
        lines.append("    expected: " + ", ".join(f"{k}={v}" for k, v in d["expected"].items()))
        if e.polynomial is not None:
            files[f"{e.name}.pot"] = dumps(e.polynomial, e.variables, e.kinetic, e.provenance)
    emit(cfg, doc, lines, files)
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "trajectory": cmd_trajectory,
    "verify-paper": cmd_verify_paper,
    "catalog": cmd_catalog,
}


# -- argument parsing ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cetaev", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, source=True):
        if source:
            g = p.add_mutually_exclusive_group()
            g.add_argument("--corpus", metavar="NAME", help="built-in catalog entry")
            g.add_argument("--input", metavar="PATH", help="potential-spec file")
        p.add_argument("--out", metavar="DIR", help="directory for report files")
        p.add_argument("--json", action="store_true", help="print the JSON report")
        p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")

    def numeric(p):
        p.add_argument("--s", type=int, help="jet order")
        p.add_argument("--eps", type=float, help="analysis radius")
        p.add_argument("--samples", type=int, help="sphere sample size")
        p.add_argument("--zero-tol", type=float, default=ZERO_TOL)
        p.add_argument("--margin", type=float, help="negativity margin (eta and neg_margin)")

    p = sub.add_parser("analyze", help="check H1-H3, strict Cetaev and the W sandwich")
    common(p)
    numeric(p)
    p = sub.add_parser("trajectory", help="search for an asymptotic trajectory")
    common(p)
    numeric(p)
    p.add_argument("--seeds", type=int, default=10, metavar="K", help="last seed index K")
    p.add_argument("--force", action="store_true", help="run without a certified condition")
    p = sub.add_parser("verify-paper", help="exact checks of the worked example")
    common(p, source=False)
    p.add_argument("--item", action="append", default=[], metavar="ID",
                   help="run only these items (a-g); repeatable or comma separated")
    p = sub.add_parser("catalog", help="list built-in potentials")
    common(p, source=False)
    p.add_argument("--corpus", metavar="NAME", help="show a single entry")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        corpus=getattr(ns, "corpus", None),
        input=getattr(ns, "input", None),
        s=getattr(ns, "s", None),
        eps=getattr(ns, "eps", None),
        samples=getattr(ns, "samples", None),
        zero_tol=getattr(ns, "zero_tol", ZERO_TOL),
        margin=getattr(ns, "margin", None),
        seeds=getattr(ns, "seeds", 10),
        out=ns.out,
        json=ns.json,
        force=getattr(ns, "force", False),
        timestamp=not ns.no_timestamp,
        items=tuple(getattr(ns, "item", ())),
    )


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except CliError as exc:
        print(f"cetaev {ns.command}: {exc}", file=sys.stderr)
        return exc.code
    except (PotentialFieldError, PotentialSpecError, ValueError) as exc:
        print(f"cetaev {ns.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
