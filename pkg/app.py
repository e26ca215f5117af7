from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

import config
import reports
from cat0_engine.asymptotics import flat_split, limit_circumcenter, limit_set, limit_set_diameter_check, projection_orbit
from cat0_engine.boundary import AngularCenter, angle_n, angular_circumcenter, tits_angle
from cat0_engine.errors import Cat0Error, ScenarioError, UsageError
from cat0_engine.fields import AnalysisIncomplete, BoundarySection, FieldScenario, InvariantFlat, dichotomy, load_scenario
from cat0_engine.geometry import AuditReport, audit_cat0, audit_quadruples, circumcenter, project_convex, sample_triples
from cat0_engine.scenario import Tolerances, read_document

logger = logging.getLogger(__name__)

COMMANDS = (
    "audit-cat0",
    "project",
    "circumcenter",
    "tits",
    "angular-circumcenter",
    "limit-set",
    "flat-split",
    "dichotomy",
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCOMPLETE = 2
EXIT_USAGE = 64


# ───────────────────────────────────────────────────────────────
# 1️⃣  Argumenten
# ───────────────────────────────────────────────────────────────
class CliParser(argparse.ArgumentParser):
    """argparse met exitcode 64 in plaats van 2 bij gebruiksfouten."""

    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> CliParser:
    parser = CliParser(prog="cat0", description="CAT(0)-velden: audits, projecties, randhoeken en de dichotomie.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("scenario", help="pad naar een scenario (JSON)")
    parser.add_argument("--emit", choices=reports.EMIT_CHOICES, default="csv")
    parser.add_argument("--out", default="reports", help="map voor CSV/SVG-uitvoer")
    parser.add_argument("--tolerance", action="append", default=[], metavar="K=V")
    parser.add_argument("--seed", type=int, default=None)
    return parser


def parse_overrides(items: Sequence[str]) -> Dict[str, float]:
    overrides: Dict[str, float] = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--tolerance verwacht K=V, kreeg {item!r}")
        try:
            overrides[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--tolerance {key}: geen getal {value!r}")
    # onbekende sleutels of niet-positieve waarden zijn gebruiksfouten
    Tolerances().with_overrides(overrides, error=UsageError)
    return overrides


def parse_scenario(path: Any, overrides: Optional[Dict[str, float]] = None, seed: Optional[int] = None) -> FieldScenario:
    """Lees en valideer een scenario; flags gaan voor op het document."""
    document = read_document(path)
    if overrides:
        block = document.get("tolerances") or {}
        if not isinstance(block, dict):
            raise ScenarioError("tolerances moet een object zijn", "tolerances")
        document["tolerances"] = {**block, **overrides}
    if seed is not None:
        document["seed"] = seed
    return load_scenario(document, default_seed=config.default_seed())


# ───────────────────────────────────────────────────────────────
# 2️⃣  Commando's
# ───────────────────────────────────────────────────────────────
def cmd_audit(scenario: FieldScenario, writer: reports.ReportWriter) -> int:
    probes = scenario.probes
    space = probes.space
    rng = np.random.default_rng(scenario.seed)
    report = audit_cat0(space, sample_triples(space, rng, scenario.tolerances.audit_samples))
    writer.table(reports.audit_table(report), "audit_triangles")
    quads = AuditReport()
    if probes.quadruples:
        quads = audit_quadruples(probes.quadruples)
        writer.table(reports.audit_table(quads), "audit_quadruples")
    flagged = report.flagged(scenario.tolerances.metric) + quads.flagged(scenario.tolerances.metric)
    print(f"audit-cat0: {len(report.rows)} toetsen op driehoeken, max schending {report.max_violation:.3g}")
    if probes.quadruples:
        print(f"audit-cat0: {len(quads.rows)} viertal(len), max CN-schending {quads.max_violation:.12g}")
    if flagged:
        print(f"⚠️ {len(flagged)} schending(en) boven {scenario.tolerances.metric:g}")
    return EXIT_OK


def cmd_project(scenario: FieldScenario, writer: reports.ReportWriter) -> int:
    probes = scenario.probes
    space = probes.space
    if probes.convex is None:
        raise ScenarioError("geen project-blok in probes", "probes.project")
    rows = []
    for i, x in enumerate(probes.project_points):
        p = project_convex(space, probes.convex, x)
        rows.append((i, space.format_point(x), space.format_point(p), space.distance(x, p)))
        print(f"π_C({space.format_point(x)}) = {space.format_point(p)}")
    writer.table(reports.projection_table(rows), "projection")
    return EXIT_OK


def cmd_circumcenter(scenario: FieldScenario, writer: reports.ReportWriter) -> int:
    probes = scenario.probes
    center, radius = circumcenter(probes.space, probes.points)
    label = probes.space.format_point(center)
    writer.table(reports.circumcenter_table(label, radius, len(probes.points)), "circumcenter")
    print(f"circumcentrum {label}, straal {radius:.12g}")
    return EXIT_OK


def cmd_tits(scenario: FieldScenario, writer: reports.ReportWriter) -> int:
    probes = scenario.probes
    space = probes.space
    if not probes.tits_pairs:
        raise ScenarioError("geen tits-paren in probes", "probes.tits")
    base = space.origin() if probes.tits_base is None else probes.tits_base
    rows = []
    for k, (xi, eta) in enumerate(probes.tits_pairs):
        closed = tits_angle(space, xi, eta)
        for n in probes.tits_n:
            rows.append((k, n, angle_n(space, base, xi, eta, n), closed))
        print(f"∠({space.format_boundary(xi)}, {space.format_boundary(eta)}) = {closed:.12g}")
    plot = {"x": "n", "y": "angle_n", "group": "pair", "logx": True, "title": "∠ⁿ"}
    writer.table(reports.tits_table(rows), "tits_trace", plot=plot)
    return EXIT_OK


def cmd_angular(scenario: FieldScenario, writer: reports.ReportWriter) -> int:
    probes = scenario.probes
    space = probes.space
    result = angular_circumcenter(space, probes.boundary)
    if isinstance(result, AngularCenter):
        label = space.format_boundary(result.center)
        writer.table(reports.angular_table(label, result.radius, True), "angular_circumcenter")
        print(f"hoekcircumcentrum {label}, straal {result.radius:.12g}")
        return EXIT_OK
    writer.table(reports.angular_table(None, result.radius, False), "angular_circumcenter")
    print(f"⚠️ geen uniek hoekcentrum: straal {result.radius:.12g}")
    return EXIT_INCOMPLETE


def cmd_limit_set(scenario: FieldScenario, writer: reports.ReportWriter) -> int:
    probes = scenario.probes
    space = probes.space
    if probes.family is None:
        raise ScenarioError("geen familie in probes", "probes.family")
    horizon = scenario.tolerances.horizon
    orbit = projection_orbit(space, probes.family, probes.family_base, horizon)
    writer.table(
        reports.orbit_table(orbit, [space.format_point(o.point) for o in orbit]),
        "projection_orbit",
        plot={"x": "index", "y": "distance", "logx": True, "title": probes.family.label},
    )
    L = limit_set(space, probes.family, probes.family_base, horizon)
    diameter = limit_set_diameter_check(space, L)
    writer.table(reports.limit_table([space.format_boundary(xi) for xi in L], diameter), "limit_set")
    center = limit_circumcenter(space, probes.family, probes.family_base, horizon)
    print(f"limietverzameling: {len(L)} richting(en), diameter {diameter:.6g}, centrum {space.format_boundary(center.center)}")
    return EXIT_OK


def cmd_flat_split(scenario: FieldScenario, writer: reports.ReportWriter) -> int:
    probes = scenario.probes
    space = probes.space
    tol = scenario.tolerances
    split = flat_split(space, space.boundary_grid(probes.flat_grid), tol.r_max, tol.defect, angular_tol=tol.angular)
    labels = {name: [space.format_boundary(xi) for xi in getattr(split, name)] for name in ("F", "A", "P")}
    writer.table(reports.defect_table(split.defects), "defects",
                 plot={"x": "radius", "y": "defect", "group": "candidate", "title": "affiniteitsdefect"})
    writer.table(reports.flat_split_table(labels), "flat_split")
    print(f"flat split: |F|={len(split.F)} |A|={len(split.A)} |P|={len(split.P)}")
    return EXIT_OK


def cmd_dichotomy(scenario: FieldScenario, writer: reports.ReportWriter) -> int:
    outcomes = dichotomy(scenario)
    rows = []
    traces: Dict[str, List[str]] = {}
    status = EXIT_OK
    for members, outcome in zip(scenario.classes, outcomes):
        root = members[0]
        traces[root] = list(outcome.trace)
        if isinstance(outcome, BoundarySection):
            value = scenario.spaces[root].format_boundary(outcome.section.values[root])
            rows.append((root, outcome.tag, value, outcome.residual, outcome.branch))
            print(f"✅ {root}: invariante randsectie {value} (residu {outcome.residual:.3g})")
        elif isinstance(outcome, InvariantFlat):
            rows.append((root, outcome.tag, outcome.frames[root], outcome.residual, f"dim={outcome.dim}"))
            print(f"✅ {root}: invariant plat van dimensie {outcome.dim}: {outcome.frames[root]}")
        else:
            rows.append((root, outcome.tag, "", math.nan, outcome.reason))
            print(f"⚠️ {root}: analyse onvolledig: {outcome.reason}")
            status = EXIT_INCOMPLETE
    writer.table(reports.outcome_table(rows), "dichotomy")
    writer.table(reports.trace_table(traces), "dichotomy_trace")
    return status


HANDLERS = {
    "audit-cat0": cmd_audit,
    "project": cmd_project,
    "circumcenter": cmd_circumcenter,
    "tits": cmd_tits,
    "angular-circumcenter": cmd_angular,
    "limit-set": cmd_limit_set,
    "flat-split": cmd_flat_split,
    "dichotomy": cmd_dichotomy,
}


# ───────────────────────────────────────────────────────────────
# 3️⃣  Hoofdprogramma
# ───────────────────────────────────────────────────────────────
def run(command: str, scenario: FieldScenario, out: Any, emit: str = "csv", scenario_name: str = "") -> int:
    writer = reports.ReportWriter(out, emit)
    header = reports.header_table(command, scenario_name, scenario.seed, scenario.tolerances)
    writer.table(header, "report_header", always=True)
    return HANDLERS[command](scenario, writer)


def main(argv: Optional[Sequence[str]] = None) -> int:
    config.setup_logging()
    try:
        args = build_parser().parse_args(argv)
        overrides = parse_overrides(args.tolerance)
    except UsageError as e:
        print(f"gebruik: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        scenario = parse_scenario(args.scenario, overrides, args.seed)
        return run(args.command, scenario, args.out, args.emit, Path(args.scenario).name)
    except Cat0Error as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
