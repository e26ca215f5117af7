"""Rapporttabellen (pandas) en SVG-lijnplots (matplotlib).

Elke tabel is een DataFrame; een plot toont alleen kolommen uit een tabel die
ook als CSV wordt weggeschreven.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from cat0_engine.asymptotics import DefectRow, OrbitPoint  # noqa: E402
from cat0_engine.geometry import AuditReport  # noqa: E402
from cat0_engine.scenario import Tolerances  # noqa: E402

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
EMIT_CHOICES = ("csv", "svg", "both")

plt.rcParams["svg.hashsalt"] = "cat0-engine"
plt.rcParams["svg.fonttype"] = "none"


# ───────────────────────────────────────────────────────────────
# 1️⃣  Tabellen
# ───────────────────────────────────────────────────────────────
def header_table(command: str, scenario: str, seed: int, tolerances: Tolerances) -> pd.DataFrame:
    """Kop van elk rapport: commando, scenario, seed en alle toleranties."""
    rows = [("command", command), ("scenario", scenario), ("seed", str(seed))]
    for key in Tolerances.keys():
        rows.append((f"tolerance.{key}", format(getattr(tolerances, key), ".12g")))
    return pd.DataFrame(rows, columns=["key", "value"])


def audit_table(report: AuditReport) -> pd.DataFrame:
    df = pd.DataFrame(
        [(row.triple, row.kind, row.violation) for row in report.rows],
        columns=["triple", "kind", "violation"],
    )
    return df


def projection_table(rows: Iterable[Tuple[int, str, str, float]]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=["point", "input", "projection", "distance"])


def circumcenter_table(center: str, radius: float, count: int) -> pd.DataFrame:
    return pd.DataFrame([(count, center, radius)], columns=["points", "center", "radius"])


def tits_table(rows: Iterable[Tuple[int, int, float, float]]) -> pd.DataFrame:
    """∠ⁿ-sporen: per paar en n de hoek, cos∠ⁿ en de gesloten vorm ∠(ξ,η)."""
    df = pd.DataFrame(list(rows), columns=["pair", "n", "angle_n", "closed_form"])
    df.insert(3, "cos_angle_n", [math.cos(a) for a in df["angle_n"]])
    return df


def angular_table(center: Optional[str], radius: float, unique: bool) -> pd.DataFrame:
    return pd.DataFrame([(center or "", radius, int(unique))], columns=["center", "radius", "unique"])


def orbit_table(orbit: Sequence[OrbitPoint], formatted: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(
        [(o.index, o.distance, p) for o, p in zip(orbit, formatted)],
        columns=["index", "distance", "projection"],
    )


def limit_table(directions: Sequence[str], diameter: float) -> pd.DataFrame:
    df = pd.DataFrame({"direction": list(directions)})
    df["diameter"] = diameter
    return df


def defect_table(rows: Sequence[DefectRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [(r.candidate, r.label, r.radius, r.defect) for r in rows],
        columns=["candidate", "label", "radius", "defect"],
    )


def flat_split_table(labels: Dict[str, List[str]]) -> pd.DataFrame:
    rows = [(label, group) for group in ("F", "A", "P") for label in labels[group]]
    return pd.DataFrame(rows, columns=["boundary_point", "set"])


def outcome_table(rows: Iterable[Tuple[str, str, str, float, str]]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=["class", "outcome", "value", "residual", "detail"])


def trace_table(traces: Dict[str, Sequence[str]]) -> pd.DataFrame:
    rows = [(root, i, line) for root, lines in traces.items() for i, line in enumerate(lines)]
    return pd.DataFrame(rows, columns=["class", "step", "message"])


# ───────────────────────────────────────────────────────────────
# 2️⃣  Wegschrijven
# ───────────────────────────────────────────────────────────────
def write_csv(df: pd.DataFrame, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.csv"
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("csv geschreven: %s", path)
    return path


def write_svg(df: pd.DataFrame, out_dir: Path, name: str, x: str, y: str, group: Optional[str] = None,
              logx: bool = False, title: str = "") -> Path:
    """Lijnplot van kolom ``y`` tegen ``x``, één lijn per waarde van ``group``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.svg"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if group is None:
        ax.plot(df[x], df[y], marker="o", linewidth=1.5, markersize=3)
    else:
        for key, part in df.groupby(group, sort=True):
            ax.plot(part[x], part[y], marker="o", linewidth=1.5, markersize=3, label=str(key))
        ax.legend(fontsize=8)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


class ReportWriter:
    """Schrijft tabellen naar ``out_dir`` volgens ``--emit``."""

    def __init__(self, out_dir: Any, emit: str = "csv"):
        if emit not in EMIT_CHOICES:
            raise ValueError(f"onbekende emit-waarde {emit!r}")
        self.out_dir = Path(out_dir)
        self.emit = emit
        self.written: List[Path] = []

    @property
    def wants_svg(self) -> bool:
        return self.emit in ("svg", "both")

    def table(self, df: pd.DataFrame, name: str, plot: Optional[Dict[str, Any]] = None, always: bool = False) -> None:
        # plots zijn een weergave: de CSV gaat altijd mee als er een plot is
        if always or self.emit in ("csv", "both") or (plot and self.wants_svg):
            self.written.append(write_csv(df, self.out_dir, name))
        if plot and self.wants_svg and not df.empty:
            self.written.append(write_svg(df, self.out_dir, name, **plot))
