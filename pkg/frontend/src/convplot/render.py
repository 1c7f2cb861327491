"""Render log-log convergence panels from experiment sweep CSVs.

This layer consumes only the CSV contract of the experiment harness (or any
CSV with an `n` column, an error column and optional group columns); it never
imports the library that produced the rows.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


class RenderError(ValueError):
    pass


@dataclass
class PlotSpec:
    csv_path: str
    metric: str
    group_by: Sequence[str] = ()
    reference_slope: Optional[float] = None
    output_path: str = "convergence.png"


@dataclass
class RenderResult:
    path: str
    slopes: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)


def _group_value(row: dict, key: str):
    """A group key is a CSV column, or a key inside the params_json payload."""
    if key in row and row[key] != "":
        return row[key]
    if "params_json" in row:
        try:
            params = json.loads(row["params_json"])
        except (TypeError, ValueError):
            return None
        if key in params:
            return params[key]
        graphon = params.get("graphon", {})
        if isinstance(graphon, dict) and key in graphon:
            return graphon[key]
    return None


def load_rows(spec: PlotSpec) -> list:
    with open(spec.csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        columns = reader.fieldnames or []
    missing = [c for c in ("n", spec.metric) if c not in columns]
    for key in spec.group_by:
        if key not in columns and not any(_group_value(r, key) is not None for r in rows):
            missing.append(key)
    if missing:
        raise RenderError(f"missing columns: {', '.join(missing)}")
    return rows


def _fit(ns, errs):
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(errs, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def render_convergence(spec: PlotSpec) -> RenderResult:
    """One panel per group: per-n medians with an interquartile band, the
    fitted slope annotation, and a dashed reference-slope guide line."""
    rows = load_rows(spec)
    groups: dict = {}
    for row in rows:
        val = row.get(spec.metric, "")
        if val in ("", None):
            continue
        key = tuple(str(_group_value(row, k)) for k in spec.group_by)
        groups.setdefault(key, []).append((int(float(row["n"])), float(val)))

    result = RenderResult(path=spec.output_path)
    usable = {}
    for key, pts in sorted(groups.items()):
        by_n: dict = {}
        for n, v in pts:
            by_n.setdefault(n, []).append(v)
        med = [(n, np.median(v), np.percentile(v, 25), np.percentile(v, 75))
               for n, v in sorted(by_n.items())]
        med = [(n, m, lo, hi) for n, m, lo, hi in med if m > 0]
        if len(med) < 2:
            result.skipped.append(key)
            continue
        usable[key] = med
    if not usable:
        raise RenderError("no group has two or more usable sizes")

    fig, axes = plt.subplots(
        1, len(usable), figsize=(4.2 * len(usable), 3.4), squeeze=False, sharey=False
    )
    for ax, (key, med) in zip(axes[0], usable.items()):
        ns = [m[0] for m in med]
        meds = [m[1] for m in med]
        los = [m[2] for m in med]
        his = [m[3] for m in med]
        slope, intercept = _fit(ns, meds)
        result.slopes[key] = slope
        ax.fill_between(ns, los, his, alpha=0.25, color="tab:blue", linewidth=0)
        ax.plot(ns, meds, "o-", color="tab:blue", label="median")
        if spec.reference_slope is not None:
            anchor = meds[0]
            ref = [anchor * (n / ns[0]) ** spec.reference_slope for n in ns]
            ax.plot(ns, ref, "--", color="gray",
                    label=f"reference {spec.reference_slope:+.2f}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel(spec.metric)
        title = ", ".join(f"{k}={v}" for k, v in zip(spec.group_by, key)) or "all rows"
        ax.set_title(title, fontsize=10)
        ax.annotate(
            f"slope {slope:+.2f}",
            xy=(0.05, 0.08),
            xycoords="axes fraction",
            fontsize=11,
            fontweight="bold",
        )
        ax.legend(fontsize=8, loc="upper right")
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=120, metadata={"Software": "convplot"})
    plt.close(fig)
    for key in result.skipped:
        print(f"warning: group {key} skipped (fewer than two usable sizes)",
              file=sys.stderr)
    return result


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="render")
    parser.add_argument("--csv", required=True)
    parser.add_argument("--metric", default="value")
    parser.add_argument("--group", action="append", default=[],
                        help="group-by column (repeatable), e.g. alpha or task")
    parser.add_argument("--ref-slope", type=float, default=None, dest="ref_slope")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    spec = PlotSpec(
        csv_path=args.csv,
        metric=args.metric,
        group_by=tuple(args.group),
        reference_slope=args.ref_slope,
        output_path=args.out,
    )
    try:
        result = render_convergence(spec)
    except (RenderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    slopes = ", ".join(f"{k}: {s:+.3f}" for k, s in result.slopes.items())
    print(f"wrote {result.path} ({slopes})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
