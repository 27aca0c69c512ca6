"""Serialization of analysis results: CSV tables, plot-data JSON, and
optional static SVG rendering.

Plot-data JSON is the canonical figure output; SVG rendering is a view of
the same data and is skipped when matplotlib is unavailable.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Mapping, Optional, Sequence

from .analysis import (
    BeforeAfterTable,
    CharacteristicsProfile,
    DensityCurve,
    GroupComparison,
    LogOddsEntry,
    TimePoint,
)
from .errors import SchemaError
from .fileio import ensure_parent
from .records import FLAG_FIELDS

PLOT_KINDS = ("lines", "bars", "grouped_bars")


def _check_plot_data(data: dict) -> dict:
    if data.get("kind") not in PLOT_KINDS:
        raise SchemaError(f"unknown plot kind {data.get('kind')!r}")
    if not isinstance(data.get("series"), list) or not data["series"]:
        raise SchemaError("plot data needs a non-empty series list")
    return data


# -- plot-data builders --------------------------------------------------------

def plot_data_temporal(series: Mapping[str, Sequence[TimePoint]],
                       events: Sequence[dict] = (),
                       y_label: str = "share of delegitimizing sentences") -> dict:
    names = sorted(series)
    if not names:
        raise SchemaError("temporal plot needs at least one series")
    periods = [p.period for p in series[names[0]]]
    for name in names[1:]:
        if [p.period for p in series[name]] != periods:
            raise SchemaError("all temporal series must share one period axis")
    return _check_plot_data({
        "kind": "lines",
        "x_label": "period",
        "y_label": y_label,
        "x": periods,
        "series": [{"name": name,
                    "y": [p.mean_share for p in series[name]]}
                   for name in names],
        "markers": [{"name": e["name"], "x": e["date"].isoformat(),
                     "kind": e["kind"]} for e in events],
    })


def plot_data_density(curves: Mapping[str, DensityCurve],
                      x_label: str = "speaker share") -> dict:
    names = sorted(curves)
    if not names:
        raise SchemaError("density plot needs at least one curve")
    return _check_plot_data({
        "kind": "lines",
        "x_label": x_label,
        "y_label": "density",
        "series": [{"name": name,
                    "x": list(curves[name].xs),
                    "y": list(curves[name].ys)}
                   for name in names],
        "markers": [],
    })


def plot_data_profile(profiles: Mapping[str, CharacteristicsProfile]) -> dict:
    names = sorted(profiles)
    if not names:
        raise SchemaError("profile plot needs at least one platform")
    categories = list(FLAG_FIELDS)
    return _check_plot_data({
        "kind": "grouped_bars",
        "x_label": "characteristic",
        "y_label": "rate among positives",
        "categories": categories,
        "series": [{"name": name,
                    "y": [profiles[name].flag_rates[c] for c in categories]}
                   for name in names],
        "markers": [],
    })


def plot_data_logodds(entries_by_group: Mapping[str, Sequence[LogOddsEntry]]) -> dict:
    names = sorted(entries_by_group)
    if not names:
        raise SchemaError("log-odds plot needs at least one group")
    series = []
    for name in names:
        entries = list(entries_by_group[name])
        series.append({"name": name,
                       "categories": [e.term for e in entries],
                       "y": [e.z for e in entries]})
    return _check_plot_data({
        "kind": "bars",
        "x_label": "term",
        "y_label": "z-scored log-odds",
        "series": series,
        "markers": [],
    })


def plot_data_before_after(table: BeforeAfterTable) -> dict:
    cohorts = sorted({cohort for cohort, _w in table.cells})
    return _check_plot_data({
        "kind": "grouped_bars",
        "x_label": "window",
        "y_label": "mean speaker share",
        "categories": ["before", "after"],
        "series": [{"name": cohort,
                    "y": [table.cells[(cohort, "before")],
                          table.cells[(cohort, "after")]]}
                   for cohort in cohorts],
        "markers": [{"name": "event", "x": table.event_date.isoformat(),
                     "kind": "other"}],
    })


def write_plot_data(path, data: dict) -> None:
    _check_plot_data(data)
    with open(ensure_parent(path), "w", encoding="utf-8") as fh:
        json.dump(data, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


# -- CSV tables -----------------------------------------------------------------

def csv_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buffer.getvalue()


_csv_text = csv_table


def csv_temporal(points: Sequence[TimePoint]) -> str:
    return csv_table(["period", "mean_share", "n_speakers"],
                     [(p.period, p.mean_share, p.n_speakers) for p in points])


def csv_comparison(comparison: GroupComparison) -> str:
    rows = [("mean", g, comparison.sizes[g], comparison.means[g], "", "", "")
            for g in sorted(comparison.means)]
    for (g1, g2), r in sorted(comparison.tests.items()):
        rows.append(("test", f"{g1} vs {g2}", r.n_a + r.n_b, "",
                     r.t, r.df, r.p_value))
    return csv_table(["row", "group", "n", "mean", "t", "df", "p_value"], rows)


def csv_profile(profiles: Mapping[str, CharacteristicsProfile]) -> str:
    header = ["platform", "n_sentences", "n_positive", "pdd_share",
              "intensity_mean"] + list(FLAG_FIELDS)
    rows = []
    for name in sorted(profiles):
        p = profiles[name]
        rows.append([name, p.n_sentences, p.n_positive, p.pdd_share,
                     p.intensity_mean] + [p.flag_rates[f] for f in FLAG_FIELDS])
    return csv_table(header, rows)


def csv_logodds(entries_by_group: Mapping[str, Sequence[LogOddsEntry]]) -> str:
    rows = []
    for group in sorted(entries_by_group):
        for rank, e in enumerate(entries_by_group[group], start=1):
            rows.append((group, rank, e.term, e.count_in, e.count_rest,
                         e.prior, e.delta, e.variance, e.z))
    return csv_table(["group", "rank", "term", "count_in", "count_rest",
                      "prior", "delta", "variance", "z"], rows)


def csv_before_after(table: BeforeAfterTable) -> str:
    rows = []
    for (cohort, window), value in sorted(table.cells.items()):
        rows.append((cohort, window, table.sizes[(cohort, window)], value))
    return csv_table(["cohort", "window", "n_speakers", "mean_share"], rows)


def csv_density(curves: Mapping[str, DensityCurve]) -> str:
    rows = []
    for name in sorted(curves):
        curve = curves[name]
        for x, y in zip(curve.xs, curve.ys):
            rows.append((name, x, y))
    return csv_table(["curve", "x", "density"], rows)


def write_csv(path, text: str) -> None:
    with open(ensure_parent(path), "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# -- SVG rendering ----------------------------------------------------------------

def render_svg(data: dict, path) -> Optional[str]:
    """Render plot data to a static SVG.  Returns the path written, or None
    when matplotlib is not importable."""
    _check_plot_data(data)
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return None
    fig, ax = plt.subplots(figsize=(8, 4.5))
    try:
        if data["kind"] == "lines":
            _render_lines(ax, data)
        elif data["kind"] == "bars":
            _render_bars(ax, data)
        else:
            _render_grouped_bars(ax, data)
        ax.set_xlabel(data.get("x_label", ""))
        ax.set_ylabel(data.get("y_label", ""))
        if any(s.get("name") for s in data["series"]):
            ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        fig.savefig(ensure_parent(path), format="svg")
    finally:
        plt.close(fig)
    return str(path)


def _render_lines(ax, data: dict) -> None:
    shared_x = data.get("x")
    for series in data["series"]:
        ys = series["y"]
        if shared_x is not None:
            xs = range(len(shared_x))
            pairs = [(x, y) for x, y in zip(xs, ys) if y is not None]
            if pairs:
                ax.plot([p[0] for p in pairs], [p[1] for p in pairs],
                        marker="o", markersize=3, label=series.get("name", ""))
        else:
            ax.plot(series["x"], ys, label=series.get("name", ""))
    if shared_x is not None:
        step = max(1, len(shared_x) // 12)
        ticks = list(range(0, len(shared_x), step))
        ax.set_xticks(ticks)
        ax.set_xticklabels([shared_x[i] for i in ticks], rotation=45,
                           ha="right", fontsize=7)
        marker_index = {label: i for i, label in enumerate(shared_x)}
        for marker in data.get("markers", ()):
            # Markers carry ISO dates; map one onto the axis only when its
            # label is literally a period on it.
            if marker["x"] in marker_index:
                ax.axvline(marker_index[marker["x"]], linestyle="--",
                           color="gray", linewidth=0.8)


def _render_bars(ax, data: dict) -> None:
    offset = 0
    ticks, labels = [], []
    for series in data["series"]:
        categories = series["categories"]
        xs = [offset + i for i in range(len(categories))]
        ax.bar(xs, series["y"], label=series.get("name", ""))
        ticks.extend(xs)
        labels.extend(categories)
        offset += len(categories) + 1
    ax.set_xticks(ticks)
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)


def _render_grouped_bars(ax, data: dict) -> None:
    categories = data["categories"]
    n_series = len(data["series"])
    width = 0.8 / n_series
    for k, series in enumerate(data["series"]):
        xs = [i + k * width for i in range(len(categories))]
        ys = [0.0 if y is None else y for y in series["y"]]
        ax.bar(xs, ys, width=width, label=series.get("name", ""))
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(categories))])
    ax.set_xticklabels(categories, rotation=30, ha="right", fontsize=8)
