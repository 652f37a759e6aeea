"""Figures: exact SVG polylines for simplicial maps, matplotlib renderings for
everything else, with the plotted data written next to them as CSV."""
import csv
import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import circle as cm  # noqa: E402
from . import crooked as ck  # noqa: E402
from . import interval as iv  # noqa: E402


def canonical_svg(n):
    """c_n as an SVG polyline through (i, c_n(i)) in grid coordinates."""
    return iv.simplicial_to_svg(ck.canonical_crooked(n), title=f"c_{n}")


def simplicial_csv(s):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "value"])
    w.writerows(enumerate(s.tolist()))
    return buf.getvalue()


def plot_simplicial(s, path, title=None):
    fig, ax = plt.subplots(figsize=(max(4, s.m / 4), max(2.5, s.codomain_size / 1.5)))
    ax.plot(range(s.m + 1), s.tolist(), marker="o", ms=3, lw=1, color="black")
    ax.set_xticks(range(0, s.m + 1, max(1, s.m // 15)))
    ax.set_yticks(range(s.codomain_size + 1))
    ax.grid(True, lw=0.3)
    ax.set_xlabel("i")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_pl(maps, path, title=None):
    """Overlay of PL maps given as {label: PLMap}."""
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    for label, f in maps.items():
        ax.plot([float(x) for x in f.xs], [float(y) for y in f.ys], lw=1, label=label)
    ax.set_xlim(0, 1)
    ax.set_aspect("equal")
    ax.legend(fontsize=7)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def pl_csv(maps):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["map", "x", "y"])
    for label, f in maps.items():
        for x, y in f.points:
            w.writerow([label, iv.fmt(x), iv.fmt(y)])
    return buf.getvalue()


def plot_circle_lift(c, path, title=None):
    fig, ax = plt.subplots(figsize=(4.5, 4))
    ax.plot([float(x) for x in c.lift.xs], [float(y) for y in c.lift.ys], lw=1, color="black")
    ax.set_xlabel("x (turns)")
    ax.set_ylabel("lift (turns)")
    ax.set_title(title or f"lift, degree {c.degree}")
    ax.grid(True, lw=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def rogers_figure(grid, path):
    """Component labels of the near-commuting set; returns the CSV summary."""
    mask, _ = cm._near_set(grid)
    lab, k = cm._torus_components(mask)
    fig, ax = plt.subplots(figsize=(5, 5))
    shown = np.ma.masked_where(lab == 0, lab)
    ax.imshow(shown.T, origin="lower", extent=(0, 1, 0, 1), cmap="tab10", interpolation="nearest")
    ax.set_xlabel("x  (f = z^2)")
    ax.set_ylabel("y  (g = tent)")
    ax.set_title(f"near-commuting set, grid {grid}: {k} components")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    report = cm._report(lab, k, grid)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["component", "size", "axis", "covers", "missed_start", "missed_length"])
    for i, comp in enumerate(report, 1):
        for axis in ("first", "second"):
            miss = comp[axis]["missed"]
            w.writerow([i, comp["size"], axis, comp[axis]["covers"],
                        iv.fmt(miss["start"]) if miss else "", iv.fmt(miss["length"]) if miss else ""])
    return buf.getvalue()
