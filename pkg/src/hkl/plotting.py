"""Matplotlib renderings for the CLI's ``--figures`` option.

matplotlib is imported lazily with the Agg backend so that the rest of the
package never needs a display or the plotting dependency.
"""

from __future__ import annotations

import os
from collections import defaultdict, deque


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _levels(n, initial, edges):
    depth = {initial: 0}
    queue = deque([initial])
    succ = defaultdict(list)
    for s, t in edges:
        succ[s].append(t)
    while queue:
        i = queue.popleft()
        for j in succ[i]:
            if j not in depth:
                depth[j] = depth[i] + 1
                queue.append(j)
    for i in range(n):
        depth.setdefault(i, 0)
    return depth


def _layered(depth: dict) -> dict:
    """x = layer, y = position within the layer, centred."""
    layers = defaultdict(list)
    for node, d in sorted(depth.items(), key=lambda kv: (kv[1], str(kv[0]))):
        layers[d].append(node)
    pos = {}
    for d, nodes in layers.items():
        for k, node in enumerate(nodes):
            pos[node] = (d, k - (len(nodes) - 1) / 2)
    return pos


def plot_reachability(graph, path):
    """Reachability graph laid out by breadth-first depth; deadlocks in red."""
    plt = _plt()
    pairs = [(s, t) for s, _, t in graph.edges]
    pos = _layered(_levels(len(graph.markings), graph.initial, pairs))
    terminal = set(graph.terminal())
    fig, ax = plt.subplots(figsize=(10, 6))
    for s, t in pairs:
        (x0, y0), (x1, y1) = pos[s], pos[t]
        ax.plot([x0, x1], [y0, y1], color="0.75", lw=0.6, zorder=1)
    xs, ys = zip(*(pos[i] for i in range(len(graph.markings))))
    colors = ["tab:red" if i in terminal else
              "tab:green" if i == graph.initial else "tab:blue"
              for i in range(len(graph.markings))]
    ax.scatter(xs, ys, c=colors, s=18, zorder=2)
    ax.set_xlabel("firing depth")
    ax.set_yticks([])
    ax.set_title(f"{len(graph.markings)} reachable markings, {len(graph.edges)} edges")
    return _save(fig, plt, path)


def plot_run(run, path):
    """Occurrence net drawn left to right along the causal order."""
    plt = _plt()
    order = run.topological()
    depth = {}
    for n in order:
        depth[n] = max((depth[p] + 1 for p in run.preset(n)), default=0)
    layers = defaultdict(list)
    for n in order:
        layers[depth[n]].append(n)
    pos = {}
    for d in sorted(layers):
        # barycentre ordering keeps causal chains on straight lanes
        nodes = sorted(layers[d], key=lambda n: (
            sum(pos[p][1] for p in run.preset(n)) / max(1, len(run.preset(n))), n))
        for k, n in enumerate(nodes):
            pos[n] = (d, k - (len(nodes) - 1) / 2)
    fig, ax = plt.subplots(figsize=(max(6, len(layers) * 1.2), 5))
    for s, t in run.flow:
        (x0, y0), (x1, y1) = pos[s], pos[t]
        ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                    arrowprops=dict(arrowstyle="->", color="0.5", lw=0.7))
    for n, (x, y) in pos.items():
        is_event = n in run.events
        ax.scatter([x], [y], marker="s" if is_event else "o",
                   s=260 if is_event else 200,
                   facecolor="white", edgecolor="black", zorder=2)
        ax.annotate(run.describe(n), (x, y), textcoords="offset points", xytext=(0, 10),
                    ha="center", fontsize=7)
    ax.set_axis_off()
    ax.set_title(f"run: {len(run.events)} events, {len(run.conditions)} conditions")
    return _save(fig, plt, path)


def plot_incidence(net, path):
    """Heat map of the expanded incidence matrix."""
    plt = _plt()
    rows, cols = net.shape
    fig, ax = plt.subplots(figsize=(max(4, cols * 0.6 + 2), max(3, rows * 0.35 + 1)))
    if rows and cols:
        ax.imshow(net.incidence, cmap="RdBu", vmin=-1, vmax=1, aspect="auto")
    ax.set_yticks(range(rows))
    ax.set_yticklabels([f"{p}.{t}" for p, t in net.low_places], fontsize=7)
    ax.set_xticks(range(cols))
    ax.set_xticklabels([str(m) for _, m in net.low_transitions], rotation=60,
                       ha="right", fontsize=7)
    ax.set_title("incidence matrix")
    return _save(fig, plt, path)


def _save(fig, plt, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
