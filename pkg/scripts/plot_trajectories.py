#!/usr/bin/env python3
"""Plot agent and target trajectories from an exported trace file.

Steps where the targets were bridged are drawn as solid target segments,
unbridged stretches as faint ones.
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from bridgenet.harness import load_trace


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("trace", help="trace CSV exported by `bridgenet run`")
    parser.add_argument("--out", default="trajectories.png")
    args = parser.parse_args()

    parsed = load_trace(args.trace)
    by_node = {}
    for step in parsed.steps:
        for node in step.nodes:
            by_node.setdefault((node.node_id, node.node_type), []).append(
                (node.x, node.y, step.path_exists)
            )

    fig, ax = plt.subplots(figsize=(6, 6))
    for (node_id, node_type), points in sorted(by_node.items()):
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        if node_type == "A":
            ax.plot(xs, ys, lw=1.2, label=f"A{node_id + 1}")
            ax.plot(xs[0], ys[0], marker="o", ms=5, color=ax.lines[-1].get_color())
        else:
            for i in range(1, len(points)):
                bridged = points[i][2]
                ax.plot(xs[i - 1:i + 1], ys[i - 1:i + 1],
                        lw=2.0, alpha=1.0 if bridged else 0.25,
                        color="green" if node_id == min(k for k, t in by_node if t == "T") else "red")
            ax.plot(xs[0], ys[0], marker="s", ms=6,
                    color="green" if node_id == min(k for k, t in by_node if t == "T") else "red")

    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.set_title("agent and target trajectories")
    ax.legend(loc="upper right", fontsize=8)
    fig.savefig(args.out, dpi=150, bbox_inches="tight")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
