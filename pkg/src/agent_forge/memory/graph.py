"""Neighbourhood relation between unique screens."""

from collections import Counter


def directed_edges(mapping, trajectories):
    """Count node-level transitions ``(src, dst)``, dropping self-loops."""
    counts = Counter()
    for traj in trajectories:
        for rec in traj.transitions:
            a = mapping[rec.before.key]
            b = mapping[rec.after.key]
            if a != b:
                counts[(a, b)] += 1
    return counts


def build_neighborhood(nodes, mapping, trajectories):
    """Symmetric neighbour sets: screens reachable from or leading to each node.

    Also writes the result onto ``node.neighbors``.
    """
    neighbors = {n.node_id: set() for n in nodes}
    for a, b in directed_edges(mapping, trajectories):
        neighbors[a].add(b)
        neighbors[b].add(a)
    for n in nodes:
        n.neighbors = neighbors[n.node_id]
    return neighbors
