#!/usr/bin/env python3
"""Generate the synthetic airport-like edge list shipped in data/.

Hubs are grown by preferential attachment; each route carries a seat
weight in both directions, drawn from a lognormal scaled by the endpoint
sizes, with a few percent of directional imbalance. Output is the
"src dst weight" edge-list format read by sdepi.
"""

import argparse
import itertools
import string

import numpy as np


def airport_codes(n):
    letters = string.ascii_uppercase
    codes = ("".join(p) for p in itertools.product(letters, repeat=3))
    return list(itertools.islice(codes, n))


def build(n_nodes, links_per_node, seed):
    rng = np.random.default_rng(seed)
    size = rng.pareto(1.5, n_nodes) + 1.0
    degree = np.zeros(n_nodes)
    routes = set()
    # Seed clique keeps the first hubs mutually reachable.
    for u in range(links_per_node + 1):
        for v in range(u + 1, links_per_node + 1):
            routes.add((u, v))
            degree[[u, v]] += 1
    for u in range(links_per_node + 1, n_nodes):
        p = (degree[:u] + 1.0) * size[:u]
        targets = rng.choice(u, size=links_per_node, replace=False, p=p / p.sum())
        for v in targets:
            routes.add((int(v), u))
            degree[[u, v]] += 1
    edges = []
    for u, v in sorted(routes):
        base = rng.lognormal(mean=0.0, sigma=0.8) * np.sqrt(size[u] * size[v]) * 1000.0
        skew = rng.uniform(0.95, 1.05)
        edges.append((u, v, round(base * skew)))
        edges.append((v, u, round(base / skew)))
    return edges


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=500)
    ap.add_argument("--links", type=int, default=4)
    ap.add_argument("--seed", type=int, default=20201)
    ap.add_argument("--out", default="data/airports_synthetic.edges")
    args = ap.parse_args()

    codes = airport_codes(args.nodes)
    edges = build(args.nodes, args.links, args.seed)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(f"# synthetic airport-like network: {args.nodes} nodes, seed {args.seed}\n")
        f.write("# src dst seats\n")
        for u, v, w in edges:
            f.write(f"{codes[u]} {codes[v]} {max(w, 1)}\n")


if __name__ == "__main__":
    main()
