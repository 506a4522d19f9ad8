"""
Monte Carlo ground truth: giant component of the active-edge union graph
after a removal mask, and seeded ensembles over (network, attack) draws.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .attack import AttackRule, AttackSpec, realize
from .core import STREAM_ATTACK, MultiplexNetwork, RemovalMask, RngContract, joint_degree_histogram
from .exceptions import NetworkValidationError
from .netgen import GeneratorSpec


logger = logging.getLogger(__name__)


class UnionFind:
    """Disjoint sets over 0..n-1 with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def component_sizes(self) -> list[int]:
        return [self.size[i] for i in range(len(self.parent)) if self.parent[i] == i]

    def largest(self) -> int:
        return max(self.component_sizes(), default=0)


def active_edges(net: MultiplexNetwork, mask: RemovalMask) -> list[np.ndarray]:
    """Per layer, the edges whose two endpoints both survive in that layer."""
    if not mask.matches(net):
        raise NetworkValidationError("removal mask does not match the network")
    out = []
    for layer, edges in enumerate(net.layers):
        alive = ~mask.removed[layer]
        keep = alive[edges[:, 0]] & alive[edges[:, 1]]
        out.append(edges[keep])
    return out


def component_sizes(net: MultiplexNetwork, mask: RemovalMask) -> list[int]:
    """Component sizes of the union graph over all active edges (singletons included)."""
    uf = UnionFind(net.n_nodes)
    for edges in active_edges(net, mask):
        for u, w in edges.tolist():
            uf.union(u, w)
    return uf.component_sizes()


def giant_component_fraction(net: MultiplexNetwork, mask: RemovalMask) -> float:
    """
    Largest union-graph component over N. Nodes whose replicas are all gone
    stay in the denominator as isolated singletons, so a fully removed
    network reports 1/N.
    """
    return max(component_sizes(net, mask)) / net.n_nodes


# ---------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class SimResult:
    r_mean: float
    r_std: float
    runs: int
    per_run: tuple[float, ...] | None = None


def resolve_rule(rule: AttackRule | AttackSpec, net: MultiplexNetwork) -> AttackRule:
    # specs derive targeted cutoffs from the instance's own degree law
    if isinstance(rule, AttackSpec):
        return rule.rule_for(joint_degree_histogram(net))
    return rule


def simulate_run(
    run_index: int,
    gen: GeneratorSpec,
    rule: AttackRule | AttackSpec,
    contract: RngContract,
    fixed_net: MultiplexNetwork | None = None,
) -> float:
    """R for one ensemble member; everything random comes from run_index's streams."""
    net = fixed_net if fixed_net is not None else gen.generate(contract, run_index)
    mask = realize(resolve_rule(rule, net), net, contract.stream(run_index, STREAM_ATTACK))
    return giant_component_fraction(net, mask)


def run_ensemble(
    gen: GeneratorSpec,
    rule: AttackRule | AttackSpec,
    runs: int,
    rng: RngContract,
    regenerate: bool = True,
    *,
    keep_per_run: bool = True,
    workers: int = 1,
) -> SimResult:
    """
    Mean and standard deviation (ddof=0) of R over ``runs`` members.

    With regenerate=False every run attacks the run-0 network. Per-run values
    are collected in run order, so the result is the same for any worker count.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")

    fixed_net = None if regenerate else gen.generate(rng, 0)
    task = partial(simulate_run, gen=gen, rule=rule, contract=rng, fixed_net=fixed_net)

    if workers > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(task, range(runs)))
    else:
        values = [task(r) for r in range(runs)]

    arr = np.asarray(values, dtype=float)
    result = SimResult(
        r_mean=float(arr.mean()),
        r_std=float(arr.std()),
        runs=runs,
        per_run=tuple(values) if keep_per_run else None,
    )
    logger.debug("ensemble %s runs=%d -> R=%.4f±%.4f", rule, runs, result.r_mean, result.r_std)
    return result
