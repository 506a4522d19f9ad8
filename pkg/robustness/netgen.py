"""
ER and Barabási-Albert layer generators and multiplex assembly.
"""
from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import networkx as nx
import numpy as np

from .core import STREAM_NETWORK, MultiplexNetwork, RngContract
from .exceptions import GeneratorSpecError


logger = logging.getLogger(__name__)


class Topology(str, Enum):
    ER = "er"
    BA = "ba"


@dataclass(frozen=True)
class GeneratorSpec:
    """
    What to build for one multiplex realization: a topology and a target
    mean degree per layer over n_nodes shared nodes.
    """

    topology: tuple[Topology, ...]
    n_nodes: int
    target_z: tuple[float, ...]

    def __post_init__(self):
        topology = tuple(Topology(t) for t in self.topology)
        target_z = tuple(float(v) for v in self.target_z)
        object.__setattr__(self, "topology", topology)
        object.__setattr__(self, "target_z", target_z)

        if len(topology) != len(target_z) or not topology:
            raise GeneratorSpecError("need one topology and one target z per layer")
        if self.n_nodes < 2:
            raise GeneratorSpecError(f"n_nodes must be >= 2, got {self.n_nodes}")
        for layer, (topo, z) in enumerate(zip(topology, target_z)):
            if z < 0:
                raise GeneratorSpecError(f"layer {layer}: target z must be >= 0, got {z}")
            if topo is Topology.ER and z > self.n_nodes - 1:
                raise GeneratorSpecError(f"layer {layer}: z={z} exceeds n-1={self.n_nodes - 1}")
            if topo is Topology.BA:
                ba_attachment(z)

    @property
    def m(self) -> int:
        return len(self.topology)

    def generate(
        self, contract: RngContract, run_index: int = 0, purpose: int = STREAM_NETWORK
    ) -> MultiplexNetwork:
        """One realization; each layer draws from its own derived stream."""
        layers = []
        for layer, (topo, z) in enumerate(zip(self.topology, self.target_z)):
            rng = contract.stream(run_index, purpose, layer)
            if topo is Topology.ER:
                layers.append(generate_er_layer(self.n_nodes, z, rng))
            else:
                layers.append(generate_ba_layer(self.n_nodes, ba_attachment(z), rng))
        return assemble_multiplex(layers, self.n_nodes)

    def describe(self) -> dict:
        return {
            "topology": [t.value for t in self.topology],
            "n_nodes": self.n_nodes,
            "target_z": list(self.target_z),
            "ba_seed_graph": "clique on m_attach+1 nodes" if Topology.BA in self.topology else None,
        }


def ba_attachment(z: float) -> int:
    """Edges per new BA node for mean degree z; z/2 has to be a whole number >= 1."""
    half = z / 2.0
    m_attach = int(round(half))
    if abs(half - m_attach) > 1e-9 or m_attach < 1:
        raise GeneratorSpecError(f"BA layers need z/2 to be an integer >= 1, got z={z}")
    return m_attach


def generate_er_layer(n: int, z: float, rng: np.random.Generator) -> np.ndarray:
    """
    G(n, M) with M = round(n*z/2) distinct edges drawn uniformly.

    Sparse layers are drawn by rejection on random node pairs; layers filling
    more than half of all possible pairs go through networkx's dense sampler.
    """
    if n < 2:
        raise GeneratorSpecError(f"n must be >= 2, got {n}")
    if z < 0 or z > n - 1:
        raise GeneratorSpecError(f"mean degree must lie in [0, n-1], got {z}")

    n_edges = int(np.floor(n * z / 2.0 + 0.5))
    max_edges = n * (n - 1) // 2
    n_edges = min(n_edges, max_edges)
    if n_edges == 0:
        return np.empty((0, 2), dtype=np.int64)

    if 2 * n_edges > max_edges:
        seed = int(rng.integers(2**32))
        graph = nx.dense_gnm_random_graph(n, n_edges, seed=seed)
        return np.array(sorted(tuple(sorted(e)) for e in graph.edges()), dtype=np.int64)

    keys = np.empty(0, dtype=np.int64)
    while len(keys) < n_edges:
        missing = n_edges - len(keys)
        batch = rng.integers(0, n, size=(int(missing * 1.1) + 16, 2))
        lo = batch.min(axis=1)
        hi = batch.max(axis=1)
        fresh = (lo * n + hi)[lo != hi]
        merged = np.concatenate([keys, fresh])
        # keep first occurrences in draw order so the result depends only on the stream
        _, first = np.unique(merged, return_index=True)
        keys = merged[np.sort(first)][:n_edges]

    return np.column_stack([keys // n, keys % n])


def generate_ba_layer(n: int, m_attach: int, rng: np.random.Generator) -> np.ndarray:
    """
    Preferential attachment grown from a clique on m_attach+1 nodes; every
    new node links to m_attach distinct existing nodes chosen by degree.
    """
    if m_attach < 1 or n <= m_attach:
        raise GeneratorSpecError(f"BA needs n > m_attach >= 1, got n={n}, m_attach={m_attach}")

    seed = int(rng.integers(2**32))
    clique = nx.complete_graph(m_attach + 1)
    if n == m_attach + 1:
        graph = clique
    else:
        graph = nx.barabasi_albert_graph(n, m_attach, seed=seed, initial_graph=clique)
    edges = np.array(list(graph.edges()), dtype=np.int64).reshape(-1, 2)
    return np.sort(edges, axis=1)


def assemble_multiplex(layers: Sequence[np.ndarray], n: int) -> MultiplexNetwork:
    """Stack independent layers over one node set; validation lives in MultiplexNetwork."""
    net = MultiplexNetwork(n, tuple(layers))
    logger.debug("assembled %r", net)
    return net
