"""
Multiplex network representation, joint degree statistics and the
randomness contract every other module draws its streams from.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy import stats

from .exceptions import ConfigError, HistogramError, NetworkValidationError, TruncationError


MASS_TOLERANCE = 1e-12
POISSON_TAIL_LIMIT = 1e-10


# ---------------------------------------------------------------------
# Randomness
# ---------------------------------------------------------------------

# Stream purposes; part of the seed derivation key, never renumber.
STREAM_NETWORK = 0
STREAM_ATTACK = 1
STREAM_THEORY = 2

MAX_SEED = 2**63


@dataclass(frozen=True)
class RngContract:
    """
    Deterministic randomness shared by all modules.

    A stream is keyed by (master_seed, run_index, purpose, index) and mixed
    with numpy's SeedSequence hash. The same key always yields the same bits,
    whichever worker asks for it and in whatever order.
    """

    master_seed: int

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < MAX_SEED:
            raise ConfigError(f"seed must be in [0, 2^63), got {self.master_seed}")

    def run_seed(self, run_index: int) -> int:
        """The per-run 64-bit seed, mix(master_seed, run_index)."""
        seq = np.random.SeedSequence(entropy=int(self.master_seed), spawn_key=(int(run_index),))
        return int(seq.generate_state(1, dtype=np.uint64)[0])

    def seed_sequence(self, run_index: int, purpose: int, index: int = 0) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            entropy=int(self.master_seed),
            spawn_key=(int(run_index), int(purpose), int(index)),
        )

    def stream(self, run_index: int, purpose: int, index: int = 0) -> np.random.Generator:
        return np.random.default_rng(self.seed_sequence(run_index, purpose, index))


# ---------------------------------------------------------------------
# Networks
# ---------------------------------------------------------------------

def _canonical_edges(edges, n_nodes: int, layer: int) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if arr.size == 0:
        out = np.empty((0, 2), dtype=np.int64)
        out.setflags(write=False)
        return out

    if arr.min() < 0 or arr.max() >= n_nodes:
        raise NetworkValidationError(f"layer {layer}: node index outside [0, {n_nodes})")

    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    if np.any(lo == hi):
        raise NetworkValidationError(f"layer {layer}: self-loop at node {int(lo[lo == hi][0])}")

    # sort + scan for duplicates
    keys = np.sort(lo * n_nodes + hi)
    dup = np.flatnonzero(np.diff(keys) == 0)
    if dup.size:
        k = int(keys[dup[0]])
        raise NetworkValidationError(f"layer {layer}: duplicate edge ({k // n_nodes}, {k % n_nodes})")

    out = np.column_stack([lo, hi])
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class MultiplexNetwork:
    """
    N multiplex nodes and m layers of undirected edges over the same node
    index space. Layer i's edges are stored as an (E_i, 2) array with u < w.
    """

    n_nodes: int
    layers: tuple[np.ndarray, ...]
    _degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.n_nodes) < 1:
            raise NetworkValidationError("a multiplex network needs at least one node")
        if len(self.layers) < 1:
            raise NetworkValidationError("a multiplex network needs at least one layer")

        n = int(self.n_nodes)
        layers = tuple(_canonical_edges(e, n, i) for i, e in enumerate(self.layers))
        degrees = np.vstack([
            np.bincount(e.ravel(), minlength=n) for e in layers
        ]).astype(np.int64)
        degrees.setflags(write=False)

        object.__setattr__(self, "n_nodes", n)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "_degrees", degrees)

    @property
    def m(self) -> int:
        return len(self.layers)

    def degrees(self) -> np.ndarray:
        """(m, N) array; row i holds every node's degree in layer i."""
        return self._degrees

    def mean_degrees(self) -> tuple[float, ...]:
        return tuple(2.0 * len(e) / self.n_nodes for e in self.layers)

    def __repr__(self) -> str:
        counts = ", ".join(str(len(e)) for e in self.layers)
        return f"MultiplexNetwork(n_nodes={self.n_nodes}, edges=[{counts}])"


@dataclass(frozen=True, eq=False)
class RemovalMask:
    """removed[i, j] is True when layer node j of layer i has been removed."""

    removed: np.ndarray

    def __post_init__(self):
        arr = np.array(self.removed, dtype=bool, copy=True)
        if arr.ndim != 2:
            raise NetworkValidationError("removal mask must be an (m, N) boolean array")
        arr.setflags(write=False)
        object.__setattr__(self, "removed", arr)

    @classmethod
    def empty(cls, net: MultiplexNetwork) -> RemovalMask:
        return cls(np.zeros((net.m, net.n_nodes), dtype=bool))

    def matches(self, net: MultiplexNetwork) -> bool:
        return self.removed.shape == (net.m, net.n_nodes)

    def removed_fraction(self) -> np.ndarray:
        """Per-layer fraction of removed replicas."""
        return self.removed.mean(axis=1)

    def issubset(self, other: RemovalMask) -> bool:
        return bool(np.all(~self.removed | other.removed))


# ---------------------------------------------------------------------
# Joint degree statistics
# ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class JointDegreeHistogram:
    """
    Probability mass over degree vectors (k_1, ..., k_m).

    Stored sparsely as parallel arrays: ``degrees`` (E, m) with unique rows in
    lexicographic order and ``masses`` (E,). ``z`` holds the per-layer means.
    """

    degrees: np.ndarray
    masses: np.ndarray
    z: tuple[float, ...] = field(default=())

    def __post_init__(self):
        degrees = np.array(self.degrees, dtype=np.int64, copy=True)
        masses = np.array(self.masses, dtype=float, copy=True)
        if degrees.ndim != 2 or degrees.shape[0] != masses.shape[0] or masses.ndim != 1:
            raise HistogramError("degrees must be (E, m) and masses (E,)")
        if degrees.shape[1] < 1:
            raise HistogramError("histogram needs at least one layer")
        if np.any(degrees < 0):
            raise HistogramError("degrees must be non-negative")
        if np.any(masses < 0):
            raise HistogramError("masses must be non-negative")
        total = float(masses.sum())
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise HistogramError(f"masses sum to {total!r}, not 1")

        z = tuple(float(v) for v in masses @ degrees)
        if self.z and (
            len(self.z) != len(z)
            or any(abs(a - b) > MASS_TOLERANCE for a, b in zip(self.z, z))
        ):
            raise HistogramError(f"stored z={self.z} disagrees with the masses ({z})")

        degrees.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "degrees", degrees)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "z", z)

    @classmethod
    def from_entries(cls, entries: Mapping[Sequence[int], float]) -> JointDegreeHistogram:
        if not entries:
            raise HistogramError("empty histogram")
        keys = [tuple(int(k) for k in key) for key in entries]
        degrees = np.array(keys, dtype=np.int64)
        masses = np.array([float(entries[key]) for key in entries], dtype=float)
        return _aggregate(degrees, masses)

    @property
    def m(self) -> int:
        return self.degrees.shape[1]

    @property
    def entries(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(k) for k in row): float(p) for row, p in zip(self.degrees, self.masses)}

    def marginal(self, layer: int) -> dict[int, float]:
        """Degree law p_i(k) of one layer."""
        return _distribution(self.degrees[:, layer], self.masses)

    def total_degree_distribution(self) -> dict[int, float]:
        """Law of s = k_1 + ... + k_m."""
        return _distribution(self.degrees.sum(axis=1), self.masses)

    def __repr__(self) -> str:
        zs = ", ".join(f"{v:.4g}" for v in self.z)
        return f"JointDegreeHistogram(entries={len(self.masses)}, z=({zs}))"


def _distribution(values: np.ndarray, masses: np.ndarray) -> dict[int, float]:
    weights = np.bincount(values, weights=masses)
    return {int(k): float(weights[k]) for k in np.flatnonzero(weights > 0)}


def _aggregate(degrees: np.ndarray, masses: np.ndarray) -> JointDegreeHistogram:
    unique, inverse = np.unique(degrees, axis=0, return_inverse=True)
    summed = np.bincount(inverse.reshape(-1), weights=masses, minlength=len(unique))
    return JointDegreeHistogram(unique, summed)


def joint_degree_histogram(net: MultiplexNetwork) -> JointDegreeHistogram:
    """Empirical p(k) of a network: share of nodes with degree vector exactly k."""
    unique, counts = np.unique(net.degrees().T, axis=0, return_counts=True)
    return JointDegreeHistogram(unique, counts / net.n_nodes)


def default_k_max(z: float) -> int:
    return max(30, math.ceil(z + 12.0 * math.sqrt(z)))


def product_poisson_histogram(
    z: Sequence[float],
    k_max: int | Sequence[int] | None = None,
) -> JointDegreeHistogram:
    """
    Independent Poisson(z_i) layers truncated at k_max and renormalized.

    Raises TruncationError when the discarded tail of any layer is not
    below 1e-10.
    """
    z = tuple(float(v) for v in z)
    if not z:
        raise HistogramError("need at least one layer mean")
    if any(v < 0 for v in z):
        raise HistogramError(f"mean degrees must be >= 0, got {z}")

    if k_max is None:
        k_maxes = [default_k_max(v) for v in z]
    elif isinstance(k_max, Iterable):
        k_maxes = [int(k) for k in k_max]
    else:
        k_maxes = [int(k_max)] * len(z)
    if len(k_maxes) != len(z):
        raise HistogramError("k_max must give one truncation per layer")

    pmfs = []
    for layer, (mean, km) in enumerate(zip(z, k_maxes)):
        if mean == 0.0:
            pmfs.append(np.array([1.0]))
            continue
        tail = float(stats.poisson.sf(km, mean))
        if tail >= POISSON_TAIL_LIMIT:
            raise TruncationError(layer, km, tail)
        pmfs.append(stats.poisson.pmf(np.arange(km + 1), mean))

    grid = np.stack(
        np.meshgrid(*[np.arange(len(p)) for p in pmfs], indexing="ij"), axis=-1
    ).reshape(-1, len(z))
    masses = reduce(np.multiply.outer, pmfs).reshape(-1)

    keep = masses > 0
    masses = masses[keep]
    return JointDegreeHistogram(grid[keep], masses / masses.sum())


def average_histograms(hists: Sequence[JointDegreeHistogram]) -> JointDegreeHistogram:
    """Equal-weight mixture, e.g. the empirical law over several generated instances."""
    if not hists:
        raise HistogramError("nothing to average")
    if len({h.m for h in hists}) != 1:
        raise HistogramError("histograms have different layer counts")
    degrees = np.vstack([h.degrees for h in hists])
    masses = np.concatenate([h.masses for h in hists]) / len(hists)
    return _aggregate(degrees, masses)


def moment(hist: JointDegreeHistogram, w: Callable[[np.ndarray], np.ndarray | float]) -> float:
    """
    Sum over k of p(k) * w(k).

    ``w`` is called once with the whole (E, m) degree array and returns one
    value per row (or a scalar), e.g. ``lambda k: k[:, 0] * k[:, 1]``.
    """
    values = np.broadcast_to(np.asarray(w(hist.degrees), dtype=float), hist.masses.shape)
    return float(hist.masses @ values)
