"""
Degree-dependent removal rules and their realization as removal masks.

Per-layer rules give each layer i its own phi_i(k_i); joint rules give one
phi(k_1, ..., k_m) per multiplex node and remove all of its replicas at once.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .core import JointDegreeHistogram, MultiplexNetwork, RemovalMask
from .exceptions import AttackRuleError


CUTOFF_TOLERANCE = 1e-12


class AttackMode(str, Enum):
    PER_LAYER = "per-layer"
    JOINT = "joint"


class AttackKind(str, Enum):
    LAYER_RANDOM = "layer-random"
    LAYER_TARGETED = "layer-targeted"
    MULTIPLEX_RANDOM = "multiplex-random"
    MULTIPLEX_TARGETED = "multiplex-targeted"

    @property
    def scope(self) -> str:
        return self.value.split("-")[0]

    @property
    def strategy(self) -> str:
        return self.value.split("-")[1]

    @property
    def is_layer(self) -> bool:
        return self.scope == "layer"

    @classmethod
    def for_scope(cls, scope: str, strategy: str) -> AttackKind:
        return cls(f"{scope}-{strategy}")


class Cutoff(NamedTuple):
    k_c: int
    f: float


def _check_probability(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise AttackRuleError(f"{name} must lie in [0, 1], got {value}")
    return value


def _step(k: np.ndarray, cutoff: Cutoff) -> np.ndarray:
    # 1 above the cutoff, f at it, 0 below
    return np.where(k > cutoff.k_c, 1.0, np.where(k == cutoff.k_c, cutoff.f, 0.0))


# ---------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------

class AttackRule(ABC):
    mode: AttackMode

    @abstractmethod
    def probabilities(self, degrees: np.ndarray) -> np.ndarray:
        """
        Removal probabilities for rows of an (E, m) degree array: (E, m) for
        per-layer rules, (E,) for joint rules.
        """

    @abstractmethod
    def fits(self, m: int) -> bool:
        pass


class PerLayerRule(AttackRule):
    mode = AttackMode.PER_LAYER

    @property
    @abstractmethod
    def n_layers(self) -> int:
        pass

    @abstractmethod
    def layer_phi(self, layer: int, k: np.ndarray) -> np.ndarray:
        pass

    def fits(self, m: int) -> bool:
        return m == self.n_layers

    def probabilities(self, degrees: np.ndarray) -> np.ndarray:
        degrees = np.asarray(degrees)
        if degrees.shape[1] != self.n_layers:
            raise AttackRuleError(f"rule has {self.n_layers} layers, degrees have {degrees.shape[1]}")
        probs = np.column_stack([
            np.broadcast_to(np.asarray(self.layer_phi(i, degrees[:, i]), dtype=float), degrees.shape[:1])
            for i in range(self.n_layers)
        ])
        if np.any((probs < 0) | (probs > 1)):
            raise AttackRuleError("removal probability outside [0, 1]")
        return probs


class JointRule(AttackRule):
    mode = AttackMode.JOINT

    @abstractmethod
    def joint_phi(self, degrees: np.ndarray) -> np.ndarray:
        pass

    def fits(self, m: int) -> bool:
        return m >= 1

    def probabilities(self, degrees: np.ndarray) -> np.ndarray:
        degrees = np.asarray(degrees)
        probs = np.broadcast_to(np.asarray(self.joint_phi(degrees), dtype=float), degrees.shape[:1])
        if np.any((probs < 0) | (probs > 1)):
            raise AttackRuleError("removal probability outside [0, 1]")
        return probs


@dataclass(frozen=True, init=False)
class LayerRandom(PerLayerRule):
    """Every replica of layer i removed with the constant probability phi[i]."""

    phi: tuple[float, ...]

    def __init__(self, *phi: float):
        if not phi:
            raise AttackRuleError("need one probability per layer")
        object.__setattr__(self, "phi", tuple(_check_probability(p, f"phi{i + 1}") for i, p in enumerate(phi)))

    @property
    def n_layers(self) -> int:
        return len(self.phi)

    def layer_phi(self, layer: int, k: np.ndarray) -> np.ndarray:
        return np.full(np.shape(k), self.phi[layer])


@dataclass(frozen=True, init=False)
class LayerTargeted(PerLayerRule):
    """Degree-cutoff removal per layer: (k_c, f) for each layer."""

    cutoffs: tuple[Cutoff, ...]

    def __init__(self, *cutoffs: tuple[int, float]):
        if not cutoffs:
            raise AttackRuleError("need one cutoff per layer")
        checked = []
        for i, (k_c, f) in enumerate(cutoffs):
            if int(k_c) < 0:
                raise AttackRuleError(f"layer {i}: cutoff degree must be >= 0, got {k_c}")
            checked.append(Cutoff(int(k_c), _check_probability(f, f"f{i + 1}")))
        object.__setattr__(self, "cutoffs", tuple(checked))

    @classmethod
    def from_targets(cls, hist: JointDegreeHistogram, targets: tuple[float, ...]) -> LayerTargeted:
        """Cutoffs that remove the target fraction of each layer of ``hist`` in expectation."""
        if len(targets) != hist.m:
            raise AttackRuleError(f"{len(targets)} targets for {hist.m} layers")
        return cls(*(targeted_cutoff(hist.marginal(i), t) for i, t in enumerate(targets)))

    @property
    def n_layers(self) -> int:
        return len(self.cutoffs)

    def layer_phi(self, layer: int, k: np.ndarray) -> np.ndarray:
        return _step(np.asarray(k), self.cutoffs[layer])


class FunctionalLayerRule(PerLayerRule):
    """Per-layer rule from arbitrary vectorized callables phi_i(k)."""

    def __init__(self, *functions: Callable[[np.ndarray], np.ndarray]):
        if not functions:
            raise AttackRuleError("need one function per layer")
        self.functions = tuple(functions)

    @property
    def n_layers(self) -> int:
        return len(self.functions)

    def layer_phi(self, layer: int, k: np.ndarray) -> np.ndarray:
        return self.functions[layer](k)


@dataclass(frozen=True)
class MultiplexRandom(JointRule):
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "phi", _check_probability(self.phi, "phi"))

    def joint_phi(self, degrees: np.ndarray) -> np.ndarray:
        return np.full(len(degrees), self.phi)


@dataclass(frozen=True)
class MultiplexTargeted(JointRule):
    """Cutoff on the total degree k_1 + ... + k_m of a multiplex node."""

    k_c: int
    f: float

    def __post_init__(self):
        if int(self.k_c) < 0:
            raise AttackRuleError(f"cutoff degree must be >= 0, got {self.k_c}")
        object.__setattr__(self, "k_c", int(self.k_c))
        object.__setattr__(self, "f", _check_probability(self.f, "f"))

    def joint_phi(self, degrees: np.ndarray) -> np.ndarray:
        return _step(np.asarray(degrees).sum(axis=1), Cutoff(self.k_c, self.f))


# ---------------------------------------------------------------------
# Cutoffs
# ---------------------------------------------------------------------

def targeted_cutoff(degree_hist: Mapping[int, float], phi_target: float) -> Cutoff:
    """
    Step-function parameters removing ``phi_target`` of the mass in expectation.

    k_c is the largest degree with P(k >= k_c) >= phi_target, so
    P(k > k_c) < phi_target and f = (phi_target - P(k > k_c)) / p(k_c)
    fills the rest at the cutoff. phi_target = 0 gives (max degree, 0).
    """
    phi_target = _check_probability(phi_target, "phi_target")
    if not degree_hist:
        raise AttackRuleError("empty degree distribution")

    ks = np.array(sorted(degree_hist), dtype=np.int64)
    ps = np.array([float(degree_hist[k]) for k in ks])
    if phi_target == 0.0:
        return Cutoff(int(ks[-1]), 0.0)

    # suffix sums from the top keep the small tails exact
    tail_ge = np.cumsum(ps[::-1])[::-1]
    tail_gt = np.append(tail_ge[1:], 0.0)
    candidates = np.flatnonzero(tail_ge >= phi_target - CUTOFF_TOLERANCE)
    j = int(candidates[-1]) if candidates.size else 0

    if ps[j] <= 0:
        return Cutoff(int(ks[j]), 0.0)
    f = (phi_target - tail_gt[j]) / ps[j]
    return Cutoff(int(ks[j]), float(min(max(f, 0.0), 1.0)))


def multiplex_targeted_cutoff(joint_hist: JointDegreeHistogram, phi_target: float) -> Cutoff:
    """targeted_cutoff on the law of the total degree s = k_1 + k_2."""
    return targeted_cutoff(joint_hist.total_degree_distribution(), phi_target)


def removed_fraction(degree_hist: Mapping[int, float], cutoff: Cutoff) -> float:
    """Expected removed share under a step rule: sum_k p(k) phi(k)."""
    ks = np.array(list(degree_hist), dtype=np.int64)
    ps = np.array([degree_hist[k] for k in degree_hist], dtype=float)
    return float(ps @ _step(ks, cutoff))


# ---------------------------------------------------------------------
# Attack specs (kind + target fractions)
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class AttackSpec:
    """
    An attack as experiments describe it: a kind plus target removal
    fractions. Layer kinds use (phi1, phi2); multiplex kinds use phi1 only.
    Targeted kinds are turned into cutoffs against a concrete histogram.
    """

    kind: AttackKind
    phi1: float = 0.0
    phi2: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))
        object.__setattr__(self, "phi1", _check_probability(self.phi1, "phi1"))
        if self.phi2 is None:
            object.__setattr__(self, "phi2", self.phi1)
        object.__setattr__(self, "phi2", _check_probability(self.phi2, "phi2"))

    def rule_for(self, hist: JointDegreeHistogram) -> AttackRule:
        kind = self.kind
        if kind.is_layer and hist.m != 2:
            raise AttackRuleError(f"{kind.value} is defined for two layers, histogram has {hist.m}")

        if kind is AttackKind.LAYER_RANDOM:
            return LayerRandom(self.phi1, self.phi2)
        if kind is AttackKind.LAYER_TARGETED:
            return LayerTargeted.from_targets(hist, (self.phi1, self.phi2))
        if kind is AttackKind.MULTIPLEX_RANDOM:
            return MultiplexRandom(self.phi1)
        return MultiplexTargeted(*multiplex_targeted_cutoff(hist, self.phi1))

    def describe(self) -> dict:
        if self.kind.is_layer:
            return {"attack": self.kind.value, "phi1": self.phi1, "phi2": self.phi2}
        return {"attack": self.kind.value, "phi": self.phi1}


# ---------------------------------------------------------------------
# Realization
# ---------------------------------------------------------------------

def realize(rule: AttackRule, net: MultiplexNetwork, rng: np.random.Generator) -> RemovalMask:
    """
    Draw a removal mask from the network's original degrees.

    Per-layer: replica (i, j) goes independently with probability
    phi_i(deg_i(j)). Joint: one draw per multiplex node; a hit removes all
    of its replicas. Draws are uniform thresholds, so for a fixed stream a
    pointwise larger phi always yields a superset mask.
    """
    if not rule.fits(net.m):
        raise AttackRuleError(f"rule does not fit a network with {net.m} layers")

    degrees = net.degrees().T
    if rule.mode is AttackMode.PER_LAYER:
        probs = rule.probabilities(degrees).T
        removed = rng.random(probs.shape) < probs
    else:
        probs = rule.probabilities(degrees)
        hit = rng.random(net.n_nodes) < probs
        removed = np.broadcast_to(hit, (net.m, net.n_nodes))
    return RemovalMask(removed)
