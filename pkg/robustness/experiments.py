"""
Config-driven sweeps behind the CLI: phase diagrams, phi2 slices and
threshold-versus-degree tables, plus the presets that reproduce each figure.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from pathlib import Path

import numpy as np
from tqdm import tqdm

from .attack import AttackKind, AttackSpec
from .core import (
    STREAM_THEORY,
    JointDegreeHistogram,
    MultiplexNetwork,
    RngContract,
    average_histograms,
    joint_degree_histogram,
    product_poisson_histogram,
)
from .exceptions import ConfigError, GeneratorSpecError
from .fileio import read_histogram_csv, write_histogram_csv, write_multiplex, write_rows_csv
from .netgen import GeneratorSpec, Topology, ba_attachment
from .percolation import run_ensemble
from .theory import CurvePoint, evaluate, symmetric_threshold, threshold_curve


logger = logging.getLogger(__name__)

PHASE_HEADER = ("phi1", "phi2", "r_sim_mean", "r_sim_std", "r_theory", "lambda")
CURVE_HEADER = ("phi1", "phi2_c", "flag")
SLICE_HEADER = ("phi1", "phi2", "r_sim_mean", "r_sim_std", "r_theory")
DEGREE_HEADER = ("z", "phi_c_multiplex", "phi_c_layer", "attack_kind", "topology")


class TheorySource(str, Enum):
    ANALYTIC = "analytic"
    EMPIRICAL = "empirical"


class Command(str, Enum):
    GENERATE = "generate"
    PHASE = "phase"
    SLICE = "slice"
    THRESHOLD = "threshold"


# ---------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    topology: tuple[Topology, ...] = (Topology.ER, Topology.ER)
    n_nodes: int = 5000
    z: tuple[float, ...] = (1.0, 1.0)
    seed: int = 0
    attack: AttackKind = AttackKind.LAYER_RANDOM
    phi1: float = 0.0
    phi2: float | None = None
    grid_min: float = 0.0
    grid_max: float = 1.0
    grid_step: float = 0.02
    phi1_values: tuple[float, ...] = (0.0, 0.2, 0.4, 0.6, 0.8)
    z_values: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    runs: int = 50
    theory: TheorySource = TheorySource.ANALYTIC
    out: str = "output"
    workers: int = 1
    regenerate: bool = True
    empirical_instances: int = 10
    histogram: str | None = None
    preset: str | None = None

    def __post_init__(self):
        topology = tuple(Topology(t) for t in self.topology)
        if len(topology) == 1:
            topology = topology * len(self.z)
        object.__setattr__(self, "topology", topology)
        object.__setattr__(self, "z", tuple(float(v) for v in self.z))
        object.__setattr__(self, "attack", AttackKind(self.attack))
        object.__setattr__(self, "theory", TheorySource(self.theory))
        object.__setattr__(self, "phi1_values", tuple(float(v) for v in self.phi1_values))
        object.__setattr__(self, "z_values", tuple(float(v) for v in self.z_values))
        object.__setattr__(self, "out", str(self.out))

        if len(self.topology) != len(self.z):
            raise ConfigError("need one topology per layer")
        if not 0.0 <= self.grid_min <= self.grid_max <= 1.0:
            raise ConfigError(f"grid bounds must satisfy 0 <= min <= max <= 1, got [{self.grid_min}, {self.grid_max}]")
        if self.grid_step <= 0:
            raise ConfigError(f"grid step must be > 0, got {self.grid_step}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.empirical_instances < 1:
            raise ConfigError("empirical_instances must be >= 1")
        for name in ("phi1", "phi2"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if any(not 0.0 <= v <= 1.0 for v in self.phi1_values):
            raise ConfigError("phi1_values must lie in [0, 1]")
        if any(v < 0 for v in self.z_values):
            raise ConfigError("z_values must be >= 0")
        RngContract(self.seed)

    def generator_spec(self, z: Sequence[float] | None = None) -> GeneratorSpec:
        return GeneratorSpec(self.topology, self.n_nodes, tuple(z) if z is not None else self.z)

    def contract(self) -> RngContract:
        return RngContract(self.seed)

    def grid(self) -> list[float]:
        """Grid from grid_min to grid_max inclusive; the step is snapped to fit the range."""
        span = self.grid_max - self.grid_min
        count = int(round(span / self.grid_step)) + 1 if span > 0 else 1
        return [float(v) for v in np.round(np.linspace(self.grid_min, self.grid_max, count), 12)]

    def snapshot(self) -> dict:
        data = asdict(self)
        data["topology"] = [t.value for t in self.topology]
        data["attack"] = self.attack.value
        data["theory"] = self.theory.value
        data["z"] = list(self.z)
        data["phi1_values"] = list(self.phi1_values)
        data["z_values"] = list(self.z_values)
        return data

    @classmethod
    def from_snapshot(cls, data: Mapping) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields in snapshot: {sorted(unknown)}")
        return cls(**{k: (tuple(v) if isinstance(v, list) else v) for k, v in data.items()})


def _floats(value) -> tuple[float, ...]:
    if isinstance(value, str):
        return tuple(float(v) for v in value.split(",") if v.strip())
    if isinstance(value, Iterable):
        return tuple(float(v) for v in value)
    return (float(value),)


def _bool(value) -> bool:
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered not in {"1", "0", "true", "false", "yes", "no", "on", "off"}:
            raise ConfigError(f"not a boolean: {value!r}")
        return lowered in {"1", "true", "yes", "on"}
    return bool(value)


def _topology(value) -> tuple[Topology, ...]:
    if isinstance(value, str):
        return tuple(Topology(v.strip().lower()) for v in value.split(","))
    return tuple(Topology(v) for v in value)


# config key -> (field, parser); z1/z2/phi/fine are handled in apply_settings
_KEYS: dict[str, tuple[str, Callable]] = {
    "n": ("n_nodes", int),
    "n_nodes": ("n_nodes", int),
    "topology": ("topology", _topology),
    "attack": ("attack", AttackKind),
    "phi1": ("phi1", float),
    "phi2": ("phi2", float),
    "grid_step": ("grid_step", float),
    "grid_min": ("grid_min", float),
    "grid_max": ("grid_max", float),
    "runs": ("runs", int),
    "seed": ("seed", int),
    "theory": ("theory", TheorySource),
    "out": ("out", str),
    "phi1_values": ("phi1_values", _floats),
    "z_values": ("z_values", _floats),
    "workers": ("workers", int),
    "regenerate": ("regenerate", _bool),
    "empirical_instances": ("empirical_instances", int),
    "histogram": ("histogram", str),
}
CONFIG_KEYS = frozenset(_KEYS) | {"z1", "z2", "phi", "fine"}


def apply_settings(
    base: ExperimentConfig,
    values: Mapping[str, object],
    fine_step: float = 0.01,
) -> ExperimentConfig:
    """Overlay key=value settings (strings or typed values; None means unset)."""
    changes: dict[str, object] = {}
    z = list(base.z)
    for key, value in values.items():
        if value is None:
            continue
        key = key.replace("-", "_").lower()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key in {"z1", "z2"}:
                z[int(key[1]) - 1] = float(value)
            elif key == "phi":
                changes["phi1"] = float(value)
            elif key == "fine":
                if _bool(value):
                    changes["grid_step"] = fine_step
            else:
                name, parse = _KEYS[key]
                changes[name] = parse(value)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
    changes["z"] = tuple(z)
    return replace(base, **changes)


# ---------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------

_FIXED_PHI1 = (0.0, 0.2, 0.4, 0.6, 0.8)

PRESETS: dict[str, dict] = {
    "fig3a": {"command": "phase", "topology": "er", "z1": 1, "z2": 1, "attack": "layer-random"},
    "fig3b": {"command": "phase", "topology": "er", "z1": 2, "z2": 3, "attack": "layer-random"},
    "fig4a": {"command": "slice", "topology": "er", "z1": 1, "z2": 1, "attack": "layer-random",
              "phi1_values": _FIXED_PHI1},
    "fig4b": {"command": "slice", "topology": "er", "z1": 2, "z2": 3, "attack": "layer-random",
              "phi1_values": _FIXED_PHI1},
    "fig5a": {"command": "phase", "topology": "er", "z1": 2, "z2": 2, "attack": "layer-targeted"},
    "fig5b": {"command": "phase", "topology": "er", "z1": 2, "z2": 4, "attack": "layer-targeted"},
    "fig6a": {"command": "slice", "topology": "er", "z1": 2, "z2": 2, "attack": "layer-targeted",
              "phi1_values": _FIXED_PHI1},
    "fig6b": {"command": "slice", "topology": "er", "z1": 2, "z2": 4, "attack": "layer-targeted",
              "phi1_values": _FIXED_PHI1},
    "fig7a": {"command": "threshold", "topology": "er", "attack": "layer-random",
              "z_values": (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0)},
    "fig7b": {"command": "threshold", "topology": "ba", "attack": "layer-random",
              "z_values": (2.0, 4.0, 6.0), "theory": "empirical"},
    "fig8a": {"command": "threshold", "topology": "er", "attack": "layer-targeted",
              "z_values": (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0)},
    "fig8b": {"command": "threshold", "topology": "ba", "attack": "layer-targeted",
              "z_values": (2.0, 4.0, 6.0), "theory": "empirical"},
}

PRESET_NOTES = (
    "grid resolution, fixed phi1 values and z ranges are chosen here; "
    "BA layers grow from a clique on m_attach+1 nodes; "
    "targeted removal at the cutoff degree is an independent draw with probability f"
)


def preset_settings(name: str) -> tuple[Command, dict]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
    values = dict(PRESETS[name])
    command = Command(values.pop("command"))
    return command, values


# ---------------------------------------------------------------------
# Theory histograms
# ---------------------------------------------------------------------

def theory_histogram(config: ExperimentConfig, z: Sequence[float] | None = None) -> JointDegreeHistogram:
    """
    A histogram CSV given in the config wins. Otherwise the product-Poisson law
    for the analytic source, or the mixture over generated instances.
    """
    z = tuple(z) if z is not None else config.z
    if config.histogram:
        hist = read_histogram_csv(Path(config.histogram))
        if hist.m != len(z):
            raise ConfigError(f"{config.histogram}: histogram has {hist.m} layers, the config has {len(z)}")
        return hist
    if config.theory is TheorySource.ANALYTIC:
        if any(t is not Topology.ER for t in config.topology):
            raise ConfigError("the analytic theory source is product-Poisson and only fits ER layers; use --theory empirical")
        return product_poisson_histogram(z)

    spec = config.generator_spec(z)
    contract = config.contract()
    hists = [
        joint_degree_histogram(spec.generate(contract, i, purpose=STREAM_THEORY))
        for i in range(config.empirical_instances)
    ]
    return average_histograms(hists)


# ---------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class GridPoint:
    phi1: float
    phi2: float
    r_sim_mean: float
    r_sim_std: float
    r_theory: float
    lambda_max: float | None
    per_run: tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class DegreeRow:
    z: float
    phi_c_multiplex: float
    phi_c_layer: float
    attack_kind: str
    topology: str
    flag_multiplex: str = "ok"
    flag_layer: str = "ok"


@dataclass
class SweepResult:
    command: Command
    config: ExperimentConfig
    grid: list[GridPoint] = field(default_factory=list)
    curve: list[CurvePoint] = field(default_factory=list)
    degree_rows: list[DegreeRow] = field(default_factory=list)
    network: MultiplexNetwork | None = None
    histogram: JointDegreeHistogram | None = None

    def points(self) -> list[dict]:
        """Flat per-point payloads in output order (what a run record stores)."""
        out: list[dict] = []
        for p in self.grid:
            out.append({
                "kind": "grid", "phi1": p.phi1, "phi2": p.phi2,
                "r_sim_mean": p.r_sim_mean, "r_sim_std": p.r_sim_std,
                "r_theory": p.r_theory, "lambda_max": p.lambda_max,
                "per_run": list(p.per_run),
            })
        for c in self.curve:
            out.append({"kind": "curve", "phi1": c.phi1, "phi2": c.phi2_c, "flag": c.flag.value})
        for row in self.degree_rows:
            out.append({
                "kind": "degree", "z": row.z,
                "phi_c_multiplex": row.phi_c_multiplex, "phi_c_layer": row.phi_c_layer,
                "flag": f"{row.flag_multiplex}/{row.flag_layer}",
            })
        return out


def _run_tasks(fn: Callable, tasks: list, workers: int, progress: bool, desc: str) -> list:
    # results come back in task order whatever the completion order
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(tqdm(pool.map(fn, tasks), total=len(tasks), desc=desc, disable=not progress))
    return [fn(t) for t in tqdm(tasks, desc=desc, disable=not progress)]


def _grid_point(task: tuple[ExperimentConfig, JointDegreeHistogram, float, float]) -> GridPoint:
    config, hist, phi1, phi2 = task
    spec = AttackSpec(config.attack, phi1, phi2)
    sim = run_ensemble(config.generator_spec(), spec, config.runs, config.contract(), config.regenerate)
    theory = evaluate(hist, spec.rule_for(hist))
    return GridPoint(phi1, phi2, sim.r_mean, sim.r_std, theory.r, theory.lambda_max, sim.per_run or ())


def _require_layer_attack(config: ExperimentConfig) -> None:
    if not config.attack.is_layer or len(config.z) != 2:
        raise ConfigError("phase diagrams and slices need a two-layer layer-random or layer-targeted attack")


def run_phase_diagram(config: ExperimentConfig, progress: bool = False) -> SweepResult:
    _require_layer_attack(config)
    hist = theory_histogram(config)
    grid = config.grid()
    tasks = [(config, hist, a, b) for a in grid for b in grid]
    logger.info("phase diagram: %d points x %d runs (%s)", len(tasks), config.runs, config.attack.value)

    points = _run_tasks(_grid_point, tasks, config.workers, progress, "phase")
    curve = threshold_curve(hist, config.attack, grid)
    return SweepResult(Command.PHASE, config, grid=points, curve=curve, histogram=hist)


def run_slice(config: ExperimentConfig, progress: bool = False) -> SweepResult:
    _require_layer_attack(config)
    hist = theory_histogram(config)
    tasks = [(config, hist, a, b) for a in config.phi1_values for b in config.grid()]
    logger.info("slice: %d points x %d runs (%s)", len(tasks), config.runs, config.attack.value)

    points = _run_tasks(_grid_point, tasks, config.workers, progress, "slice")
    return SweepResult(Command.SLICE, config, grid=points, histogram=hist)


def _degree_row(task: tuple[ExperimentConfig, float]) -> DegreeRow:
    config, z = task
    hist = theory_histogram(config, (z, z))
    strategy = config.attack.strategy
    multiplex = symmetric_threshold(hist, AttackKind.for_scope("multiplex", strategy))
    layer = symmetric_threshold(hist, AttackKind.for_scope("layer", strategy))
    topology = ",".join(sorted({t.value for t in config.topology}))
    return DegreeRow(z, multiplex.value, layer.value, strategy, topology, multiplex.flag.value, layer.flag.value)


def _usable_degree(config: ExperimentConfig, z: float) -> bool:
    if Topology.BA not in config.topology:
        return True
    try:
        ba_attachment(z)
    except GeneratorSpecError:
        logger.warning("skipping z=%g: BA layers need an even integer mean degree", z)
        return False
    return True


def run_threshold_vs_degree(config: ExperimentConfig, progress: bool = False) -> SweepResult:
    if len(config.z) != 2:
        raise ConfigError("threshold tables are defined for two layers")
    if config.histogram:
        raise ConfigError("threshold tables sweep z; a fixed histogram file can't follow it")
    tasks = [(config, z) for z in config.z_values if _usable_degree(config, z)]
    logger.info("threshold vs degree: %d z values (%s)", len(tasks), config.attack.strategy)
    rows = _run_tasks(_degree_row, tasks, config.workers, progress, "threshold")
    return SweepResult(Command.THRESHOLD, config, degree_rows=rows)


def run_generate(config: ExperimentConfig) -> SweepResult:
    net = config.generator_spec().generate(config.contract(), 0)
    return SweepResult(Command.GENERATE, config, network=net, histogram=joint_degree_histogram(net))


def compute(command: Command, config: ExperimentConfig, progress: bool = False) -> SweepResult:
    command = Command(command)
    if command is Command.GENERATE:
        return run_generate(config)
    if command is Command.PHASE:
        return run_phase_diagram(config, progress)
    if command is Command.SLICE:
        return run_slice(config, progress)
    return run_threshold_vs_degree(config, progress)


# ---------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_outputs(result: SweepResult, out_dir: Path) -> list[Path]:
    """Plot-ready CSVs (and edge lists for generate) in deterministic row order."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    command = result.command

    if command is Command.GENERATE:
        files = write_multiplex(out_dir, result.network)
        files.append(write_histogram_csv(out_dir / "histogram.csv", result.histogram))
        return files

    if command is Command.PHASE:
        return [
            write_rows_csv(out_dir / "phase.csv", PHASE_HEADER, (
                [_cell(p.phi1), _cell(p.phi2), _cell(p.r_sim_mean), _cell(p.r_sim_std),
                 _cell(p.r_theory), _cell(p.lambda_max)]
                for p in result.grid
            )),
            write_rows_csv(out_dir / "threshold.csv", CURVE_HEADER, (
                [_cell(c.phi1), _cell(c.phi2_c), c.flag.value] for c in result.curve
            )),
        ]

    if command is Command.SLICE:
        return [write_rows_csv(out_dir / "slice.csv", SLICE_HEADER, (
            [_cell(p.phi1), _cell(p.phi2), _cell(p.r_sim_mean), _cell(p.r_sim_std), _cell(p.r_theory)]
            for p in result.grid
        ))]

    return [write_rows_csv(out_dir / "threshold_vs_degree.csv", DEGREE_HEADER, (
        [_cell(r.z), _cell(r.phi_c_multiplex), _cell(r.phi_c_layer), r.attack_kind, r.topology]
        for r in result.degree_rows
    ))]


def network_metadata(result: SweepResult) -> dict:
    if result.network is None:
        return {}
    net = result.network
    return {
        "n_nodes": net.n_nodes,
        "edges_per_layer": [len(e) for e in net.layers],
        "mean_degree": list(net.mean_degrees()),
        "run_seed": result.config.contract().run_seed(0),
    }


def replay_mismatches(stored: Sequence[Mapping], fresh: Sequence[Mapping]) -> list[str]:
    """Differences between stored and recomputed simulation columns; exact comparison."""
    keys = ("kind", "phi1", "phi2", "z", "r_sim_mean", "r_sim_std", "per_run", "phi_c_multiplex", "phi_c_layer")
    problems = []
    if len(stored) != len(fresh):
        problems.append(f"point count {len(stored)} != {len(fresh)}")
    for i, (old, new) in enumerate(zip(stored, fresh)):
        for key in keys:
            a, b = old.get(key), new.get(key)
            if a is None and b is None:
                continue
            if isinstance(a, float) and isinstance(b, float) and (math.isnan(a) and math.isnan(b)):
                continue
            if a != b:
                problems.append(f"point {i}: {key} {a!r} != {b!r}")
    return problems
