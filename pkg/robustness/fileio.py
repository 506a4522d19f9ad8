from __future__ import annotations

import csv
import json
import re
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np
from dotenv.parser import parse_stream

from .core import JointDegreeHistogram, MultiplexNetwork
from .exceptions import ConfigError, EdgeListFormatError, NetworkValidationError


_HEADER = re.compile(r"^#\s*layer\s+(\d+)\s+n=(\d+)\s*$")


# ---------------------------------------------------------------------
# Edge lists: "# layer <i> n=<N>" then one "u w" pair per line
# ---------------------------------------------------------------------

def write_edge_list(path: Path, edges: np.ndarray, layer: int, n_nodes: int) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        f.write(f"# layer {layer} n={n_nodes}\n")
        for u, w in np.asarray(edges).tolist():
            f.write(f"{u} {w}\n")
    return path


def read_edge_list(path: Path) -> tuple[int, int, np.ndarray]:
    """Return (layer, n_nodes, edges). Blank lines and further '#' lines are skipped."""
    path = Path(path)
    layer = n_nodes = None
    pairs: list[tuple[int, int]] = []

    with path.open("r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if layer is None:
                m = _HEADER.match(line)
                if not m:
                    raise EdgeListFormatError(path, line_no, "expected header '# layer <i> n=<N>'")
                layer, n_nodes = int(m.group(1)), int(m.group(2))
                continue
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise EdgeListFormatError(path, line_no, f"expected 'u w', got {line!r}")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise EdgeListFormatError(path, line_no, f"non-integer node index in {line!r}") from None

    if layer is None:
        raise EdgeListFormatError(path, 1, "empty file")
    return layer, n_nodes, np.array(pairs, dtype=np.int64).reshape(-1, 2)


def write_multiplex(directory: Path, net: MultiplexNetwork, stem: str = "layer") -> list[Path]:
    directory = Path(directory)
    return [
        write_edge_list(directory / f"{stem}{i + 1}.edges", edges, i + 1, net.n_nodes)
        for i, edges in enumerate(net.layers)
    ]


def read_multiplex(paths: Sequence[Path]) -> MultiplexNetwork:
    """Layers are ordered by their header index, not by argument order."""
    loaded = sorted((read_edge_list(p) for p in paths), key=lambda item: item[0])
    sizes = {n for _, n, _ in loaded}
    if len(sizes) != 1:
        raise NetworkValidationError(f"edge-list files disagree on n: {sorted(sizes)}")
    return MultiplexNetwork(sizes.pop(), tuple(edges for _, _, edges in loaded))


# ---------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------

def write_histogram_csv(path: Path, hist: JointDegreeHistogram) -> Path:
    header = [f"k{i + 1}" for i in range(hist.m)] + ["p"]
    rows = ([*map(int, k), repr(float(p))] for k, p in zip(hist.degrees, hist.masses))
    return write_rows_csv(path, header, rows)


def read_histogram_csv(path: Path) -> JointDegreeHistogram:
    """Inverse of write_histogram_csv; columns k1..km then p."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"histogram file not found: {path}")
    with path.open("r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if not reader.fieldnames or "p" not in reader.fieldnames or len(reader.fieldnames) < 2:
            raise ConfigError(f"{path}: histogram CSV needs k1..km and p columns")
        k_cols = [c for c in reader.fieldnames if c != "p"]
        entries: dict[tuple[int, ...], float] = {}
        for row in reader:
            try:
                key = tuple(int(row[c]) for c in k_cols)
                entries[key] = entries.get(key, 0.0) + float(row["p"])
            except (TypeError, ValueError):
                raise ConfigError(f"{path}:{reader.line_num}: bad histogram row {row!r}") from None
    return JointDegreeHistogram.from_entries(entries)


def write_rows_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return path


def read_rows_csv(path: Path) -> list[dict[str, str]]:
    with Path(path).open("r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


# ---------------------------------------------------------------------
# Config files and sidecars
# ---------------------------------------------------------------------

def parse_config_file(path: Path) -> dict[str, str]:
    """Flat key=value text in .env syntax: '#' comments, optional quotes, one key per line."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")

    values: dict[str, str] = {}
    with path.open("r", encoding="utf-8") as f:
        for binding in parse_stream(f):
            line_no = binding.original.line
            if binding.error:
                raise ConfigError(f"{path}:{line_no}: expected key=value, got {binding.original.string.strip()!r}")
            if binding.key is None:
                continue
            if binding.value is None:
                raise ConfigError(f"{path}:{line_no}: no value for {binding.key!r}")
            values[binding.key.replace("-", "_").lower()] = binding.value
    return values


def write_sidecar(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return path
