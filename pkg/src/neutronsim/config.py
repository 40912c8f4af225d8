"""Run manifests and their flat ``key = value`` config format.

Grammar, one entry per line::

    # comment (also allowed after a value)
    experiment = bell            # interferometer | bell | ozawa   (required)
    seed = 12345                 # unsigned 64-bit integer         (required)
    gamma = 0.99                 # (0, 1)
    reflectivity = 0.2           # [0, 1]
    n_particles = 10000          # per setting / sub-experiment
    warmup = 10000               # uncounted particles per DLM sub-run
    chi = periodic(16)           # grids: periodic(n), linspace(a, b, n) or a, b, c
    alpha = periodic(8)          # bell only
    phi = linspace(0, pi/2, 13)  # ozawa only
    mu_metal_axis = y            # bell only: y | x
    output = results/bell.csv
    parallelism = 1

Numbers may be written as arithmetic on ``pi`` (``pi/4``, ``-3*pi/8``).
"""

from __future__ import annotations

import ast
import hashlib
import json
import math
import operator
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .networks import DEFAULT_WARMUP

EXPERIMENTS = ("interferometer", "bell", "ozawa")
COMMON_KEYS = {"experiment", "seed", "n_particles", "output", "parallelism"}
EXPERIMENT_KEYS = {
    "interferometer": COMMON_KEYS | {"gamma", "reflectivity", "warmup", "chi"},
    "bell": COMMON_KEYS | {"gamma", "reflectivity", "warmup", "chi", "alpha", "mu_metal_axis"},
    "ozawa": COMMON_KEYS | {"phi"},
}
ALL_KEYS = set().union(*EXPERIMENT_KEYS.values())
GRID_KEYS = ("chi", "alpha", "phi")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"field '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key


def _periodic(n) -> list[float]:
    return [2 * math.pi * k / n for k in range(int(n))]


def _default_grids(experiment: str) -> dict[str, tuple[float, ...]]:
    if experiment == "interferometer":
        return {"chi": tuple(_periodic(16))}
    if experiment == "bell":
        return {"alpha": tuple(_periodic(8)), "chi": tuple(_periodic(8))}
    return {"phi": tuple(float(x) for x in np.linspace(0.0, 0.5 * math.pi, 13))}


@dataclass(frozen=True)
class RunManifest:
    experiment: str
    seed: int
    gamma: float = 0.99
    reflectivity: float = 0.2
    n_particles: int = 10_000
    warmup: int = DEFAULT_WARMUP
    chi: tuple[float, ...] = ()
    alpha: tuple[float, ...] = ()
    phi: tuple[float, ...] = ()
    mu_metal_axis: str = "y"
    output: str | None = None
    parallelism: int = 1
    source_lines: dict[str, int] = field(default_factory=dict, compare=False, repr=False)

    def grid_points(self) -> int:
        if self.experiment == "interferometer":
            return len(self.chi)
        if self.experiment == "bell":
            return len(self.alpha) * len(self.chi)
        return len(self.phi)

    def canonical(self) -> dict:
        """Settings that determine the results (output path and workers excluded)."""
        data = asdict(self)
        for key in ("output", "parallelism", "source_lines"):
            data.pop(key)
        keep = EXPERIMENT_KEYS[self.experiment]
        return {k: v for k, v in data.items() if k in keep}

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_overrides(self, **changes) -> "RunManifest":
        return validate(replace(self, **changes))


# -- expression parsing ---------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def _eval_node(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval_node(node.operand))
    raise ValueError(f"unsupported expression element {ast.dump(node)}")


def parse_number(text: str) -> float:
    try:
        return float(_eval_node(ast.parse(text.strip(), mode="eval").body))
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a number: {text!r}") from exc


def parse_grid(text: str) -> tuple[float, ...]:
    try:
        tree = ast.parse(text.strip(), mode="eval").body
    except SyntaxError as exc:
        raise ValueError(f"not a grid: {text!r}") from exc
    if isinstance(tree, ast.Call) and isinstance(tree.func, ast.Name):
        args = [_eval_node(a) for a in tree.args]
        if tree.keywords:
            raise ValueError("grid functions take positional arguments only")
        if tree.func.id == "periodic" and len(args) == 1:
            n = args[0]
            if n != int(n) or n < 1:
                raise ValueError("periodic(n) needs a positive integer")
            return tuple(_periodic(int(n)))
        if tree.func.id == "linspace" and len(args) == 3:
            start, stop, n = args
            if n != int(n) or n < 1:
                raise ValueError("linspace count must be a positive integer")
            return tuple(float(x) for x in np.linspace(start, stop, int(n)))
        raise ValueError(f"unknown grid function in {text!r}")
    elements = tree.elts if isinstance(tree, ast.Tuple) else [tree]
    return tuple(float(_eval_node(e)) for e in elements)


def _parse_int(text: str) -> int:
    value = parse_number(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(text) if text.strip().lstrip("-").isdigit() else int(value)


_PARSERS = {
    "seed": _parse_int,
    "n_particles": _parse_int,
    "warmup": _parse_int,
    "parallelism": _parse_int,
    "gamma": parse_number,
    "reflectivity": parse_number,
    "chi": parse_grid,
    "alpha": parse_grid,
    "phi": parse_grid,
}


def parse_config(text: str) -> RunManifest:
    raw: dict[str, str] = {}
    lines: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in content.split("=", 1))
        if key not in ALL_KEYS:
            raise ConfigError("unknown key", line=lineno, key=key)
        if key in raw:
            raise ConfigError("duplicate key", line=lineno, key=key)
        raw[key] = value
        lines[key] = lineno
    return manifest_from_items(raw, lines)


def manifest_from_items(raw: dict[str, str], lines: dict[str, int] | None = None) -> RunManifest:
    lines = lines or {}
    experiment = raw.get("experiment")
    if experiment is None:
        raise ConfigError("missing experiment name", key="experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"must be one of {EXPERIMENTS}", lines.get("experiment"), "experiment")
    if "seed" not in raw:
        raise ConfigError("a seed is required for reproducibility", key="seed")
    values: dict = {"experiment": experiment}
    for key, text in raw.items():
        if key == "experiment":
            continue
        if key not in EXPERIMENT_KEYS[experiment]:
            raise ConfigError(f"not used by the {experiment} experiment", lines.get(key), key)
        parser = _PARSERS.get(key)
        try:
            values[key] = parser(text) if parser else text
        except ValueError as exc:
            raise ConfigError(str(exc), lines.get(key), key) from None
    for key, grid in _default_grids(experiment).items():
        values.setdefault(key, grid)
    return validate(RunManifest(**values, source_lines=dict(lines)))


def validate(m: RunManifest) -> RunManifest:
    def fail(key, message):
        raise ConfigError(message, m.source_lines.get(key), key)

    if not 0 <= m.seed < 2**64:
        fail("seed", "must be an unsigned 64-bit integer")
    if not 0.0 < m.gamma < 1.0:
        fail("gamma", f"must lie in (0, 1), got {m.gamma}")
    if not 0.0 <= m.reflectivity <= 1.0:
        fail("reflectivity", f"must lie in [0, 1], got {m.reflectivity}")
    if m.n_particles < 0:
        fail("n_particles", "must be nonnegative")
    if m.warmup < 0:
        fail("warmup", "must be nonnegative")
    if m.parallelism < 1:
        fail("parallelism", "must be at least 1")
    if m.mu_metal_axis not in ("x", "y"):
        fail("mu_metal_axis", "must be 'x' or 'y'")
    needed = {"interferometer": ("chi",), "bell": ("alpha", "chi"), "ozawa": ("phi",)}
    for key in needed[m.experiment]:
        if not getattr(m, key):
            fail(key, "grid must not be empty")
    return m


def load_config(path: str | Path) -> RunManifest:
    return parse_config(Path(path).read_text())
