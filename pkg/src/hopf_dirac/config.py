"""INI-like run configuration with line-numbered diagnostics.

Sections hold ``key=value`` pairs; several pairs may share one line
(``[field] kind=constant g0=3.0`` is valid, with the pairs following the
section header).  Comments start with ``#`` or ``;``.
"""

from __future__ import annotations

import math
import re
import shlex
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ParseError, ValidationError
from .sphere_bundle import FieldProfile
from .validation import MIN_N_THETA, STENCILS

COMMANDS = ("spectrum", "zeromodes", "transfer", "verify")
FORMATS = ("csv", "json")
OVERRIDE_LINE = -1  # pseudo line number of --override entries

# section -> key -> (type, default); a default of None means optional
SCHEMA: Dict[str, Dict[str, Tuple[str, object]]] = {
    "run": {"command": ("str", None), "seed": ("int", 0)},
    "field": {"kind": ("str", "constant"), "g0": ("float", None), "table": ("str", None),
              "theta_nodes": ("floats", None), "values": ("floats", None)},
    "discretization": {"N_theta": ("int", 2048), "doublings": ("int", 2), "stencil": ("str", "regular")},
    "window": {"energy_max": ("float", 5.0)},
    "output": {"format": ("str", "csv"), "path": ("str", None)},
    "zeromodes": {"k": ("int", 0), "samples": ("int", 201)},
    "transfer": {"radius_max": ("float", 1e3), "radial": ("int", 41)},
}

_HEADER = re.compile(r"^\[\s*([A-Za-z_][A-Za-z0-9_]*)\s*\]\s*(.*)$")


@dataclass(frozen=True)
class RunConfig:
    """Validated run settings with defaults applied."""

    command: str
    field: FieldProfile
    seed: int = 0
    n_theta: int = 2048
    doublings: int = 2
    stencil: str = "regular"
    energy_max: float = 5.0
    output_format: str = "csv"
    output_path: Optional[str] = None
    zeromode_block: int = 0
    zeromode_samples: int = 201
    transfer_radius_max: float = 1e3
    transfer_radial: int = 41
    raw: Dict[str, Dict[str, str]] = field(default_factory=dict, compare=False, repr=False)

    def with_command(self, command: str) -> "RunConfig":
        if command not in COMMANDS:
            raise ValidationError(f"unknown command {command!r}")
        return replace(self, command=command)


@dataclass
class _Entry:
    value: str
    line: int


def _tighten_equals(text: str) -> str:
    """Drop whitespace around ``=`` outside quotes so ``key = value`` reads as one pair."""
    out, quote, after_equals = [], None, False
    for ch in text:
        if after_equals and ch in " \t":
            continue
        after_equals = False
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "=":
            while out and out[-1] in " \t":
                out.pop()
            after_equals = True
        out.append(ch)
    return "".join(out)


def _split_pairs(text: str, line_no: int) -> List[Tuple[str, str]]:
    try:
        tokens = shlex.split(_tighten_equals(text), comments=False, posix=True)
    except ValueError as exc:
        raise ParseError(f"line {line_no}: {exc}") from None
    pairs = []
    for tok in tokens:
        if "=" not in tok:
            raise ParseError(f"line {line_no}: expected key=value, got {tok!r}")
        key, value = tok.split("=", 1)
        key = key.strip()
        if not key:
            raise ParseError(f"line {line_no}: empty key")
        pairs.append((key, value.strip()))
    return pairs


def _strip_comment(line: str) -> str:
    out, quote = [], None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch in "#;":
            break
        out.append(ch)
    return "".join(out).strip()


def tokenize(text: str) -> Dict[str, Dict[str, _Entry]]:
    """Raw section/key/value table with source line numbers."""
    sections: Dict[str, Dict[str, _Entry]] = {}
    current: Optional[str] = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        rest = line
        header = _HEADER.match(line)
        if header:
            current = header.group(1)
            if current not in SCHEMA:
                raise ValidationError(f"line {line_no}: unknown section [{current}]")
            sections.setdefault(current, {})
            rest = header.group(2)
            if not rest:
                continue
        elif line.startswith("["):
            raise ParseError(f"line {line_no}: malformed section header {line!r}")
        if current is None:
            raise ParseError(f"line {line_no}: key=value outside of a section")
        for key, value in _split_pairs(rest, line_no):
            if key not in SCHEMA[current]:
                raise ValidationError(f"line {line_no}: unknown key {key!r} in [{current}]")
            if key in sections[current]:
                first = sections[current][key].line
                raise ValidationError(f"line {line_no}: duplicate key {key!r} (first set on line {first})")
            sections[current][key] = _Entry(value, line_no)
    return sections


def _where(line: int) -> str:
    if line > 0:
        return f"line {line}"
    return "override" if line == OVERRIDE_LINE else "config"


def _convert(kind: str, entry: _Entry, where: str):
    text = entry.value
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            value = float(text)
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind == "floats":
            items = [float(x) for x in text.replace(",", " ").split()]
            if not items:
                raise ValueError
            return items
    except ValueError:
        raise ValidationError(f"{_where(entry.line)}: {where} expects {kind}, got {text!r}") from None
    return text


def _apply_overrides(sections: Dict[str, Dict[str, _Entry]], overrides: Sequence[str]):
    for item in overrides:
        if "=" not in item:
            raise ValidationError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        if "." in key:
            section, name = key.split(".", 1)
        else:
            owners = [s for s, keys in SCHEMA.items() if key in keys]
            if len(owners) != 1:
                raise ValidationError(f"override key {key!r} is ambiguous or unknown; use section.key")
            section, name = owners[0], key
        if section not in SCHEMA or name not in SCHEMA[section]:
            raise ValidationError(f"override names unknown key {key!r}")
        sections.setdefault(section, {})[name] = _Entry(value.strip(), OVERRIDE_LINE)


def _read_table(path: Path, line: int) -> Tuple[np.ndarray, np.ndarray]:
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except ValueError as exc:
        raise ValidationError(f"{_where(line)}: table {str(path)!r} is not numeric: {exc}") from None
    if data.shape[1] != 2:
        raise ValidationError(f"{_where(line)}: table {str(path)!r} needs two columns theta,value")
    return data[:, 0], data[:, 1]


def _build_field(values: Dict[str, object], lines: Dict[str, int], base_dir: Optional[Path]) -> FieldProfile:
    kind = values["kind"]
    if kind == "constant":
        if values["g0"] is None:
            raise ValidationError(f"{_where(lines.get('kind', 0))}: constant field needs g0")
        return FieldProfile.constant(values["g0"])
    if kind != "sampled":
        raise ValidationError(f"{_where(lines.get('kind', 0))}: field kind must be constant or sampled")
    if values["table"] is not None:
        path = Path(values["table"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        theta, g = _read_table(path, lines.get("table", 0))
        where = lines.get("table", 0)
    else:
        if values["theta_nodes"] is None or values["values"] is None:
            raise ValidationError(f"{_where(lines.get('kind', 0))}: sampled field needs table or theta_nodes/values")
        theta, g = values["theta_nodes"], values["values"]
        where = lines.get("theta_nodes", 0)
    try:
        return FieldProfile.sampled(theta, g)
    except ValueError as exc:
        raise ValidationError(f"{_where(where)}: {exc}") from None


def parse_config(text: str, overrides: Sequence[str] = (), base_dir: Optional[Path] = None) -> RunConfig:
    """Parse and validate a run configuration.

    ``overrides`` are ``section.key=value`` strings applied after parsing
    (a bare key is accepted when it belongs to exactly one section).
    """
    sections = tokenize(text)
    _apply_overrides(sections, overrides)
    resolved: Dict[str, Dict[str, object]] = {}
    lines: Dict[str, Dict[str, int]] = {}
    for section, keys in SCHEMA.items():
        given = sections.get(section, {})
        resolved[section] = {}
        lines[section] = {}
        for key, (kind, default) in keys.items():
            if key in given:
                resolved[section][key] = _convert(kind, given[key], f"[{section}] {key}")
                lines[section][key] = given[key].line
            else:
                resolved[section][key] = default

    def line_of(section, key):
        return _where(lines[section].get(key, 0))

    run = resolved["run"]
    if run["command"] is None:
        raise ValidationError("[run] command is required")
    if run["command"] not in COMMANDS:
        raise ValidationError(f"{line_of('run', 'command')}: command must be one of {', '.join(COMMANDS)}")
    if run["seed"] < 0:
        raise ValidationError(f"{line_of('run', 'seed')}: seed must be non-negative")
    disc = resolved["discretization"]
    if disc["N_theta"] < MIN_N_THETA:
        raise ValidationError(f"{line_of('discretization', 'N_theta')}: N_theta must be >= {MIN_N_THETA}")
    if disc["doublings"] < 0:
        raise ValidationError(f"{line_of('discretization', 'doublings')}: doublings must be >= 0")
    if disc["stencil"] not in STENCILS:
        raise ValidationError(f"{line_of('discretization', 'stencil')}: stencil must be one of "
                              f"{', '.join(STENCILS)}")
    energy = resolved["window"]["energy_max"]
    if not energy > 0:
        raise ValidationError(f"{line_of('window', 'energy_max')}: energy_max must be positive")
    out = resolved["output"]
    if out["format"] not in FORMATS:
        raise ValidationError(f"{line_of('output', 'format')}: format must be csv or json")
    zm = resolved["zeromodes"]
    if zm["samples"] < 2:
        raise ValidationError(f"{line_of('zeromodes', 'samples')}: samples must be >= 2")
    tr = resolved["transfer"]
    if not tr["radius_max"] > 1.0:
        raise ValidationError(f"{line_of('transfer', 'radius_max')}: radius_max must exceed 1")
    if tr["radial"] < 2:
        raise ValidationError(f"{line_of('transfer', 'radial')}: radial must be >= 2")
    profile = _build_field(resolved["field"], lines["field"], base_dir)
    raw = {s: {k: e.value for k, e in keys.items()} for s, keys in sections.items()}
    return RunConfig(command=run["command"], field=profile, seed=run["seed"], n_theta=disc["N_theta"],
                     doublings=disc["doublings"], stencil=disc["stencil"], energy_max=energy,
                     output_format=out["format"], output_path=out["path"], zeromode_block=zm["k"],
                     zeromode_samples=zm["samples"], transfer_radius_max=tr["radius_max"],
                     transfer_radial=tr["radial"], raw=raw)


def load_config(path, overrides: Sequence[str] = ()) -> RunConfig:
    """Read a UTF-8 config file; relative table paths resolve against its folder."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_config(text, overrides, base_dir=path.parent)
