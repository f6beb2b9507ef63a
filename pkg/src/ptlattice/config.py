"""Flat ``key = value`` run configuration.

Example::

    command = correspond
    lattice.N = 5
    lattice.Ns = 2
    sweep.gamma = 0.2, 0.5, 0.9

Blank lines and ``#`` comments are ignored. Unknown or repeated keys are
errors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .errors import ValidationError
from .lattice import LatticeSpec, SubNetwork

COMMANDS = ("spectrum", "roots", "scatter", "correspond", "evolve")
FORMATS = ("csv", "json")

# key -> scalar type; sweep keys hold comma-separated lists
_SCALARS = {
    "command": str,
    "lattice.N": int,
    "lattice.Ns": int,
    "lattice.J": float,
    "lattice.gamma": float,
    "lattice.g": float,
    "scatter.V": float,
    "scatter.nu": float,
    "scatter.k": float,
    "evolve.k0": float,
    "evolve.sigma": float,
    "evolve.x0": int,
    "evolve.sites": int,
    "evolve.t_final": float,
    "output.path": str,
    "output.format": str,
}
_SWEEPS = {
    "sweep.gamma": float,
    "sweep.N": int,
    "sweep.Ns": int,
    "sweep.k": float,
    "sweep.sigma": float,
}


@dataclass
class RunConfig:
    command: str
    lattice: Dict[str, float] = field(default_factory=dict)
    sweep: Dict[str, List[float]] = field(default_factory=dict)
    scatter: Dict[str, float] = field(default_factory=dict)
    evolve: Dict[str, float] = field(default_factory=dict)
    output_path: Optional[str] = None
    output_format: str = "csv"

    def axis(self, name: str) -> list:
        """Sweep values for ``name``, falling back to the lattice value."""
        if name in self.sweep:
            return list(self.sweep[name])
        return [self.lattice[name]]

    def grid(self) -> List[LatticeSpec]:
        """Uniform-chain specs over the ``N x Ns x gamma`` product, in that order."""
        J = self.lattice.get("J", 1.0)
        g = self.lattice.get("g", J)
        return [LatticeSpec(N=N, sub=SubNetwork.uniform(Ns, J), J=J, gamma=gamma, g=g)
                for N, Ns, gamma in itertools.product(self.axis("N"), self.axis("Ns"), self.axis("gamma"))]


def _convert(key: str, raw: str, kind, line: int):
    if kind is str:
        if not raw:
            raise ValidationError(f"line {line}: {key} is empty", key=key, line=line)
        return raw
    try:
        value = float(raw)
    except ValueError:
        raise ValidationError(f"line {line}: {key} expects a number, got {raw!r}", key=key, line=line) from None
    if not math.isfinite(value):
        raise ValidationError(f"line {line}: {key} must be finite", key=key, line=line)
    if kind is int:
        if value != int(value):
            raise ValidationError(f"line {line}: {key} expects an integer, got {raw!r}", key=key, line=line)
        return int(value)
    return value


def parse_config(text: str, command: Optional[str] = None) -> RunConfig:
    """Parse and validate a configuration.

    ``command`` (from the command line) fills in a missing ``command`` key and
    must agree with it when both are present.
    """
    values: Dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValidationError(f"line {lineno}: expected 'key = value', got {stripped!r}", line=lineno)
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key in values:
            raise ValidationError(f"line {lineno}: duplicate key {key}", key=key, line=lineno)
        if key in _SCALARS:
            values[key] = _convert(key, raw, _SCALARS[key], lineno)
        elif key in _SWEEPS:
            items = [item.strip() for item in raw.split(",")]
            if not raw or any(not item for item in items):
                raise ValidationError(f"line {lineno}: sweep axis {key} must be a nonempty list", key=key,
                                      line=lineno)
            values[key] = [_convert(key, item, _SWEEPS[key], lineno) for item in items]
        else:
            raise ValidationError(f"line {lineno}: unknown key {key}", key=key, line=lineno)

    cmd = values.get("command", command)
    if cmd is None:
        raise ValidationError("missing key command", key="command")
    if command is not None and cmd != command:
        raise ValidationError(f"config command {cmd!r} does not match requested {command!r}", key="command")
    if cmd not in COMMANDS:
        raise ValidationError(f"unknown command {cmd!r}; expected one of {COMMANDS}", key="command")

    def section(prefix):
        return {k[len(prefix) + 1:]: v for k, v in values.items() if k.startswith(prefix + ".")}

    cfg = RunConfig(
        command=cmd,
        lattice=section("lattice"),
        sweep=section("sweep"),
        scatter=section("scatter"),
        evolve=section("evolve"),
        output_path=values.get("output.path"),
        output_format=values.get("output.format", "csv"),
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    lat = cfg.lattice
    lat.setdefault("Ns", 0)
    lat.setdefault("J", 1.0)
    lat.setdefault("gamma", 0.0)
    if cfg.command != "evolve" and "N" not in lat and "N" not in cfg.sweep:
        raise ValidationError("missing key lattice.N", key="lattice.N")
    lat.setdefault("N", 1)
    if cfg.output_format not in FORMATS:
        raise ValidationError(f"output.format must be one of {FORMATS}", key="output.format")
    if lat["J"] <= 0:
        raise ValidationError("lattice.J must be positive", key="lattice.J")
    for name in ("N", "Ns", "gamma"):
        bad = [v for v in cfg.axis(name) if v < (1 if name == "N" else 0)]
        if bad:
            key = f"sweep.{name}" if name in cfg.sweep else f"lattice.{name}"
            raise ValidationError(f"{key} out of range: {bad[0]}", key=key)
    if cfg.command == "scatter" and "k" not in cfg.scatter and "k" not in cfg.sweep:
        raise ValidationError("scatter needs scatter.k or sweep.k", key="sweep.k")
    for k in cfg.sweep.get("k", []) + ([cfg.scatter["k"]] if "k" in cfg.scatter else []):
        if not 0 < k < math.pi:
            raise ValidationError(f"k={k} must lie strictly inside (0, pi)", key="sweep.k")
    if cfg.command == "evolve":
        for key in ("k0", "sigma", "sites"):
            if key not in cfg.evolve and key not in cfg.sweep:
                raise ValidationError(f"missing key evolve.{key}", key=f"evolve.{key}")
    if cfg.command != "evolve":
        for spec in cfg.grid():
            if spec.n_sites < 2:
                raise ValidationError(f"chain with N={spec.N}, Ns={spec.Ns} has fewer than 2 sites", key="lattice.N")
