# SPDX-License-Identifier: GPL-3.0-or-later
"""
Run configuration for the cubictele command line.

A run is described by a JSON object with keys params, grids, lattice, outputs,
thresholds, seed and mc_samples. Named presets ship in presets.json; a user
file is overlaid on a preset key by key, and command-line flags win over both.

Copyright (C) 2024 cubictele Contributors
Licensed under GPL-3.0-or-later
"""

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .errors import DomainError
from .params import GridSet, GridSpec, ProtocolParams, suggest_grids
from .teleport import LatticeSpec, default_lattice

logger = logging.getLogger(__name__)

PRESETS_PATH = Path(__file__).resolve().parent.parent / "presets.json"
OUTPUT_FORMATS = ("csv", "json")
DEFAULT_SEED = 20240101
DEFAULT_MC_SAMPLES = 1_000_000


def load_presets(path: Path = PRESETS_PATH) -> Dict[str, Dict[str, Any]]:
    with open(path, encoding="utf-8") as f:
        return json.load(f)["presets"]


def merge_config(base: Dict[str, Any], overlay: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively overlay ``overlay`` on ``base``; nested objects merge, other values replace."""
    merged = dict(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = value
    return merged


@dataclass(frozen=True)
class OutputSpec:
    dir: Path = Path("results")
    formats: Tuple[str, ...] = OUTPUT_FORMATS
    timestamp: bool = True

    def __post_init__(self):
        if not self.formats:
            raise DomainError("at least one output format is needed")
        unknown = [f for f in self.formats if f not in OUTPUT_FORMATS]
        if unknown:
            raise DomainError(f"unknown output formats {unknown}, expected {OUTPUT_FORMATS}")


@dataclass(frozen=True)
class RunConfig:
    """Everything a sweep, validation or Monte-Carlo run needs."""

    params: ProtocolParams
    grids: GridSet
    lattice: LatticeSpec
    outputs: OutputSpec = field(default_factory=OutputSpec)
    thresholds: Tuple[float, ...] = ()
    seed: int = DEFAULT_SEED
    mc_samples: int = DEFAULT_MC_SAMPLES
    name: str = "run"

    @classmethod
    def from_dict(cls, data: Dict[str, Any], name: str = "run") -> "RunConfig":
        if "params" not in data:
            raise DomainError("configuration needs a 'params' object")
        params = ProtocolParams.from_dict(data["params"])
        lattice_data = data.get("lattice") or {}
        if "y1m" in lattice_data and "yinm" in lattice_data:
            lattice = LatticeSpec.from_dict(lattice_data)
        else:
            lattice = default_lattice(
                params, int(lattice_data.get("n_y1m", 64)), int(lattice_data.get("n_yinm", 64))
            )

        grid_data = data.get("grids") or {}
        suggested = suggest_grids(params, yinm_extent=max(abs(lattice.yinm_min), abs(lattice.yinm_max)))
        grids = GridSet(
            GridSpec.from_dict(grid_data["input"]) if "input" in grid_data else suggested.input,
            GridSpec.from_dict(grid_data["resource"]) if "resource" in grid_data else suggested.resource,
        )

        out = data.get("outputs") or {}
        outputs = OutputSpec(
            dir=Path(out.get("dir", "results")),
            formats=tuple(out.get("formats", OUTPUT_FORMATS)),
            timestamp=bool(out.get("timestamp", True)),
        )
        return cls(
            params=params,
            grids=grids,
            lattice=lattice,
            outputs=outputs,
            thresholds=tuple(float(t) for t in data.get("thresholds", ())),
            seed=int(data.get("seed", DEFAULT_SEED)),
            mc_samples=int(data.get("mc_samples", DEFAULT_MC_SAMPLES)),
            name=name,
        )

    def with_outputs(self, **changes) -> "RunConfig":
        return replace(self, outputs=replace(self.outputs, **changes))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "grids": self.grids.to_dict(),
            "lattice": self.lattice.to_dict(),
            "outputs": {
                "dir": str(self.outputs.dir),
                "formats": list(self.outputs.formats),
                "timestamp": self.outputs.timestamp,
            },
            "thresholds": list(self.thresholds),
            "seed": self.seed,
            "mc_samples": self.mc_samples,
        }


def load_config(
    preset: Optional[str] = None,
    config_file: Optional[Path] = None,
) -> Tuple[Dict[str, Any], str]:
    """Return the raw configuration dictionary and its name from a preset and/or file."""
    data: Dict[str, Any] = {}
    name = "run"
    if preset:
        presets = load_presets()
        if preset not in presets:
            raise DomainError(f"unknown preset '{preset}', expected one of {sorted(presets)}")
        data = dict(presets[preset])
        name = preset
    if config_file:
        with open(config_file, encoding="utf-8") as f:
            try:
                overlay = json.load(f)
            except json.JSONDecodeError as e:
                raise DomainError(f"{config_file} is not valid JSON: {e}") from e
        data = merge_config(data, overlay)
        name = Path(config_file).stem if not preset else name
    logger.debug("configuration %s: %s", name, data)
    return data, name
