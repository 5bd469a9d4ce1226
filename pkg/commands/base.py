from dataclasses import dataclass, field
from typing import Any, Dict, List

from tqdm import tqdm

from models.lattice import HoneycombLattice, build_lattice
from utils.run_config import RunConfig


@dataclass
class CommandResult:
    outputs: List[str]  # files written; each gets a manifest
    stdout: str
    manifest_extra: Dict[str, Any] = field(default_factory=dict)


def lattice_from(cfg: RunConfig) -> HoneycombLattice:
    return build_lattice(cfg.lx, cfg.ly, cfg.boundary)


def progress_bar(total: int, desc: str) -> tqdm:
    """Progress bar on stderr; feed it with bar.update as a BatchRunner callback"""
    return tqdm(total=total, desc=desc, unit="pt", leave=False)
