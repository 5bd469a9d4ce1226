import json
import logging
import re
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

import config
from models.braid_protocol import HexagonNumbering
from models.errors import ConfigError
from models.lattice import Boundary
from models.spin_ed import CouplingParams, effective_couplings

logger = logging.getLogger(__name__)

_LATTICE = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")
_CHOICES = {
    "numbering": tuple(n.value for n in HexagonNumbering),
    "solver": ("auto", "dense", "lanczos"),
}


@dataclass
class RunConfig:
    """Everything a command needs; a run is reproducible from this and its seed"""

    command: str = "spectrum"
    lx: int = 2
    ly: int = 2
    bc: str = Boundary.TORUS.value
    jx: float = 1.0
    jy: float = 1.0
    jz: float = 1.0
    hx: float = 0.0
    hy: float = 0.0
    hz: float = 0.0
    t_plus: Optional[List[float]] = None
    u: Optional[float] = None
    seed: int = config.DEFAULT_SEED
    output: Optional[str] = None
    # spectrum
    k: int = 1
    tol: float = config.RESIDUAL_TOL
    flux: Optional[List[int]] = None
    dump_vectors: bool = False
    solver: str = "auto"
    # phase-diagram / gap-sweep
    step: float = 0.05
    gap_size: int = 12
    xlsx: bool = False
    sizes: List[int] = field(default_factory=lambda: [4, 5, 7, 8, 10, 11])
    # braid
    loops: List[int] = field(default_factory=lambda: [1])
    discriminate: bool = False
    braid_plaquette: Optional[int] = None
    creation_site: Optional[int] = None
    numbering: str = "loop"
    measure_angle: Optional[float] = None

    @property
    def boundary(self) -> Boundary:
        return Boundary(self.bc)

    def couplings(self) -> CouplingParams:
        """Explicit J/h, or the superexchange values when t_plus and U are given"""
        if self.t_plus is not None or self.u is not None:
            if self.t_plus is None or self.u is None:
                raise ConfigError("bad_config", "--t-plus and --u must be given together")
            return effective_couplings(self.t_plus, self.u)
        return CouplingParams(self.jx, self.jy, self.jz, self.hx, self.hy, self.hz)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def parse_lattice(text: str) -> tuple:
    """"3x3" -> (3, 3)"""
    match = _LATTICE.match(text)
    if match is None:
        raise ConfigError("bad_config", f"lattice must look like 3x3 (got {text!r})")
    return int(match.group(1)), int(match.group(2))


def _normalize(raw: Dict[str, Any]) -> Dict[str, Any]:
    values = {}
    for key, value in raw.items():
        key = key.replace("-", "_").lower()
        if key == "lattice" and isinstance(value, str):
            values["lx"], values["ly"] = parse_lattice(value)
        elif key == "lattice" and isinstance(value, dict):
            values.update(_normalize(value))
        elif key == "couplings" and isinstance(value, dict):
            values.update(_normalize(value))
        elif key == "boundary":
            values["bc"] = value
        else:
            values[key] = value
    return values


def load_config_file(path: str) -> Dict[str, Any]:
    """Read a JSON config document"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError("bad_config", f"{path}: {e}")
    if not isinstance(raw, dict):
        raise ConfigError("bad_config", f"{path}: top level must be an object")
    return _normalize(raw)


def build_run_config(command: str, flags: Dict[str, Any], config_path: Optional[str] = None) -> RunConfig:
    """File values first, then every flag that was actually given"""
    known = {f.name for f in fields(RunConfig)}
    values: Dict[str, Any] = {}
    if config_path:
        values.update(load_config_file(config_path))
    values.update({k: v for k, v in _normalize(flags).items() if v is not None})
    values["command"] = command

    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError("bad_config", f"unknown keys {unknown}")
    try:
        Boundary(values.get("bc", Boundary.TORUS.value))
    except ValueError:
        raise ConfigError("unknown_boundary", values.get("bc"))
    for key, allowed in _CHOICES.items():
        if key in values and values[key] not in allowed:
            raise ConfigError("bad_config", f"{key} must be one of {list(allowed)} (got {values[key]!r})")
    cfg = RunConfig(**values)
    logger.debug("Run config: %s", cfg)
    return cfg
