import json

from commands.base import CommandResult, lattice_from
from utils.output_handler import OutputHandler, round_significant
from utils.run_config import RunConfig


def cmd_lattice_info(cfg: RunConfig, handler: OutputHandler) -> CommandResult:
    """Dump sites, typed bonds and plaquette walks"""
    payload = lattice_from(cfg).to_dict()
    path = handler.save_to_json(payload, cfg.output or "lattice_info.json")
    return CommandResult(outputs=[path], stdout=json.dumps(round_significant(payload), indent=2))
