import logging

import pandas as pd

import config
from commands.base import CommandResult, lattice_from, progress_bar
from models.braid_protocol import (
    NON_ABELIAN_PREDICTION,
    HexagonNumbering,
    angle_distance,
    default_script,
    protocol_ground_state,
    run_protocol,
    statistics_discriminator,
)
from utils.batch_runner import BatchRunner, failed
from utils.output_handler import OutputHandler
from utils.run_config import RunConfig

logger = logging.getLogger(__name__)

PREDICTION_NOTE = ("for non-Abelian vortices one loop (two exchanges) is expected to leave the ancilla "
                   "with phase -pi/2; two loops give pi and four loops 0, up to an overall pi")
NUMBERING_NOTE = {
    HexagonNumbering.LOOP: "each letter is the site's outward link, so the loop operator equals W_p",
    HexagonNumbering.PLAQUETTE: "positions follow the W_p walk",
}


def verdict(report) -> str:
    predicted = NON_ABELIAN_PREDICTION.get(report.loops)
    if predicted is None:
        return "n/a"
    return "CONFIRMED" if angle_distance(report.phase, predicted) <= config.PHASE_TOLERANCE else "DEVIATION"


def cmd_braid(cfg: RunConfig, handler: OutputHandler) -> CommandResult:
    """Run the ancilla protocol for each loop count and compare with the non-Abelian prediction"""
    lattice = lattice_from(cfg)
    params = cfg.couplings()
    ground = protocol_ground_state(lattice, params, cfg.seed)
    numbering = HexagonNumbering(cfg.numbering)

    def worker(loops):
        script = default_script(lattice, loops, cfg.braid_plaquette, cfg.creation_site, numbering, cfg.measure_angle)
        return run_protocol(lattice, params, script, ground=ground, seed=cfg.seed)

    with progress_bar(len(cfg.loops), "braid") as bar:
        results = BatchRunner().run(cfg.loops, worker, bar.update)
    errors = failed(results)
    if errors:
        raise errors[0]["exception"]
    reports = results

    payload = {
        "lattice": {"Lx": lattice.Lx, "Ly": lattice.Ly, "boundary": lattice.boundary.value},
        "couplings": params.to_dict(),
        "numbering": numbering.value,
        "ground_energy": ground.ground_energy,
        "prediction_note": PREDICTION_NOTE,
        "reports": [{**r.to_dict(), "verdict": verdict(r)} for r in reports],
    }
    table = pd.DataFrame([{
        "loops": r.loops,
        "phase": r.phase,
        "|phase|": r.abs_phase,
        "coherence": r.coherence,
        "max_leakage": max(r.leakage),
        "predicted": NON_ABELIAN_PREDICTION.get(r.loops),
        "verdict": verdict(r),
    } for r in reports])
    header = f"hexagon numbering: {numbering.value} ({NUMBERING_NOTE[numbering]})"
    stdout = header + "\n\n" + table.to_string(index=False, float_format=lambda v: f"{v:.6f}")

    if cfg.discriminate:
        classification = statistics_discriminator(reports)
        payload["discrimination"] = classification.value
        stdout += f"\n\nstatistics: {classification.value}"

    path = handler.save_to_json(payload, cfg.output or "braid.json")
    return CommandResult(outputs=[path], stdout=stdout)
