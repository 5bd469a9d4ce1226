import os

import pandas as pd

import config
from commands.base import CommandResult, progress_bar
from models.errors import ConfigError
from models.majorana import bulk_gap_estimate, classify_phase
from utils.batch_runner import BatchRunner, error_rows
from utils.output_handler import OutputHandler
from utils.run_config import RunConfig


def cmd_gap_sweep(cfg: RunConfig, handler: OutputHandler) -> CommandResult:
    """Vortex-free bulk gap on L x L tori for each requested size"""
    params = cfg.couplings()
    sizes = [int(L) for L in cfg.sizes]
    if sizes != sorted(sizes):
        raise ConfigError("bad_config", f"sizes must be ascending: {sizes}")
    phase = classify_phase(params).value

    def worker(L):
        (num_sites, gap), = bulk_gap_estimate(params, [L])
        return {"L": L, "num_sites": num_sites, "gap": gap, "phase": phase}

    with progress_bar(len(sizes), "gap sweep") as bar:
        rows = error_rows(BatchRunner().run(sizes, worker, bar.update))

    path = handler.save_to_csv(rows, cfg.output or "gap_sweep.csv")
    outputs = [path]
    if cfg.xlsx:
        outputs.append(handler.save_to_excel(rows, os.path.splitext(path)[0] + ".xlsx", sheet_name="Gap Sweep"))
    stdout = pd.DataFrame(rows).to_string(index=False, float_format=lambda v: f"{v:.{config.FLOAT_DIGITS}g}")
    return CommandResult(outputs=outputs, stdout=stdout, manifest_extra={"couplings": params.to_dict()})
