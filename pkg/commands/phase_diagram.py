import os

import pandas as pd

from commands.base import CommandResult, progress_bar
from models.majorana import phase_point, ternary_grid
from utils.batch_runner import BatchRunner, error_rows
from utils.output_handler import OutputHandler
from utils.run_config import RunConfig


def cmd_phase_diagram(cfg: RunConfig, handler: OutputHandler) -> CommandResult:
    """Phase label and vortex-free gap over the Jx + Jy + Jz = 1 simplex"""
    points = ternary_grid(cfg.step)
    with progress_bar(len(points), "phase diagram") as bar:
        rows = BatchRunner().run(points, lambda p: phase_point(*p, cfg.gap_size), bar.update)
    rows = error_rows(rows)

    path = handler.save_to_csv(rows, cfg.output or "phase_diagram.csv")
    outputs = [path]
    if cfg.xlsx:
        outputs.append(handler.save_to_excel(rows, os.path.splitext(path)[0] + ".xlsx", sheet_name="Phase Diagram"))

    stats = handler.generate_summary_stats(rows)
    stdout = f"{stats['total_points']} points ({stats['failed_points']} failed)"
    succeeded = pd.DataFrame([r for r in rows if "error" not in r])
    if not succeeded.empty:
        stdout += "\n" + succeeded["phase"].value_counts().sort_index().to_string()
    return CommandResult(outputs=outputs, stdout=stdout, manifest_extra={"summary": stats})
