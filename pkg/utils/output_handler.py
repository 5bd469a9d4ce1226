import json
import logging
import os
import platform
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import scipy

import config

logger = logging.getLogger(__name__)


def round_significant(value: Any, digits: int = config.FLOAT_DIGITS) -> Any:
    """Recursively round floats to `digits` significant digits and make numpy values JSON-ready"""
    if isinstance(value, dict):
        return {str(k): round_significant(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_significant(v, digits) for v in value]
    if isinstance(value, np.ndarray):
        return round_significant(value.tolist(), digits)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            return str(value)
        return float(f"{value:.{digits}g}")
    if isinstance(value, complex):
        return {"real": round_significant(value.real, digits), "imag": round_significant(value.imag, digits)}
    return value


class OutputHandler:
    """Writes command results (JSON/CSV/XLSX) and the run manifest beside them"""

    def __init__(self, output_dir: Optional[str] = None):
        """Initialize output handler with output directory"""
        self.output_dir = output_dir or config.OUTPUT_DIR
        os.makedirs(self.output_dir, exist_ok=True)

    def resolve(self, filename: str) -> str:
        """Bare file names go to the output directory; paths are used as given"""
        if os.path.dirname(filename):
            path = filename
        else:
            path = os.path.join(self.output_dir, filename)
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        return path

    def save_to_json(self, payload: Dict[str, Any], filename: str) -> str:
        """Save a result document to JSON"""
        filepath = self.resolve(filename)
        with open(filepath, "w", encoding="utf-8") as f:
            json.dump(round_significant(payload), f, indent=2, ensure_ascii=False)
            f.write("\n")
        logger.info("Wrote %s", filepath)
        return filepath

    def save_to_csv(self, rows: List[Dict[str, Any]], filename: str) -> str:
        """Save tabular rows to CSV"""
        filepath = self.resolve(filename)
        df = pd.DataFrame(rows)
        df.to_csv(filepath, index=False, float_format=f"%.{config.FLOAT_DIGITS}g", lineterminator="\n")
        logger.info("Wrote %s", filepath)
        return filepath

    def save_to_excel(self, rows: List[Dict[str, Any]], filename: str, sheet_name: str = "Results") -> str:
        """Save tabular rows to an Excel workbook"""
        filepath = self.resolve(filename)
        df = pd.DataFrame(round_significant(rows))

        with pd.ExcelWriter(filepath, engine="openpyxl") as writer:
            df.to_excel(writer, sheet_name=sheet_name, index=False)

            # Auto-adjust column widths
            worksheet = writer.sheets[sheet_name]
            for column in worksheet.columns:
                max_length = max(len(str(cell.value)) for cell in column if cell.value is not None)
                worksheet.column_dimensions[column[0].column_letter].width = min(max_length + 2, 50)

        logger.info("Wrote %s", filepath)
        return filepath

    @staticmethod
    def manifest_path(output_path: str) -> str:
        stem, _ = os.path.splitext(output_path)
        return stem + config.MANIFEST_SUFFIX

    def write_manifest(self, output_path: str, run_config: Dict[str, Any], wall_time: float,
                       extra: Optional[Dict[str, Any]] = None) -> str:
        """Config echo, versions and wall time for one output file"""
        manifest = {
            "output": os.path.basename(output_path),
            "config": run_config,
            "versions": {
                "kitaev_lab": config.__version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "pandas": pd.__version__,
            },
            "wall_time_seconds": wall_time,
        }
        if extra:
            manifest.update(extra)
        path = self.manifest_path(output_path)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(round_significant(manifest), f, indent=2, ensure_ascii=False)
            f.write("\n")
        return path

    @staticmethod
    def generate_summary_stats(results: List[Dict[str, Any]]) -> Dict[str, Any]:
        """Counts of successful and failed sweep points"""
        failures = [r for r in results if "error" in r]
        return {
            "total_points": len(results),
            "successful_points": len(results) - len(failures),
            "failed_points": len(failures),
            "success_rate": (len(results) - len(failures)) / len(results) * 100 if results else 0,
        }
