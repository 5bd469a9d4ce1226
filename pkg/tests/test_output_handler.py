import json
import math

import numpy as np
import pandas as pd
import pytest

import config
from utils.batch_runner import BatchRunner, error_rows, failed
from utils.output_handler import OutputHandler, round_significant


class TestRoundSignificant:
    def test_floats_keep_twelve_digits(self):
        assert round_significant(1 / 3) == 0.333333333333
        assert round_significant(2.0000000000000004) == 2.0

    def test_numpy_values(self):
        payload = round_significant({"a": np.float64(0.1), "b": np.int64(3), "c": np.array([1.5, 2.5]), "d": np.bool_(True)})
        assert payload == {"a": 0.1, "b": 3, "c": [1.5, 2.5], "d": True}
        assert type(payload["b"]) is int

    def test_complex_and_non_finite(self):
        assert round_significant(1 + 2j) == {"real": 1.0, "imag": 2.0}
        assert round_significant(math.inf) == "inf"


class TestOutputHandler:
    def test_bare_names_go_to_output_dir(self, output_dir):
        handler = OutputHandler()
        path = handler.save_to_json({"x": 1.0}, "result.json")
        assert path == str(output_dir / "result.json")
        assert json.loads((output_dir / "result.json").read_text()) == {"x": 1.0}

    def test_explicit_paths_are_kept(self, output_dir, tmp_path):
        target = tmp_path / "nested" / "out.json"
        assert OutputHandler().save_to_json({}, str(target)) == str(target)
        assert target.exists()

    def test_excel_round_trip(self, output_dir):
        rows = [{"L": 4, "gap": 2.0}, {"L": 5, "gap": 1.2360679775}]
        path = OutputHandler().save_to_excel(rows, "gaps.xlsx", sheet_name="Gap Sweep")
        df = pd.read_excel(path, sheet_name="Gap Sweep")
        assert df["L"].tolist() == [4, 5]
        assert df["gap"].tolist() == pytest.approx([2.0, 1.2360679775])

    def test_manifest_sits_beside_output(self, output_dir):
        handler = OutputHandler()
        path = handler.save_to_csv([{"a": 1}], "table.csv")
        manifest = handler.write_manifest(path, {"seed": 7}, 0.25, {"solver": "dense"})
        assert manifest == str(output_dir / f"table{config.MANIFEST_SUFFIX}")
        payload = json.loads(open(manifest, encoding="utf-8").read())
        assert payload["output"] == "table.csv"
        assert payload["config"] == {"seed": 7}
        assert payload["solver"] == "dense"

    def test_summary_stats(self):
        stats = OutputHandler.generate_summary_stats([{"gap": 1.0}, {"error": "boom"}])
        assert stats["failed_points"] == 1
        assert stats["success_rate"] == 50.0
        assert OutputHandler.generate_summary_stats([])["success_rate"] == 0


class TestBatchRunner:
    def test_preserves_order_across_batches(self):
        results = BatchRunner(batch_size=3, max_workers=2).run(range(10), lambda x: {"value": x * x})
        assert [r["value"] for r in results] == [x * x for x in range(10)]

    def test_failures_become_records(self):
        def worker(x):
            if x == 2:
                raise ValueError("bad point")
            return {"value": x}

        results = BatchRunner().run([1, 2, 3], worker)
        errors = failed(results)
        assert len(errors) == 1
        assert errors[0]["item"] == 2
        assert isinstance(errors[0]["exception"], ValueError)
        assert "exception" not in error_rows(results)[1]

    def test_progress_callback_counts_items(self):
        seen = []
        BatchRunner(batch_size=4).run(range(10), lambda x: {"x": x}, seen.append)
        assert seen == [4, 4, 2]

    def test_failed_ignores_non_dict_results(self):
        assert failed([object(), {"error": "x"}]) == [{"error": "x"}]
