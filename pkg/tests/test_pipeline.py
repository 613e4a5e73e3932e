"""Tests for field I/O, field runs, scatter output and chunked dispatch."""
import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from src.config import ConfigLoader
from src.corrector.integrate import integrate_points
from src.corrector.load import LoadHistory, ramp_load
from src.corrector.state import SolverSettings
from src.errors import FailureThresholdExceeded, InputError, ValidationError
from src.material.params import MaterialParams
from src.pipeline.field_io import read_elastic_field
from src.pipeline.runner import RunConfig, run_correction
from src.pipeline.scatter import emit_scatter, relative_difference
from src.qoi.metrics import QOI_NAMES
from src.surrogate.gp import save_model, train
from src.surrogate.training import build_training_set
from src.utils.parallel import chunk_slices, parallel_map


def _run_config(field: Path, load: Path, out: Path, params: MaterialParams, **kwargs) -> RunConfig:
    kwargs.setdefault("settings", SolverSettings.for_material(params))
    kwargs.setdefault("chunk_size", 4)
    return RunConfig(field_path=field, load_path=load, output_dir=out, params=params, **kwargs)


def _square(x: int) -> int:
    return x * x


class TestReadElasticField:
    """Tests for read_elastic_field."""

    def test_scalar_field(self, field_csv: Path):
        """Scalar-only field keeps ids and order."""
        field = read_elastic_field(field_csv)
        assert field.ids == [f"p{j}" for j in range(9)]
        assert field.sigma_vm_sharp[-1] == 1200.0
        assert not field.has_tensors

    def test_full_precision_values(self, tmp_path: Path):
        """17-digit stresses are read back to the same double."""
        svm = [0.1 + 0.2, 1.0 / 3.0, 123.456789012345678, 2.0 ** 0.5 * 100.0]
        path = tmp_path / "field.csv"
        pd.DataFrame({"id": ["a", "b", "c", "d"], "svm": svm}).to_csv(path, index=False, float_format="%.17g")
        assert_array_equal(read_elastic_field(path).sigma_vm_sharp, svm)

    def test_tensor_field(self, tensor_field_csv: Path):
        """Tensor columns are read with the trace."""
        field = read_elastic_field(tensor_field_csv)
        assert field.has_tensors
        assert_allclose(field.sigma_vm_sharp, [150.0, 300.0, 80.0], rtol=1e-12)
        assert field[0].trace_sigma_sharp == 30.0
        assert field[2].dev_sigma_sharp.shape == (6,)

    def test_svm_derived_from_tensors(self, tmp_path: Path):
        """svm is computed when only the deviator is given."""
        path = tmp_path / "field.csv"
        path.write_text("id,s11,s22,s33,s12,s13,s23\nq,100,-50,-50,0,0,0\n", encoding="utf-8")
        assert_allclose(read_elastic_field(path).sigma_vm_sharp, [150.0], rtol=1e-14)

    def test_svm_mismatch(self, tmp_path: Path):
        """A stated svm that disagrees with the tensors lists the id."""
        path = tmp_path / "field.csv"
        path.write_text("id,svm,s11,s22,s33,s12,s13,s23\nok,150,100,-50,-50,0,0,0\nbad,120,100,-50,-50,0,0,0\n",
                        encoding="utf-8")
        with pytest.raises(ValidationError) as excinfo:
            read_elastic_field(path)
        assert excinfo.value.ids == ["bad"]

    def test_non_deviatoric(self, tmp_path: Path):
        """Deviatoric columns with a trace are rejected."""
        path = tmp_path / "field.csv"
        path.write_text("id,s11,s22,s33,s12,s13,s23\nt,100,0,0,0,0,0\n", encoding="utf-8")
        with pytest.raises(ValidationError, match="trace"):
            read_elastic_field(path)

    def test_malformed_line(self, tmp_path: Path):
        """Malformed numbers are reported with their line number."""
        path = tmp_path / "field.csv"
        path.write_text("id,svm\na,10\nb,oops\nc,30\n", encoding="utf-8")
        with pytest.raises(InputError, match="line\\(s\\) 3"):
            read_elastic_field(path)

    def test_negative_svm(self, tmp_path: Path):
        """Negative von Mises values are input errors."""
        path = tmp_path / "field.csv"
        path.write_text("id,svm\na,10\nb,-1\n", encoding="utf-8")
        with pytest.raises(InputError, match="Negative svm"):
            read_elastic_field(path)

    def test_duplicate_ids(self, tmp_path: Path):
        """Duplicate ids are listed."""
        path = tmp_path / "field.csv"
        path.write_text("id,svm\na,10\nb,20\na,30\n", encoding="utf-8")
        with pytest.raises(ValidationError) as excinfo:
            read_elastic_field(path)
        assert excinfo.value.ids == ["a"]

    def test_partial_tensor_columns(self, tmp_path: Path):
        """A subset of the tensor columns is an input error naming the missing ones."""
        path = tmp_path / "field.csv"
        path.write_text("id,svm,s11,s22\na,10,1,-1\n", encoding="utf-8")
        with pytest.raises(InputError, match="s33"):
            read_elastic_field(path)

    def test_missing_columns(self, tmp_path: Path):
        """Neither svm nor tensors is an input error."""
        path = tmp_path / "field.csv"
        path.write_text("id,value\na,10\n", encoding="utf-8")
        with pytest.raises(InputError, match="svm"):
            read_elastic_field(path)

    def test_missing_file(self, tmp_path: Path):
        """Missing files raise FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            read_elastic_field(tmp_path / "none.csv")


class TestRunCorrection:
    """Tests for direct and surrogate field runs."""

    def test_outputs(self, field_csv: Path, cycles_csv: Path, tmp_path: Path, params: MaterialParams):
        """qoi.csv, failures.csv and summary.json are written in input order."""
        out = tmp_path / "run"
        summary = run_correction(_run_config(field_csv, cycles_csv, out, params))

        qoi = pd.read_csv(out / "qoi.csv", dtype={"id": str})
        assert list(qoi.columns) == ["id", *QOI_NAMES]
        assert qoi["id"].tolist() == [f"p{j}" for j in range(9)]
        assert_array_equal(qoi.loc[:2, ["p_final", "e_p_final", "delta_p", "dissipation"]].to_numpy(), 0.0)
        assert np.all(qoi.loc[3:, "p_final"] > 0.0)
        assert np.all(np.diff(qoi["p_final"].to_numpy()[3:]) > 0.0)

        failures = pd.read_csv(out / "failures.csv")
        assert list(failures.columns) == ["id", "time_index", "message"]
        assert failures.empty

        stored = json.loads((out / "summary.json").read_text())
        assert stored["points"] == summary["points"] == 9
        assert stored["steps"] == 200
        assert stored["failed_points"] == 0
        assert {"wall_time_s", "point_steps_per_s", "workers", "chunk_size", "mode"} <= set(stored)

    def test_matches_direct_integration(self, field_csv: Path, cycles_csv: Path, cycles: LoadHistory,
                                        tmp_path: Path, params: MaterialParams):
        """p_final in qoi.csv equals the in-memory batch integration."""
        out = tmp_path / "run"
        run_correction(_run_config(field_csv, cycles_csv, out, params, qois=["p_final"]))
        qoi = pd.read_csv(out / "qoi.csv")
        series = integrate_points(read_elastic_field(field_csv).sigma_vm_sharp, cycles, params)
        assert_allclose(qoi["p_final"].to_numpy(), series.p_hat[-1], rtol=1e-13, atol=0.0)

    def test_worker_count_does_not_change_results(self, field_csv: Path, cycles_csv: Path, tmp_path: Path,
                                                  params: MaterialParams):
        """1 and 2 workers give byte-identical result files; summary.json differs only in run facts."""
        single, pooled = tmp_path / "single", tmp_path / "pooled"
        run_correction(_run_config(field_csv, cycles_csv, single, params, workers=1, snapshots=[25]))
        run_correction(_run_config(field_csv, cycles_csv, pooled, params, workers=2, snapshots=[25]))
        names = sorted(p.name for p in single.iterdir() if p.name != "summary.json")
        assert names == sorted(p.name for p in pooled.iterdir() if p.name != "summary.json")
        for name in names:
            assert (single / name).read_bytes() == (pooled / name).read_bytes(), name

        run_facts = {"workers", "wall_time_s", "point_steps_per_s"}
        a = json.loads((single / "summary.json").read_text())
        b = json.loads((pooled / "summary.json").read_text())
        assert {k: v for k, v in a.items() if k not in run_facts} == {k: v for k, v in b.items() if k not in run_facts}

    def test_snapshots(self, field_csv: Path, cycles_csv: Path, cycles: LoadHistory, tmp_path: Path,
                       params: MaterialParams):
        """Requested time indices are written as snapshot files."""
        out = tmp_path / "run"
        run_correction(_run_config(field_csv, cycles_csv, out, params, snapshots=[25, 200]))
        snap = pd.read_csv(out / "snapshot_25.csv", dtype={"id": str})
        assert list(snap.columns) == ["id", "t", "f", "s", "e", "e_p", "p_hat", "x", "f_y"]
        assert_allclose(snap["f"], cycles.values[25])
        assert (out / "snapshot_200.csv").exists()
        assert np.all(snap["f_y"] <= 1e-6)

    def test_snapshot_out_of_range(self, field_csv: Path, cycles_csv: Path, tmp_path: Path,
                                   params: MaterialParams):
        """Snapshot indices beyond the history are input errors."""
        with pytest.raises(InputError, match="Snapshot"):
            run_correction(_run_config(field_csv, cycles_csv, tmp_path / "run", params, snapshots=[201]))

    def test_ramp_drops_delta_p(self, field_csv: Path, ramp_csv: Path, tmp_path: Path, params: MaterialParams):
        """Without a complete cycle delta_p is left out of qoi.csv."""
        out = tmp_path / "run"
        run_correction(_run_config(field_csv, ramp_csv, out, params))
        columns = pd.read_csv(out / "qoi.csv").columns
        assert "delta_p" not in columns
        assert "p_final" in columns

    def test_explicit_missing_cycle(self, field_csv: Path, ramp_csv: Path, tmp_path: Path,
                                    params: MaterialParams):
        """An explicit cycle index on a ramp is an input error."""
        with pytest.raises(InputError):
            run_correction(_run_config(field_csv, ramp_csv, tmp_path / "run", params, cycle_index=0))

    def test_failure_threshold(self, field_csv: Path, cycles_csv: Path, tmp_path: Path,
                               params: MaterialParams):
        """Failed points are logged and the threshold raises after writing outputs."""
        out = tmp_path / "run"
        crippled = SolverSettings(max_newton_iters=1, bisection_fallback=False)
        config = _run_config(field_csv, cycles_csv, out, params, settings=crippled, max_failure_fraction=0.0)
        with pytest.raises(FailureThresholdExceeded):
            run_correction(config)
        failures = pd.read_csv(out / "failures.csv", dtype={"id": str})
        assert not failures.empty
        assert set(failures["id"]) <= {f"p{j}" for j in range(3, 9)}
        assert (out / "qoi.csv").exists()

    def test_surrogate_mode(self, field_csv: Path, cycles_csv: Path, tmp_path: Path, params: MaterialParams):
        """Surrogate runs predict the model QoI for every point."""
        inputs, targets = build_training_set(params, ramp_load(1.0, 100), 30, 12.0)
        model_path = tmp_path / "gp.json"
        save_model(train(inputs, targets, restarts=1), model_path)

        out = tmp_path / "run"
        summary = run_correction(_run_config(field_csv, cycles_csv, out, params, mode="surrogate",
                                             model_path=model_path, snapshots=[3]))
        qoi = pd.read_csv(out / "qoi.csv")
        assert list(qoi.columns) == ["id", "e_p_final"]
        assert_array_equal(qoi["e_p_final"].to_numpy()[:3], 0.0)
        assert np.all(qoi["e_p_final"].to_numpy()[3:] > 0.0)
        assert summary["mode"] == "surrogate"
        assert not (out / "snapshot_3.csv").exists()


class TestRunConfig:
    """Tests for RunConfig validation."""

    @pytest.mark.parametrize(
        "kwargs,match",
        [
            ({"mode": "fast"}, "mode"),
            ({"mode": "surrogate"}, "model path"),
            ({"qois": []}, "empty"),
            ({"qois": ["p_final", "energy"]}, "energy"),
            ({"workers": 0}, ">= 1"),
            ({"chunk_size": 0}, ">= 1"),
            ({"max_failure_fraction": 1.5}, "max_failure_fraction"),
        ],
    )
    def test_invalid(self, kwargs, match, params: MaterialParams, tmp_path: Path):
        """Invalid run settings are input errors."""
        with pytest.raises(InputError, match=match):
            _run_config(tmp_path / "f.csv", tmp_path / "l.csv", tmp_path, params, **kwargs)

    def test_from_config_overrides(self, test_env_vars, test_config_yaml: Path, tmp_path: Path):
        """Non-None overrides win over the config file."""
        config = RunConfig.from_config(ConfigLoader(str(test_config_yaml)), field_path=tmp_path / "f.csv",
                                       load_path=tmp_path / "l.csv", output_dir=tmp_path, workers=None,
                                       chunk_size=16)
        assert config.chunk_size == 16
        assert config.workers == 1
        assert config.params.sigma_y == 100.0


class TestScatter:
    """Tests for emit_scatter."""

    @staticmethod
    def _qoi_file(path: Path, ids, values) -> Path:
        pd.DataFrame({"id": ids, "p_final": values}).to_csv(path, index=False)
        return path

    def test_pairs_by_id(self, tmp_path: Path):
        """Rows follow file A; B is matched by id."""
        a = self._qoi_file(tmp_path / "a.csv", ["x", "y", "z"], [1.0, 2.0, 0.0])
        b = self._qoi_file(tmp_path / "b.csv", ["z", "x", "y"], [0.0, 1.1, 3.0])
        out = tmp_path / "scatter.csv"
        frame, within = emit_scatter(a, b, "p_final", out)
        assert frame["id"].tolist() == ["x", "y", "z"]
        assert_allclose(frame["relative_difference"], [-0.1 / 1.1, -1.0 / 3.0, 0.0])
        assert within == pytest.approx(200.0 / 3.0)
        assert out.read_text().rstrip().splitlines()[-1].startswith("# p_final: 66.67% of 3 points")

    def test_full_precision_values(self, tmp_path: Path):
        """Values written with 17 digits pair exactly."""
        values = [0.1 + 0.2, 1.0 / 3.0, 7.000000000000001e-05]
        a = tmp_path / "a.csv"
        pd.DataFrame({"id": ["x", "y", "z"], "p_final": values}).to_csv(a, index=False, float_format="%.17g")
        frame, within = emit_scatter(a, a, "p_final")
        assert_array_equal(frame["a"], values)
        assert_array_equal(frame["relative_difference"], 0.0)
        assert within == 100.0

    def test_id_mismatch(self, tmp_path: Path):
        """Different id sets list the unmatched ids."""
        a = self._qoi_file(tmp_path / "a.csv", ["x", "y"], [1.0, 2.0])
        b = self._qoi_file(tmp_path / "b.csv", ["x", "w"], [1.0, 2.0])
        with pytest.raises(ValidationError) as excinfo:
            emit_scatter(a, b, "p_final")
        assert excinfo.value.ids == ["w", "y"]

    def test_missing_column(self, tmp_path: Path):
        """The QoI column must exist in both files."""
        a = self._qoi_file(tmp_path / "a.csv", ["x"], [1.0])
        with pytest.raises(InputError, match="dissipation"):
            emit_scatter(a, a, "dissipation")

    def test_relative_difference_zero_reference(self):
        """Zero reference gives inf unless both are zero."""
        rel = relative_difference([0.0, 1.0], [0.0, 0.0])
        assert rel[0] == 0.0
        assert np.isinf(rel[1])


class TestParallel:
    """Tests for chunk_slices and parallel_map."""

    def test_chunk_slices(self):
        """Slices cover every item once, in order."""
        slices = chunk_slices(10, 4)
        assert [(s.start, s.stop) for s in slices] == [(0, 4), (4, 8), (8, 10)]
        assert chunk_slices(0, 4) == []

    def test_bad_chunk_size(self):
        """chunk_size < 1 is rejected."""
        with pytest.raises(ValueError):
            chunk_slices(10, 0)

    @pytest.mark.parametrize("workers", [1, 3])
    def test_parallel_map_keeps_order(self, workers):
        """Results come back in task order."""
        assert parallel_map(_square, list(range(7)), workers) == [j * j for j in range(7)]
