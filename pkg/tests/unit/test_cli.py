"""
Tests de la interfaz de línea de comandos.

Los comandos se ejecutan a través de main() sobre datasets IDX de glifos
escritos en un directorio temporal y una arquitectura pequeña en JSON.
"""

import json

import numpy as np
import pandas as pd
import pytest

from neuroview.cli import main
from neuroview.data.dataset import Dataset
from neuroview.data.factory import save_dataset


def _tree_bytes(root):
    return {
        str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()
    }


@pytest.fixture
def workspace(tmp_path, glyphs, small_spec):
    """Dataset IDX train/val de glifos, arquitectura pequeña y un modelo entrenado."""
    data = tmp_path / "data"
    save_dataset(glyphs(per_class=6, seed=1), data, "idx")
    save_dataset(glyphs(per_class=2, seed=2, split="val"), data, "idx")
    arch = tmp_path / "arch.json"
    small_spec.save(arch)

    run = tmp_path / "run"
    code = main(["train", "--arch", str(arch), "--data", str(data), "--epochs", "1",
                 "--batch", "6", "--out", str(run)])
    assert code == 0
    return {"root": tmp_path, "data": data, "arch": arch, "run": run, "ckpt": run / "checkpoint"}


class TestTrainCommand:
    """
    Tests del comando train.
    """

    def test_writes_checkpoint_and_manifest(self, workspace):
        """
        Verifica el checkpoint, metrics.jsonl y el manifiesto de ejecución.
        """
        run = workspace["run"]
        assert (run / "checkpoint" / "manifest.json").is_file()
        assert len((run / "metrics.jsonl").read_text(encoding="utf-8").splitlines()) == 1

        manifest = json.loads((run / "run_manifest.json").read_text(encoding="utf-8"))
        assert manifest["command"] == "train"
        assert manifest["flags"]["epochs"] == 1
        assert manifest["neuroview"]["reduce"] == "max"
        assert manifest["arch"]["input_shape"] == [1, 8, 8]

        metadata = json.loads((run / "checkpoint" / "manifest.json").read_text(encoding="utf-8"))
        assert metadata["metadata"]["class_names"] == ["0", "1", "2"]

    def test_same_flags_same_checkpoint_bytes(self, workspace):
        """
        Verifica que dos ejecuciones con los mismos flags produzcan checkpoints idénticos.
        """
        again = workspace["root"] / "again"
        code = main(["train", "--arch", str(workspace["arch"]), "--data", str(workspace["data"]),
                     "--epochs", "1", "--batch", "6", "--out", str(again)])

        assert code == 0
        assert _tree_bytes(again / "checkpoint") == _tree_bytes(workspace["ckpt"])

    def test_manifest_as_config_reproduces_run(self, workspace):
        """
        Verifica que un run_manifest.json sirva de --config para repetir el entrenamiento.
        """
        again = workspace["root"] / "replay"
        code = main(["--config", str(workspace["run"] / "run_manifest.json"), "train", "--out", str(again)])

        assert code == 0
        assert _tree_bytes(again / "checkpoint") == _tree_bytes(workspace["ckpt"])

    def test_explicit_flag_overrides_config(self, workspace):
        """
        Verifica que un flag explícito prevalezca sobre el valor de --config.
        """
        config = workspace["root"] / "config.json"
        config.write_text(json.dumps({
            "arch": str(workspace["arch"]), "data": str(workspace["data"]),
            "epochs": 1, "batch": 6, "reduce": "mean",
        }), encoding="utf-8")
        out = workspace["root"] / "override"

        code = main(["--config", str(config), "train", "--epochs", "2", "--out", str(out)])
        manifest = json.loads((out / "run_manifest.json").read_text(encoding="utf-8"))

        assert code == 0
        assert manifest["flags"]["epochs"] == 2
        assert manifest["neuroview"]["reduce"] == "mean"

    def test_baseline_family(self, workspace):
        """
        Verifica el entrenamiento del baseline.
        """
        out = workspace["root"] / "baseline"
        code = main(["train", "--baseline", "--arch", str(workspace["arch"]), "--data",
                     str(workspace["data"]), "--epochs", "1", "--out", str(out)])

        assert code == 0
        metadata = json.loads((out / "checkpoint" / "manifest.json").read_text(encoding="utf-8"))
        assert metadata["model"]["family"] == "baseline"

    def test_missing_data_exits_3(self, workspace):
        """
        Verifica el código 3 cuando el dataset no existe.
        """
        code = main(["train", "--data", str(workspace["root"] / "nope"), "--out",
                     str(workspace["root"] / "out")])
        assert code == 3

    def test_missing_flag_exits_2(self):
        """
        Verifica el código 2 cuando falta un flag obligatorio.
        """
        with pytest.raises(SystemExit) as excinfo:
            main(["train"])
        assert excinfo.value.code == 2

    def test_unknown_config_key_exits_2(self, tmp_path):
        """
        Verifica el código 2 con claves desconocidas en --config.
        """
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"epochz": 3}), encoding="utf-8")
        with pytest.raises(SystemExit) as excinfo:
            main(["--config", str(config), "gradcheck"])
        assert excinfo.value.code == 2

    def test_missing_config_exits_3(self, tmp_path):
        """
        Verifica el código 3 cuando el fichero --config no existe.
        """
        assert main(["--config", str(tmp_path / "none.json"), "gradcheck"]) == 3


class TestAnalysisCommands:
    """
    Tests de los comandos que leen un checkpoint.
    """

    def test_eval(self, workspace):
        """
        Verifica evaluation.json con accuracy y matriz de confusión.
        """
        out = workspace["root"] / "eval"
        code = main(["eval", "--ckpt", str(workspace["ckpt"]), "--data", str(workspace["data"]),
                     "--out", str(out)])
        result = json.loads((out / "evaluation.json").read_text(encoding="utf-8"))

        assert code == 0
        assert 0.0 <= result["accuracy"] <= 1.0
        assert np.asarray(result["confusion"]).sum() == 6

    @pytest.mark.parametrize("fmt", ["csv", "json", "svg"])
    def test_explain(self, workspace, fmt):
        """
        Verifica el informe de pesos en cada formato.
        """
        out = workspace["root"] / f"explain_{fmt}"
        code = main(["explain", "--ckpt", str(workspace["ckpt"]), "--class", "2",
                     "--format", fmt, "--out", str(out)])

        assert code == 0
        assert (out / f"report_class2.{fmt}").is_file()
        assert (out / "run_manifest.json").is_file()

    def test_explain_unknown_class_exits_5(self, workspace):
        """
        Verifica el código 5 con una clase inexistente.
        """
        code = main(["explain", "--ckpt", str(workspace["ckpt"]), "--class", "7",
                     "--out", str(workspace["root"] / "x")])
        assert code == 5

    def test_explain_missing_checkpoint_exits_3(self, workspace):
        """
        Verifica el código 3 con un checkpoint inexistente.
        """
        code = main(["explain", "--ckpt", str(workspace["root"] / "nope"), "--class", "0",
                     "--out", str(workspace["root"] / "x")])
        assert code == 3

    def test_concepts(self, workspace):
        """
        Verifica el mapa de conceptos en CSV.
        """
        labels = workspace["root"] / "labels.csv"
        labels.write_text("layer,channel,concept,category\n0,0,stripe,texture\n1,3,dots,texture\n",
                          encoding="utf-8")
        out = workspace["root"] / "concepts"
        code = main(["concepts", "--ckpt", str(workspace["ckpt"]), "--labels", str(labels),
                     "--class", "0", "--format", "csv", "--out", str(out)])

        assert code == 0
        frame = pd.read_csv(out / "concepts_class0.csv")
        assert sorted(frame["concept"]) == ["dots", "stripe", "unlabeled"]

    def test_concepts_invalid_labels_exits_5(self, workspace):
        """
        Verifica el código 5 con una etiqueta de una unidad inexistente.
        """
        labels = workspace["root"] / "labels.csv"
        labels.write_text("layer,channel,concept,category\n5,0,sky,scene\n", encoding="utf-8")
        code = main(["concepts", "--ckpt", str(workspace["ckpt"]), "--labels", str(labels),
                     "--class", "0", "--out", str(workspace["root"] / "c")])
        assert code == 5

    def test_view_means(self, workspace):
        """
        Verifica las medias por vista en JSON.
        """
        out = workspace["root"] / "vm"
        code = main(["view-means", "--ckpt", str(workspace["ckpt"]), "--class", "1",
                     "--format", "json", "--out", str(out)])
        payload = json.loads((out / "view_means_class1.json").read_text(encoding="utf-8"))

        assert code == 0
        assert [item["view"] for item in payload["view_means"]] == [0]

    def test_similarity_and_compare(self, workspace):
        """
        Verifica la matriz de similitud y la comparación de un checkpoint consigo mismo.
        """
        out = workspace["root"] / "sim"
        assert main(["similarity", "--ckpt", str(workspace["ckpt"]), "--out", str(out)]) == 0
        frame = pd.read_csv(out / "similarity.csv", index_col="class")
        assert frame.shape == (3, 3)

        out = workspace["root"] / "cmp"
        code = main(["compare", "--ckpt-a", str(workspace["ckpt"]), "--ckpt-b", str(workspace["ckpt"]),
                     "--class", "0", "--out", str(out)])
        layers = pd.read_csv(out / "compare_layers.csv")

        assert code == 0
        assert (layers["delta"] == 0.0).all()

    def test_perturb_on_grayscale_exits_5(self, workspace):
        """
        Verifica el código 5 al anular un canal de color en datos de un canal.
        """
        code = main(["perturb", "--ckpt", str(workspace["ckpt"]), "--data", str(workspace["data"]),
                     "--out", str(workspace["root"] / "p")])
        assert code == 5

    def test_perturb_none_only(self, workspace):
        """
        Verifica la tabla contrafactual limitada al canal 'none'.
        """
        out = workspace["root"] / "p"
        code = main(["perturb", "--ckpt", f"nv={workspace['ckpt']}", "--data", str(workspace["data"]),
                     "--channels", "none", "--out", str(out)])
        frame = pd.read_csv(out / "counterfactual.csv")

        assert code == 0
        assert list(frame.columns) == ["network", "class", "none", "red", "green", "blue"]
        assert set(frame["network"]) == {"nv"}
        assert frame["red"].isna().all()


class TestToolCommands:
    """
    Tests de gradcheck y de la generación de datasets.
    """

    def test_gradcheck_passes(self, tmp_path):
        """
        Verifica el código 0 y gradcheck.json cuando todo está dentro de la tolerancia.
        """
        code = main(["gradcheck", "--instances", "2", "--ops", "relu", "sigmoid", "--out", str(tmp_path)])
        payload = json.loads((tmp_path / "gradcheck.json").read_text(encoding="utf-8"))

        assert code == 0
        assert set(payload["max_relative_error"]) == {"relu", "sigmoid"}

    def test_gradcheck_fails_with_zero_tolerance(self):
        """
        Verifica el código 1 cuando el error supera la tolerancia.
        """
        assert main(["gradcheck", "--instances", "2", "--ops", "sigmoid", "--tolerance", "1e-30"]) == 1

    def test_make_colored_mnist(self, tmp_path):
        """
        Verifica la generación de colored MNIST en png-dir con límite de muestras.
        """
        rng = np.random.default_rng(0)
        source = tmp_path / "mnist"
        for split, count in (("train", 30), ("val", 20)):
            labels = np.arange(count) % 10
            save_dataset(Dataset(rng.uniform(size=(count, 1, 6, 6)), labels,
                                 [str(k) for k in range(10)], split=split), source, "idx")

        out = tmp_path / "colored"
        code = main(["dataset", "make-colored-mnist", "--data", str(source), "--limit", "10",
                     "--out", str(out)])

        assert code == 0
        assert len(list((out / "train").rglob("*.png"))) == 10
        assert len(list((out / "val").rglob("*.png"))) == 10
        assert (out / "run_manifest.json").is_file()
