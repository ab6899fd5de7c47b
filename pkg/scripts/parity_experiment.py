"""
Experimento de paridad: baseline frente a NeuroView con el mismo protocolo.

Entrena vgg-mini como clasificador convencional y como NeuroView (Soft VQ con
reducción media) sobre MNIST con la misma semilla y los mismos
hiperparámetros, y compara la accuracy sobre el split de test. Criterio:
ambos modelos >= 95% y diferencia absoluta <= 2 puntos.

Uso:
    python scripts/parity_experiment.py --data data/mnist --out runs/parity
"""

import argparse
import sys
from pathlib import Path

from neuroview.config import NeuroViewConfig, TrainConfig
from neuroview.core.arch import resolve_arch, unit_count
from neuroview.core.factory import build_model
from neuroview.data.factory import load_split_pair
from neuroview.stores.checkpoint_store import CheckpointStore
from neuroview.training.metrics import evaluate
from neuroview.training.trainer import train
from neuroview.utils.manifest import RunManifest, dump_json, load_config_defaults

MIN_ACCURACY = 0.95
MAX_GAP = 0.02

DEFAULT_CONFIG = Path(__file__).resolve().parent.parent / "configs" / "parity.json"


def run_family(family, spec, protocol, train_data, test_data, out_dir):
    """
    Entrena y evalúa una familia de modelos.

    Returns:
        float: Accuracy sobre el split de test.
    """
    neuroview_config = None
    if family == "neuroview":
        neuroview_config = NeuroViewConfig(vq=protocol["vq"], reduce=protocol["reduce"])

    model = build_model(family, spec, neuroview_config, seed=protocol["seed"])
    train_config = TrainConfig(
        epochs=protocol["epochs"],
        batch_size=protocol["batch"],
        learning_rate=protocol["lr"],
        momentum=protocol["momentum"],
        weight_decay=protocol["wd"],
        seed=protocol["seed"],
        progress=True,
    )

    result = train(model, train_data, train_config, out_dir=out_dir / family)
    CheckpointStore(out_dir / family / "checkpoint").save(
        model, {"class_names": train_data.class_names, "history": result.history}
    )
    accuracy = evaluate(model, test_data).accuracy
    print(f"  {family}: pérdida final {result.final_train_loss:.4f}, accuracy test {accuracy:.4f}")
    return accuracy


def main(argv=None):
    parser = argparse.ArgumentParser(description="Paridad baseline / NeuroView sobre MNIST")
    parser.add_argument("--data", type=Path, default=Path("data/mnist"), help="Directorio IDX de MNIST")
    parser.add_argument("--out", type=Path, default=Path("runs/parity"))
    parser.add_argument("--config", type=Path, default=DEFAULT_CONFIG)
    args = parser.parse_args(argv)

    protocol = load_config_defaults(args.config)

    print("=" * 70)
    print("NEUROVIEW - EXPERIMENTO DE PARIDAD")
    print("=" * 70)

    try:
        train_data, test_data = load_split_pair(args.data, protocol.get("format", "idx"))
    except Exception as e:
        print(f"Error al cargar el dataset: {e}")
        return 3

    spec = resolve_arch(protocol["arch"], train_data.input_shape, train_data.num_classes)
    print(f"\nArquitectura {spec.name}: {unit_count(spec)} unidades")
    print(f"Entrenamiento: {len(train_data)} muestras, test: {len(test_data)} muestras\n")

    accuracies = {
        family: run_family(family, spec, protocol, train_data, test_data, args.out)
        for family in ("baseline", "neuroview")
    }
    gap = abs(accuracies["baseline"] - accuracies["neuroview"])
    passed = min(accuracies.values()) >= MIN_ACCURACY and gap <= MAX_GAP

    dump_json(args.out / "parity.json", {"accuracy": accuracies, "gap": gap, "passed": passed})
    RunManifest(command="parity", seed=protocol["seed"], flags=protocol,
                arch=spec.model_dump(mode="json"), inputs={"data": str(args.data)}).write(args.out)

    print(f"\n{'='*70}")
    print(f"Diferencia absoluta: {gap * 100:.2f} puntos")
    print("Resultado: " + ("PARIDAD" if passed else "SIN PARIDAD"))
    print(f"{'='*70}")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
