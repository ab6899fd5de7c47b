"""
Sonda de sesgo de color sobre colored MNIST.

Genera colored MNIST con el color totalmente correlacionado con la clase,
entrena un modelo NeuroView y lo evalúa con cada canal de color anulado. Un
modelo que ha aprendido el atajo del color pierde accuracy, en media por
clase, al anular el canal dominante del color de cada clase.

Uso:
    python scripts/bias_check.py --data data/mnist --out runs/bias_check
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from neuroview.analysis.counterfactual import (
    CHANNEL_NAMES,
    counterfactual_table,
    dominant_channel_drops,
)
from neuroview.analysis.explain import view_mean, weight_report
from neuroview.analysis.render import render
from neuroview.config import NeuroViewConfig, TrainConfig
from neuroview.core.arch import resolve_arch
from neuroview.core.factory import build_model
from neuroview.data.colored_mnist import make_colored_mnist
from neuroview.data.factory import load_split_pair
from neuroview.training.trainer import train
from neuroview.utils.manifest import RunManifest, dump_json, load_config_defaults

DEFAULT_CONFIG = Path(__file__).resolve().parent.parent / "configs" / "bias_check.json"


def colorize(base, protocol, seed):
    limit = protocol.get("limit")
    if limit:
        base = base.subset(np.arange(min(limit, len(base))))
    return make_colored_mnist(base, protocol["correlation"], seed=seed)


def main(argv=None):
    parser = argparse.ArgumentParser(description="Sonda de sesgo de color sobre colored MNIST")
    parser.add_argument("--data", type=Path, default=Path("data/mnist"), help="Directorio IDX de MNIST")
    parser.add_argument("--out", type=Path, default=Path("runs/bias_check"))
    parser.add_argument("--config", type=Path, default=DEFAULT_CONFIG)
    args = parser.parse_args(argv)

    protocol = load_config_defaults(args.config)
    seed = protocol["seed"]

    print("=" * 70)
    print("NEUROVIEW - SONDA DE SESGO DE COLOR")
    print("=" * 70)

    try:
        gray_train, gray_val = load_split_pair(args.data, "idx")
    except Exception as e:
        print(f"Error al cargar MNIST: {e}")
        return 3

    train_data = colorize(gray_train, protocol, seed)
    val_data = colorize(gray_val, protocol, seed + 1)
    print(f"\nColored MNIST ρ={protocol['correlation']}: {len(train_data)} / {len(val_data)} muestras")

    spec = resolve_arch(protocol["arch"], train_data.input_shape, train_data.num_classes)
    model = build_model("neuroview", spec,
                        NeuroViewConfig(vq=protocol["vq"], reduce=protocol["reduce"]), seed=seed)
    train_config = TrainConfig(
        epochs=protocol["epochs"],
        batch_size=protocol["batch"],
        learning_rate=protocol["lr"],
        momentum=protocol["momentum"],
        weight_decay=protocol["wd"],
        seed=seed,
        progress=True,
    )
    train(model, train_data, train_config, out_dir=args.out)

    report = counterfactual_table([("neuroview", model)], val_data, CHANNEL_NAMES)
    report.to_csv(args.out / "counterfactual.csv")
    report.to_json(args.out / "counterfactual.json")
    for class_k in range(model.num_classes):
        render(weight_report(model, class_k, train_data.class_names),
               args.out / "reports" / f"report_class{class_k}.csv", "csv")
        render(view_mean(model, class_k), args.out / "reports" / f"view_means_class{class_k}.csv",
               "csv", class_id=class_k, class_name=train_data.class_names[class_k])

    unperturbed = report.overall[("neuroview", "none")]
    print(f"\nAccuracy sin perturbar: {unperturbed:.2f}%")
    for channel in CHANNEL_NAMES[1:]:
        accuracy = report.overall[("neuroview", channel)]
        print(f"  canal {channel} anulado: {accuracy:.2f}% ({accuracy - unperturbed:+.2f} puntos)")

    drops = dominant_channel_drops(report, "neuroview")
    print("\nCaída por clase al anular su canal dominante:")
    for name, (channel, drop) in drops.items():
        print(f"  clase {name} ({channel}): {-drop:+.2f} puntos")

    mean_drop = float(np.mean([drop for _, drop in drops.values()]))
    biased = mean_drop > 0.0
    dump_json(args.out / "bias_check.json", {
        "dominant_drops": {name: {"channel": channel, "drop": drop} for name, (channel, drop) in drops.items()},
        "mean_drop": mean_drop,
        "biased": biased,
    })
    RunManifest(command="bias-check", seed=seed, flags=protocol, arch=spec.model_dump(mode="json"),
                inputs={"data": str(args.data)}).write(args.out)

    print(f"\n{'='*70}")
    print("Resultado: " + ("DEPENDENCIA DEL COLOR DETECTADA" if biased else "SIN DEPENDENCIA DEL COLOR"))
    print(f"{'='*70}")
    return 0 if biased else 1


if __name__ == "__main__":
    sys.exit(main())
