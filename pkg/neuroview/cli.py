"""
Interfaz de línea de comandos de NeuroView.

Cada comando delega en el módulo correspondiente y escribe todos sus
resultados, junto con un run_manifest.json, en el directorio --out. Un
fichero --config (JSON plano o un run_manifest.json previo) aporta valores
por defecto que los flags explícitos sobrescriben.

Códigos de salida:
    0  éxito
    1  gradcheck por encima de la tolerancia
    2  error de uso (flags)
    3  fichero ausente, dataset o checkpoint inválido
    4  divergencia del entrenamiento (pérdida NaN/inf)
    5  otros errores de dominio
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from neuroview.analysis.concepts import ConceptLabelTable, concept_map
from neuroview.analysis.counterfactual import CHANNEL_NAMES, counterfactual_table
from neuroview.analysis.explain import class_similarity, compare_reports, top_units, view_mean, weight_report
from neuroview.analysis.render import FORMATS, render
from neuroview.config import Config, NeuroViewConfig, TrainConfig
from neuroview.core.arch import PRESETS, resolve_arch, unit_count
from neuroview.core.factory import build_model
from neuroview.core.gradcheck import operation_names, run_gradcheck
from neuroview.data.colored_mnist import make_colored_mnist
from neuroview.data.dataset import check_disjoint
from neuroview.data.factory import FORMATS as DATA_FORMATS
from neuroview.data.factory import get_loader, save_dataset
from neuroview.exceptions import (
    CheckpointError,
    DivergenceError,
    IngestionError,
    LabelIndexError,
    NeuroViewError,
)
from neuroview.stores.checkpoint_store import CheckpointStore
from neuroview.training.metrics import evaluate
from neuroview.training.trainer import train
from neuroview.utils.manifest import RunManifest, dump_json, load_config_defaults

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_GRADCHECK = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_DIVERGENCE = 4
EXIT_DOMAIN = 5

CHECKPOINT_DIR = "checkpoint"
# Claves del Namespace que no son flags de la ejecución
_INTERNAL_KEYS = {"config", "verbose", "func", "command", "dataset_command"}


def _banner(title):
    print("=" * 70)
    print(title)
    print("=" * 70)


def _flags(args):
    flags = {}
    for key, value in sorted(vars(args).items()):
        if key in _INTERNAL_KEYS:
            continue
        flags[key] = str(value) if isinstance(value, Path) else value
    return flags


def _require(parser, args, *names):
    for name in names:
        if getattr(args, name, None) in (None, []):
            parser.error(f"el flag --{name.replace('_', '-')} es obligatorio")


def _load_checkpoint(path):
    store = CheckpointStore(path)
    model = store.load()
    class_names = store.metadata().get("class_names")
    return model, class_names


def _require_neuroview(model, path):
    if model.family != "neuroview":
        raise ValueError(f"El checkpoint {path} es un modelo {model.family}; se necesita un modelo neuroview")


def _resolve_class(value, class_names, num_classes):
    """Acepta un índice o un nombre de clase."""
    text = str(value)
    if class_names and text in class_names:
        return class_names.index(text)
    try:
        index = int(text)
    except ValueError:
        raise LabelIndexError(f"Clase desconocida: '{text}'") from None
    if not 0 <= index < num_classes:
        raise LabelIndexError(f"Clase {index} fuera de rango [0, {num_classes})")
    return index


def _load_train_val(args):
    loader = get_loader(args.format)
    train_data = loader.load(args.data, "train")
    if args.no_val:
        return train_data, None
    val_data = loader.load(args.data, "val", class_names=train_data.class_names)
    check_disjoint(train_data, val_data)
    return train_data, val_data


def cmd_train(args, parser):
    """Entrena un modelo NeuroView o baseline y guarda su checkpoint."""
    _require(parser, args, "data", "out")
    out = Path(args.out)

    train_data, val_data = _load_train_val(args)
    spec = resolve_arch(args.arch, train_data.input_shape, train_data.num_classes)

    neuroview_config = None
    if args.family == "neuroview":
        neuroview_config = NeuroViewConfig(
            vq=args.vq,
            temperature=args.temperature,
            reduce=args.reduce,
            views=args.views or train_data.views,
            shared_view_weights=not args.separate_view_weights,
        )
    train_config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        momentum=args.momentum,
        weight_decay=args.wd,
        seed=args.seed,
        checkpoint_every=args.checkpoint_every,
        progress=args.progress,
    )

    model = build_model(args.family, spec, neuroview_config, seed=args.seed)
    result = train(model, train_data, train_config, val_data=val_data, out_dir=out)

    metadata = {"class_names": train_data.class_names, "history": result.history}
    CheckpointStore(out / CHECKPOINT_DIR).save(model, metadata)
    RunManifest(
        command="train",
        seed=args.seed,
        flags=_flags(args),
        arch=spec.model_dump(mode="json"),
        neuroview=neuroview_config,
        train=train_config,
        inputs={"data": str(args.data)},
    ).write(out)

    _banner(f"NEUROVIEW - ENTRENAMIENTO {args.family.upper()} ({spec.name})")
    print(f"Unidades: {unit_count(spec)}")
    print(f"Pérdida final de entrenamiento: {result.final_train_loss}")
    if result.history and result.history[-1]["val_acc"] is not None:
        print(f"Accuracy de validación: {result.history[-1]['val_acc']:.4f}")
    print(f"Checkpoint: {out / CHECKPOINT_DIR}")
    return EXIT_OK


def cmd_eval(args, parser):
    """Evalúa un checkpoint sobre un split."""
    _require(parser, args, "ckpt", "data", "out")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    model, class_names = _load_checkpoint(args.ckpt)
    data = get_loader(args.format).load(args.data, args.split, class_names=class_names)
    result = evaluate(model, data, args.batch)

    dump_json(out / "evaluation.json", result.to_dict())
    RunManifest(command="eval", flags=_flags(args),
                inputs={"ckpt": str(args.ckpt), "data": str(args.data)}).write(out)

    _banner("NEUROVIEW - EVALUACIÓN")
    print(f"Muestras: {len(data)}")
    print(f"Accuracy: {result.accuracy:.4f}")
    for name, accuracy in zip(result.class_names, result.per_class_accuracy):
        print(f"  {name}: {accuracy:.4f}")
    return EXIT_OK


def cmd_explain(args, parser):
    """Informe de pesos de una clase."""
    _require(parser, args, "ckpt", "class_k", "out")
    out = Path(args.out)

    model, class_names = _load_checkpoint(args.ckpt)
    _require_neuroview(model, args.ckpt)
    class_k = _resolve_class(args.class_k, class_names, model.num_classes)

    report = weight_report(model, class_k, class_names)
    path = render(report, out / f"report_class{class_k}.{args.format}", args.format)
    RunManifest(command="explain", flags=_flags(args), inputs={"ckpt": str(args.ckpt)}).write(out)

    positive, negative = top_units(model, class_k, args.top_k)
    _banner(f"NEUROVIEW - PESOS DE LA CLASE {report.class_name}")
    print(f"Suma total de pesos: {report.total():.6f}")
    print("Unidades más positivas:")
    for unit in positive:
        print(f"  vista {unit.view}, capa {unit.layer}, canal {unit.channel}: {unit.weight:+.6f}")
    print("Unidades más negativas:")
    for unit in negative:
        print(f"  vista {unit.view}, capa {unit.layer}, canal {unit.channel}: {unit.weight:+.6f}")
    print(f"Informe: {path}")
    return EXIT_OK


def cmd_concepts(args, parser):
    """Mapa de conceptos de una clase a partir de una tabla de etiquetas."""
    _require(parser, args, "ckpt", "labels", "class_k", "out")
    out = Path(args.out)

    model, class_names = _load_checkpoint(args.ckpt)
    _require_neuroview(model, args.ckpt)
    class_k = _resolve_class(args.class_k, class_names, model.num_classes)

    labels = ConceptLabelTable.from_csv(args.labels)
    cmap = concept_map(model, labels, class_k, args.top_k, class_names)
    path = render(cmap, out / f"concepts_class{class_k}.{args.format}", args.format)
    RunManifest(command="concepts", flags=_flags(args),
                inputs={"ckpt": str(args.ckpt), "labels": str(args.labels)}).write(out)

    percentages = cmap.percentages()
    _banner(f"NEUROVIEW - CONCEPTOS DE LA CLASE {cmap.class_name}")
    for sign, ranking in (("+", cmap.positive), ("-", cmap.negative)):
        for name, value in ranking:
            print(f"  ({sign}) {name}: {value:+.6f} ({percentages[name]:.1f}%)")
    print(f"Mapa de conceptos: {path}")
    return EXIT_OK


def cmd_view_means(args, parser):
    """Media de pesos por vista de una clase."""
    _require(parser, args, "ckpt", "class_k", "out")
    out = Path(args.out)

    model, class_names = _load_checkpoint(args.ckpt)
    _require_neuroview(model, args.ckpt)
    class_k = _resolve_class(args.class_k, class_names, model.num_classes)

    means = view_mean(model, class_k)
    name = class_names[class_k] if class_names else str(class_k)
    path = render(means, out / f"view_means_class{class_k}.{args.format}", args.format,
                  class_id=class_k, class_name=name)
    RunManifest(command="view-means", flags=_flags(args), inputs={"ckpt": str(args.ckpt)}).write(out)

    _banner(f"NEUROVIEW - MEDIA DE PESOS POR VISTA ({name})")
    for view, mean in means:
        print(f"  vista {view}: {mean:+.6f}")
    print(f"Resultado: {path}")
    return EXIT_OK


def _named_checkpoints(values):
    """Convierte 'nombre=ruta' o 'ruta' en pares (nombre, modelo, nombres de clase)."""
    loaded, seen = [], {}
    for value in values:
        name, _, path = value.rpartition("=") if "=" in value else ("", "", value)
        model, class_names = _load_checkpoint(path)
        if not name:
            name = model.family
            seen[name] = seen.get(name, 0) + 1
            if seen[name] > 1:
                name = f"{name}{seen[name]}"
        loaded.append((name, model, class_names, path))
    return loaded


def cmd_perturb(args, parser):
    """Tabla contrafactual de accuracy por clase con canales anulados."""
    _require(parser, args, "ckpt", "data", "out")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    loaded = _named_checkpoints(args.ckpt)
    data = get_loader(args.format).load(args.data, args.split, class_names=loaded[0][2])

    report = counterfactual_table([(name, model) for name, model, _, _ in loaded], data, args.channels)
    report.to_csv(out / "counterfactual.csv", decimals=args.decimals)
    report.to_json(out / "counterfactual.json")
    RunManifest(
        command="perturb",
        flags=_flags(args),
        inputs={"data": str(args.data), **{f"ckpt:{name}": str(path) for name, _, _, path in loaded}},
    ).write(out)

    _banner("NEUROVIEW - EVALUACIÓN CONTRAFACTUAL POR CANALES")
    print(report.to_frame(args.decimals).to_string(index=False))
    return EXIT_OK


def cmd_make_colored_mnist(args, parser):
    """Genera colored MNIST a partir de un MNIST en escala de grises."""
    _require(parser, args, "data", "out")
    out = Path(args.out)

    loader = get_loader(args.format)
    splits = [loader.load(args.data, "train")]
    splits.append(loader.load(args.data, "val", class_names=splits[0].class_names))

    for offset, base in enumerate(splits):
        if args.limit:
            base = base.subset(np.arange(min(args.limit, len(base))))
        colored = make_colored_mnist(base, args.correlation, seed=args.seed + offset)
        save_dataset(colored, out, "png-dir")
        print(f"Split {colored.split}: {len(colored)} imágenes")

    RunManifest(command="dataset make-colored-mnist", seed=args.seed, flags=_flags(args),
                inputs={"data": str(args.data)}).write(out)
    print(f"Colored MNIST (ρ={args.correlation}) escrito en {out}")
    return EXIT_OK


def cmd_gradcheck(args, parser):
    """Verifica los gradientes de todas las operaciones diferenciables."""
    errors = run_gradcheck(instances=args.instances, seed=args.seed, step=args.step,
                           operations=args.ops)
    worst = max(errors.values())

    _banner("NEUROVIEW - VERIFICACIÓN DE GRADIENTES")
    for name, error in errors.items():
        status = "OK" if error <= args.tolerance else "FALLO"
        print(f"  {name:<24} {error:.3e}  {status}")
    print(f"Error relativo máximo: {worst:.3e} (tolerancia {args.tolerance:g})")

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        dump_json(out / "gradcheck.json", {"max_relative_error": errors, "tolerance": args.tolerance})
        RunManifest(command="gradcheck", seed=args.seed, flags=_flags(args)).write(out)

    return EXIT_OK if worst <= args.tolerance else EXIT_GRADCHECK


def cmd_compare(args, parser):
    """Compara los pesos de una clase en dos checkpoints con la misma arquitectura."""
    _require(parser, args, "ckpt_a", "ckpt_b", "class_k", "out")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    model_a, names_a = _load_checkpoint(args.ckpt_a)
    model_b, names_b = _load_checkpoint(args.ckpt_b)
    _require_neuroview(model_a, args.ckpt_a)
    _require_neuroview(model_b, args.ckpt_b)
    class_k = _resolve_class(args.class_k, names_a, model_a.num_classes)

    entries, layers = compare_reports(weight_report(model_a, class_k, names_a),
                                      weight_report(model_b, class_k, names_b))
    entries.to_csv(out / "compare_entries.csv", index=False)
    layers.to_csv(out / "compare_layers.csv", index=False)
    RunManifest(command="compare", flags=_flags(args),
                inputs={"ckpt_a": str(args.ckpt_a), "ckpt_b": str(args.ckpt_b)}).write(out)

    _banner("NEUROVIEW - COMPARACIÓN DE PESOS POR CAPA")
    print(layers.to_string(index=False))
    return EXIT_OK


def cmd_similarity(args, parser):
    """Matriz de similitud coseno entre las filas de pesos de las clases."""
    _require(parser, args, "ckpt", "out")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    model, class_names = _load_checkpoint(args.ckpt)
    _require_neuroview(model, args.ckpt)
    names = class_names or [str(k) for k in range(model.num_classes)]

    frame = pd.DataFrame(class_similarity(model), index=names, columns=names)
    frame.to_csv(out / "similarity.csv", index_label="class")
    RunManifest(command="similarity", flags=_flags(args), inputs={"ckpt": str(args.ckpt)}).write(out)

    _banner("NEUROVIEW - SIMILITUD ENTRE CLASES")
    print(frame.round(3).to_string())
    return EXIT_OK


def _add_data_flags(parser, split=None):
    parser.add_argument("--data", type=Path, help="Directorio del dataset")
    parser.add_argument("--format", choices=DATA_FORMATS, default="idx", help="Formato del dataset")
    if split:
        parser.add_argument("--split", choices=("train", "val"), default=split)


def _add_class_flag(parser):
    parser.add_argument("--class", dest="class_k", help="Índice o nombre de la clase")


def build_parser():
    """
    Construye el parser de la CLI.

    Returns:
        tuple: (parser, hojas), donde hojas son los subparsers que ejecutan un comando.
    """
    parser = argparse.ArgumentParser(
        prog="neuroview",
        description="Clasificadores CNN interpretables con cabeza lineal global sobre códigos Soft VQ",
    )
    parser.add_argument("--config", type=Path, help="JSON con valores por defecto (o un run_manifest.json)")
    parser.add_argument("-v", "--verbose", action="store_true", help="Logging en nivel DEBUG")
    commands = parser.add_subparsers(dest="command", required=True)
    leaves = []

    def leaf(subparsers, name, func, help_text):
        sub = subparsers.add_parser(name, help=help_text, description=help_text)
        sub.set_defaults(func=func)
        sub.add_argument("--out", type=Path, help="Directorio de salida")
        leaves.append(sub)
        return sub

    sub = leaf(commands, "train", cmd_train, "Entrena un modelo")
    sub.add_argument("--arch", default="vgg-mini",
                     help=f"Preset ({', '.join(sorted(PRESETS))}) o ruta a un JSON de ArchSpec")
    family = sub.add_mutually_exclusive_group()
    family.add_argument("--neuroview", dest="family", action="store_const", const="neuroview")
    family.add_argument("--baseline", dest="family", action="store_const", const="baseline")
    sub.set_defaults(family="neuroview")
    sub.add_argument("--reduce", choices=("max", "mean"), default="max")
    sub.add_argument("--vq", choices=("sigmoid", "identity"), default="sigmoid")
    sub.add_argument("--temperature", type=float, default=1.0)
    sub.add_argument("--views", type=int, default=None, help="Vistas (por defecto las del dataset)")
    sub.add_argument("--separate-view-weights", action="store_true",
                     help="Un backbone independiente por vista")
    _add_data_flags(sub)
    sub.add_argument("--no-val", action="store_true", help="Entrenar sin split de validación")
    sub.add_argument("--epochs", type=int, default=Config.DEFAULT_EPOCHS)
    sub.add_argument("--batch", type=int, default=Config.DEFAULT_BATCH_SIZE)
    sub.add_argument("--lr", type=float, default=Config.DEFAULT_LEARNING_RATE)
    sub.add_argument("--momentum", type=float, default=Config.DEFAULT_MOMENTUM)
    sub.add_argument("--wd", type=float, default=Config.DEFAULT_WEIGHT_DECAY)
    sub.add_argument("--seed", type=int, default=Config.DEFAULT_SEED)
    sub.add_argument("--checkpoint-every", type=int, default=0)
    sub.add_argument("--progress", action="store_true", help="Barras de progreso")

    sub = leaf(commands, "eval", cmd_eval, "Evalúa un checkpoint")
    sub.add_argument("--ckpt", type=Path)
    _add_data_flags(sub, split="val")
    sub.add_argument("--batch", type=int, default=256)

    sub = leaf(commands, "explain", cmd_explain, "Informe de pesos de una clase")
    sub.add_argument("--ckpt", type=Path)
    _add_class_flag(sub)
    sub.add_argument("--format", choices=FORMATS, default="csv")
    sub.add_argument("--top-k", type=int, default=5)

    sub = leaf(commands, "concepts", cmd_concepts, "Mapa de conceptos de una clase")
    sub.add_argument("--ckpt", type=Path)
    sub.add_argument("--labels", type=Path, help="CSV layer,channel,concept,category")
    _add_class_flag(sub)
    sub.add_argument("--top-k", type=int, default=5)
    sub.add_argument("--format", choices=FORMATS, default="json")

    sub = leaf(commands, "view-means", cmd_view_means, "Media de pesos por vista")
    sub.add_argument("--ckpt", type=Path)
    _add_class_flag(sub)
    sub.add_argument("--format", choices=FORMATS, default="csv")

    sub = leaf(commands, "perturb", cmd_perturb, "Evaluación con canales de color anulados")
    sub.add_argument("--ckpt", action="append", help="Checkpoint, opcionalmente 'nombre=ruta' (repetible)")
    _add_data_flags(sub, split="val")
    sub.add_argument("--channels", nargs="+", choices=CHANNEL_NAMES, default=list(CHANNEL_NAMES))
    sub.add_argument("--decimals", type=int, default=2)

    dataset = commands.add_parser("dataset", help="Generación de datasets")
    dataset_commands = dataset.add_subparsers(dest="dataset_command", required=True)
    sub = leaf(dataset_commands, "make-colored-mnist", cmd_make_colored_mnist,
               "Genera colored MNIST en formato png-dir")
    _add_data_flags(sub)
    sub.add_argument("--correlation", type=float, default=1.0, help="ρ en [0, 1]")
    sub.add_argument("--seed", type=int, default=Config.DEFAULT_SEED)
    sub.add_argument("--limit", type=int, default=None, help="Máximo de muestras por split")

    sub = leaf(commands, "gradcheck", cmd_gradcheck, "Verificación de gradientes por diferencias finitas")
    sub.add_argument("--instances", type=int, default=Config.GRADCHECK_INSTANCES)
    sub.add_argument("--seed", type=int, default=Config.DEFAULT_SEED)
    sub.add_argument("--step", type=float, default=Config.GRADCHECK_STEP)
    sub.add_argument("--tolerance", type=float, default=Config.GRADCHECK_TOLERANCE)
    sub.add_argument("--ops", nargs="+", choices=operation_names(), default=None)

    sub = leaf(commands, "compare", cmd_compare, "Compara los pesos de una clase entre dos checkpoints")
    sub.add_argument("--ckpt-a", type=Path)
    sub.add_argument("--ckpt-b", type=Path)
    _add_class_flag(sub)

    sub = leaf(commands, "similarity", cmd_similarity, "Similitud coseno entre clases")
    sub.add_argument("--ckpt", type=Path)

    return parser, leaves


def _apply_config(parser, leaves, argv):
    """Aplica los valores de --config como defaults de todos los comandos."""
    bootstrap = argparse.ArgumentParser(add_help=False)
    bootstrap.add_argument("--config", type=Path)
    known, _ = bootstrap.parse_known_args(argv)
    if known.config is None:
        return

    defaults = load_config_defaults(known.config)
    accepted = {action.dest for sub in leaves for action in sub._actions}
    unknown = sorted(set(defaults) - accepted - _INTERNAL_KEYS)
    if unknown:
        parser.error(f"claves desconocidas en {known.config}: {', '.join(unknown)}")
    for key in _INTERNAL_KEYS:
        defaults.pop(key, None)
    for sub in leaves:
        dests = {action.dest for action in sub._actions}
        sub.set_defaults(**{key: value for key, value in defaults.items() if key in dests})


def main(argv=None):
    """
    Punto de entrada de la CLI.

    Args:
        argv (list of str, optional): Argumentos; por defecto sys.argv[1:].

    Returns:
        int: Código de salida.
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, leaves = build_parser()

    try:
        _apply_config(parser, leaves, argv)
    except FileNotFoundError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as e:
        print(f"Error en --config: {e}", file=sys.stderr)
        return EXIT_USAGE

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.func(args, parser)
    except DivergenceError as e:
        logger.error(f"Entrenamiento abortado: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (FileNotFoundError, IngestionError, CheckpointError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (NeuroViewError, ValueError, IndexError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
