"""
Verificación de gradientes por diferencias finitas centrales.

Cada operación diferenciable se evalúa en 64 bits sobre instancias aleatorias
pequeñas y su gradiente analítico se compara con (f(x+h) - f(x-h)) / 2h.
Para convertir salidas no escalares en una pérdida se usa sum(salida * R),
con R aleatorio y fijo por instancia.
"""

import logging

import numpy as np

from neuroview.config import Config
from neuroview.core import functional as F
from neuroview.core.tensor import Tape, Tensor, no_grad

logger = logging.getLogger(__name__)

RELATIVE_FLOOR = 1e-8


def relative_error(analytic, numeric):
    """
    Error relativo elemento a elemento |a - n| / (|n| + 1e-8).

    Returns:
        float: Máximo sobre todos los elementos (0.0 si no hay elementos).
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    if analytic.size == 0:
        return 0.0
    return float(np.max(np.abs(analytic - numeric) / (np.abs(numeric) + RELATIVE_FLOOR)))


def _loss(fn, arrays, projection):
    out = fn(*[Tensor(a, requires_grad=True) for a in arrays])
    return F.tensor_sum(F.mul(out, Tensor(projection)))


def numerical_gradients(fn, arrays, projection, step=Config.GRADCHECK_STEP):
    """
    Gradientes por diferencias centrales de sum(fn(*arrays) * projection).

    Args:
        fn (callable): Recibe Tensors y retorna un Tensor.
        arrays (list of np.ndarray): Entradas float64.
        projection (np.ndarray): Pesos R con la forma de la salida.
        step (float): Paso h.

    Returns:
        list of np.ndarray: Un gradiente por entrada.
    """
    grads = []
    with no_grad():
        for index, base in enumerate(arrays):
            grad = np.zeros_like(base)
            for position in np.ndindex(base.shape):
                shifted = [a.copy() for a in arrays]

                shifted[index][position] = base[position] + step
                upper = _loss(fn, shifted, projection).item()
                shifted[index][position] = base[position] - step
                lower = _loss(fn, shifted, projection).item()

                grad[position] = (upper - lower) / (2.0 * step)
            grads.append(grad)
    return grads


def check_gradients(fn, arrays, rng, step=Config.GRADCHECK_STEP):
    """
    Compara el gradiente analítico de `fn` con diferencias finitas.

    Args:
        fn (callable): Operación sobre Tensors.
        arrays (list of np.ndarray): Entradas de la instancia.
        rng (np.random.Generator): Fuente de la proyección aleatoria R.
        step (float): Paso h.

    Returns:
        float: Error relativo máximo sobre todas las entradas.
    """
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]

    with no_grad():
        out_shape = fn(*[Tensor(a) for a in arrays]).shape
    projection = np.asarray(rng.standard_normal(out_shape), dtype=np.float64)

    with Tape() as tape:
        inputs = [Tensor(a, requires_grad=True) for a in arrays]
        loss = F.tensor_sum(F.mul(fn(*inputs), Tensor(projection)))
        tape.backward(loss)

    numeric = numerical_gradients(fn, arrays, projection, step)
    errors = [
        relative_error(t.grad if t.grad is not None else np.zeros_like(n), n)
        for t, n in zip(inputs, numeric)
    ]
    return max(errors)


def _away_from_zero(rng, shape, margin=0.1):
    values = rng.standard_normal(shape)
    return np.sign(values) * (np.abs(values) + margin)


def _distinct(rng, shape, spacing=0.01):
    # valores separados por mucho más que h para que el argmax no cambie al perturbar
    size = int(np.prod(shape))
    return (rng.permutation(size).reshape(shape) * spacing - size * spacing / 2).astype(np.float64)


def _composite_case(rng):
    labels = rng.integers(0, 3, size=2)
    temperature = 1.5

    def composite(view_a, view_b, kernel, bias, weight, head_bias):
        codes = []
        for view in (view_a, view_b):
            pre = F.conv2d(view, kernel, bias, stride=1, pad=1)
            codes.append(F.reduce_spatial(F.sigmoid(F.scale(pre, 1.0 / temperature)), "mean"))
        logits = F.linear(F.concat(codes), weight, head_bias)
        return F.softmax_cross_entropy(logits, labels)

    arrays = [
        rng.standard_normal((2, 1, 4, 4)),
        rng.standard_normal((2, 1, 4, 4)),
        rng.standard_normal((3, 1, 3, 3)),
        rng.standard_normal(3),
        rng.standard_normal((3, 6)),
        rng.standard_normal(3),
    ]
    return composite, arrays


def _cases():
    """Generadores de casos: nombre -> rng -> (función, entradas)."""
    return {
        "conv2d": lambda rng: (
            lambda x, k, b: F.conv2d(x, k, b, stride=1, pad=0),
            [rng.standard_normal((2, 2, 5, 5)), rng.standard_normal((3, 2, 3, 3)),
             rng.standard_normal(3)],
        ),
        "conv2d_strided": lambda rng: (
            lambda x, k, b: F.conv2d(x, k, b, stride=2, pad=1),
            [rng.standard_normal((1, 2, 6, 6)), rng.standard_normal((2, 2, 3, 3)),
             rng.standard_normal(2)],
        ),
        "relu": lambda rng: (F.relu, [_away_from_zero(rng, (2, 3, 4))]),
        "sigmoid": lambda rng: (F.sigmoid, [rng.standard_normal((2, 3, 4))]),
        "maxpool2d": lambda rng: (
            lambda x: F.maxpool2d(x, 2, 2),
            [_distinct(rng, (2, 2, 4, 4))],
        ),
        "linear": lambda rng: (
            F.linear,
            [rng.standard_normal((3, 4)), rng.standard_normal((5, 4)), rng.standard_normal(5)],
        ),
        "concat": lambda rng: (
            lambda a, b: F.concat([a, b]),
            [rng.standard_normal((2, 3)), rng.standard_normal((2, 4))],
        ),
        "reduce_spatial_max": lambda rng: (
            lambda x: F.reduce_spatial(x, "max"),
            [_distinct(rng, (2, 3, 3, 3))],
        ),
        "reduce_spatial_mean": lambda rng: (
            lambda x: F.reduce_spatial(x, "mean"),
            [rng.standard_normal((2, 3, 3, 3))],
        ),
        "softmax_cross_entropy": lambda rng: (
            (lambda labels: lambda logits: F.softmax_cross_entropy(logits, labels))(
                rng.integers(0, 5, size=4)
            ),
            [rng.standard_normal((4, 5))],
        ),
        "mul": lambda rng: (
            F.mul,
            [rng.standard_normal((3, 4)), rng.standard_normal((3, 4))],
        ),
        "scale": lambda rng: (
            lambda x: F.scale(x, 0.37),
            [rng.standard_normal((2, 5))],
        ),
        "tensor_sum": lambda rng: (F.tensor_sum, [rng.standard_normal((3, 4))]),
        "neuroview_composite": _composite_case,
    }


def operation_names():
    """Nombres de las operaciones cubiertas por run_gradcheck."""
    return list(_cases())


def run_gradcheck(instances=Config.GRADCHECK_INSTANCES, seed=0, step=Config.GRADCHECK_STEP,
                  operations=None):
    """
    Ejecuta la batería de verificación de gradientes.

    Args:
        instances (int): Instancias aleatorias por operación.
        seed (int): Semilla del generador.
        step (float): Paso de las diferencias centrales.
        operations (list of str, optional): Subconjunto de operaciones a verificar.

    Returns:
        dict: Operación -> error relativo máximo sobre todas las instancias.

    Raises:
        ValueError: Si se pide una operación desconocida.
    """
    cases = _cases()
    selected = operations or list(cases)
    unknown = [name for name in selected if name not in cases]
    if unknown:
        raise ValueError(f"Operaciones desconocidas en gradcheck: {unknown}")

    rng = np.random.default_rng(seed)
    results = {}
    for name in selected:
        worst = 0.0
        for _ in range(instances):
            fn, arrays = cases[name](rng)
            worst = max(worst, check_gradients(fn, arrays, rng, step))
        results[name] = worst
        logger.debug(f"gradcheck {name}: error relativo máximo {worst:.3e}")

    logger.info(f"Gradcheck completado sobre {len(results)} operaciones ({instances} instancias)")
    return results
