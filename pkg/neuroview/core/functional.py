"""
Operaciones diferenciables sobre Tensor.

Incluye convolución 2D (im2col con ventanas deslizantes), ReLU, sigmoide,
max-pooling, capa lineal, concatenación por canales, reducción espacial
(max/mean) y entropía cruzada con softmax.

Convenciones:
    - Mapas de características en orden (batch, canal, alto, ancho).
    - Sin broadcasting salvo la suma del bias.
    - En max-pool y reducción max el gradiente va al primer máximo
      (índice lineal más bajo de la ventana).
"""

import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from neuroview.core.tensor import Function, Tensor
from neuroview.exceptions import DimensionError, LabelIndexError

logger = logging.getLogger(__name__)


def _as_tensor(value):
    return value if isinstance(value, Tensor) else Tensor(value)


def _require_ndim(array, ndim, op):
    if array.ndim != ndim:
        raise DimensionError(f"{op} espera {ndim} dimensiones, forma recibida {array.shape}")


class Conv2d(Function):
    """Convolución 2D con stride y padding simétrico."""

    def forward(self, x, kernel, bias, stride=1, pad=0):
        _require_ndim(x, 4, "conv2d")
        _require_ndim(kernel, 4, "conv2d (kernel)")
        batch, channels, _, _ = x.shape
        out_channels, in_channels, kh, kw = kernel.shape

        if channels != in_channels:
            raise DimensionError(
                f"conv2d: la entrada tiene {channels} canales y el kernel espera {in_channels}"
            )
        if bias.shape != (out_channels,):
            raise DimensionError(
                f"conv2d: bias de forma {bias.shape}, se esperaba ({out_channels},)"
            )
        if stride < 1 or pad < 0:
            raise DimensionError(f"conv2d: stride={stride} y pad={pad} inválidos")

        padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
        height, width = padded.shape[2], padded.shape[3]
        if kh > height or kw > width:
            raise DimensionError(
                f"conv2d: kernel {kh}x{kw} mayor que la entrada con padding {height}x{width}"
            )

        out_h = (height - kh) // stride + 1
        out_w = (width - kw) // stride + 1

        windows = sliding_window_view(padded, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
        cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(batch * out_h * out_w, -1)
        flat_kernel = kernel.reshape(out_channels, -1)

        out = cols @ flat_kernel.T + bias

        self.cols = cols
        self.flat_kernel = flat_kernel
        self.geometry = (x.shape, padded.shape, kernel.shape, stride, pad, out_h, out_w)
        return np.ascontiguousarray(out.reshape(batch, out_h, out_w, out_channels).transpose(0, 3, 1, 2))

    def backward(self, grad):
        x_shape, padded_shape, kernel_shape, stride, pad, out_h, out_w = self.geometry
        batch, channels = x_shape[0], x_shape[1]
        out_channels, _, kh, kw = kernel_shape

        grad_rows = grad.transpose(0, 2, 3, 1).reshape(-1, out_channels)

        grad_kernel = (grad_rows.T @ self.cols).reshape(kernel_shape)
        grad_bias = grad_rows.sum(axis=0)

        grad_cols = (grad_rows @ self.flat_kernel).reshape(batch, out_h, out_w, channels, kh, kw)
        grad_padded = np.zeros(padded_shape, dtype=grad.dtype)
        for i in range(kh):
            for j in range(kw):
                grad_padded[
                    :, :,
                    i:i + stride * out_h:stride,
                    j:j + stride * out_w:stride,
                ] += grad_cols[:, :, :, :, i, j].transpose(0, 3, 1, 2)

        if pad:
            grad_input = grad_padded[:, :, pad:padded_shape[2] - pad, pad:padded_shape[3] - pad]
        else:
            grad_input = grad_padded

        return grad_input, grad_kernel, grad_bias


class Relu(Function):
    def forward(self, x):
        self.mask = x > 0
        return np.where(self.mask, x, np.zeros((), dtype=x.dtype))

    def backward(self, grad):
        return (grad * self.mask,)


class Sigmoid(Function):
    """
    Sigmoide numéricamente estable.

    La salida se acota a [tiny, 1 - epsneg] del tipo de dato para que quede
    estrictamente dentro de (0, 1) incluso cuando la exponencial satura.
    """

    def forward(self, x):
        e = np.exp(-np.abs(x))
        out = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e)).astype(x.dtype, copy=False)
        info = np.finfo(x.dtype)
        out = np.clip(out, info.tiny, 1.0 - info.epsneg)
        self.out = out
        return out

    def backward(self, grad):
        return (grad * self.out * (1.0 - self.out),)


class MaxPool2d(Function):
    def forward(self, x, kernel=2, stride=2):
        _require_ndim(x, 4, "maxpool2d")
        batch, channels, height, width = x.shape
        if kernel < 1 or stride < 1:
            raise DimensionError(f"maxpool2d: kernel={kernel} y stride={stride} inválidos")
        if kernel > height or kernel > width:
            raise DimensionError(
                f"maxpool2d: ventana {kernel}x{kernel} mayor que la entrada {height}x{width}"
            )

        windows = sliding_window_view(x, (kernel, kernel), axis=(2, 3))[:, :, ::stride, ::stride]
        out_h, out_w = windows.shape[2], windows.shape[3]
        flat = windows.reshape(batch, channels, out_h, out_w, kernel * kernel)

        # argmax retorna la primera aparición: empates al índice lineal más bajo
        index = flat.argmax(axis=-1)
        out = np.take_along_axis(flat, index[..., None], axis=-1)[..., 0]

        self.index = index
        self.geometry = (x.shape, kernel, stride, out_h, out_w)
        return out

    def backward(self, grad):
        x_shape, kernel, stride, out_h, out_w = self.geometry
        batch, channels = x_shape[0], x_shape[1]

        rows = np.arange(out_h)[:, None] * stride + self.index // kernel
        cols = np.arange(out_w)[None, :] * stride + self.index % kernel
        batch_idx = np.arange(batch)[:, None, None, None]
        channel_idx = np.arange(channels)[None, :, None, None]

        grad_input = np.zeros(x_shape, dtype=grad.dtype)
        np.add.at(grad_input, (batch_idx, channel_idx, rows, cols), grad)
        return (grad_input,)


class Linear(Function):
    def forward(self, x, weight, bias):
        _require_ndim(x, 2, "linear")
        _require_ndim(weight, 2, "linear (pesos)")
        if x.shape[1] != weight.shape[1]:
            raise DimensionError(
                f"linear: entrada de ancho {x.shape[1]}, los pesos esperan {weight.shape[1]}"
            )
        if bias.shape != (weight.shape[0],):
            raise DimensionError(
                f"linear: bias de forma {bias.shape}, se esperaba ({weight.shape[0]},)"
            )
        self.x = x
        self.weight = weight
        return x @ weight.T + bias

    def backward(self, grad):
        return grad @ self.weight, grad.T @ self.x, grad.sum(axis=0)


class Concat(Function):
    def forward(self, *arrays):
        if not arrays:
            raise DimensionError("concat requiere al menos un tensor")
        batch = arrays[0].shape[0]
        for array in arrays:
            if array.ndim != 2 or array.shape[0] != batch:
                raise DimensionError(
                    f"concat espera tensores [B, *] con el mismo batch, forma recibida {array.shape}"
                )
        self.widths = [array.shape[1] for array in arrays]
        return np.concatenate(arrays, axis=1)

    def backward(self, grad):
        bounds = np.cumsum([0] + self.widths)
        return tuple(grad[:, start:stop] for start, stop in zip(bounds[:-1], bounds[1:]))


class ReduceSpatial(Function):
    """Colapsa cada mapa (H, W) de un canal a un único escalar."""

    def forward(self, x, mode="max"):
        _require_ndim(x, 4, "reduce_spatial")
        batch, channels, height, width = x.shape
        if height * width == 0:
            raise DimensionError("reduce_spatial: extensión espacial vacía")
        if mode not in ("max", "mean"):
            raise ValueError(f"Modo de reducción inválido: {mode}")

        self.mode = mode
        self.x_shape = x.shape
        flat = x.reshape(batch, channels, height * width)

        if mode == "mean":
            return flat.mean(axis=-1)

        self.index = flat.argmax(axis=-1)
        return np.take_along_axis(flat, self.index[..., None], axis=-1)[..., 0]

    def backward(self, grad):
        batch, channels, height, width = self.x_shape
        if self.mode == "mean":
            grad_input = np.broadcast_to(
                (grad / (height * width))[..., None, None], self.x_shape
            ).copy()
            return (grad_input,)

        grad_flat = np.zeros((batch, channels, height * width), dtype=grad.dtype)
        np.put_along_axis(grad_flat, self.index[..., None], grad[..., None], axis=-1)
        return (grad_flat.reshape(self.x_shape),)


class Mul(Function):
    def forward(self, a, b):
        if a.shape != b.shape:
            raise DimensionError(f"mul requiere formas idénticas: {a.shape} y {b.shape}")
        self.a = a
        self.b = b
        return a * b

    def backward(self, grad):
        return grad * self.b, grad * self.a


class Scale(Function):
    def forward(self, x, factor=1.0):
        self.factor = factor
        return (x * factor).astype(x.dtype, copy=False)

    def backward(self, grad):
        return ((grad * self.factor).astype(grad.dtype, copy=False),)


class Sum(Function):
    def forward(self, x):
        self.x_shape = x.shape
        return np.asarray(x.sum(), dtype=x.dtype)

    def backward(self, grad):
        return (np.broadcast_to(grad, self.x_shape).copy(),)


class SoftmaxCrossEntropy(Function):
    """Media sobre el batch de -log softmax(logits)[label], estabilizada por el máximo."""

    def forward(self, logits, labels=None):
        _require_ndim(logits, 2, "softmax_cross_entropy")
        batch, classes = logits.shape
        if batch == 0:
            raise DimensionError("softmax_cross_entropy: lote vacío, la pérdida media no está definida")
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (batch,):
            raise DimensionError(
                f"softmax_cross_entropy: {labels.shape[0] if labels.ndim else 0} etiquetas "
                f"para un batch de {batch}"
            )
        if labels.size and (labels.min() < 0 or labels.max() >= classes):
            raise LabelIndexError(
                f"Etiqueta fuera de rango [0, {classes}): min={labels.min()}, max={labels.max()}"
            )

        shifted = logits - logits.max(axis=1, keepdims=True)
        log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        log_probs = shifted - log_norm

        rows = np.arange(batch)
        self.labels = labels
        self.probs = np.exp(log_probs)
        return np.asarray(-log_probs[rows, labels].mean(), dtype=logits.dtype)

    def backward(self, grad):
        batch = self.probs.shape[0]
        delta = self.probs.copy()
        delta[np.arange(batch), self.labels] -= 1.0
        return ((grad * delta / batch).astype(self.probs.dtype, copy=False),)


def conv2d(x, kernel, bias, stride=1, pad=0):
    """
    Convolución 2D.

    Args:
        x (Tensor): Entrada [B, Cin, H, W].
        kernel (Tensor): Pesos [Cout, Cin, kh, kw].
        bias (Tensor): Bias [Cout].
        stride (int): Paso de la ventana (>= 1).
        pad (int): Ceros añadidos a cada borde espacial.

    Returns:
        Tensor: Salida [B, Cout, H', W'] con H' = floor((H + 2·pad − kh)/stride) + 1.

    Raises:
        DimensionError: Si los canales no coinciden o el kernel excede la entrada.
    """
    return Conv2d.apply(_as_tensor(x), _as_tensor(kernel), _as_tensor(bias), stride=stride, pad=pad)


def relu(x):
    return Relu.apply(_as_tensor(x))


def sigmoid(x):
    """Sigmoide elemento a elemento, con salida estrictamente en (0, 1)."""
    return Sigmoid.apply(_as_tensor(x))


def maxpool2d(x, kernel=2, stride=None):
    """
    Max-pooling 2D; el gradiente se enruta al primer máximo de cada ventana.

    Args:
        x (Tensor): Entrada [B, C, H, W].
        kernel (int): Lado de la ventana.
        stride (int, optional): Paso; por defecto igual a `kernel`.
    """
    return MaxPool2d.apply(_as_tensor(x), kernel=kernel, stride=stride or kernel)


def linear(x, weight, bias):
    """Capa afín: x[B, N] · weight[M, N]^T + bias[M]."""
    return Linear.apply(_as_tensor(x), _as_tensor(weight), _as_tensor(bias))


def concat(tensors):
    """Concatena tensores [B, *] a lo largo del eje 1, en el orden dado."""
    return Concat.apply(*(_as_tensor(t) for t in tensors))


def reduce_spatial(x, mode="max"):
    """
    Reduce cada canal de un mapa [B, C, H, W] a un escalar.

    Args:
        x (Tensor): Mapa de entrada.
        mode (str): 'max' (gradiente al primer máximo) o 'mean'.

    Returns:
        Tensor: Valores [B, C].

    Raises:
        DimensionError: Si la extensión espacial está vacía.
    """
    return ReduceSpatial.apply(_as_tensor(x), mode=mode)


def mul(a, b):
    return Mul.apply(_as_tensor(a), _as_tensor(b))


def scale(x, factor):
    return Scale.apply(_as_tensor(x), factor=float(factor))


def tensor_sum(x):
    return Sum.apply(_as_tensor(x))


def softmax_cross_entropy(logits, labels):
    """
    Entropía cruzada media con softmax.

    Args:
        logits (Tensor): Puntuaciones [B, K].
        labels (array-like): Enteros en [0, K).

    Returns:
        Tensor: Pérdida escalar.

    Raises:
        LabelIndexError: Si alguna etiqueta está fuera de rango.
    """
    return SoftmaxCrossEntropy.apply(_as_tensor(logits), labels=labels)


def softmax(logits):
    """
    Softmax por filas sobre un array de numpy (no diferenciable).

    Args:
        logits (np.ndarray): Puntuaciones [B, K].

    Returns:
        np.ndarray: Probabilidades cuyas filas suman 1.
    """
    logits = np.asarray(logits)
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)
