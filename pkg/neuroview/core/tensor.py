"""
Tensor denso con diferenciación automática en modo inverso.

Un Tensor envuelve un array de numpy contiguo (float32 para entrenamiento,
float64 para verificación de gradientes). Cada operación diferenciable se
registra en una cinta (Tape) en orden de ejecución, de modo que recorrer la
cinta al revés es ya un orden topológico válido para el backward.
"""

import logging
import threading
from contextlib import contextmanager

import numpy as np

from neuroview.exceptions import TapeError

logger = logging.getLogger(__name__)

DEFAULT_DTYPE = np.float32

_state = threading.local()


def _grad_enabled():
    return getattr(_state, "grad_enabled", True)


def _tape_stack():
    if not hasattr(_state, "tapes"):
        _state.tapes = []
    return _state.tapes


@contextmanager
def no_grad():
    """
    Desactiva el registro de operaciones en la cinta dentro del bloque.

    Se usa en evaluación e inferencia, donde no se necesita backward.
    """
    previous = _grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


class Tape:
    """
    Registro ordenado de operaciones con las entradas necesarias para el backward.

    Invariantes:
        - Topológico: las entradas de cada operación registrada la preceden.
        - Un único backward() por cinta; reutilizarla es un error.

    Puede usarse como context manager para aislar un paso de entrenamiento:

        with Tape() as tape:
            loss = ...
            tape.backward(loss)

    Fuera de un bloque explícito se usa una cinta implícita por hilo que se
    renueva automáticamente tras cada backward().

    Attributes:
        records (list): Pares (función, tensor de salida) en orden de ejecución.
        consumed (bool): True tras ejecutar backward().
    """

    def __init__(self):
        self.records = []
        self.consumed = False

    def __enter__(self):
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()
        return False

    def __len__(self):
        return len(self.records)

    def record(self, function, output):
        """
        Añade una operación a la cinta.

        Args:
            function (Function): Operación ejecutada.
            output (Tensor): Tensor producido por la operación.

        Raises:
            TapeError: Si la cinta ya fue consumida por un backward().
        """
        if self.consumed:
            raise TapeError("No se pueden registrar operaciones en una cinta ya consumida")
        self.records.append((function, output))

    def backward(self, loss):
        """
        Propaga gradientes desde una pérdida escalar hasta las hojas.

        Cada tensor hoja con requires_grad alcanzable desde la pérdida recibe
        su gradiente acumulado en `grad`.

        Args:
            loss (Tensor): Pérdida escalar producida en esta cinta.

        Raises:
            TapeError: Si la pérdida no es escalar, no pertenece a la cinta
                o la cinta ya fue consumida.
        """
        if loss.data.size != 1:
            raise TapeError(f"backward() requiere una pérdida escalar, forma recibida {loss.shape}")
        if self.consumed:
            raise TapeError("La cinta ya fue consumida por un backward() anterior")
        if loss.node is None or loss.node.tape is not self:
            raise TapeError("La pérdida no pertenece a esta cinta")

        grads = {id(loss): np.ones_like(loss.data)}

        for function, output in reversed(self.records):
            grad_out = grads.pop(id(output), None)
            if grad_out is None:
                continue

            input_grads = function.backward(grad_out)
            if not isinstance(input_grads, tuple):
                input_grads = (input_grads,)

            for tensor, grad in zip(function.inputs, input_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                if tensor.node is None:
                    tensor._accumulate(grad)
                elif id(tensor) in grads:
                    grads[id(tensor)] = grads[id(tensor)] + grad
                else:
                    grads[id(tensor)] = grad

        self.consumed = True
        self.records = []
        logger.debug("Backward completado, cinta consumida")


def current_tape():
    """
    Retorna la cinta activa del hilo actual.

    Si hay una cinta explícita abierta se usa esa (aunque esté consumida,
    para que su reutilización falle). En otro caso se usa la implícita,
    renovándola si ya fue consumida.

    Returns:
        Tape: Cinta sobre la que registrar operaciones.
    """
    stack = _tape_stack()
    if stack:
        return stack[-1]

    tape = getattr(_state, "implicit_tape", None)
    if tape is None or tape.consumed:
        tape = Tape()
        _state.implicit_tape = tape
    return tape


class Function:
    """
    Clase base de las operaciones diferenciables.

    Las subclases implementan `forward` sobre arrays de numpy y `backward`,
    que recibe dL/d(salida) y retorna una tupla con dL/d(entrada) por entrada
    (None para entradas no diferenciables).
    """

    def __init__(self, *inputs):
        self.inputs = inputs
        self.tape = None

    def forward(self, *arrays, **kwargs):
        raise NotImplementedError("Forward no implementado para esta operación")

    def backward(self, grad):
        raise NotImplementedError("Backward no implementado para esta operación")

    @classmethod
    def apply(cls, *inputs, **kwargs):
        """
        Ejecuta la operación y la registra en la cinta activa si hace falta.

        Args:
            *inputs (Tensor): Tensores de entrada.
            **kwargs: Parámetros no diferenciables de la operación.

        Returns:
            Tensor: Resultado de la operación.
        """
        function = cls(*inputs)
        out = Tensor._wrap(function.forward(*(t.data for t in inputs), **kwargs))

        if _grad_enabled() and any(t.requires_grad for t in inputs):
            tape = current_tape()
            tape.record(function, out)
            function.tape = tape
            out.requires_grad = True
            out.node = function

        return out


class Tensor:
    """
    Array denso N-dimensional que participa en el grafo de autodiferenciación.

    Los datos son inmutables tras la creación; la única mutación permitida es
    la acumulación de gradiente y `assign`, usada por el optimizador y la carga
    de checkpoints para sustituir el buffer completo.

    Attributes:
        data (np.ndarray): Valores contiguos en orden row-major (solo lectura).
        grad (np.ndarray or None): Gradiente de la misma forma que data.
        requires_grad (bool): Si el tensor participa en el backward.
        node (Function or None): Operación que produjo el tensor (None en hojas).
        name (str or None): Nombre opcional, usado para parámetros.
    """

    def __init__(self, data, requires_grad=False, dtype=None, name=None):
        """
        Crea un tensor hoja copiando los datos.

        Args:
            data: Array, lista o escalar numérico.
            requires_grad (bool): Si debe acumular gradiente.
            dtype: Tipo numpy explícito. Por defecto conserva el tipo de un
                ndarray flotante y usa float32 para todo lo demás.
            name (str, optional): Nombre descriptivo.
        """
        keep_dtype = isinstance(data, np.ndarray) and np.issubdtype(data.dtype, np.floating)
        array = np.array(data, copy=True)
        if dtype is not None:
            array = array.astype(dtype)
        elif not keep_dtype:
            array = array.astype(DEFAULT_DTYPE)

        self.data = self._freeze(array)
        self.grad = None
        self.requires_grad = requires_grad
        self.node = None
        self.name = name

    @staticmethod
    def _freeze(array):
        array = np.ascontiguousarray(array)
        array.setflags(write=False)
        return array

    @classmethod
    def _wrap(cls, array):
        """Envuelve sin copiar un array recién producido por una operación."""
        tensor = cls.__new__(cls)
        if not isinstance(array, np.ndarray):
            array = np.asarray(array)
        tensor.data = cls._freeze(array)
        tensor.grad = None
        tensor.requires_grad = False
        tensor.node = None
        tensor.name = None
        return tensor

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def numpy(self):
        """Retorna una copia escribible de los datos."""
        return np.array(self.data, copy=True)

    def item(self):
        """Retorna el valor de un tensor de un único elemento como float."""
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def detach(self):
        """Retorna un tensor constante con los mismos datos, fuera del grafo."""
        return Tensor._wrap(self.data)

    def zero_grad(self):
        self.grad = None

    def assign(self, values):
        """
        Sustituye el buffer de datos por una copia de `values`.

        Args:
            values (np.ndarray): Nuevos valores con la misma forma.

        Raises:
            ValueError: Si la forma no coincide.
        """
        values = np.asarray(values, dtype=self.data.dtype)
        if values.shape != self.data.shape:
            raise ValueError(
                f"Forma incompatible en assign: {values.shape} frente a {self.data.shape}"
            )
        self.data = self._freeze(np.array(values, copy=True))

    def _accumulate(self, grad):
        grad = np.asarray(grad, dtype=self.data.dtype).reshape(self.data.shape)
        if self.grad is None:
            self.grad = np.array(grad, copy=True)
        else:
            self.grad = self.grad + grad

    def backward(self):
        """
        Ejecuta el backward desde este tensor escalar.

        Raises:
            TapeError: Si el tensor no es escalar o no procede de una cinta abierta.
        """
        backward(self)

    def __repr__(self):
        label = f", name='{self.name}'" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label})"


def backward(loss):
    """
    Propaga gradientes desde una pérdida escalar.

    Args:
        loss (Tensor): Pérdida escalar producida en una cinta abierta.

    Raises:
        TapeError: Si la pérdida no es escalar, es una hoja o su cinta ya se consumió.
    """
    if loss.data.size != 1:
        raise TapeError(f"backward() requiere una pérdida escalar, forma recibida {loss.shape}")
    if loss.node is None:
        raise TapeError("La pérdida no procede de ninguna operación registrada en una cinta")
    loss.node.tape.backward(loss)
