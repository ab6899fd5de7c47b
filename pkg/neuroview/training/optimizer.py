"""
Descenso de gradiente estocástico con momentum y weight decay acoplado.

Por parámetro p con gradiente g:
    g <- g + weight_decay · p
    v <- momentum · v + g
    p <- p - lr · v
"""

import logging

import numpy as np

logger = logging.getLogger(__name__)


class SGD:
    """
    Optimizador SGD con momentum.

    Attributes:
        params (list of Tensor): Parámetros a actualizar.
        lr (float): Learning rate por defecto.
        momentum (float): Coeficiente de momentum.
        weight_decay (float): Penalización L2 sumada al gradiente.
        velocity (dict): Buffer de momentum por nombre de parámetro.
    """

    def __init__(self, params, lr, momentum=0.0, weight_decay=0.0):
        self.params = list(params)
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.velocity = {p.name: np.zeros_like(p.data) for p in self.params}

    def step(self, lr=None):
        """
        Aplica una actualización con los gradientes acumulados.

        Los parámetros sin gradiente (no alcanzados por la pérdida) no se tocan.

        Args:
            lr (float, optional): Learning rate de este paso (p. ej. tras decaimiento).
        """
        lr = self.lr if lr is None else lr
        for param in self.params:
            if param.grad is None:
                continue
            grad = param.grad
            if self.weight_decay:
                grad = grad + self.weight_decay * param.data
            velocity = self.momentum * self.velocity[param.name] + grad
            self.velocity[param.name] = velocity.astype(param.dtype, copy=False)
            param.assign(param.data - lr * self.velocity[param.name])

    def zero_grad(self):
        for param in self.params:
            param.zero_grad()
