"""
Clase base abstracta para loaders de datasets

Define la interfaz común que deben implementar los formatos de entrada.
"""

from abc import ABC, abstractmethod

from neuroview.data.dataset import check_disjoint


class BaseLoader(ABC):
    """
    Interfaz abstracta de los formatos de dataset

    Define los métodos que deben implementar todos los loaders (IDX, png-dir).
    """

    format_name = None

    @abstractmethod
    def load(self, path, split="train", class_names=None):
        """
        Carga un split de un dataset

        Args:
            path (str or Path): Directorio (o fichero) de origen
            split (str): 'train' o 'val'
            class_names (list, optional): Clases impuestas por otro split

        Returns:
            Dataset: Imágenes en [0, 1], orden de ficheros lexicográfico

        Raises:
            IngestionError: Si algún fichero es ilegible o inconsistente
        """
        pass

    @abstractmethod
    def save(self, dataset, path):
        """
        Escribe un dataset en este formato

        Args:
            dataset (Dataset): Dataset a materializar
            path (str or Path): Directorio de destino
        """
        pass

    def load_split_pair(self, path):
        """
        Carga los splits train y val de un mismo origen y comprueba que sean disjuntos

        Returns:
            tuple: (train, val)

        Raises:
            IngestionError: Si los splits comparten muestras o clases distintas
        """
        train = self.load(path, "train")
        val = self.load(path, "val", class_names=train.class_names)
        check_disjoint(train, val)
        return train, val
