"""
Tests unitarios para los componentes de NeuroView.

Suite de pruebas unitarias para verificar el funcionamiento individual
de cada componente del sistema.
"""
