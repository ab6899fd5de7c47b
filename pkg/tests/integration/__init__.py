"""
Tests de integración para NeuroView.

Suite de pruebas de integración para verificar el correcto funcionamiento
de los componentes principales del sistema.
"""
