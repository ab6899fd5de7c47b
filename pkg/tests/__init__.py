"""
Suite de tests de NeuroView.

Este paquete contiene tests unitarios y de integración para el proyecto NeuroView.
"""
