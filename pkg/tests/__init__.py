"""
Tests - Testes Unitários
CrackSense - Compósitos Autossensíveis

Este módulo contém testes unitários e de integração para os componentes da aplicação.
"""
