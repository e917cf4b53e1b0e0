"""Quantized borderline Levi conjugacy classes of SO(N): modules, Q-operator and verification suites."""

__version__ = '0.1.0'
