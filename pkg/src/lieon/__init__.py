"""Exact-arithmetic engine for Lie algebra structures and lieon disassemblies."""

__version__ = "0.1.0"
