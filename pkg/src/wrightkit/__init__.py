"""Toolchain for checking, verifying and translating Wright architecture
descriptions: a parser, static checks, a failures-divergences refinement
engine, an FDR2 script exporter, an Ada code generator, and assembly-contract
checkers."""

__version__ = "0.1.0"

from .model import Configuration, Diagnostic  # noqa: F401
from .parser import WrightSyntaxError, parse_process, parse_wright  # noqa: F401
