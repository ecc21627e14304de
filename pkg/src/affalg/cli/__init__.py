"""File ingestion and the ``affalg`` command surface."""
from .main import build_parser, main
from .specfile import AlgebroidSpec, SpecError, load, loads

__all__ = ["AlgebroidSpec", "SpecError", "build_parser", "load", "loads", "main"]
