"""Masked-LM scorer adapter for the ucorrect wire protocol."""

__version__ = "0.1.0"

from .backends import HfBackend, TinyMlmBackend, UniformBackend, load_backend
from .finetune import finetune_tiny, mask_positions
from .protocol import HANDSHAKE, serve_stream, serve_tcp

__all__ = [
    "HfBackend",
    "TinyMlmBackend",
    "UniformBackend",
    "load_backend",
    "finetune_tiny",
    "mask_positions",
    "HANDSHAKE",
    "serve_stream",
    "serve_tcp",
]
