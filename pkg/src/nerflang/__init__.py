"""Desk-scale NeRF-language assistant: tiny NeRFs, a weight-space encoder,
a toy decoder LM with an injected NeRF token, and the surrounding data,
extraction and evaluation tooling."""

__version__ = "0.1.0"
