"""Desk-scale simulator of a multi-user holographic display system.

Subpackages and modules:
  scene     shared-scene state, response mapping, layered composition
  cgh       phase-retrieval holography, view steering, multiplexing, I/O
  fedlearn  Federated Averaging with a centralized baseline
  netmodel  analytic and discrete-event cloud-versus-edge network model
  proto     wire protocol, transports, aggregation service
  cli       scenario orchestrator (`holo` executable)
"""
from . import cgh, fedlearn, netmodel, proto, scene

__version__ = "0.1.0"

__all__ = ["cgh", "fedlearn", "netmodel", "proto", "scene", "__version__"]
