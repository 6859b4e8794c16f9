"""Interactive hair authoring engine.

Subpackages: model (domain types), growth (procedural strands), sim
(real-time dynamics), groom (grab/trim), retrieval (text to hairstyle),
imaging (edge-conditioned render requests), assets (file formats),
service (session server), cli (command line).
"""

from __future__ import annotations

__version__ = "0.1.0"
