"""Session server: command protocol, sim loop, frame streaming."""

from .app import ServiceConfig, StyleLibrary, create_app, make_generation_client
from .protocol import (Command, CommandError, FrameData, decode_frame,
                       encode_frame, parse_command)
from .session import Session

__all__ = [
    "Command",
    "CommandError",
    "FrameData",
    "ServiceConfig",
    "Session",
    "StyleLibrary",
    "create_app",
    "decode_frame",
    "encode_frame",
    "make_generation_client",
    "parse_command",
]
