"""Prompt composition for the generation service."""

from __future__ import annotations

from ..errors import AllEmpty
from ..model import RenderAttributes


def compose_prompt(attrs: RenderAttributes) -> str:
    """Comma-join the non-empty attribute fields in declaration order.

    Raises
    ------
    AllEmpty
        Every field is empty or whitespace.
    """
    parts = [f.strip() for f in attrs.fields_in_order() if f and f.strip()]
    if not parts:
        raise AllEmpty("every render attribute is empty")
    return ", ".join(parts)
