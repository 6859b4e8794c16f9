"""Exception hierarchy shared by every module.

Each class maps to one failure mode named in the operation contracts.
All inherit from HairforgeError so callers can catch the family.
"""

from __future__ import annotations


class HairforgeError(Exception):
    """Base class for all errors raised by this package."""


class EmptySelection(HairforgeError):
    """Paint selection contains no triangles."""


class NonFiniteInput(HairforgeError):
    """An input point or direction contains NaN or Inf."""


class InvalidHairstyle(HairforgeError):
    """Hairstyle failed validation; carries the violation list."""

    def __init__(self, violations):
        super().__init__(f"invalid hairstyle: {violations}")
        self.violations = violations


class NumericalBlowup(HairforgeError):
    """Simulation produced non-finite or absurd coordinates; state was rolled back."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class NonUnitDirection(HairforgeError):
    """A direction that must be unit-length is not."""


class NonRigidTransform(HairforgeError):
    """Transform has scale or shear; only rotation + translation accepted."""


class EmptyGrab(HairforgeError):
    """Grab ray selected no particles."""


class StaleHandle(HairforgeError):
    """Every particle of a grab handle was trimmed away."""


class EmptyText(HairforgeError):
    """Text is empty after trimming, or yields no tokens."""


class ProviderUnavailable(HairforgeError):
    """External embedding provider unreachable after retries."""

    def __init__(self, message, attempts=1):
        super().__init__(message)
        self.attempts = attempts


class DuplicateId(HairforgeError):
    """Two database entries share an id."""


class ProviderMismatch(HairforgeError):
    """Query embedding and index come from different providers."""


class DimensionMismatch(HairforgeError):
    """Query embedding dimension differs from index dimension."""


class BadThresholds(HairforgeError):
    """Edge detector thresholds violate low < high or range."""


class EmptyImage(HairforgeError):
    """Image has zero pixels."""


class DegenerateCamera(HairforgeError):
    """Camera eye coincides with its target."""


class AllEmpty(HairforgeError):
    """Every prompt attribute field is empty."""


class ServiceUnavailable(HairforgeError):
    """Generation service unreachable."""


class Timeout(HairforgeError):
    """Generation request exceeded its deadline."""


class MalformedResponse(HairforgeError):
    """Generation or embedding service returned an unparseable reply."""


class MalformedFrame(HairforgeError):
    """Binary frame packet does not follow the published layout."""


class BadMagic(HairforgeError):
    """File does not start with the expected magic bytes."""


class TruncatedFile(HairforgeError):
    """File ended mid-record; message names the failing record."""


class VersionUnsupported(HairforgeError):
    """File version not understood by this reader."""
