"""Three-class relevance labels and their fixed wire encoding.

The probability-vector component order is fixed everywhere, including the
HTTP wire and checkpoint files: (Relevant, Not Relevant, Can't Decide).
"""

from __future__ import annotations

import enum


class RelevanceLabel(enum.IntEnum):
    """Relevance classes, ordered as they appear in probability vectors."""

    RELEVANT = 0
    NOT_RELEVANT = 1
    CANT_DECIDE = 2

    @property
    def wire(self) -> str:
        return _WIRE_NAMES[self]

    @classmethod
    def from_wire(cls, name: str) -> "RelevanceLabel":
        try:
            return _FROM_WIRE[name]
        except KeyError:
            raise ValueError(f"unknown relevance label {name!r}") from None


_WIRE_NAMES = {
    RelevanceLabel.RELEVANT: "Relevant",
    RelevanceLabel.NOT_RELEVANT: "Not Relevant",
    RelevanceLabel.CANT_DECIDE: "Can't Decide",
}
_FROM_WIRE = {name: label for label, name in _WIRE_NAMES.items()}

N_CLASSES = 3
