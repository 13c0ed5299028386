"""Logical-channel separation between control and traffic base stations.

Broadcast, common control (including paging) and common traffic channels
stay on the control station so that coverage and low-rate service survive
traffic-station sleep; dedicated traffic and its associated control move
to the traffic stations.  The mapping is a pure lookup table and safe for
concurrent reads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class InvalidChannel(ValueError):
    """A (standard, channel) pair outside the separation table."""


class Standard(enum.Enum):
    GSM_GPRS = "GSM_GPRS"
    UMTS = "UMTS"
    LTE = "LTE"

    @classmethod
    def parse(cls, text: str) -> "Standard":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise InvalidChannel(f"unknown standard: {text!r}") from None


class ServingSide(enum.Enum):
    CBS = "CBS"
    TBS = "TBS"


class RequestClass(enum.Enum):
    LOW_RATE = "LOW_RATE"
    HIGH_RATE = "HIGH_RATE"


# GSM/GPRS has no separate paging channel; paging rides on CCCH.
SEPARATION_MAP: dict[tuple[Standard, str], ServingSide] = {
    (Standard.GSM_GPRS, "BCH"): ServingSide.CBS,
    (Standard.GSM_GPRS, "CCCH"): ServingSide.CBS,
    (Standard.GSM_GPRS, "PACCH"): ServingSide.TBS,
    (Standard.GSM_GPRS, "TCH"): ServingSide.CBS,
    (Standard.GSM_GPRS, "PDTCH"): ServingSide.TBS,
    (Standard.UMTS, "BCCH"): ServingSide.CBS,
    (Standard.UMTS, "CCCH"): ServingSide.CBS,
    (Standard.UMTS, "PCCH"): ServingSide.CBS,
    (Standard.UMTS, "DCCH"): ServingSide.TBS,
    (Standard.UMTS, "CTCH"): ServingSide.CBS,
    (Standard.UMTS, "DTCH"): ServingSide.TBS,
    (Standard.LTE, "BCCH"): ServingSide.CBS,
    (Standard.LTE, "CCCH"): ServingSide.CBS,
    (Standard.LTE, "PCCH"): ServingSide.CBS,
    (Standard.LTE, "DCCH"): ServingSide.TBS,
    (Standard.LTE, "MTCH"): ServingSide.CBS,
    (Standard.LTE, "MCCH"): ServingSide.CBS,
    (Standard.LTE, "DTCH"): ServingSide.TBS,
}

CHANNEL_NAMES: dict[Standard, frozenset[str]] = {
    std: frozenset(name for (s, name) in SEPARATION_MAP if s is std)
    for std in Standard
}


@dataclass(frozen=True)
class LogicalChannel:
    """A service-level channel, e.g. (GSM_GPRS, PDTCH).

    Channel names are canonical uppercase tokens; construction normalizes
    case but does not validate membership -- classify_channel does.
    """

    standard: Standard
    name: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "name", self.name.strip().upper())

    @classmethod
    def parse(cls, text: str) -> "LogicalChannel":
        """Parse a config token like "GSM_GPRS:PDTCH" (case-insensitive)."""
        std_text, sep, name = text.partition(":")
        if not sep or not name.strip():
            raise InvalidChannel(f"expected STANDARD:CHANNEL, got {text!r}")
        channel = cls(Standard.parse(std_text), name)
        classify_channel(channel)  # reject unknown names at parse time
        return channel

    def __str__(self) -> str:
        return f"{self.standard.value}:{self.name}"


def classify_channel(channel: LogicalChannel) -> ServingSide:
    """Return which side serves a logical channel, per the separation table."""
    try:
        return SEPARATION_MAP[(channel.standard, channel.name)]
    except KeyError:
        raise InvalidChannel(
            f"{channel.name!r} is not a {channel.standard.value} logical channel"
        ) from None


def classify_request(standard: Standard, channel_name: str) -> RequestClass:
    """Classify a channel request: HIGH_RATE iff a traffic station serves it."""
    side = classify_channel(LogicalChannel(standard, channel_name))
    return RequestClass.HIGH_RATE if side is ServingSide.TBS else RequestClass.LOW_RATE
