"""Subscriber identities, network ids and expiry-bound identity strings."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from .errors import ParseError

ET_FORMAT = "%Y%m%dT%H%M%SZ"
SEPARATOR = "||"
DEFAULT_MNC_LEN = 3


@dataclass(frozen=True, order=True)
class ExpiryTime:
    """A UTC instant with the canonical text form YYYYMMDDTHHMMSSZ.

    Also used for the simulated clock, so ``now`` values share the type.
    """

    value: datetime

    def __post_init__(self):
        v = self.value
        if v.tzinfo is None:
            v = v.replace(tzinfo=timezone.utc)
        object.__setattr__(self, "value", v.astimezone(timezone.utc).replace(microsecond=0))

    @classmethod
    def parse(cls, text: str) -> ExpiryTime:
        if len(text) != 16:
            raise ParseError(f"expiry time must be 16 characters: {text!r}")
        try:
            return cls(datetime.strptime(text, ET_FORMAT).replace(tzinfo=timezone.utc))
        except ValueError as exc:
            raise ParseError(f"bad expiry time {text!r}") from exc

    @property
    def text(self) -> str:
        return self.value.strftime(ET_FORMAT)

    def __str__(self):
        return self.text

    def __add__(self, delta: timedelta) -> ExpiryTime:
        return ExpiryTime(self.value + delta)

    def __sub__(self, other):
        if isinstance(other, ExpiryTime):
            return self.value - other.value
        return ExpiryTime(self.value - other)


@dataclass(frozen=True)
class Imsi:
    mcc: str
    mnc: str
    msin: str

    @property
    def digits(self) -> str:
        return self.mcc + self.mnc + self.msin

    def __str__(self):
        return self.digits


@dataclass(frozen=True)
class NetId:
    value: str

    def __post_init__(self):
        if not (self.value.isdigit() and self.value.isascii() and len(self.value) in (5, 6)):
            raise ParseError(f"network id must be 5 or 6 digits: {self.value!r}")

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class IdentityString:
    base: str
    expiry: ExpiryTime

    def __post_init__(self):
        if not self.base:
            raise ParseError("identity base must be non-empty")
        if SEPARATOR in self.base:
            raise ParseError(f"identity base may not contain {SEPARATOR!r}")

    @property
    def text(self) -> str:
        return f"{self.base}{SEPARATOR}{self.expiry.text}"

    def __str__(self):
        return self.text

    @classmethod
    def parse(cls, text: str) -> IdentityString:
        base, sep, et = text.rpartition(SEPARATOR)
        if not sep or not base:
            raise ParseError(f"not an identity string: {text!r}")
        return cls(base, ExpiryTime.parse(et))


def _is_digits(s: str) -> bool:
    return s.isascii() and s.isdigit()


def parse_imsi(digits: str, mnc_len_map: dict | None = None) -> Imsi:
    """Split an IMSI into MCC, MNC and MSIN.

    The MNC length comes from ``mnc_len_map`` (mcc -> 2 or 3, keys may be
    str or int); unknown MCCs default to 3.
    """
    if not _is_digits(digits):
        raise ParseError(f"IMSI must be decimal digits: {digits!r}")
    if not 6 <= len(digits) <= 15:
        raise ParseError(f"IMSI length {len(digits)} outside [6, 15]")
    mcc = digits[:3]
    mnc_len = DEFAULT_MNC_LEN
    if mnc_len_map:
        mnc_len = mnc_len_map.get(mcc, mnc_len_map.get(int(mcc), DEFAULT_MNC_LEN))
    if mnc_len not in (2, 3):
        raise ParseError(f"MNC length for {mcc} must be 2 or 3, got {mnc_len}")
    mnc = digits[3:3 + mnc_len]
    msin = digits[3 + mnc_len:]
    if not msin:
        raise ParseError("MSIN is empty")
    if len(msin) > 10:
        raise ParseError("MSIN longer than 10 digits")
    return Imsi(mcc, mnc, msin)


def format_imsi(imsi: Imsi) -> str:
    return imsi.digits


def hnid(imsi: Imsi) -> NetId:
    return NetId(imsi.mcc + imsi.mnc)


def make_identity(base, et: ExpiryTime) -> IdentityString:
    return IdentityString(str(base), et)


def default_sn_expiry(now: ExpiryTime) -> ExpiryTime:
    """End of the UTC day containing ``now`` (23:59:59Z)."""
    v = now.value
    return ExpiryTime(v.replace(hour=23, minute=59, second=59))


def is_expired(et: ExpiryTime, now: ExpiryTime) -> bool:
    return et < now
