"""Byte encoding for every protocol message.

Layout: one type byte, then each field as a 2-byte big-endian length
followed by the payload.  Group elements travel as 8-byte big-endian
integers, expiry times as their 16-character canonical text.  Every field
carries a sensitivity label so privacy checks can inspect the schema
instead of guessing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import ClassVar

from .aka import Av
from .crypto import TAG_LEN, IbeCiphertext, IbsSignature, encode8
from .errors import (
    FieldError,
    ParseError,
    SizeError,
    TrailingDataError,
    TruncatedError,
    UnknownTypeError,
)
from .identity import ExpiryTime

CLEAR = "cleartext"
ENCRYPTED = "encrypted-content"
MAX_FIELD = 0xFFFF


# field codecs: (encode, decode)

def _enc_text(value: str) -> bytes:
    return value.encode("ascii")


def _dec_text(data: bytes) -> str:
    try:
        return data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise FieldError("text field is not ASCII") from exc


def _dec_elem(data: bytes) -> int:
    if len(data) != 8:
        raise FieldError(f"element field must be 8 bytes, got {len(data)}")
    return int.from_bytes(data, "big")


def _dec_et(data: bytes) -> ExpiryTime:
    try:
        return ExpiryTime.parse(_dec_text(data))
    except ParseError as exc:
        raise FieldError(str(exc)) from exc


def _enc_ct(ct: IbeCiphertext) -> bytes:
    return encode8(ct.u) + ct.tag + ct.body


def _dec_ct(data: bytes) -> IbeCiphertext:
    if len(data) < 8 + TAG_LEN:
        raise FieldError("ciphertext field too short")
    return IbeCiphertext(u=int.from_bytes(data[:8], "big"), tag=data[8:8 + TAG_LEN],
                         body=data[8 + TAG_LEN:])


def _enc_sig(sig: IbsSignature) -> bytes:
    return encode8(sig.u) + encode8(sig.v)


def _dec_sig(data: bytes) -> IbsSignature:
    if len(data) != 16:
        raise FieldError("signature field must be 16 bytes")
    return IbsSignature(int.from_bytes(data[:8], "big"), int.from_bytes(data[8:], "big"))


def _dec_av(data: bytes) -> Av:
    if len(data) != 80:
        raise FieldError("AV field must be 80 bytes")
    return Av.from_bytes(data)


def _dec_b16(data: bytes) -> bytes:
    if len(data) != 16:
        raise FieldError("field must be 16 bytes")
    return bytes(data)


CODECS = {
    "text": (_enc_text, _dec_text),
    "elem": (encode8, _dec_elem),
    "et": (lambda et: et.text.encode("ascii"), _dec_et),
    "ct": (_enc_ct, _dec_ct),
    "sig": (_enc_sig, _dec_sig),
    "av": (lambda av: av.to_bytes(), _dec_av),
    "b16": (bytes, _dec_b16),
}


@dataclass(frozen=True)
class FieldSpec:
    name: str
    codec: str
    label: str = CLEAR
    optional: bool = False


@dataclass(frozen=True)
class RevocationEntry:
    imsi: str
    et: ExpiryTime


class Message:
    TYPE: ClassVar[int]
    FIELDS: ClassVar[tuple] = ()

    @property
    def kind(self) -> str:
        return type(self).__name__

    def field_payloads(self) -> list[tuple[str, str, bytes]]:
        out = []
        for spec in self.FIELDS:
            value = getattr(self, spec.name)
            if value is None:
                if spec.optional:
                    continue
                raise SizeError(f"{self.kind}.{spec.name} is missing")
            out.append((spec.name, spec.label, CODECS[spec.codec][0](value)))
        return out

    @classmethod
    def arity(cls) -> tuple[int, int | None]:
        required = sum(1 for f in cls.FIELDS if not f.optional)
        return required, len(cls.FIELDS)

    @classmethod
    def from_payloads(cls, payloads: list[bytes]):
        values = {}
        for spec, data in zip(cls.FIELDS, payloads):
            values[spec.name] = CODECS[spec.codec][1](data)
        return cls(**values)


REGISTRY: dict[int, type] = {}


def _register(cls):
    REGISTRY[cls.TYPE] = cls
    return cls


@_register
@dataclass(frozen=True)
class SnBroadcast(Message):
    TYPE = 0x01
    FIELDS = (FieldSpec("snid", "text"), FieldSpec("et", "et", optional=True))
    snid: str
    et: ExpiryTime | None = None


@_register
@dataclass(frozen=True)
class AttachRequest(Message):
    TYPE = 0x02
    FIELDS = (FieldSpec("hnid", "text"), FieldSpec("ct", "ct", ENCRYPTED), FieldSpec("et", "et"))
    hnid: str
    ct: IbeCiphertext
    et: ExpiryTime


@_register
@dataclass(frozen=True)
class SnKeyRequest(Message):
    TYPE = 0x03
    FIELDS = (FieldSpec("snid", "text"), FieldSpec("valid_from", "et", optional=True))
    snid: str
    valid_from: ExpiryTime | None = None


@_register
@dataclass(frozen=True)
class SnKeyResponse(Message):
    TYPE = 0x04
    FIELDS = (FieldSpec("d_snid", "elem"), FieldSpec("et", "et"), FieldSpec("mpk", "elem"))
    d_snid: int
    et: ExpiryTime
    mpk: int


@_register
@dataclass(frozen=True)
class HnAuthRequest(Message):
    TYPE = 0x05
    FIELDS = (FieldSpec("snid", "text"), FieldSpec("ct", "ct", ENCRYPTED), FieldSpec("et", "et"))
    snid: str
    ct: IbeCiphertext
    et: ExpiryTime


@_register
@dataclass(frozen=True)
class HnAuthResponse(Message):
    TYPE = 0x06
    FIELDS = (FieldSpec("av", "av"), FieldSpec("imsi", "text"), FieldSpec("d_snid", "elem"),
              FieldSpec("et", "et"), FieldSpec("mpk", "elem"))
    av: Av
    imsi: str
    d_snid: int
    et: ExpiryTime
    mpk: int


@_register
@dataclass(frozen=True)
class SnAuthChallenge(Message):
    TYPE = 0x07
    FIELDS = (FieldSpec("sig", "sig"), FieldSpec("enc_rand2", "ct", ENCRYPTED))
    sig: IbsSignature
    enc_rand2: IbeCiphertext


@_register
@dataclass(frozen=True)
class UeAuthResponse(Message):
    TYPE = 0x08
    FIELDS = (FieldSpec("sig", "sig"),)
    sig: IbsSignature


@_register
@dataclass(frozen=True)
class AkaChallenge(Message):
    TYPE = 0x09
    FIELDS = (FieldSpec("rand", "b16"), FieldSpec("autn", "b16"))
    rand: bytes
    autn: bytes


@_register
@dataclass(frozen=True)
class AkaResponse(Message):
    TYPE = 0x0A
    FIELDS = (FieldSpec("res", "b16"),)
    res: bytes


@_register
@dataclass(frozen=True)
class RevocationSync(Message):
    """hnid followed by alternating (imsi, et) fields, one pair per entry."""

    TYPE = 0x0B
    hnid: str
    entries: tuple = ()

    def field_payloads(self):
        out = [("hnid", CLEAR, _enc_text(self.hnid))]
        for i, entry in enumerate(self.entries):
            out.append((f"entries[{i}].imsi", CLEAR, _enc_text(entry.imsi)))
            out.append((f"entries[{i}].et", CLEAR, entry.et.text.encode("ascii")))
        return out

    @classmethod
    def arity(cls):
        return 1, None

    @classmethod
    def from_payloads(cls, payloads):
        rest = payloads[1:]
        if len(rest) % 2:
            raise FieldError("revocation entries must come in (imsi, et) pairs")
        entries = tuple(RevocationEntry(_dec_text(rest[i]), _dec_et(rest[i + 1]))
                        for i in range(0, len(rest), 2))
        return cls(_dec_text(payloads[0]), entries)


@_register
@dataclass(frozen=True)
class LegacyAttach(Message):
    TYPE = 0x0C
    FIELDS = (FieldSpec("imsi", "text"),)
    imsi: str


@_register
@dataclass(frozen=True)
class AuthFailure(Message):
    TYPE = 0x0D
    FIELDS = (FieldSpec("cause", "text"),)
    cause: str


@_register
@dataclass(frozen=True)
class LegacyAvResponse(Message):
    TYPE = 0x0E
    FIELDS = (FieldSpec("imsi", "text"), FieldSpec("av", "av"))
    imsi: str
    av: Av


# kinds allowed to carry IMSI digits in a cleartext field
IMSI_CLEARTEXT_KINDS = frozenset({"LegacyAttach", "HnAuthResponse", "RevocationSync",
                                  "LegacyAvResponse"})
BACKHAUL_ONLY_KINDS = frozenset({"SnKeyRequest", "SnKeyResponse", "HnAuthRequest",
                                 "HnAuthResponse", "RevocationSync", "LegacyAvResponse"})


def field_encodings(msg: Message) -> list[tuple[str, str, bytes]]:
    """(name, label, length-prefixed bytes) for each field, in wire order."""
    out = []
    for name, label, payload in msg.field_payloads():
        if len(payload) > MAX_FIELD:
            raise SizeError(f"{msg.kind}.{name} is {len(payload)} bytes, limit {MAX_FIELD}")
        out.append((name, label, len(payload).to_bytes(2, "big") + payload))
    return out


def encode(msg: Message) -> bytes:
    return bytes([msg.TYPE]) + b"".join(enc for _, _, enc in field_encodings(msg))


def decode(data: bytes) -> Message:
    data = bytes(data)
    if not data:
        raise TruncatedError("empty buffer")
    cls = REGISTRY.get(data[0])
    if cls is None:
        raise UnknownTypeError(f"unknown message type 0x{data[0]:02X}")
    lo, hi = cls.arity()
    payloads = []
    pos = 1
    while pos < len(data) and (hi is None or len(payloads) < hi):
        if pos + 2 > len(data):
            raise TruncatedError(f"buffer ends inside a length prefix at offset {pos}")
        n = int.from_bytes(data[pos:pos + 2], "big")
        pos += 2
        if pos + n > len(data):
            raise TruncatedError(f"field at offset {pos - 2} needs {n} bytes, "
                                 f"{len(data) - pos} available")
        payloads.append(data[pos:pos + n])
        pos += n
    if pos < len(data):
        raise TrailingDataError(f"{len(data) - pos} bytes after the last field")
    if len(payloads) < lo:
        raise TruncatedError(f"{cls.__name__} needs {lo} fields, got {len(payloads)}")
    return cls.from_payloads(payloads)


def message_kinds() -> list[type]:
    return [REGISTRY[t] for t in sorted(REGISTRY)]


AIR = "AIR"
BACKHAUL = "BACKHAUL"


@dataclass(frozen=True)
class TranscriptEntry:
    seq: int
    time: ExpiryTime
    phase: str
    interface: str
    sender: str
    receiver: str
    raw: bytes
    decoded: Message

    def to_json(self) -> str:
        return json.dumps({
            "seq": self.seq,
            "time": self.time.text,
            "phase": self.phase,
            "interface": self.interface,
            "sender": self.sender,
            "receiver": self.receiver,
            "kind": self.decoded.kind,
            "hex": self.raw.hex(),
        }, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> TranscriptEntry:
        obj = json.loads(line)
        raw = bytes.fromhex(obj["hex"])
        return cls(obj["seq"], ExpiryTime.parse(obj["time"]), obj["phase"], obj["interface"],
                   obj["sender"], obj["receiver"], raw, decode(raw))


__all__ = [
    "CLEAR", "ENCRYPTED", "DecodeError", "Message", "RevocationEntry", "encode", "decode",
    "field_encodings", "message_kinds", "TranscriptEntry", "AIR", "BACKHAUL",
] + [cls.__name__ for cls in REGISTRY.values()]
