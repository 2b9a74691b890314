"""Minimal HMAC-based stand-in for EPS-AKA.

Not TS 33.401: f1..f5 are HMAC-SHA-256 with a one-byte function index.
AUTN = (SQN xor AK) || MAC, with a 48-bit SQN and a 10-byte MAC.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

SQN_LEN = 6
MAC_LEN = 10
RAND_LEN = 16


@dataclass(frozen=True)
class Av:
    rand: bytes
    xres: bytes
    autn: bytes
    kasme: bytes

    def to_bytes(self) -> bytes:
        return self.rand + self.xres + self.autn + self.kasme

    @classmethod
    def from_bytes(cls, data: bytes) -> Av:
        if len(data) != 80:
            raise ValueError(f"AV must be 80 bytes, got {len(data)}")
        return cls(data[:16], data[16:32], data[32:48], data[48:])


def _f(k: bytes, index: int, data: bytes) -> bytes:
    return hmac.new(k, bytes([index]) + data, hashlib.sha256).digest()


def f1(k: bytes, sqn: int, rand: bytes) -> bytes:
    return _f(k, 0x01, sqn.to_bytes(SQN_LEN, "big") + rand)[:MAC_LEN]


def f2(k: bytes, rand: bytes) -> bytes:
    return _f(k, 0x02, rand)[:16]


def f3(k: bytes, rand: bytes) -> bytes:
    return _f(k, 0x03, rand)


def f5(k: bytes, rand: bytes) -> bytes:
    return _f(k, 0x05, rand)[:SQN_LEN]


def make_autn(k: bytes, sqn: int, rand: bytes) -> bytes:
    concealed = bytes(a ^ b for a, b in zip(sqn.to_bytes(SQN_LEN, "big"), f5(k, rand)))
    return concealed + f1(k, sqn, rand)


def make_av(k: bytes, sqn: int, rand: bytes) -> Av:
    return Av(rand=rand, xres=f2(k, rand), autn=make_autn(k, sqn, rand), kasme=f3(k, rand))


class AutnError(Exception):
    pass


def check_autn(k: bytes, rand: bytes, autn: bytes, sqn_max: int) -> int:
    """Return the SQN carried in ``autn`` or raise AutnError.

    Rejects a bad MAC and any SQN not strictly above ``sqn_max``.
    """
    if len(autn) != SQN_LEN + MAC_LEN:
        raise AutnError("malformed AUTN")
    sqn_bytes = bytes(a ^ b for a, b in zip(autn[:SQN_LEN], f5(k, rand)))
    sqn = int.from_bytes(sqn_bytes, "big")
    if not hmac.compare_digest(autn[SQN_LEN:], f1(k, sqn, rand)):
        raise AutnError("MAC failure")
    if sqn <= sqn_max:
        raise AutnError("sequence number not fresh")
    return sqn
