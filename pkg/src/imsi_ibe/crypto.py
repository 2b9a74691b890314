"""Identity-based encryption and signatures over a toy bilinear group.

The toy group is G1 = GT = integers mod p with generator 1, scalar action
by modular multiplication and pairing e(a, b) = a*b mod p.  It satisfies
every algebraic identity the protocol relies on and is small enough to be
checked exhaustively, but it is NOT secure: the master secret equals the
master public key.  Never use it to protect real data.

Any other backend can replace ``GroupParams`` as long as it offers
``scalar_mul``, ``add``, ``pair``, ``random_scalar`` and ``encode``.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

import sympy

from .errors import IntegrityError, ParameterError, SizeError
from .identity import ExpiryTime, IdentityString

MAX_PLAINTEXT = 4096
TAG_LEN = 32
KDF_LABEL = b"5G-IBE-KS"


def encode8(x: int) -> bytes:
    return int(x).to_bytes(8, "big")


@dataclass(frozen=True)
class GroupParams:
    p: int = 2**61 - 1
    generator: int = 1

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 101 or self.p >= 2**64:
            raise ParameterError(f"modulus must be an integer in [101, 2^64), got {self.p!r}")
        if not sympy.isprime(self.p):
            raise ParameterError(f"modulus {self.p} is not prime")
        if self.generator != 1:
            raise ParameterError("the toy group uses generator 1")

    def scalar_mul(self, k: int, elem: int) -> int:
        return k * elem % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def pair(self, a: int, b: int) -> int:
        return a * b % self.p

    def random_scalar(self, rng) -> int:
        return rng.randrange(1, self.p)

    def encode(self, elem: int) -> bytes:
        return encode8(elem)


DEFAULT_PARAMS = GroupParams()


@dataclass(frozen=True)
class MasterKeyPair:
    msk: int
    mpk: int


@dataclass(frozen=True)
class IbePrivateKey:
    identity: IdentityString
    d: int
    expiry: ExpiryTime


@dataclass(frozen=True)
class IbeCiphertext:
    u: int
    body: bytes
    tag: bytes


@dataclass(frozen=True)
class IbsSignature:
    u: int
    v: int


@dataclass(frozen=True)
class SessionKey:
    key: bytes


def setup(rng, params: GroupParams = DEFAULT_PARAMS, msk: int | None = None) -> MasterKeyPair:
    """Draw a master key pair; ``msk`` pins the secret scalar for tests."""
    if msk is None:
        msk = params.random_scalar(rng)
    elif not 1 <= msk < params.p:
        raise ParameterError("msk must lie in [1, p-1]")
    return MasterKeyPair(msk=msk, mpk=params.scalar_mul(msk, params.generator))


def _hash8(data: bytes) -> int:
    return int.from_bytes(hashlib.sha256(data).digest()[:8], "big")


def h1(identity, params: GroupParams = DEFAULT_PARAMS) -> int:
    """Hash an identity string to a nonzero group element.

    Truncating SHA-256 to 64 bits and reducing mod p has a small modulo
    bias; that is irrelevant for this toy group.
    """
    data = str(identity).encode()
    if not data:
        raise ValueError("identity must be non-empty")
    value = _hash8(data) % params.p
    while value == 0:
        data += b"\x01"
        value = _hash8(data) % params.p
    return value


def extract(msk: int, identity: IdentityString, expiry: ExpiryTime | None = None,
            params: GroupParams = DEFAULT_PARAMS) -> IbePrivateKey:
    if expiry is None:
        expiry = identity.expiry
    d = params.scalar_mul(msk, h1(identity, params))
    return IbePrivateKey(identity=identity, d=d, expiry=expiry)


def pair(a: int, b: int, params: GroupParams = DEFAULT_PARAMS) -> int:
    return params.pair(a, b)


# hybrid KEM-DEM shared by the IBE and root-key schemes

def _symkey(shared: int, u: int) -> bytes:
    return hashlib.sha256(encode8(shared) + encode8(u)).digest()


def _keystream(symkey: bytes, length: int) -> bytes:
    blocks = []
    for i in range((length + 31) // 32):
        blocks.append(hashlib.sha256(symkey + i.to_bytes(4, "big")).digest())
    return b"".join(blocks)[:length]


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def _seal(shared: int, u: int, plaintext: bytes) -> IbeCiphertext:
    symkey = _symkey(shared, u)
    body = _xor(plaintext, _keystream(symkey, len(plaintext)))
    tag = hmac.new(symkey, encode8(u) + body, hashlib.sha256).digest()[:TAG_LEN]
    return IbeCiphertext(u=u, body=body, tag=tag)


def _open(shared: int, ct: IbeCiphertext) -> bytes:
    symkey = _symkey(shared, ct.u)
    tag = hmac.new(symkey, encode8(ct.u) + ct.body, hashlib.sha256).digest()[:TAG_LEN]
    if not hmac.compare_digest(tag, ct.tag):
        raise IntegrityError("ciphertext tag mismatch")
    return _xor(ct.body, _keystream(symkey, len(ct.body)))


def _check_size(plaintext: bytes):
    if len(plaintext) > MAX_PLAINTEXT:
        raise SizeError(f"plaintext of {len(plaintext)} bytes exceeds {MAX_PLAINTEXT}")


def ibe_encrypt(mpk: int, identity: IdentityString, plaintext: bytes, rng,
                params: GroupParams = DEFAULT_PARAMS, r: int | None = None) -> IbeCiphertext:
    _check_size(plaintext)
    if r is None:
        r = params.random_scalar(rng)
    u = params.scalar_mul(r, params.generator)
    shared = params.scalar_mul(r, params.pair(h1(identity, params), mpk))
    return _seal(shared, u, plaintext)


def ibe_decrypt(sk: IbePrivateKey, ct: IbeCiphertext, params: GroupParams = DEFAULT_PARAMS) -> bytes:
    return _open(params.pair(sk.d, ct.u), ct)


def rootkey_encrypt(mpk: int, plaintext: bytes, rng, params: GroupParams = DEFAULT_PARAMS,
                    r: int | None = None) -> IbeCiphertext:
    """ElGamal-style hybrid encryption to the HN's single root public key."""
    _check_size(plaintext)
    if r is None:
        r = params.random_scalar(rng)
    u = params.scalar_mul(r, params.generator)
    return _seal(params.scalar_mul(r, mpk), u, plaintext)


def rootkey_decrypt(msk: int, ct: IbeCiphertext, params: GroupParams = DEFAULT_PARAMS) -> bytes:
    return _open(params.scalar_mul(msk, ct.u), ct)


def _h3(message: bytes, u: int, params: GroupParams) -> int:
    return _hash8(message + encode8(u)) % params.p


def _sign_components(d: int, q: int, r: int, h: int, params: GroupParams) -> IbsSignature:
    u = params.scalar_mul(r, q)
    v = params.scalar_mul((r + h) % params.p, d)
    return IbsSignature(u=u, v=v)


def ibs_sign(sk: IbePrivateKey, message: bytes, rng, params: GroupParams = DEFAULT_PARAMS,
             r: int | None = None) -> IbsSignature:
    """Cha-Cheon style signature: u = r*Q_id, v = (r + h)*d_id."""
    q = h1(sk.identity, params)
    if r is None:
        r = params.random_scalar(rng)
    u = params.scalar_mul(r, q)
    return _sign_components(sk.d, q, r, _h3(message, u, params), params)


def ibs_verify(mpk: int, identity: IdentityString, message: bytes, sig: IbsSignature,
               params: GroupParams = DEFAULT_PARAMS) -> bool:
    p = params.p
    if not (isinstance(sig.u, int) and isinstance(sig.v, int)):
        return False
    if not (0 <= sig.u < p and 0 <= sig.v < p):
        return False
    q = h1(identity, params)
    h = _h3(message, sig.u, params)
    lhs = params.pair(sig.v, params.generator)
    rhs = params.pair(params.add(sig.u, params.scalar_mul(h, q)), mpk)
    return lhs == rhs


def kdf(rand1: bytes, rand2: bytes, mpk: int, context: bytes) -> SessionKey:
    data = KDF_LABEL + encode8(mpk) + context
    return SessionKey(hmac.new(rand1 + rand2, data, hashlib.sha256).digest())
