"""Randomised property checks of the crypto layer, runnable from the CLI."""

from __future__ import annotations

import random
from datetime import timedelta

from .crypto import (
    GroupParams,
    IbsSignature,
    extract,
    ibe_decrypt,
    ibe_encrypt,
    ibs_sign,
    ibs_verify,
    pair,
    rootkey_decrypt,
    rootkey_encrypt,
    setup,
)
from .errors import IntegrityError
from .identity import ExpiryTime, make_identity

BASE_ET = ExpiryTime.parse("20250101T000000Z")


def random_identity(rng):
    base = "".join(rng.choice("0123456789") for _ in range(rng.randint(5, 15)))
    return make_identity(base, BASE_ET + timedelta(seconds=rng.randrange(10**8)))


def _rejects(fn) -> bool:
    try:
        fn()
    except IntegrityError:
        return True
    return False


def run_selftest(trials: int = 200, seed: int = 0, params: GroupParams | None = None):
    """Return a list of (check name, passed, detail)."""
    params = params or GroupParams()
    rng = random.Random(seed)
    master = setup(rng, params)
    results = []

    ok = 0
    for _ in range(trials):
        ident = random_identity(rng)
        msg = rng.randbytes(rng.randint(0, 256))
        sk = extract(master.msk, ident, ident.expiry, params)
        ok += ibe_decrypt(sk, ibe_encrypt(master.mpk, ident, msg, rng, params), params) == msg
    results.append(("ibe round trip", ok == trials, f"{ok}/{trials}"))

    ok = 0
    for _ in range(trials):
        a, b = random_identity(rng), random_identity(rng)
        if a == b:
            ok += 1
            continue
        ct = ibe_encrypt(master.mpk, a, b"payload", rng, params)
        ok += _rejects(lambda: ibe_decrypt(extract(master.msk, b, b.expiry, params), ct, params))
    results.append(("ibe wrong key rejected", ok == trials, f"{ok}/{trials}"))

    ok = 0
    for _ in range(trials):
        ident = random_identity(rng)
        sk = extract(master.msk, ident, ident.expiry, params)
        msg = rng.randbytes(32)
        sig = ibs_sign(sk, msg, rng, params)
        good = ibs_verify(master.mpk, ident, msg, sig, params)
        mutated = bytearray(msg)
        mutated[rng.randrange(len(msg))] ^= 1 << rng.randrange(8)
        forgeries = [
            ibs_verify(master.mpk, ident, bytes(mutated), sig, params),
            ibs_verify(master.mpk, ident, msg, IbsSignature((sig.u + 1) % params.p, sig.v), params),
            ibs_verify(master.mpk, ident, msg, IbsSignature(sig.u, (sig.v + 1) % params.p), params),
            ibs_verify(master.mpk, random_identity(rng), msg, sig, params),
        ]
        ok += good and not any(forgeries)
    results.append(("ibs completeness and forgery rejection", ok == trials, f"{ok}/{trials}"))

    ok = 0
    for _ in range(trials):
        msg = rng.randbytes(rng.randint(1, 64))
        ct = rootkey_encrypt(master.mpk, msg, rng, params)
        wrong = params.random_scalar(rng)
        ok += (rootkey_decrypt(master.msk, ct, params) == msg
               and (wrong == master.msk or _rejects(lambda: rootkey_decrypt(wrong, ct, params))))
    results.append(("root-key round trip and wrong key", ok == trials, f"{ok}/{trials}"))

    small = GroupParams(p=101)
    bad = sum(pair(a * c % 101, b, small) != c * pair(a, b, small) % 101
              for a in range(0, 101, 7) for b in range(101) for c in range(0, 101, 5))
    results.append(("bilinearity at p=101 (sampled grid)", bad == 0, f"{bad} violations"))
    return results
