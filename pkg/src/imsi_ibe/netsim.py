"""Deterministic in-memory network, transcript metrics and IMSI catchers.

Channels are lossless and zero-latency.  Every message is encoded,
logged and re-decoded on delivery, so receivers only ever see what went
over the wire.  A "round trip" is one response message; time plays no
part in the counters.
"""

from __future__ import annotations

import json
import random
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field

from .crypto import IbePrivateKey, extract, ibe_decrypt, ibe_encrypt, ibs_sign, ibs_verify, setup
from .errors import IntegrityError, ParseError, ProtocolAbort
from .identity import ExpiryTime, make_identity
from .actors import RAND_LEN, UserEquipment, _auth_message, unpack_attach_plaintext
from .wire import (
    AIR,
    BACKHAUL,
    CLEAR,
    AttachRequest,
    Message,
    SnAuthChallenge,
    SnBroadcast,
    TranscriptEntry,
    UeAuthResponse,
    decode,
    encode,
)

AUTH = "auth"
PROVISION = "provision"
MAINTENANCE = "maintenance"

RESPONSE_KINDS = {
    AIR: frozenset({"SnAuthChallenge", "AkaChallenge", "AuthFailure"}),
    BACKHAUL: frozenset({"SnKeyResponse", "HnAuthResponse", "LegacyAvResponse", "AuthFailure"}),
}


@dataclass
class Metrics:
    """Traffic counters over the authentication phase of a transcript.

    Provisioning and maintenance traffic (key issue, renewal, revocation
    sync) is logged but not counted.
    """

    air_msgs: int = 0
    air_bytes: int = 0
    backhaul_msgs: int = 0
    backhaul_bytes: int = 0
    ue_sn_round_trips: int = 0
    sn_hn_round_trips: int = 0

    def record(self, entry: TranscriptEntry):
        if entry.phase != AUTH:
            return
        is_response = entry.decoded.kind in RESPONSE_KINDS[entry.interface]
        if entry.interface == AIR:
            self.air_msgs += 1
            self.air_bytes += len(entry.raw)
            self.ue_sn_round_trips += is_response
        else:
            self.backhaul_msgs += 1
            self.backhaul_bytes += len(entry.raw)
            self.sn_hn_round_trips += is_response

    @classmethod
    def from_transcript(cls, entries) -> Metrics:
        m = cls()
        for e in entries:
            m.record(e)
        return m

    def to_dict(self) -> dict:
        return asdict(self)


def _name(actor) -> str:
    return actor if isinstance(actor, str) else actor.name


class SimNetwork:
    def __init__(self, seed: int, start: ExpiryTime):
        self.seed = seed
        self.rng = random.Random(seed)
        self.clock = start
        self.phase = AUTH
        self.transcript: list[TranscriptEntry] = []
        self.metrics = Metrics()

    def send(self, interface: str, sender, receiver, msg: Message) -> Message:
        raw = encode(msg)
        entry = TranscriptEntry(len(self.transcript), self.clock, self.phase, interface,
                                _name(sender), _name(receiver), raw, decode(raw))
        self.transcript.append(entry)
        self.metrics.record(entry)
        return entry.decoded

    def air(self, sender, receiver, msg: Message) -> Message:
        return self.send(AIR, sender, receiver, msg)

    def backhaul(self, sender, receiver, msg: Message) -> Message:
        return self.send(BACKHAUL, sender, receiver, msg)

    @contextmanager
    def in_phase(self, phase: str):
        old, self.phase = self.phase, phase
        try:
            yield
        finally:
            self.phase = old

    def advance(self, delta):
        self.clock = self.clock + delta

    def set_clock(self, when: ExpiryTime):
        if when < self.clock:
            raise ValueError("simulated clock never runs backwards")
        self.clock = when

    def trace_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.transcript)

    def write_trace(self, path):
        with open(path, "w") as fh:
            fh.write(self.trace_jsonl())


def metrics_json(metrics: Metrics, **extra) -> str:
    return json.dumps({"metrics": metrics.to_dict(), **extra}, sort_keys=True, indent=2)


# adversaries

@dataclass
class AttackOutcome:
    learned_imsi: str | None = None
    learned_hnid: str | None = None
    auth_completed: bool = False
    ue_abort: str | None = None
    decrypt_attempts: int = 0
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def pic_observe(transcript, imsis=()) -> AttackOutcome:
    """Passive catcher: read AIR traffic only and look for cleartext IMSIs."""
    out = AttackOutcome()
    wanted = [i.encode("ascii") for i in imsis]
    for entry in transcript:
        if entry.interface != AIR:
            continue
        msg = decode(entry.raw)
        if isinstance(msg, AttachRequest) and out.learned_hnid is None:
            out.learned_hnid = msg.hnid
        for _name_, label, payload in msg.field_payloads():
            if label != CLEAR:
                continue
            for imsi in wanted:
                if imsi in payload and out.learned_imsi is None:
                    out.learned_imsi = imsi.decode("ascii")
    return out


class ActiveCatcher:
    name = "AIC"

    def __init__(self, rng, params):
        self.rng = rng
        self.params = params
        # its own PKG, for forging keys the UE has no reason to trust
        self.fake_master = setup(rng, params)


def aic_run(net: SimNetwork, fake_snid: str, target_ue: UserEquipment, *,
            granted_key: IbePrivateKey | None = None, assume_target_known: bool = True,
            attempts: int = 1000) -> AttackOutcome:
    """Impersonate an SN towards ``target_ue``.

    The catcher sees only what is sent to it over AIR.  Without an
    HN-issued key it tries ``attempts`` random decryption keys, then sends
    a forged challenge.  With ``assume_target_known`` it encrypts RAND2 to
    the victim's real identity string, so the UE gets as far as the SN
    signature check; otherwise the UE already fails to decrypt RAND2.
    ``granted_key`` models a compromised SN holding a real d_snid.
    """
    params = target_ue.params
    aic = ActiveCatcher(net.rng, params)
    mpk = target_ue.creds.mpk  # public system parameter
    out = AttackOutcome()
    now = net.clock

    bcast = net.air(aic, target_ue, SnBroadcast(fake_snid))
    try:
        req, pending = target_ue.attach(bcast, now)
    except ProtocolAbort as exc:
        out.ue_abort = exc.reason
        return out
    req = net.air(target_ue, aic, req)
    out.learned_hnid = req.hnid

    sn_identity = make_identity(fake_snid, req.et)
    plain = None
    if granted_key is not None and granted_key.identity == sn_identity:
        out.decrypt_attempts += 1
        try:
            plain = unpack_attach_plaintext(ibe_decrypt(granted_key, req.ct, params))
        except (IntegrityError, ParseError):
            plain = None
    if plain is None:
        for _ in range(attempts):
            out.decrypt_attempts += 1
            guess = IbePrivateKey(sn_identity, params.random_scalar(net.rng), req.et)
            try:
                plain = unpack_attach_plaintext(ibe_decrypt(guess, req.ct, params))
                out.notes.append("random key decrypted the attach request")
                break
            except (IntegrityError, ParseError):
                continue

    rand2 = net.rng.randbytes(RAND_LEN)
    if plain is not None:
        imsi, et_ue, rand1 = plain
        out.learned_imsi = imsi
        ue_identity = make_identity(imsi, et_ue)
    else:
        rand1 = net.rng.randbytes(RAND_LEN)
        if assume_target_known:
            imsi, ue_identity = target_ue.imsi, target_ue.identity
        else:
            imsi = "0" * 15
            ue_identity = make_identity(imsi, req.et)
    message = _auth_message(imsi, rand1, rand2)
    if granted_key is not None:
        sig = ibs_sign(granted_key, message, net.rng, params)
    else:
        forged = extract(aic.fake_master.msk, sn_identity, req.et, params)
        sig = ibs_sign(forged, message, net.rng, params)
    enc_rand2 = ibe_encrypt(mpk, ue_identity, rand2, net.rng, params)
    challenge = net.air(aic, target_ue, SnAuthChallenge(sig=sig, enc_rand2=enc_rand2))

    try:
        resp, _key = target_ue.handle_challenge(pending, challenge)
    except ProtocolAbort as exc:
        out.ue_abort = exc.reason
        return out
    resp = net.air(target_ue, aic, resp)
    if isinstance(resp, UeAuthResponse) and plain is not None:
        out.auth_completed = ibs_verify(mpk, ue_identity, message, resp.sig, params)
    return out


def aic_run_legacy(net: SimNetwork, fake_snid: str, target_ue: UserEquipment) -> AttackOutcome:
    """Catcher against a UE that still identifies itself with a cleartext IMSI."""
    aic = ActiveCatcher(net.rng, target_ue.params)
    net.air(aic, target_ue, SnBroadcast(fake_snid))
    msg = net.air(target_ue, aic, target_ue.legacy_attach())
    return AttackOutcome(learned_imsi=msg.imsi, learned_hnid=None, auth_completed=False)
