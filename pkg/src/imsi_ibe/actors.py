"""HN, SN and UE state machines for IBE-based identification and mutual auth.

Phase 1 (provisioning): the HN, acting as PKG, issues d_ue to each UE and
expiry-bound d_snid keys to serving networks.  Phase 2 (attach): the UE
encrypts IMSI||ET_ue||RAND1 to the identity snid||ET.  An SN holding the
matching key answers directly with a signed challenge (warm path);
otherwise it forwards the ciphertext to the HN and falls back to AKA
(cold path).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import timedelta
from enum import IntEnum

from . import aka
from .crypto import (
    DEFAULT_PARAMS,
    GroupParams,
    IbePrivateKey,
    SessionKey,
    extract,
    ibe_decrypt,
    ibe_encrypt,
    ibs_sign,
    ibs_verify,
    kdf,
    setup,
)
from .errors import AuthError, IntegrityError, ParseError, ProtocolAbort, ProvisioningError
from .identity import (
    ExpiryTime,
    Imsi,
    NetId,
    default_sn_expiry,
    hnid as hnid_of,
    is_expired,
    make_identity,
    parse_imsi,
)
from .wire import (
    AkaChallenge,
    AkaResponse,
    AttachRequest,
    AuthFailure,
    HnAuthRequest,
    HnAuthResponse,
    LegacyAttach,
    LegacyAvResponse,
    RevocationEntry,
    RevocationSync,
    SnAuthChallenge,
    SnBroadcast,
    SnKeyRequest,
    SnKeyResponse,
    UeAuthResponse,
)

log = logging.getLogger(__name__)

RAND_LEN = 16
DEFAULT_RENEWAL_MARGIN = timedelta(hours=1)
ONE_SECOND = timedelta(seconds=1)


def pack_attach_plaintext(imsi_digits: str, et_ue: ExpiryTime, rand1: bytes) -> bytes:
    return imsi_digits.encode("ascii") + b"||" + et_ue.text.encode("ascii") + rand1


def unpack_attach_plaintext(data: bytes) -> tuple[str, ExpiryTime, bytes]:
    imsi, sep, rest = data.partition(b"||")
    if not sep or len(rest) != 16 + RAND_LEN or not imsi.isdigit():
        raise ParseError("malformed attach plaintext")
    return imsi.decode("ascii"), ExpiryTime.parse(rest[:16].decode("ascii")), rest[16:]


def _auth_message(imsi_digits: str, rand1: bytes, rand2: bytes) -> bytes:
    return imsi_digits.encode("ascii") + rand1 + rand2


def _kdf_context(snid: str, et: ExpiryTime) -> bytes:
    return snid.encode("ascii") + et.text.encode("ascii")


def prune_revocations(entries, now: ExpiryTime) -> list:
    """Drop entries whose expiry is already past; those keys are dead anyway."""
    return [e for e in entries if not is_expired(e.et, now)]


# home network

@dataclass
class Subscriber:
    aka_key: bytes
    sqn: int = 0


@dataclass(frozen=True)
class UeCredentials:
    imsi: Imsi
    mpk: int
    d_ue: IbePrivateKey
    et_ue: ExpiryTime
    aka_key: bytes


class HomeNetwork:
    """PKG and authentication centre for one home network."""

    def __init__(self, hnid: str, rng, params: GroupParams = DEFAULT_PARAMS,
                 mnc_len_map=None, max_key_lead: timedelta = timedelta(days=1)):
        self.hnid = NetId(str(hnid)).value
        self.name = f"HN-{self.hnid}"
        self.rng = rng
        self.params = params
        self.mnc_len_map = mnc_len_map or {}
        self.max_key_lead = max_key_lead
        self.master = setup(rng, params)
        self.subscribers: dict[str, Subscriber] = {}
        self.revocations: list[RevocationEntry] = []
        self.issued_sn_keys: dict[str, ExpiryTime] = {}

    @property
    def mpk(self) -> int:
        return self.master.mpk

    def _imsi(self, imsi) -> Imsi:
        return imsi if isinstance(imsi, Imsi) else parse_imsi(str(imsi), self.mnc_len_map)

    def provision_ue(self, imsi, et_ue: ExpiryTime) -> UeCredentials:
        imsi = self._imsi(imsi)
        if hnid_of(imsi).value != self.hnid:
            raise ProvisioningError(f"IMSI {imsi.digits} does not belong to HN {self.hnid}")
        identity = make_identity(imsi.digits, et_ue)
        d_ue = extract(self.master.msk, identity, et_ue, self.params)
        sub = self.subscribers.get(imsi.digits)
        if sub is None:
            sub = self.subscribers[imsi.digits] = Subscriber(aka_key=self.rng.randbytes(16))
        return UeCredentials(imsi=imsi, mpk=self.mpk, d_ue=d_ue, et_ue=et_ue, aka_key=sub.aka_key)

    def issue_sn_key(self, snid: str, now: ExpiryTime,
                     valid_from: ExpiryTime | None = None) -> SnKeyResponse:
        start = now if valid_from is None or valid_from < now else valid_from
        if start - now > self.max_key_lead:
            raise ProvisioningError("requested key validity starts too far in the future")
        et = default_sn_expiry(start)
        d = extract(self.master.msk, make_identity(snid, et), et, self.params)
        self.issued_sn_keys[snid] = et
        return SnKeyResponse(d_snid=d.d, et=et, mpk=self.mpk)

    def handle_key_request(self, msg: SnKeyRequest, now: ExpiryTime) -> SnKeyResponse:
        return self.issue_sn_key(msg.snid, now, msg.valid_from)

    def is_revoked(self, imsi_digits: str, et_ue: ExpiryTime) -> bool:
        return RevocationEntry(imsi_digits, et_ue) in self.revocations

    def _next_av(self, imsi_digits: str) -> aka.Av:
        sub = self.subscribers[imsi_digits]
        sub.sqn += 1
        return aka.make_av(sub.aka_key, sub.sqn, self.rng.randbytes(RAND_LEN))

    def handle_auth_request(self, msg: HnAuthRequest, now: ExpiryTime) -> HnAuthResponse:
        """Recover the IMSI with d_snid and hand back an AV plus the key."""
        if is_expired(msg.et, now):
            raise AuthError("expired-sn-key")
        identity = make_identity(msg.snid, msg.et)
        sk = extract(self.master.msk, identity, msg.et, self.params)
        try:
            imsi, et_ue, _rand1 = unpack_attach_plaintext(ibe_decrypt(sk, msg.ct, self.params))
        except (IntegrityError, ParseError) as exc:
            raise AuthError("bad-ciphertext") from exc
        if imsi not in self.subscribers:
            raise AuthError("unknown-subscriber")
        if self.is_revoked(imsi, et_ue):
            raise AuthError("revoked")
        if is_expired(et_ue, now):
            raise AuthError("expired")
        self.issued_sn_keys[msg.snid] = msg.et
        return HnAuthResponse(av=self._next_av(imsi), imsi=imsi, d_snid=sk.d, et=msg.et,
                              mpk=self.mpk)

    def handle_legacy_attach(self, msg: LegacyAttach) -> LegacyAvResponse:
        if msg.imsi not in self.subscribers:
            raise AuthError("unknown-subscriber")
        return LegacyAvResponse(imsi=msg.imsi, av=self._next_av(msg.imsi))

    def revoke_ue(self, imsi, et: ExpiryTime):
        entry = RevocationEntry(str(imsi), et)
        if entry not in self.revocations:
            self.revocations.append(entry)

    def prune_revocations(self, now: ExpiryTime):
        self.revocations = prune_revocations(self.revocations, now)

    def revocation_sync(self) -> RevocationSync:
        return RevocationSync(hnid=self.hnid, entries=tuple(self.revocations))


# serving network

class Phase(IntEnum):
    AWAIT_ATTACH = 0
    CHALLENGED = 1
    AUTHENTICATED = 2
    FAILED = 3


_ALLOWED = {
    Phase.AWAIT_ATTACH: {Phase.CHALLENGED, Phase.FAILED},
    Phase.CHALLENGED: {Phase.AUTHENTICATED, Phase.FAILED},
    Phase.AUTHENTICATED: set(),
    Phase.FAILED: set(),
}


@dataclass
class Session:
    session_id: str
    hnid: str
    path: str
    phase: Phase = Phase.AWAIT_ATTACH
    imsi: str | None = None
    et_ue: ExpiryTime | None = None
    et: ExpiryTime | None = None
    rand1: bytes | None = None
    rand2: bytes | None = None
    av: aka.Av | None = None
    key: SessionKey | None = None
    failure: str | None = None
    history: list = field(default_factory=lambda: [Phase.AWAIT_ATTACH])

    def advance(self, phase: Phase):
        if phase not in _ALLOWED[self.phase]:
            raise ValueError(f"session {self.session_id}: {self.phase.name} -> {phase.name} "
                             "is not a forward transition")
        self.phase = phase
        self.history.append(phase)


@dataclass(frozen=True)
class SnKeyEntry:
    d_snid: IbePrivateKey
    et: ExpiryTime
    mpk: int


@dataclass(frozen=True)
class DirectChallenge:
    session_id: str
    challenge: SnAuthChallenge


@dataclass(frozen=True)
class ForwardToHn:
    session_id: str
    request: HnAuthRequest


@dataclass(frozen=True)
class Reject:
    session_id: str
    reason: str

    @property
    def notice(self) -> AuthFailure:
        # generic on purpose: the UE learns nothing about why
        return AuthFailure("authentication-failed")


class ServingNetwork:
    def __init__(self, snid: str, rng, params: GroupParams = DEFAULT_PARAMS):
        self.snid = NetId(str(snid)).value
        self.name = f"SN-{self.snid}"
        self.rng = rng
        self.params = params
        # hnid -> {et text -> entry}; the next day's key may sit beside today's
        self.key_table: dict[str, dict[str, SnKeyEntry]] = {}
        self.revocation_cache: dict[str, list[RevocationEntry]] = {}
        self.sessions: dict[str, Session] = {}
        self._counter = 0

    def broadcast(self, now: ExpiryTime | None = None, et_in_broadcast: bool = False) -> SnBroadcast:
        if et_in_broadcast:
            return SnBroadcast(self.snid, default_sn_expiry(now))
        return SnBroadcast(self.snid)

    def key_request(self, valid_from: ExpiryTime | None = None) -> SnKeyRequest:
        return SnKeyRequest(self.snid, valid_from)

    def install_key(self, hnid: str, resp):
        """Store d_snid from an SnKeyResponse or HnAuthResponse."""
        identity = make_identity(self.snid, resp.et)
        entry = SnKeyEntry(IbePrivateKey(identity, resp.d_snid, resp.et), resp.et, resp.mpk)
        self.key_table.setdefault(hnid, {})[resp.et.text] = entry

    def lookup_key(self, hnid: str, et: ExpiryTime, now: ExpiryTime) -> SnKeyEntry | None:
        entry = self.key_table.get(hnid, {}).get(et.text)
        if entry is None or is_expired(entry.et, now):
            return None
        return entry

    def keys_due(self, now: ExpiryTime, margin: timedelta = DEFAULT_RENEWAL_MARGIN):
        due = []
        for hnid, entries in self.key_table.items():
            newest = max(entries.values(), key=lambda e: e.et)
            if newest.et - now < margin:
                due.append((hnid, newest))
        return due

    def drop_expired(self, now: ExpiryTime):
        for hnid in list(self.key_table):
            kept = {k: e for k, e in self.key_table[hnid].items() if not is_expired(e.et, now)}
            if kept:
                self.key_table[hnid] = kept
            else:
                del self.key_table[hnid]

    def apply_revocation_sync(self, msg: RevocationSync):
        self.revocation_cache[msg.hnid] = list(msg.entries)

    def is_revoked(self, hnid: str, imsi: str, et_ue: ExpiryTime) -> bool:
        return RevocationEntry(imsi, et_ue) in self.revocation_cache.get(hnid, ())

    def _open_session(self, hnid: str, path: str) -> Session:
        self._counter += 1
        sid = f"{self.snid}-{self._counter}"
        session = self.sessions[sid] = Session(sid, hnid, path)
        return session

    def _fail(self, session: Session, reason: str) -> Reject:
        session.failure = reason
        session.advance(Phase.FAILED)
        log.debug("%s session %s failed: %s", self.name, session.session_id, reason)
        return Reject(session.session_id, reason)

    def handle_attach(self, msg: AttachRequest, now: ExpiryTime):
        """Answer directly when a usable d_snid is held, else forward to the HN."""
        entry = self.lookup_key(msg.hnid, msg.et, now)
        if entry is None:
            session = self._open_session(msg.hnid, "cold")
            session.et = msg.et
            return ForwardToHn(session.session_id, HnAuthRequest(self.snid, msg.ct, msg.et))

        session = self._open_session(msg.hnid, "warm")
        session.et = entry.et
        try:
            imsi, et_ue, rand1 = unpack_attach_plaintext(ibe_decrypt(entry.d_snid, msg.ct,
                                                                     self.params))
        except (IntegrityError, ParseError):
            return self._fail(session, "bad-ciphertext")
        if not imsi.startswith(msg.hnid):
            return self._fail(session, "bad-ciphertext")
        session.imsi, session.et_ue, session.rand1 = imsi, et_ue, rand1
        if self.is_revoked(msg.hnid, imsi, et_ue):
            return self._fail(session, "revoked")
        if is_expired(et_ue, now):
            return self._fail(session, "expired")

        # revocation and expiry passed: sign and send RAND2 to the UE
        rand2 = self.rng.randbytes(RAND_LEN)
        session.rand2 = rand2
        ue_identity = make_identity(imsi, et_ue)
        sig = ibs_sign(entry.d_snid, _auth_message(imsi, rand1, rand2), self.rng, self.params)
        enc_rand2 = ibe_encrypt(entry.mpk, ue_identity, rand2, self.rng, self.params)
        session.advance(Phase.CHALLENGED)
        return DirectChallenge(session.session_id, SnAuthChallenge(sig=sig, enc_rand2=enc_rand2))

    def finish(self, session_id: str, resp: UeAuthResponse):
        """Accept iff the UE signed imsi||rand1||rand2 with d_ue."""
        session = self.sessions[session_id]
        if session.phase != Phase.CHALLENGED or session.path != "warm":
            return False, None
        entry = self.key_table.get(session.hnid, {}).get(session.et.text)
        ue_identity = make_identity(session.imsi, session.et_ue)
        message = _auth_message(session.imsi, session.rand1, session.rand2)
        if entry is None or not ibs_verify(entry.mpk, ue_identity, message, resp.sig, self.params):
            self._fail(session, "bad-signature")
            return False, None
        session.key = kdf(session.rand1, session.rand2, entry.mpk,
                          _kdf_context(self.snid, session.et))
        session.advance(Phase.AUTHENTICATED)
        return True, session.key

    def start_aka(self, session_id: str, av: aka.Av) -> AkaChallenge:
        session = self.sessions[session_id]
        session.av = av
        session.advance(Phase.CHALLENGED)
        return AkaChallenge(rand=av.rand, autn=av.autn)

    def handle_hn_response(self, session_id: str, resp: HnAuthResponse) -> AkaChallenge:
        """Keep d_snid for later warm runs and start AKA."""
        session = self.sessions[session_id]
        self.install_key(session.hnid, resp)
        session.imsi = resp.imsi
        return self.start_aka(session_id, resp.av)

    def handle_hn_failure(self, session_id: str, failure: AuthFailure) -> AuthFailure:
        reject = self._fail(self.sessions[session_id], failure.cause)
        return reject.notice

    def finish_aka(self, session_id: str, resp: AkaResponse):
        session = self.sessions[session_id]
        if session.phase != Phase.CHALLENGED or session.av is None:
            return False, None
        if resp.res != session.av.xres:
            self._fail(session, "res-mismatch")
            return False, None
        session.key = SessionKey(session.av.kasme)
        session.advance(Phase.AUTHENTICATED)
        return True, session.key

    def handle_legacy_attach(self, msg: LegacyAttach) -> tuple[str, LegacyAttach]:
        session = self._open_session("", "legacy")
        session.imsi = msg.imsi
        return session.session_id, msg

    def handle_legacy_av(self, session_id: str, resp: LegacyAvResponse) -> AkaChallenge:
        return self.start_aka(session_id, resp.av)


# user equipment

@dataclass(frozen=True)
class Pending:
    snid: str
    et: ExpiryTime
    rand1: bytes


class UserEquipment:
    def __init__(self, creds: UeCredentials, rng, params: GroupParams = DEFAULT_PARAMS):
        self.creds = creds
        self.name = f"UE-{creds.imsi.digits}"
        self.rng = rng
        self.params = params
        self.sqn_max = 0

    @property
    def imsi(self) -> str:
        return self.creds.imsi.digits

    @property
    def identity(self):
        return make_identity(self.imsi, self.creds.et_ue)

    def attach(self, broadcast: SnBroadcast, now: ExpiryTime) -> tuple[AttachRequest, Pending]:
        """Build hnid, E(IMSI||ET_ue||RAND1, snid||ET) and ET."""
        if broadcast.et is not None:
            if is_expired(broadcast.et, now) or broadcast.et != default_sn_expiry(broadcast.et):
                raise ProtocolAbort("implausible-broadcast-et")
            et = broadcast.et
        else:
            et = default_sn_expiry(now)
        rand1 = self.rng.randbytes(RAND_LEN)
        plaintext = pack_attach_plaintext(self.imsi, self.creds.et_ue, rand1)
        ct = ibe_encrypt(self.creds.mpk, make_identity(broadcast.snid, et), plaintext,
                         self.rng, self.params)
        msg = AttachRequest(hnid=hnid_of(self.creds.imsi).value, ct=ct, et=et)
        return msg, Pending(broadcast.snid, et, rand1)

    def handle_challenge(self, pending: Pending, challenge: SnAuthChallenge):
        """Check the SN signature, then sign back; raises ProtocolAbort on failure."""
        try:
            rand2 = ibe_decrypt(self.creds.d_ue, challenge.enc_rand2, self.params)
        except IntegrityError as exc:
            raise ProtocolAbort("bad-ciphertext") from exc
        if len(rand2) != RAND_LEN:
            raise ProtocolAbort("bad-ciphertext")
        message = _auth_message(self.imsi, pending.rand1, rand2)
        sn_identity = make_identity(pending.snid, pending.et)
        if not ibs_verify(self.creds.mpk, sn_identity, message, challenge.sig, self.params):
            raise ProtocolAbort("bad-signature")
        sig = ibs_sign(self.creds.d_ue, message, self.rng, self.params)
        key = kdf(pending.rand1, rand2, self.creds.mpk, _kdf_context(pending.snid, pending.et))
        return UeAuthResponse(sig=sig), key

    def handle_aka_challenge(self, msg: AkaChallenge):
        try:
            self.sqn_max = aka.check_autn(self.creds.aka_key, msg.rand, msg.autn, self.sqn_max)
        except aka.AutnError as exc:
            raise ProtocolAbort(f"autn: {exc}") from exc
        res = aka.f2(self.creds.aka_key, msg.rand)
        return AkaResponse(res=res), SessionKey(aka.f3(self.creds.aka_key, msg.rand))

    def legacy_attach(self) -> LegacyAttach:
        return LegacyAttach(self.imsi)


# cross-actor helpers

def _direct(sender, receiver, msg):
    return msg


def run_aka(sn: ServingNetwork, ue: UserEquipment, av: aka.Av, send=_direct):
    """Run the AKA stub between ``sn`` and ``ue``; returns (accepted, kasme)."""
    session = sn._open_session(hnid_of(ue.creds.imsi).value, "aka")
    challenge = send(sn, ue, sn.start_aka(session.session_id, av))
    try:
        resp, ue_key = ue.handle_aka_challenge(challenge)
    except ProtocolAbort:
        sn._fail(session, "ue-abort")
        return False, None
    ok, sn_key = sn.finish_aka(session.session_id, send(ue, sn, resp))
    if ok and sn_key != ue_key:
        return False, None
    return ok, sn_key


def sync_revocations(hn: HomeNetwork, sn: ServingNetwork, send=_direct):
    sn.apply_revocation_sync(send(hn, sn, hn.revocation_sync()))


def sn_renew_keys(sn: ServingNetwork, hns: dict, now: ExpiryTime,
                  margin: timedelta = DEFAULT_RENEWAL_MARGIN, send=_direct) -> int:
    """Ask each HN for a fresh d_snid when the newest one is within ``margin``.

    HNs missing from ``hns`` count as unreachable: their entries are left to
    expire.  Returns the number of keys installed.
    """
    installed = 0
    for hnid, entry in sn.keys_due(now, margin):
        hn = hns.get(hnid)
        if hn is None:
            continue
        valid_from = None if is_expired(entry.et, now) else entry.et + ONE_SECOND
        req = send(sn, hn, sn.key_request(valid_from))
        resp = send(hn, sn, hn.handle_key_request(req, now))
        sn.install_key(hnid, resp)
        installed += 1
    return installed


def provision_sn(sn: ServingNetwork, hn: HomeNetwork, now: ExpiryTime, send=_direct):
    """Fetch the first d_snid for ``sn`` from ``hn``."""
    req = send(sn, hn, sn.key_request())
    resp = send(hn, sn, hn.handle_key_request(req, now))
    sn.install_key(hn.hnid, resp)
    return resp
