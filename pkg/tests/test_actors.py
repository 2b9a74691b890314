import random
from datetime import timedelta

import pytest

from conftest import ET_UE, NOW
from imsi_ibe.actors import (
    DirectChallenge,
    ForwardToHn,
    Phase,
    Reject,
    Session,
    ServingNetwork,
    UserEquipment,
    pack_attach_plaintext,
    prune_revocations,
    run_aka,
    sn_renew_keys,
    sync_revocations,
    unpack_attach_plaintext,
)
from imsi_ibe.crypto import extract, ibe_decrypt, ibe_encrypt
from imsi_ibe.errors import AuthError, ParseError, ProtocolAbort, ProvisioningError
from imsi_ibe.identity import ExpiryTime, default_sn_expiry, make_identity
from imsi_ibe.wire import RevocationEntry, SnAuthChallenge, SnBroadcast


def warm_run(net, ue, now=NOW):
    req, pending = ue.attach(net.sn.broadcast(), now)
    action = net.sn.handle_attach(req, now)
    return req, pending, action


def test_plaintext_round_trip():
    data = pack_attach_plaintext("244050000000001", ET_UE, bytes(range(16)))
    assert unpack_attach_plaintext(data) == ("244050000000001", ET_UE, bytes(range(16)))
    with pytest.raises(ParseError):
        unpack_attach_plaintext(b"junk")


def test_attach_request_shape(net):
    ue = net.ues[0]
    req, pending = ue.attach(SnBroadcast("24405"), NOW)
    assert req.hnid == "24405" and ue.imsi.startswith(req.hnid)
    assert req.et == default_sn_expiry(NOW) == pending.et
    again, _ = ue.attach(SnBroadcast("24405"), NOW)
    assert again.ct != req.ct


def test_cold_table_forwards(net):
    _, _, action = warm_run(net, net.ues[0])
    assert isinstance(action, ForwardToHn)
    assert action.request.snid == "24405"


def test_hn_response_key_decrypts(net):
    req, _, action = warm_run(net, net.ues[0])
    resp = net.hn.handle_auth_request(action.request, NOW)
    sk = extract(net.hn.master.msk, make_identity("24405", req.et))
    assert resp.d_snid == sk.d
    assert ibe_decrypt(sk, req.ct).startswith(net.ues[0].imsi.encode())


def test_warm_mutual_auth(net):
    net.provision()
    ue = net.ues[0]
    _, pending, action = warm_run(net, ue)
    assert isinstance(action, DirectChallenge)
    reply, ue_key = ue.handle_challenge(pending, action.challenge)
    ok, sn_key = net.sn.finish(action.session_id, reply)
    assert ok and ue_key == sn_key
    assert net.sn.sessions[action.session_id].phase == Phase.AUTHENTICATED


def test_replayed_response_rejected(net):
    net.provision()
    ue = net.ues[0]
    _, pending, first = warm_run(net, ue)
    reply, _ = ue.handle_challenge(pending, first.challenge)
    assert net.sn.finish(first.session_id, reply)[0]
    _, _, second = warm_run(net, ue)
    ok, key = net.sn.finish(second.session_id, reply)
    assert not ok and key is None
    assert net.sn.sessions[second.session_id].phase == Phase.FAILED
    # and the finished session cannot be finished twice
    assert not net.sn.finish(first.session_id, reply)[0]


def test_enc_rand2_to_wrong_ue_aborts(net):
    net.provision()
    a, b = net.ues
    _, pending_a, action = warm_run(net, a)
    _, pending_b, _ = warm_run(net, b)
    with pytest.raises(ProtocolAbort) as exc:
        b.handle_challenge(pending_b, action.challenge)
    assert exc.value.reason == "bad-ciphertext"


def test_challenge_signed_with_wrong_key_aborts(net):
    net.provision()
    ue = net.ues[0]
    _, pending, action = warm_run(net, ue)
    rng = random.Random(9)
    rand2 = ibe_decrypt(ue.creds.d_ue, action.challenge.enc_rand2)
    forged_sig = action.challenge.sig.__class__(action.challenge.sig.u,
                                               (action.challenge.sig.v + 1) % (2**61 - 1))
    challenge = SnAuthChallenge(sig=forged_sig, enc_rand2=ibe_encrypt(
        ue.creds.mpk, ue.identity, rand2, rng))
    with pytest.raises(ProtocolAbort) as exc:
        ue.handle_challenge(pending, challenge)
    assert exc.value.reason == "bad-signature"


def test_revocation_warm_and_cold(net):
    net.provision()
    victim = net.ues[0]
    net.hn.revoke_ue(victim.imsi, ET_UE)
    sync_revocations(net.hn, net.sn)
    _, _, action = warm_run(net, victim)
    assert isinstance(action, Reject) and action.reason == "revoked"
    assert action.notice.cause == "authentication-failed"

    cold_sn = ServingNetwork("310150", net.rng)
    req, _ = victim.attach(cold_sn.broadcast(), NOW)
    fwd = cold_sn.handle_attach(req, NOW)
    with pytest.raises(AuthError) as exc:
        net.hn.handle_auth_request(fwd.request, NOW)
    assert exc.value.cause == "revoked"


def test_prune_revocations():
    past = RevocationEntry("244050000000001", ExpiryTime.parse("20240101T000000Z"))
    future = RevocationEntry("244050000000002", ExpiryTime.parse("20300101T000000Z"))
    assert prune_revocations([past], NOW) == []
    assert prune_revocations([past, future], NOW) == [future]


def test_expired_ue_rejected_after_prune(net):
    net.provision()
    ue = net.ues[0]
    later = ET_UE + timedelta(hours=10)
    net.hn.revoke_ue(ue.imsi, ET_UE)
    net.hn.prune_revocations(later)
    assert net.hn.revocations == []
    net.now = later
    net.provision()
    _, _, action = warm_run(net, ue, later)
    assert isinstance(action, Reject) and action.reason == "expired"


def test_expired_sn_key_refused(net):
    req, _ = net.ues[0].attach(SnBroadcast("24405"), NOW)
    fwd = ServingNetwork("24405", net.rng).handle_attach(req, NOW)
    with pytest.raises(AuthError) as exc:
        net.hn.handle_auth_request(fwd.request, NOW + timedelta(days=1))
    assert exc.value.cause == "expired-sn-key"


def test_lookup_ignores_expired_entry(net):
    resp = net.provision()
    assert net.sn.lookup_key("24405", resp.et, NOW) is not None
    assert net.sn.lookup_key("24405", resp.et, resp.et + timedelta(seconds=1)) is None


def test_renewal_fetches_next_day(net):
    net.provision()
    hns = {"24405": net.hn}
    assert sn_renew_keys(net.sn, hns, NOW, timedelta(hours=1)) == 0
    late = ExpiryTime.parse("20250615T233000Z")
    assert sn_renew_keys(net.sn, hns, late, timedelta(hours=1)) == 1
    assert sorted(net.sn.key_table["24405"]) == ["20250615T235959Z", "20250616T235959Z"]
    assert sn_renew_keys(net.sn, {}, late, timedelta(hours=1)) == 0
    tomorrow = ExpiryTime.parse("20250616T003000Z")
    net.sn.drop_expired(tomorrow)
    assert list(net.sn.key_table["24405"]) == ["20250616T235959Z"]
    _, _, action = warm_run(net, net.ues[0], tomorrow)
    assert isinstance(action, DirectChallenge)


def test_hn_caps_key_lead(net):
    with pytest.raises(ProvisioningError):
        net.hn.issue_sn_key("24405", NOW, NOW + timedelta(days=3))


def test_provision_foreign_imsi(net):
    with pytest.raises(ProvisioningError):
        net.hn.provision_ue("310150123456789", ET_UE)


def test_run_aka(net):
    ue = net.ues[0]
    av = net.hn._next_av(ue.imsi)
    ok, key = run_aka(net.sn, ue, av)
    assert ok and key.key == av.kasme
    # same AV again: SQN not fresh, UE aborts
    assert run_aka(net.sn, ue, av) == (False, None)


def test_run_aka_wrong_key_rejected(net):
    rng = random.Random(4)
    ue = net.ues[0]
    for _ in range(50):
        creds = ue.creds.__class__(ue.creds.imsi, ue.creds.mpk, ue.creds.d_ue, ue.creds.et_ue,
                                   rng.randbytes(16))
        assert run_aka(net.sn, UserEquipment(creds, rng), net.hn._next_av(ue.imsi))[0] is False


def test_session_phases_forward_only():
    s = Session("x-1", "24405", "warm")
    s.advance(Phase.CHALLENGED)
    s.advance(Phase.AUTHENTICATED)
    with pytest.raises(ValueError):
        s.advance(Phase.CHALLENGED)
    assert s.history == [Phase.AWAIT_ATTACH, Phase.CHALLENGED, Phase.AUTHENTICATED]


def test_implausible_broadcast_et(net):
    bad = SnBroadcast("24405", ExpiryTime.parse("20250615T120000Z"))
    with pytest.raises(ProtocolAbort):
        net.ues[0].attach(bad, NOW)


def test_sn_rejects_res_mismatch(net):
    from imsi_ibe import aka
    from imsi_ibe.wire import AkaResponse

    rng = random.Random(5)
    ue = net.ues[0]
    for _ in range(200):
        av = net.hn._next_av(ue.imsi)
        session = net.sn._open_session("24405", "aka")
        net.sn.start_aka(session.session_id, av)
        wrong = AkaResponse(aka.f2(rng.randbytes(16), av.rand))
        assert net.sn.finish_aka(session.session_id, wrong) == (False, None)
        assert session.failure == "res-mismatch"
