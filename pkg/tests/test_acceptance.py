"""Acceptance gate: one test per criterion, one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the
terminal summary) or ``python tests/test_acceptance.py``.
"""

import random
import time
from datetime import timedelta

from imsi_ibe.actors import provision_sn, sync_revocations
from imsi_ibe.config import load_config
from imsi_ibe.crypto import (
    GroupParams,
    IbsSignature,
    extract,
    ibe_decrypt,
    ibe_encrypt,
    ibs_sign,
    ibs_verify,
    pair,
    setup,
)
from imsi_ibe.errors import IntegrityError
from imsi_ibe.flows import check_against_paper, compare_all
from imsi_ibe.identity import ExpiryTime, make_identity
from imsi_ibe.netsim import AUTH, aic_run, pic_observe
from imsi_ibe.scenarios import SCENARIOS, attach_run, build_world, run_scenario
from imsi_ibe.wire import AIR, BACKHAUL, CLEAR, decode

TRIALS = 1000
BASE_ET = ExpiryTime.parse("20250101T000000Z")

_lines = []


def _report(log, number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}"
    _lines.append(line)
    if log is not None:
        log.append(line)
    return ok


def _identity(rng):
    base = str(rng.randrange(10**14, 10**15))
    return make_identity(base, BASE_ET + timedelta(seconds=rng.randrange(10**8)))


def _rejects(fn):
    try:
        fn()
    except IntegrityError:
        return True
    return False


def criterion_crypto():
    rng = random.Random(2025)
    master = setup(rng)
    start = time.perf_counter()

    round_trip = 0
    for _ in range(TRIALS):
        ident = _identity(rng)
        msg = rng.randbytes(rng.randrange(0, 4097))
        ct = ibe_encrypt(master.mpk, ident, msg, rng)
        round_trip += ibe_decrypt(extract(master.msk, ident), ct) == msg

    wrong_key = 0
    for _ in range(TRIALS):
        a, b = _identity(rng), _identity(rng)
        ct = ibe_encrypt(master.mpk, a, rng.randbytes(31), rng)
        wrong_key += a != b and _rejects(lambda: ibe_decrypt(extract(master.msk, b), ct))

    complete = forged = 0
    p = GroupParams().p
    for _ in range(TRIALS):
        a, b = _identity(rng), _identity(rng)
        msg = rng.randbytes(48)
        sig = ibs_sign(extract(master.msk, a), msg, rng)
        complete += ibs_verify(master.mpk, a, msg, sig)
        i = rng.randrange(len(msg))
        mutated = msg[:i] + bytes([msg[i] ^ rng.randrange(1, 256)]) + msg[i + 1:]
        attempts = [
            ibs_verify(master.mpk, a, mutated, sig),
            ibs_verify(master.mpk, a, msg, IbsSignature((sig.u + rng.randrange(1, p)) % p, sig.v)),
            ibs_verify(master.mpk, a, msg, IbsSignature(sig.u, (sig.v + rng.randrange(1, p)) % p)),
            ibs_verify(master.mpk, b, msg, sig),
        ]
        forged += not any(attempts)
    elapsed = time.perf_counter() - start
    ok = (round_trip == wrong_key == complete == forged == TRIALS) and elapsed < 10
    detail = (f"round-trip {round_trip}/{TRIALS}, wrong-key rejected {wrong_key}/{TRIALS}, "
              f"IBS complete {complete}/{TRIALS}, forgeries rejected {forged}/{TRIALS}, "
              f"{elapsed:.2f}s")
    return ok, detail


def criterion_bilinearity():
    params = GroupParams(p=101)
    start = time.perf_counter()
    checks = violations = 0
    for a in range(101):
        for b in range(101):
            ab = pair(a, b, params)
            for c in range(101):
                checks += 1
                if pair(a * c % 101, b, params) != c * ab % 101:
                    violations += 1
    elapsed = time.perf_counter() - start
    return (violations == 0 and checks == 101**3 and elapsed < 10,
            f"{checks} checks, {violations} violations, {elapsed:.2f}s")


def _backhaul_in(result):
    return sum(1 for e in result.transcript if e.phase == AUTH and e.interface == BACKHAUL)


def criterion_completeness():
    parts = []
    ok = True
    for name, expected in (("attach-cold", 2), ("attach-warm", 0)):
        result = run_scenario(name)
        run = result.outcomes["run"]
        n = _backhaul_in(result)
        good = run["authenticated"] and run["keys_equal"] and n == expected
        ok &= good
        parts.append(f"{name} authenticated={run['authenticated']} keys_equal={run['keys_equal']} "
                     f"backhaul={n} (want {expected})")
    return ok, "; ".join(parts)


def _clear_imsi_hits(transcript, imsis):
    hits = 0
    for entry in transcript:
        if entry.interface != AIR:
            continue
        for _name, label, payload in decode(entry.raw).field_payloads():
            hits += label == CLEAR and any(i.encode() in payload for i in imsis)
    return hits


def criterion_privacy():
    imsis = [u.imsi for u in load_config().ues]
    bad = []
    for name in SCENARIOS:
        result = run_scenario(name)
        learned = pic_observe(result.transcript, imsis).learned_imsi
        hits = _clear_imsi_hits(result.transcript, imsis)
        if name == "legacy-baseline":
            if learned != imsis[0] or hits == 0:
                bad.append(name)
        elif learned is not None or hits:
            bad.append(name)
    return not bad, f"{len(SCENARIOS) - 1} IBE scenarios clean, legacy leaks IMSI; failures: {bad or 'none'}"


def criterion_active_attacker():
    config = load_config()
    world = build_world(config, config.sim.seed)
    net, hn, target = world.net, world.hn, world.ues[0]
    snid = world.home_sn.snid

    first = len(net.transcript)
    with net.in_phase(AUTH):
        plain = aic_run(net, snid, target)
    kinds = [e.decoded.kind for e in net.transcript[first:]]
    honest = (not plain.auth_completed and plain.learned_imsi is None
              and plain.ue_abort == "bad-signature" and "UeAuthResponse" not in kinds)

    resp = hn.issue_sn_key(snid, world.now)
    leaked = extract(hn.master.msk, make_identity(snid, resp.et), resp.et)
    with net.in_phase(AUTH):
        compromised = aic_run(net, snid, target, granted_key=leaked)
    window = compromised.auth_completed and compromised.learned_imsi == target.imsi

    net.set_clock(resp.et + timedelta(seconds=1))
    with net.in_phase(AUTH):
        late = aic_run(net, snid, target, granted_key=leaked)
    expired = not late.auth_completed and late.learned_imsi is None

    scenario_ok = run_scenario("aic-attack").passed
    ok = honest and window and expired and scenario_ok
    return ok, (f"fake SN: abort={plain.ue_abort}, completed={plain.auth_completed}, "
                f"imsi={plain.learned_imsi}; leaked key before ET: completed="
                f"{compromised.auth_completed}; after ET: completed={late.auth_completed}, "
                f"imsi={late.learned_imsi}")


def criterion_revocation():
    config = load_config()
    world = build_world(config, config.sim.seed)
    hn, home, roaming = world.hn, world.home_sn, world.roaming_sn
    victim, other = world.ues[0], world.ues[1]

    provision_sn(home, hn, world.now)
    hn.revoke_ue(victim.imsi, victim.creds.et_ue)
    sync_revocations(hn, home)
    sync_revocations(hn, roaming)
    warm = attach_run(world, victim, home)
    cold = attach_run(world, victim, roaming)
    control = attach_run(world, other, home)

    world.net.set_clock(victim.creds.et_ue + timedelta(hours=10))
    hn.prune_revocations(world.now)
    emptied = hn.revocations == []
    sync_revocations(hn, home)
    provision_sn(home, hn, world.now)
    warm_late = attach_run(world, victim, home)
    cold_late = attach_run(world, victim, roaming)

    ok = (warm.path == "warm" and warm.reason == "revoked" and not warm.authenticated
          and cold.path == "cold" and cold.reason == "revoked" and not cold.authenticated
          and control.authenticated and emptied
          and not warm_late.authenticated and warm_late.reason == "expired"
          and not cold_late.authenticated and cold_late.reason == "expired"
          and run_scenario("revoked-ue").passed)
    return ok, (f"warm={warm.path}/{warm.reason}, cold={cold.path}/{cold.reason}, "
                f"bystander ok={control.authenticated}, pruned empty={emptied}, "
                f"after prune warm={warm_late.reason} cold={cold_late.reason}")


def criterion_flows():
    table = compare_all(load_config().sizes)
    report = check_against_paper(table)
    failed = [r.name for r in report if not r.passed]
    t = table
    explicit = (t["rootkey"].backhaul_contacts_repeat == 1 and t["ibe"].backhaul_contacts_repeat == 0
                and t["certV1"].air_rtt > t["rootkey"].air_rtt
                and [s for s in t if s != "legacy" and t[s].hnid_concealed] == ["certV1"]
                and t["ibe"].mutual_auth_without_hn and not t["rootkey"].mutual_auth_without_hn
                and min((s for s in t if s != "legacy"), key=lambda s: t[s].air_bytes) == "pseudonym")
    return (not failed and explicit,
            f"{len(report) - len(failed)}/{len(report)} expectations hold; failed: {failed or 'none'}")


def criterion_determinism():
    mismatched = [n for n in SCENARIOS
                  if run_scenario(n, seed=11).trace_jsonl() != run_scenario(n, seed=11).trace_jsonl()]
    cts = {}
    for seed in (11, 12):
        result = run_scenario("attach-warm", seed=seed)
        cts[seed] = [e.raw for e in result.transcript if e.decoded.kind == "AttachRequest"]
    differ = bool(cts[11]) and cts[11] != cts[12]
    return (not mismatched and differ,
            f"{len(SCENARIOS) - len(mismatched)}/{len(SCENARIOS)} traces byte-identical on rerun; "
            f"AttachRequest bytes differ across seeds={differ}")


CRITERIA = (
    (1, "crypto suite", criterion_crypto),
    (2, "bilinearity at p=101", criterion_bilinearity),
    (3, "protocol completeness", criterion_completeness),
    (4, "privacy", criterion_privacy),
    (5, "active attacker defence", criterion_active_attacker),
    (6, "revocation", criterion_revocation),
    (7, "flow comparison", criterion_flows),
    (8, "determinism", criterion_determinism),
)


def _run(number, acceptance_log=None):
    _n, title, fn = CRITERIA[number - 1]
    ok, detail = fn()
    assert _report(acceptance_log, number, title, ok, detail), detail


def test_1_crypto_suite(acceptance_log):
    _run(1, acceptance_log)


def test_2_bilinearity(acceptance_log):
    _run(2, acceptance_log)


def test_3_protocol_completeness(acceptance_log):
    _run(3, acceptance_log)


def test_4_privacy(acceptance_log):
    _run(4, acceptance_log)


def test_5_active_attacker(acceptance_log):
    _run(5, acceptance_log)


def test_6_revocation(acceptance_log):
    _run(6, acceptance_log)


def test_7_flow_comparison(acceptance_log):
    _run(7, acceptance_log)


def test_8_determinism(acceptance_log):
    _run(8, acceptance_log)


if __name__ == "__main__":
    failures = 0
    for number, title, fn in CRITERIA:
        ok, detail = fn()
        print(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")
        failures += not ok
    raise SystemExit(1 if failures else 0)
