"""Named, deterministic simulation scenarios.

Each scenario builds a fresh world from a config and a seed, drives the
actors over a ``SimNetwork`` and returns the transcript, auth-phase
metrics, per-run outcomes and a list of named checks.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from datetime import timedelta

from .actors import (
    DirectChallenge,
    ForwardToHn,
    HomeNetwork,
    Reject,
    ServingNetwork,
    UserEquipment,
    provision_sn,
    sn_renew_keys,
    sync_revocations,
)
from .config import Config, load_config
from .crypto import IbePrivateKey, ibe_decrypt, ibe_encrypt, ibs_sign, ibs_verify
from .errors import AuthError, ProtocolAbort, UnknownScenarioError
from .flows import TOY_SIZES, check_against_paper, compare_all, model_flow, phase_metrics
from .identity import ExpiryTime, default_sn_expiry, make_identity
from .netsim import (
    AUTH,
    MAINTENANCE,
    PROVISION,
    Metrics,
    SimNetwork,
    aic_run,
    aic_run_legacy,
    pic_observe,
)
from .wire import AIR, CLEAR, AuthFailure, decode

SCENARIOS = (
    "provision",
    "attach-cold",
    "attach-warm",
    "revoked-ue",
    "expired-sn-key",
    "day-rollover",
    "aic-attack",
    "pic-attack",
    "legacy-baseline",
    "compare-flows",
)


@dataclass
class World:
    config: Config
    net: SimNetwork
    hn: HomeNetwork
    sns: list
    ues: list

    @property
    def home_sn(self) -> ServingNetwork:
        return self.sns[0]

    @property
    def roaming_sn(self) -> ServingNetwork:
        return self.sns[-1]

    def hns(self) -> dict:
        return {self.hn.hnid: self.hn}

    @property
    def now(self) -> ExpiryTime:
        return self.net.clock


def build_world(config: Config, seed: int) -> World:
    net = SimNetwork(seed, config.sim.start_time)
    params = config.params
    hn = HomeNetwork(config.hn.hnid, net.rng, params, config.hn.mnc_len_map)
    sns = [ServingNetwork(snid, net.rng, params) for snid in config.sns]
    # UE provisioning happens on the SIM, off the network
    ues = [UserEquipment(hn.provision_ue(u.imsi, u.et_ue), net.rng, params) for u in config.ues]
    return World(config, net, hn, sns, ues)


@dataclass
class RunResult:
    ue: str
    sn: str
    path: str | None = None
    authenticated: bool = False
    keys_equal: bool = False
    reason: str | None = None
    session_id: str | None = None
    first_seq: int = 0
    last_seq: int = 0

    def to_dict(self):
        return asdict(self)


def attach_run(world: World, ue: UserEquipment, sn: ServingNetwork, ue_now=None) -> RunResult:
    """One full attach run of ``ue`` against ``sn``; ``ue_now`` skews the UE clock."""
    net, now = world.net, world.now
    res = RunResult(ue.name, sn.name, first_seq=len(net.transcript))
    with net.in_phase(AUTH):
        _attach(world, ue, sn, now, ue_now or now, res)
    res.last_seq = len(net.transcript)
    return res


def _attach(world, ue, sn, now, ue_now, res):
    net = world.net
    bcast = net.air(sn, ue, sn.broadcast(now, world.config.et_in_broadcast))
    try:
        req, pending = ue.attach(bcast, ue_now)
    except ProtocolAbort as exc:
        res.reason = exc.reason
        return
    req = net.air(ue, sn, req)
    action = sn.handle_attach(req, now)
    res.session_id = action.session_id

    if isinstance(action, Reject):
        res.path, res.reason = "warm", action.reason
        net.air(sn, ue, action.notice)
        return

    if isinstance(action, DirectChallenge):
        res.path = "warm"
        challenge = net.air(sn, ue, action.challenge)
        try:
            reply, ue_key = ue.handle_challenge(pending, challenge)
        except ProtocolAbort as exc:
            res.reason = exc.reason
            return
        ok, sn_key = sn.finish(action.session_id, net.air(ue, sn, reply))
        _settle(res, ok, ue_key, sn_key, sn, action.session_id)
        return

    assert isinstance(action, ForwardToHn)
    res.path = "cold"
    hn = world.hns().get(req.hnid)
    if hn is None:
        res.reason = "unknown-hn"
        net.air(sn, ue, AuthFailure("authentication-failed"))
        return
    fwd = net.backhaul(sn, hn, action.request)
    try:
        answer = hn.handle_auth_request(fwd, now)
    except AuthError as exc:
        failure = net.backhaul(hn, sn, AuthFailure(exc.cause))
        res.reason = exc.cause
        net.air(sn, ue, sn.handle_hn_failure(action.session_id, failure))
        return
    answer = net.backhaul(hn, sn, answer)
    challenge = net.air(sn, ue, sn.handle_hn_response(action.session_id, answer))
    try:
        reply, ue_key = ue.handle_aka_challenge(challenge)
    except ProtocolAbort as exc:
        res.reason = exc.reason
        return
    ok, sn_key = sn.finish_aka(action.session_id, net.air(ue, sn, reply))
    _settle(res, ok, ue_key, sn_key, sn, action.session_id)


def _settle(res, ok, ue_key, sn_key, sn, session_id):
    res.authenticated = ok
    res.keys_equal = ok and ue_key is not None and ue_key == sn_key
    if not ok:
        res.reason = sn.sessions[session_id].failure


def legacy_run(world: World, ue: UserEquipment, sn: ServingNetwork) -> RunResult:
    net = world.net
    res = RunResult(ue.name, sn.name, path="legacy", first_seq=len(net.transcript))
    with net.in_phase(AUTH):
        net.air(sn, ue, sn.broadcast())
        msg = net.air(ue, sn, ue.legacy_attach())
        sid, fwd = sn.handle_legacy_attach(msg)
        res.session_id = sid
        fwd = net.backhaul(sn, world.hn, fwd)
        answer = net.backhaul(world.hn, sn, world.hn.handle_legacy_attach(fwd))
        challenge = net.air(sn, ue, sn.handle_legacy_av(sid, answer))
        reply, ue_key = ue.handle_aka_challenge(challenge)
        ok, sn_key = sn.finish_aka(sid, net.air(ue, sn, reply))
        _settle(res, ok, ue_key, sn_key, sn, sid)
    res.last_seq = len(net.transcript)
    return res


def _provision_sns(world: World, sns=None):
    net = world.net
    with net.in_phase(PROVISION):
        for sn in sns if sns is not None else world.sns:
            provision_sn(sn, world.hn, world.now, send=net.backhaul)


def _renew(world: World, sn, reachable=True) -> int:
    with world.net.in_phase(MAINTENANCE):
        return sn_renew_keys(sn, world.hns() if reachable else {}, world.now,
                             world.config.sim.renewal_margin, send=world.net.backhaul)


def _sync(world: World, sns=None):
    with world.net.in_phase(MAINTENANCE):
        for sn in sns if sns is not None else world.sns:
            sync_revocations(world.hn, sn, send=world.net.backhaul)


def _next_day_at(now: ExpiryTime, hour: int, minute: int = 0) -> ExpiryTime:
    day = (now + timedelta(days=1)).value
    return ExpiryTime(day.replace(hour=hour, minute=minute, second=0))


def _same_day_at(now: ExpiryTime, hour: int, minute: int = 0) -> ExpiryTime:
    return ExpiryTime(now.value.replace(hour=hour, minute=minute, second=0))


@dataclass
class ScenarioResult:
    name: str
    seed: int
    transcript: list
    metrics: Metrics
    outcomes: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)

    def check(self, name: str, ok):
        self.checks.append((name, bool(ok)))

    def trace_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.transcript)

    def summary(self) -> dict:
        return {
            "scenario": self.name,
            "seed": self.seed,
            "metrics": self.metrics.to_dict(),
            "outcomes": self.outcomes,
            "checks": [{"name": n, "passed": ok} for n, ok in self.checks],
            "passed": self.passed,
        }


def air_cleartext_imsi_hits(transcript, imsis) -> list:
    """AIR entries (seq, kind, field) with an IMSI inside a cleartext field."""
    hits = []
    wanted = [i.encode("ascii") for i in imsis]
    for entry in transcript:
        if entry.interface != AIR:
            continue
        msg = decode(entry.raw)
        for fname, label, payload in msg.field_payloads():
            if label == CLEAR and any(w in payload for w in wanted):
                hits.append((entry.seq, msg.kind, fname))
    return hits


def _segment(world, run: RunResult):
    return world.net.transcript[run.first_seq:run.last_seq]


def _backhaul_count(world, run):
    return sum(e.interface != AIR for e in _segment(world, run))


# scenario bodies

def _provision(world, result):
    _provision_sns(world)
    hn, params = world.hn, world.config.params
    for sn in world.sns:
        et = default_sn_expiry(world.now)
        entry = sn.key_table.get(hn.hnid, {}).get(et.text)
        result.check(f"{sn.name} holds d_snid for {sn.snid}||{et}", entry is not None)
        if entry is not None:
            ct = ibe_encrypt(hn.mpk, make_identity(sn.snid, et), b"probe", world.net.rng, params)
            result.check(f"{sn.name} key decrypts to its identity",
                         ibe_decrypt(entry.d_snid, ct, params) == b"probe")
    for ue in world.ues:
        sig = ibs_sign(ue.creds.d_ue, b"probe", world.net.rng, params)
        result.check(f"{ue.name} credentials sign under mpk",
                     ibs_verify(ue.creds.mpk, ue.identity, b"probe", sig, params))
    result.outcomes["issued_sn_keys"] = {k: v.text for k, v in hn.issued_sn_keys.items()}


def _attach_cold(world, result):
    ue, sn = world.ues[0], world.home_sn
    run = attach_run(world, ue, sn)
    result.outcomes["run"] = run.to_dict()
    result.check("path is cold", run.path == "cold")
    result.check("authenticated", run.authenticated)
    result.check("UE and SN keys byte-equal", run.keys_equal)
    result.check("exactly 2 backhaul messages", _backhaul_count(world, run) == 2)
    result.check("SN kept d_snid from the HN response",
                 sn.lookup_key(world.hn.hnid, default_sn_expiry(world.now), world.now) is not None)


def _attach_warm(world, result):
    _provision_sns(world)
    ue, sn = world.ues[0], world.home_sn
    run = attach_run(world, ue, sn)
    result.outcomes["run"] = run.to_dict()
    result.check("path is warm", run.path == "warm")
    result.check("authenticated", run.authenticated)
    result.check("UE and SN keys byte-equal", run.keys_equal)
    result.check("zero backhaul messages", _backhaul_count(world, run) == 0)


def _revoked_ue(world, result):
    hn, home, roaming = world.hn, world.home_sn, world.roaming_sn
    victim, bystander = world.ues[0], world.ues[1 % len(world.ues)]
    _provision_sns(world, [home])
    hn.revoke_ue(victim.imsi, victim.creds.et_ue)
    _sync(world)

    warm = attach_run(world, victim, home)
    cold = attach_run(world, victim, roaming) if roaming is not home else None
    control = attach_run(world, bystander, home) if bystander is not victim else None
    result.check("warm path rejects revoked UE at SN", warm.path == "warm" and
                 warm.reason == "revoked" and not warm.authenticated)
    if cold is not None:
        result.check("cold path rejects revoked UE at HN", cold.path == "cold" and
                     cold.reason == "revoked" and not cold.authenticated)
    if control is not None:
        result.check("non-revoked UE still authenticates", control.authenticated)

    world.net.set_clock(_next_day_at(victim.creds.et_ue, 10))
    hn.prune_revocations(world.now)
    result.check("pruning after ET empties the revocation list", hn.revocations == [])
    _sync(world)
    _renew(world, home)
    warm_late = attach_run(world, victim, home)
    cold_late = attach_run(world, victim, roaming) if roaming is not home else None
    result.check("after pruning, warm path still rejects via expiry",
                 warm_late.path == "warm" and warm_late.reason == "expired"
                 and not warm_late.authenticated)
    if cold_late is not None:
        result.check("after pruning, cold path still rejects via expiry",
                     cold_late.path == "cold" and cold_late.reason == "expired"
                     and not cold_late.authenticated)
    result.outcomes["runs"] = [r.to_dict() for r in (warm, cold, control, warm_late, cold_late)
                               if r is not None]


def _expired_sn_key(world, result):
    ue, sn = world.ues[0], world.home_sn
    _provision_sns(world, [sn])
    start = world.now
    before = attach_run(world, ue, sn)
    world.net.set_clock(_next_day_at(start, 10))
    renewed = _renew(world, sn, reachable=False)
    result.check("HN unreachable: no key renewed", renewed == 0)
    stale = attach_run(world, ue, sn, ue_now=start)
    after = attach_run(world, ue, sn)
    result.check("same-day run is warm", before.path == "warm" and before.authenticated)
    result.check("expired d_snid is never used: stale-ET attach goes to the HN",
                 stale.path == "cold")
    result.check("HN refuses the expired SN identity", stale.reason == "expired-sn-key"
                 and not stale.authenticated)
    result.check("next-day attach falls back to the cold path and succeeds",
                 after.path == "cold" and after.authenticated and after.keys_equal)
    result.check("fallback costs one SN-HN round trip", _backhaul_count(world, after) == 2)
    result.outcomes["runs"] = [r.to_dict() for r in (before, stale, after)]


def _day_rollover(world, result):
    sn = world.home_sn
    ue, other = world.ues[0], world.ues[1 % len(world.ues)]
    _provision_sns(world, [sn])
    world.net.set_clock(_same_day_at(world.now, 12))
    noon = attach_run(world, ue, sn)
    world.net.set_clock(_same_day_at(world.now, 23, 30))
    renewed = _renew(world, sn)
    world.net.set_clock(_same_day_at(world.now, 23, 45))
    late = attach_run(world, other, sn)
    world.net.set_clock(_next_day_at(world.now, 0, 30))
    next_day = attach_run(world, ue, sn)
    result.check("renewal inside the margin fetched one key", renewed == 1)
    result.check("noon run warm", noon.path == "warm" and noon.authenticated)
    result.check("23:45 run still uses today's key", late.path == "warm" and late.authenticated)
    result.check("after rollover the run is warm with zero backhaul",
                 next_day.path == "warm" and next_day.authenticated
                 and _backhaul_count(world, next_day) == 0)
    result.outcomes["runs"] = [r.to_dict() for r in (noon, late, next_day)]


def _aic_attack(world, result):
    net, hn = world.net, world.hn
    target, fake_snid = world.ues[0], world.home_sn.snid
    first = len(net.transcript)
    with net.in_phase(AUTH):
        plain = aic_run(net, fake_snid, target)
    plain_entries = net.transcript[first:]
    result.check("AIC cannot complete authentication", not plain.auth_completed)
    result.check("AIC learns no IMSI", plain.learned_imsi is None)
    result.check("UE aborts at the SN signature check", plain.ue_abort == "bad-signature")
    result.check("UE sent no UeAuthResponse",
                 not any(e.decoded.kind == "UeAuthResponse" for e in plain_entries))

    # compromised SN: a real, unexpired d_snid in the attacker's hands
    resp = hn.issue_sn_key(fake_snid, world.now)
    leaked = IbePrivateKey(make_identity(fake_snid, resp.et), resp.d_snid, resp.et)
    with net.in_phase(AUTH):
        compromised = aic_run(net, fake_snid, target, granted_key=leaked)
    result.check("compromised key before ET: IMSI exposed",
                 compromised.learned_imsi == target.imsi)
    result.check("compromised key before ET: authentication completes",
                 compromised.auth_completed)

    net.set_clock(resp.et + timedelta(seconds=1))
    with net.in_phase(AUTH):
        expired = aic_run(net, fake_snid, target, granted_key=leaked)
    result.check("compromised key after ET: no IMSI", expired.learned_imsi is None)
    result.check("compromised key after ET: authentication fails", not expired.auth_completed)
    result.outcomes["aic"] = plain.to_dict()
    result.outcomes["aic_compromised_key"] = compromised.to_dict()
    result.outcomes["aic_compromised_key_after_expiry"] = expired.to_dict()


def _pic_attack(world, result):
    _provision_sns(world, [world.home_sn])
    runs = [attach_run(world, world.ues[0], world.roaming_sn)]
    runs += [attach_run(world, ue, world.home_sn) for ue in world.ues]
    outcome = pic_observe(world.net.transcript, [u.imsi for u in world.ues])
    result.check("all runs authenticated", all(r.authenticated for r in runs))
    result.check("PIC learns no IMSI", outcome.learned_imsi is None)
    result.check("PIC learns hnid", outcome.learned_hnid == world.hn.hnid)
    result.outcomes["pic"] = outcome.to_dict()
    result.outcomes["runs"] = [r.to_dict() for r in runs]


def _legacy_baseline(world, result):
    ue = world.ues[0]
    run = legacy_run(world, ue, world.home_sn)
    pic = pic_observe(world.net.transcript, [u.imsi for u in world.ues])
    with world.net.in_phase(AUTH):
        aic = aic_run_legacy(world.net, world.home_sn.snid, ue)
    result.check("legacy run authenticates", run.authenticated)
    result.check("PIC reads the IMSI", pic.learned_imsi == ue.imsi)
    result.check("AIC obtains the IMSI", aic.learned_imsi == ue.imsi)
    result.outcomes.update(run=run.to_dict(), pic=pic.to_dict(), aic=aic.to_dict())


def _compare_flows(world, result):
    table = compare_all(world.config.sizes)
    report = check_against_paper(table)
    for r in report:
        result.check(f"expectation {r.name}", r.passed)
    result.outcomes["table"] = {k: asdict(v) for k, v in table.items()}
    result.outcomes["expectations"] = [asdict(r) for r in report]

    # the ibe model, at toy sizes, must match the real actors byte for byte
    ue, sn = world.ues[0], world.home_sn
    sizes = replace(TOY_SIZES, imsi=len(ue.imsi), hnid=len(world.hn.hnid), snid=len(sn.snid))
    agree = {}
    for phase in ("first", "repeat"):
        run = attach_run(world, ue, sn)
        measured = Metrics.from_transcript(_segment(world, run))
        model = phase_metrics(model_flow("ibe", phase, sizes))
        agree[phase] = {
            "path": run.path,
            "measured": measured.to_dict(),
            "model": asdict(model),
        }
        result.check(f"ibe {phase}: run authenticated", run.authenticated)
        result.check(f"ibe {phase}: model matches netsim",
                     (measured.air_msgs, measured.air_bytes, measured.ue_sn_round_trips,
                      measured.backhaul_msgs, measured.sn_hn_round_trips)
                     == (model.air_msgs, model.air_bytes, model.air_rtt,
                         model.backhaul_msgs, model.backhaul_contacts))
    result.outcomes["ibe_model_vs_netsim"] = agree


_BODIES = {
    "provision": _provision,
    "attach-cold": _attach_cold,
    "attach-warm": _attach_warm,
    "revoked-ue": _revoked_ue,
    "expired-sn-key": _expired_sn_key,
    "day-rollover": _day_rollover,
    "aic-attack": _aic_attack,
    "pic-attack": _pic_attack,
    "legacy-baseline": _legacy_baseline,
    "compare-flows": _compare_flows,
}


def run_scenario(name: str, config: Config | None = None, seed: int | None = None) -> ScenarioResult:
    if name not in _BODIES:
        raise UnknownScenarioError(f"unknown scenario {name!r}; valid: {', '.join(SCENARIOS)}")
    config = config or load_config()
    seed = config.sim.seed if seed is None else seed
    world = build_world(config, seed)
    result = ScenarioResult(name, seed, world.net.transcript, world.net.metrics)
    _BODIES[name](world, result)

    imsis = [u.imsi for u in world.ues]
    if name != "legacy-baseline":
        hits = air_cleartext_imsi_hits(world.net.transcript, imsis)
        result.check("no IMSI in any cleartext AIR field", not hits)
        result.outcomes.setdefault("pic", pic_observe(world.net.transcript, imsis).to_dict())
    result.check("metrics match the transcript",
                 Metrics.from_transcript(world.net.transcript) == world.net.metrics)
    return result
