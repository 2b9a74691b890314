"""Message-flow models of the IMSI-concealment solution families.

Each model lists the messages of one authentication run, with a size
estimate and a sensitivity label per field.  Metrics, including the boolean
columns, are computed from those flows; nothing is hard-coded per
solution.  Sizes are nominal estimates and configurable.

Comparison criteria that are judgment calls (provisioning effort, existing gear,
maturity, PKI effort, key revocation) are not modelled.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from typing import Callable

CLEAR = "cleartext"
ENCRYPTED = "encrypted-content"
AIR = "AIR"
BACKHAUL = "BACKHAUL"

SOLUTIONS = ("legacy", "pseudonym", "certV1", "certV2", "certV3", "rootkey", "ibe")
PROPOSED = SOLUTIONS[1:]
CERT_VARIANTS = ("certV1", "certV2", "certV3")
PHASES = ("first", "repeat")


@dataclass(frozen=True)
class Sizes:
    """Byte sizes used by the flow models.

    ``ciphertext`` is the public-key ciphertext expansion added to the
    plaintext; ``signature`` a whole signature.
    """

    certificate: int = 512
    signature: int = 64
    ciphertext: int = 96
    pseudonym: int = 8
    public_key: int = 32
    private_key: int = 32
    imsi: int = 15
    hnid: int = 5
    snid: int = 5
    expiry: int = 16
    rand: int = 16
    autn: int = 16
    res: int = 16
    av: int = 80
    mac: int = 16


# sizes of the toy implementation, for checking the ibe model against netsim
TOY_SIZES = Sizes(signature=16, ciphertext=40, public_key=8, private_key=8)


@dataclass(frozen=True)
class FlowField:
    name: str
    size: int
    label: str = CLEAR
    carries: frozenset = frozenset()


@dataclass(frozen=True)
class FlowMessage:
    kind: str
    sender: str
    receiver: str
    interface: str
    fields: tuple
    responds_to: str | None = None

    @property
    def size(self) -> int:
        # same framing as the wire codec: type byte + 2-byte length per field
        return 1 + sum(2 + f.size for f in self.fields)


def _f(name, size, label=CLEAR, *carries):
    return FlowField(name, size, label, frozenset(carries))


def _msg(kind, sender, receiver, *flds, responds_to=None):
    iface = BACKHAUL if "HN" in (sender, receiver) else AIR
    return FlowMessage(kind, sender, receiver, iface, tuple(flds), responds_to)


def _aka_tail(s: Sizes, extra=()):
    return [
        _msg("AkaChallenge", "SN", "UE", _f("rand", s.rand), _f("autn", s.autn, CLEAR, "sn_proof"),
             *extra, responds_to="Attach"),
        _msg("AkaResponse", "UE", "SN", _f("res", s.res, CLEAR, "ue_proof")),
    ]


def _ibs_tail(s: Sizes, responds_to: str):
    return [
        _msg("SnAuthChallenge", "SN", "UE", _f("sig", s.signature, CLEAR, "sn_proof"),
             _f("enc_rand2", s.ciphertext + s.rand, ENCRYPTED), responds_to=responds_to),
        _msg("UeAuthResponse", "UE", "SN", _f("sig", s.signature, CLEAR, "ue_proof")),
    ]


def _broadcast(s: Sizes):
    return _msg("Broadcast", "SN", "UE", _f("snid", s.snid))


def _legacy(s, phase):
    return [
        _broadcast(s),
        _msg("Attach", "UE", "SN", _f("imsi", s.imsi, CLEAR, "imsi", "hnid")),
        _msg("AvRequest", "SN", "HN", _f("imsi", s.imsi, CLEAR, "imsi", "hnid")),
        _msg("AvResponse", "HN", "SN", _f("imsi", s.imsi, CLEAR, "imsi"), _f("av", s.av),
             responds_to="AvRequest"),
        *_aka_tail(s),
    ]


def _pseudonym(s, phase):
    # the HN resolves the pseudonym and piggybacks a fresh one on the AV
    new_pseudonym = _f("new_pseudonym", s.pseudonym + s.mac, ENCRYPTED)
    return [
        _broadcast(s),
        _msg("Attach", "UE", "SN", _f("hnid", s.hnid, CLEAR, "hnid"),
             _f("pseudonym", s.pseudonym, CLEAR, "pseudonym")),
        _msg("ResolveRequest", "SN", "HN", _f("pseudonym", s.pseudonym, CLEAR, "pseudonym")),
        _msg("ResolveResponse", "HN", "SN", _f("imsi", s.imsi, CLEAR, "imsi"), _f("av", s.av),
             new_pseudonym, responds_to="ResolveRequest"),
        *_aka_tail(s, extra=(new_pseudonym,)),
    ]


def _encrypted_identity(s, *, with_hnid: bool, with_cert: bool):
    inner = s.imsi + s.rand + (s.certificate if with_cert else 0)
    flds = [_f("hnid", s.hnid, CLEAR, "hnid")] if with_hnid else []
    flds.append(_f("ct", s.ciphertext + inner, ENCRYPTED, "imsi"))
    return flds


def _cert_v1(s, phase):
    # global root: the SN sends its chain (SN and intermediate certificates)
    return [
        _broadcast(s),
        _msg("CertRequest", "UE", "SN", _f("nonce", s.rand)),
        _msg("CertResponse", "SN", "UE", _f("e_sn", s.public_key),
             _f("chain", 2 * s.certificate, CLEAR, "sn_cert"), responds_to="CertRequest"),
        _msg("Attach", "UE", "SN", *_encrypted_identity(s, with_hnid=False, with_cert=True)),
        *_ibs_tail(s, "Attach"),
    ]


def _cert_v2(s, phase):
    msgs = [
        _broadcast(s),
        _msg("CertQuery", "UE", "SN", _f("hnid", s.hnid, CLEAR, "hnid"),
             _f("e_hnid", s.public_key, CLEAR, "hnid")),
    ]
    if phase == "first":
        # the SN does not yet hold a certificate signed by this HN
        msgs += [
            _msg("CertFetch", "SN", "HN", _f("snid", s.snid), _f("e_sn", s.public_key)),
            _msg("CertIssue", "HN", "SN", _f("cert", s.certificate), responds_to="CertFetch"),
        ]
    msgs += [
        _msg("CertResponse", "SN", "UE", _f("e_sn", s.public_key),
             _f("cert", s.certificate, CLEAR, "sn_cert"), responds_to="CertQuery"),
        _msg("Attach", "UE", "SN", *_encrypted_identity(s, with_hnid=False, with_cert=True)),
        *_ibs_tail(s, "Attach"),
    ]
    return msgs


def _cert_v3(s, phase):
    # SN certificates are pre-provisioned in the UE
    return [
        _broadcast(s),
        _msg("Attach", "UE", "SN", *_encrypted_identity(s, with_hnid=True, with_cert=True)),
        *_ibs_tail(s, "Attach"),
    ]


def _rootkey(s, phase):
    ct = _f("ct", s.ciphertext + s.imsi, ENCRYPTED, "imsi")
    return [
        _broadcast(s),
        _msg("Attach", "UE", "SN", _f("hnid", s.hnid, CLEAR, "hnid"), ct),
        _msg("AvRequest", "SN", "HN", _f("snid", s.snid), ct),
        _msg("AvResponse", "HN", "SN", _f("av", s.av), _f("imsi", s.imsi, CLEAR, "imsi"),
             responds_to="AvRequest"),
        *_aka_tail(s),
    ]


def _ibe(s, phase):
    """Mirror of the actors module: cold path first, warm path on repeat."""
    plaintext = s.imsi + 2 + s.expiry + s.rand
    ct = _f("ct", s.ciphertext + plaintext, ENCRYPTED, "imsi")
    attach = _msg("Attach", "UE", "SN", _f("hnid", s.hnid, CLEAR, "hnid"), ct,
                  _f("et", s.expiry))
    if phase == "repeat":
        return [_broadcast(s), attach, *_ibs_tail(s, "Attach")]
    return [
        _broadcast(s),
        attach,
        _msg("HnAuthRequest", "SN", "HN", _f("snid", s.snid), ct, _f("et", s.expiry)),
        _msg("HnAuthResponse", "HN", "SN", _f("av", s.av), _f("imsi", s.imsi, CLEAR, "imsi"),
             _f("d_snid", s.private_key), _f("et", s.expiry), _f("mpk", s.public_key),
             responds_to="HnAuthRequest"),
        *_aka_tail(s),
    ]


MODELS: dict[str, Callable] = {
    "legacy": _legacy,
    "pseudonym": _pseudonym,
    "certV1": _cert_v1,
    "certV2": _cert_v2,
    "certV3": _cert_v3,
    "rootkey": _rootkey,
    "ibe": _ibe,
}


def check_consistency(flow) -> None:
    """Every response must answer an earlier request sent the other way."""
    seen = []
    for m in flow:
        if m.responds_to is not None:
            ok = any(r.kind == m.responds_to and r.sender == m.receiver for r in seen)
            if not ok:
                raise ValueError(f"{m.kind} answers {m.responds_to}, which was never sent")
        seen.append(m)


def model_flow(solution: str, phase: str = "first", sizes: Sizes | None = None) -> list:
    if solution not in MODELS:
        raise ValueError(f"unknown solution {solution!r}; expected one of {SOLUTIONS}")
    if phase not in PHASES:
        raise ValueError(f"phase must be 'first' or 'repeat', got {phase!r}")
    flow = MODELS[solution](sizes or Sizes(), phase)
    check_consistency(flow)
    return flow


@dataclass(frozen=True)
class PhaseMetrics:
    air_msgs: int
    air_bytes: int
    air_rtt: int
    backhaul_msgs: int
    backhaul_contacts: int


def phase_metrics(flow) -> PhaseMetrics:
    air = [m for m in flow if m.interface == AIR]
    back = [m for m in flow if m.interface == BACKHAUL]
    return PhaseMetrics(
        air_msgs=len(air),
        air_bytes=sum(m.size for m in air),
        air_rtt=sum(m.responds_to is not None for m in air),
        backhaul_msgs=len(back),
        backhaul_contacts=sum(m.responds_to is not None for m in back),
    )


def _air_clear_carries(flow) -> set:
    out = set()
    for m in flow:
        if m.interface == AIR:
            for f in m.fields:
                if f.label == CLEAR:
                    out |= f.carries
    return out


def _mutual_auth_without_hn(flow) -> bool:
    sn_proof = any(m.sender == "SN" and m.receiver == "UE" and
                   any("sn_proof" in f.carries for f in m.fields) for m in flow)
    ue_proof = any(m.sender == "UE" and m.receiver == "SN" and
                   any("ue_proof" in f.carries for f in m.fields) for m in flow)
    no_hn = not any(m.interface == BACKHAUL for m in flow)
    return sn_proof and ue_proof and no_hn


@dataclass(frozen=True)
class FlowMetrics:
    solution: str
    air_rtt: int
    air_rtt_repeat: int
    air_bytes: int
    air_bytes_repeat: int
    backhaul_contacts_first: int
    backhaul_contacts_repeat: int
    hnid_concealed: bool
    imsi_concealed: bool
    desync_possible: bool
    mutual_auth_without_hn: bool


def flow_metrics(solution: str, sizes: Sizes | None = None) -> FlowMetrics:
    first = model_flow(solution, "first", sizes)
    repeat = model_flow(solution, "repeat", sizes)
    pm1, pm2 = phase_metrics(first), phase_metrics(repeat)
    exposed = _air_clear_carries(first) | _air_clear_carries(repeat)
    every_field = {c for flow in (first, repeat) for m in flow for f in m.fields for c in f.carries}
    return FlowMetrics(
        solution=solution,
        air_rtt=pm1.air_rtt,
        air_rtt_repeat=pm2.air_rtt,
        air_bytes=pm1.air_bytes,
        air_bytes_repeat=pm2.air_bytes,
        backhaul_contacts_first=pm1.backhaul_contacts,
        backhaul_contacts_repeat=pm2.backhaul_contacts,
        hnid_concealed=not exposed & {"hnid", "imsi"},
        imsi_concealed="imsi" not in exposed,
        desync_possible="pseudonym" in every_field,
        mutual_auth_without_hn=_mutual_auth_without_hn(repeat),
    )


def compare_all(sizes: Sizes | None = None) -> dict[str, FlowMetrics]:
    return {name: flow_metrics(name, sizes) for name in SOLUTIONS}


@dataclass(frozen=True)
class Expectation:
    name: str
    claim: str
    check: Callable[[dict], bool]


@dataclass(frozen=True)
class ExpectationResult:
    name: str
    claim: str
    passed: bool


def _bytes_ordered(t, attr):
    cert_min = min(getattr(t[c], attr) for c in CERT_VARIANTS)
    return (getattr(t["pseudonym"], attr) < getattr(t["rootkey"], attr)
            <= getattr(t["ibe"], attr) < cert_min)


EXPECTATIONS = (
    Expectation("rootkey-contacts-hn-every-run",
                "root-key repeat run contacts the HN once, IBE repeat run not at all",
                lambda t: t["rootkey"].backhaul_contacts_repeat == 1
                and t["ibe"].backhaul_contacts_repeat == 0),
    Expectation("certV1-extra-round-trip",
                "certificate variant 1 needs more UE-SN round trips than root-key",
                lambda t: t["certV1"].air_rtt > t["rootkey"].air_rtt),
    Expectation("hnid-concealed-only-certV1",
                "only certificate variant 1 hides hnid",
                lambda t: {s for s in PROPOSED if t[s].hnid_concealed} == {"certV1"}),
    Expectation("mutual-auth-without-hn",
                "IBE and certificate variants authenticate mutually without the HN; "
                "root-key and pseudonym do not",
                lambda t: {s for s in PROPOSED if t[s].mutual_auth_without_hn}
                == {"ibe", *CERT_VARIANTS}),
    Expectation("desync-only-pseudonym",
                "only the pseudonym solution depends on synchronised UE-HN state",
                lambda t: {s for s in SOLUTIONS if t[s].desync_possible} == {"pseudonym"}),
    Expectation("air-bytes-order-first",
                "first run: pseudonym < root-key <= IBE < every certificate variant",
                lambda t: _bytes_ordered(t, "air_bytes")),
    Expectation("air-bytes-order-repeat",
                "repeat run: pseudonym < root-key <= IBE < every certificate variant",
                lambda t: _bytes_ordered(t, "air_bytes_repeat")),
    Expectation("imsi-concealed",
                "every proposed solution hides the IMSI on the air; legacy does not",
                lambda t: all(t[s].imsi_concealed for s in PROPOSED)
                and not t["legacy"].imsi_concealed),
)


def check_against_paper(table: dict, expectations=EXPECTATIONS) -> list[ExpectationResult]:
    return [ExpectationResult(e.name, e.claim, bool(e.check(table))) for e in expectations]


def table_json(table: dict, results=None) -> str:
    obj = {"solutions": {k: asdict(v) for k, v in table.items()}}
    if results is not None:
        obj["expectations"] = [asdict(r) for r in results]
    return json.dumps(obj, sort_keys=True, indent=2)


def table_text(table: dict) -> str:
    cols = [f.name for f in fields(FlowMetrics)]
    rows = [[str(getattr(m, c)) for c in cols] for m in table.values()]
    widths = [max(len(c), *(len(r[i]) for r in rows)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)


__all__ = ["Sizes", "TOY_SIZES", "FlowField", "FlowMessage", "FlowMetrics", "model_flow",
           "compare_all", "check_against_paper", "EXPECTATIONS"]
