from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from imsi_ibe.flows import (
    EXPECTATIONS,
    SOLUTIONS,
    TOY_SIZES,
    FlowMessage,
    Sizes,
    check_against_paper,
    check_consistency,
    compare_all,
    flow_metrics,
    model_flow,
    phase_metrics,
    table_json,
    table_text,
)


def test_default_expectations_all_pass():
    report = check_against_paper(compare_all())
    assert len(report) == len(EXPECTATIONS) == 8
    assert all(r.passed for r in report), [r.name for r in report if not r.passed]


def test_key_rows():
    t = compare_all()
    assert t["rootkey"].backhaul_contacts_repeat == 1
    assert t["ibe"].backhaul_contacts_repeat == 0
    assert t["ibe"].backhaul_contacts_first == 1
    assert t["certV1"].air_rtt > t["rootkey"].air_rtt
    assert t["ibe"].mutual_auth_without_hn and not t["rootkey"].mutual_auth_without_hn
    assert min(SOLUTIONS[1:], key=lambda s: t[s].air_bytes) == "pseudonym"


def test_byte_counts_regression():
    t = compare_all()
    assert {s: t[s].air_bytes for s in ("pseudonym", "rootkey", "ibe", "certV3", "certV2", "certV1")} \
        == {"pseudonym": 108, "rootkey": 185, "ibe": 237, "certV3": 905, "certV2": 1489, "certV1": 1978}
    assert t["ibe"].air_bytes_repeat == 429


def test_negative_control_inflated_pseudonym():
    report = {r.name: r.passed for r in check_against_paper(compare_all(Sizes(pseudonym=400)))}
    assert not report["air-bytes-order-first"]
    assert report["rootkey-contacts-hn-every-run"]


def test_empty_expectations():
    assert check_against_paper(compare_all(), expectations=()) == []


@given(st.integers(1, 200), st.integers(1, 200), st.integers(1, 200))
def test_structure_independent_of_sizes(sig, ct, cert):
    t = compare_all(Sizes(signature=sig, ciphertext=ct, certificate=cert))
    for s in SOLUTIONS:
        assert t[s].air_rtt == compare_all()[s].air_rtt
        assert t[s].imsi_concealed == compare_all()[s].imsi_concealed


def test_all_models_consistent():
    for s in SOLUTIONS:
        for phase in ("first", "repeat"):
            flow = model_flow(s, phase, TOY_SIZES)
            check_consistency(flow)
            assert phase_metrics(flow).air_msgs >= 2


def test_consistency_detects_orphan_response():
    orphan = FlowMessage("Resp", "SN", "UE", "AIR", (), responds_to="Req")
    with pytest.raises(ValueError):
        check_consistency([orphan])


def test_unknown_solution_and_phase():
    with pytest.raises(ValueError):
        model_flow("quantum")
    with pytest.raises(ValueError):
        model_flow("ibe", "third")


def test_table_outputs():
    t = compare_all()
    assert "pseudonym" in table_text(t)
    assert '"expectations"' in table_json(t, check_against_paper(t))
    assert flow_metrics("legacy").imsi_concealed is False
    assert replace(t["ibe"], air_rtt=9).air_rtt == 9
